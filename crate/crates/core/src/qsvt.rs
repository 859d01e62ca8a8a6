//! Quantum singular value transformation of Hermitian block-encodings.
//!
//! Phase factors are solved in the `Wx` convention,
//! `U_Φ(x) = e^{iφ₀Z} ∏ W(x) e^{iφ_jZ}` with `W(x) = [[x, i√(1−x²)], [i√(1−x²), x]]`,
//! targeting `Re ⟨0|U_Φ|0⟩`. Circuits use the reflection convention, where the
//! block-encoding itself plays the role of `R(x) = [[x, √(1−x²)], [√(1−x²), −x]]`
//! and each phase is a projector-controlled rotation `e^{iψ(2Π−I)}`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::{DMatrix, DVector, Matrix2};
use serde::{Deserialize, Serialize};

use crate::block_encoding::BlockEncoding;
use crate::dense::{self, CMatrix};
use crate::error::{Error, Result};
use crate::poly::{chebyshev_nodes, Parity, PolynomialSpec, DEFAULT_GRID};
use crate::statevector::{dense_block, Charge, Circuit, Control, Gate, Layout, Register, C64};

pub const DEFAULT_DEGREE_CAP: usize = 60;
pub const DEFAULT_TOL: f64 = 1e-9;
/// Points on which solved phases are re-checked against the target.
pub const CHECK_POINTS: usize = 201;
/// Blocks wider than this skip the Hermiticity pre-check.
const HERMITIAN_CHECK_WIDTH: usize = 12;

type M2 = Matrix2<C64>;

fn zphase(phi: f64) -> M2 {
    M2::new(C64::from_polar(1.0, phi), C64::default(), C64::default(), C64::from_polar(1.0, -phi))
}

fn wx(x: f64) -> M2 {
    let s = C64::new(0.0, (1.0 - x * x).max(0.0).sqrt());
    M2::new(C64::new(x, 0.0), s, s, C64::new(x, 0.0))
}

fn reflection(x: f64) -> M2 {
    let s = C64::new((1.0 - x * x).max(0.0).sqrt(), 0.0);
    M2::new(C64::new(x, 0.0), s, s, C64::new(-x, 0.0))
}

fn product(phases: &[f64], signal: M2) -> M2 {
    let mut m = zphase(phases[0]);
    for &p in &phases[1..] {
        m = m * signal * zphase(p);
    }
    m
}

/// `⟨0|U_Φ(x)|0⟩` in the `Wx` convention.
pub fn qsp_wx(phases: &[f64], x: f64) -> C64 {
    product(phases, wx(x))[(0, 0)]
}

/// `⟨0|U_Ψ(x)|0⟩` in the reflection convention.
pub fn qsp_reflection(phases: &[f64], x: f64) -> C64 {
    product(phases, reflection(x))[(0, 0)]
}

/// Reflection-convention phases with the same `⟨0|·|0⟩` entry, using
/// `W(x) = i e^{i3π/4 Z} R(x) e^{i3π/4 Z}`.
pub fn wx_to_reflection(phi: &[f64]) -> Vec<f64> {
    let d = phi.len() - 1;
    if d == 0 {
        return phi.to_vec();
    }
    let end = 3.0 * FRAC_PI_4 + d as f64 * FRAC_PI_4;
    phi.iter()
        .enumerate()
        .map(|(j, &p)| if j == 0 || j == d { p + end } else { p + 3.0 * FRAC_PI_2 })
        .collect()
}

pub fn reflection_to_wx(psi: &[f64]) -> Vec<f64> {
    let d = psi.len() - 1;
    if d == 0 {
        return psi.to_vec();
    }
    let end = 3.0 * FRAC_PI_4 + d as f64 * FRAC_PI_4;
    psi.iter()
        .enumerate()
        .map(|(j, &p)| if j == 0 || j == d { p - end } else { p - 3.0 * FRAC_PI_2 })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    Reflection,
}

/// Phase factors for a real polynomial of definite parity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseFactors {
    pub convention: Convention,
    pub angles: Vec<f64>,
    pub target: String,
    pub degree: usize,
    pub parity: Parity,
    /// Max deviation from the target over the check grid.
    pub residual: f64,
    /// Tolerance the solver was asked to meet.
    pub tol: f64,
}

impl PhaseFactors {
    pub fn wx_angles(&self) -> Vec<f64> {
        reflection_to_wx(&self.angles)
    }

    /// `Re ⟨0|U_Ψ(x)|0⟩`
    pub fn eval(&self, x: f64) -> f64 {
        qsp_reflection(&self.angles, x).re
    }

    pub fn is_symmetric(&self) -> bool {
        let d = self.angles.len() - 1;
        (0..=d).all(|j| self.angles[j] == self.angles[d - j])
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    pub tol: f64,
    pub degree_cap: usize,
    pub max_newton: usize,
    pub max_lm: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, degree_cap: DEFAULT_DEGREE_CAP, max_newton: 60, max_lm: 2000 }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

fn check_points() -> Vec<f64> {
    let mut pts = chebyshev_nodes(CHECK_POINTS - 2);
    pts.push(1.0);
    pts.push(-1.0);
    pts
}

fn grid_residual(phases_wx: &[f64], f: &dyn Fn(f64) -> f64) -> f64 {
    check_points().into_iter().map(|x| (qsp_wx(phases_wx, x).re - f(x)).abs()).fold(0.0, f64::max)
}

fn expand(reduced: &[f64], d: usize) -> Vec<f64> {
    (0..=d).map(|j| reduced[j.min(d - j)]).collect()
}

/// Residuals at the nodes and their Jacobian with respect to the reduced
/// (symmetric) phases.
fn residual_and_jacobian(reduced: &[f64], d: usize, nodes: &[f64], targets: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
    let m = reduced.len();
    let phi = expand(reduced, d);
    let mut r = DVector::zeros(nodes.len());
    let mut jac = DMatrix::zeros(nodes.len(), m);
    for (i, &x) in nodes.iter().enumerate() {
        let w = wx(x);
        // prefix[j] = e^{iφ₀Z} W … W e^{iφ_jZ}, suffix[j] = W e^{iφ_{j+1}Z} … W e^{iφ_dZ}
        let mut prefix = Vec::with_capacity(d + 1);
        let mut acc = zphase(phi[0]);
        prefix.push(acc);
        for &p in &phi[1..] {
            acc = acc * w * zphase(p);
            prefix.push(acc);
        }
        let mut suffix = vec![M2::identity(); d + 1];
        for j in (0..d).rev() {
            suffix[j] = w * zphase(phi[j + 1]) * suffix[j + 1];
        }
        r[i] = acc[(0, 0)].re - targets[i];
        for j in 0..=d {
            let a = prefix[j];
            let b = suffix[j];
            // (A iZ B)₀₀
            let dj = C64::new(0.0, 1.0) * (a[(0, 0)] * b[(0, 0)] - a[(0, 1)] * b[(1, 0)]);
            jac[(i, j.min(d - j))] += dj.re;
        }
    }
    (r, jac)
}

fn newton(reduced: &mut Vec<f64>, d: usize, nodes: &[f64], targets: &[f64], iters: usize) -> f64 {
    let mut best = f64::INFINITY;
    for _ in 0..iters {
        let (r, jac) = residual_and_jacobian(reduced, d, nodes, targets);
        let norm = r.amax();
        best = best.min(norm);
        if norm < 1e-15 {
            break;
        }
        let Some(step) = jac.lu().solve(&(-&r)) else { break };
        if !step.iter().all(|v| v.is_finite()) {
            break;
        }
        for (p, s) in reduced.iter_mut().zip(step.iter()) {
            *p += s;
        }
    }
    let (r, _) = residual_and_jacobian(reduced, d, nodes, targets);
    r.amax()
}

/// Levenberg–Marquardt on the squared node residual.
fn levenberg_marquardt(reduced: &mut Vec<f64>, d: usize, nodes: &[f64], targets: &[f64], iters: usize) -> f64 {
    let mut lambda = 1e-3;
    let (mut r, mut jac) = residual_and_jacobian(reduced, d, nodes, targets);
    let mut cost = r.norm_squared();
    for _ in 0..iters {
        if r.amax() < 1e-15 {
            break;
        }
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let g = &jt * &r;
        let mut a = jtj.clone();
        for k in 0..a.nrows() {
            a[(k, k)] += lambda * (1.0 + jtj[(k, k)]);
        }
        let Some(step) = a.cholesky().map(|c| c.solve(&(-&g))) else {
            lambda *= 10.0;
            continue;
        };
        let trial: Vec<f64> = reduced.iter().zip(step.iter()).map(|(p, s)| p + s).collect();
        let (rt, jt2) = residual_and_jacobian(&trial, d, nodes, targets);
        let ct = rt.norm_squared();
        if ct < cost {
            *reduced = trial;
            r = rt;
            jac = jt2;
            cost = ct;
            lambda = (lambda / 3.0).max(1e-12);
        } else {
            lambda *= 4.0;
            if lambda > 1e12 {
                break;
            }
        }
    }
    r.amax()
}

/// Symmetric `Wx` phases of length `d + 1` with `Re⟨0|U_Φ|0⟩ = f` for a real
/// polynomial `f` of parity `d mod 2` and degree at most `d`.
fn solve_wx(f: &dyn Fn(f64) -> f64, d: usize, opts: &SolverOptions) -> Result<(Vec<f64>, f64)> {
    if d == 0 {
        let c = f(0.0).clamp(-1.0, 1.0);
        let phi = vec![c.acos()];
        let res = grid_residual(&phi, f);
        return Ok((phi, res));
    }
    let m = d / 2 + 1;
    let nodes: Vec<f64> = (1..=m).map(|j| ((2 * j - 1) as f64 * PI / (4 * m) as f64).cos()).collect();
    let targets: Vec<f64> = nodes.iter().map(|&x| f(x)).collect();

    let mut reduced = vec![0.0; m];
    reduced[0] = FRAC_PI_4;
    newton(&mut reduced, d, &nodes, &targets, opts.max_newton);
    let mut phi = expand(&reduced, d);
    let mut res = grid_residual(&phi, f);
    if !(res <= opts.tol) {
        let mut alt = vec![0.0; m];
        alt[0] = FRAC_PI_4;
        levenberg_marquardt(&mut alt, d, &nodes, &targets, opts.max_lm);
        newton(&mut alt, d, &nodes, &targets, opts.max_newton);
        let phi_alt = expand(&alt, d);
        let res_alt = grid_residual(&phi_alt, f);
        if res_alt < res || !res.is_finite() {
            phi = phi_alt;
            res = res_alt;
        }
    }
    if !(res <= opts.tol) {
        return Err(Error::PhaseNonConvergence { best_residual: res, tol: opts.tol });
    }
    Ok((phi, res))
}

fn closed_form(p: &PolynomialSpec, d: usize) -> Option<Vec<f64>> {
    if p.degree != d || d == 0 {
        return None;
    }
    let lead = p.chebyshev[d];
    let rest_zero = p.chebyshev[..d].iter().all(|z| *z == C64::default());
    if !rest_zero || lead.im != 0.0 {
        return None;
    }
    let mut phi = vec![0.0; d + 1];
    if lead.re == 1.0 {
        Some(phi)
    } else if lead.re == -1.0 {
        phi[0] = FRAC_PI_2;
        phi[d] = FRAC_PI_2;
        Some(phi)
    } else {
        None
    }
}

/// Phases realizing `p` with exactly `d` uses of the signal operator.
pub fn compute_phase_factors_with_degree(p: &PolynomialSpec, d: usize, opts: &SolverOptions) -> Result<PhaseFactors> {
    if !p.is_real() {
        return Err(Error::InvalidConfig(format!("phase factors need a real polynomial, `{}` is complex", p.label)));
    }
    if d > opts.degree_cap {
        return Err(Error::DegreeCap { degree: d, cap: opts.degree_cap });
    }
    if p.degree > d {
        return Err(Error::InvalidConfig(format!("degree {} exceeds the requested length {d}", p.degree)));
    }
    let parity = if d % 2 == 0 { Parity::Even } else { Parity::Odd };
    if !p.is_zero() && p.parity != parity {
        return Err(Error::IndefiniteParity);
    }
    let sup = p.grid_sup(DEFAULT_GRID);
    if sup > 1.0 + 1e-12 {
        return Err(Error::SupNormViolation { sup, bound: 1.0 });
    }
    let f = |x: f64| p.eval(x).re;
    let (phi, residual) = match closed_form(p, d) {
        Some(phi) => {
            let r = grid_residual(&phi, &f);
            (phi, r)
        }
        None => solve_wx(&f, d, opts)?,
    };
    Ok(PhaseFactors { convention: Convention::Reflection, angles: wx_to_reflection(&phi), target: p.label.clone(), degree: d, parity, residual, tol: opts.tol })
}

pub fn compute_phase_factors(p: &PolynomialSpec, tol: f64) -> Result<PhaseFactors> {
    compute_phase_factors_with_degree(p, p.degree, &SolverOptions::with_tol(tol))
}

/// One real definite-parity component of an LCU-combined transform.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Piece {
    pub name: String,
    /// Basis value of the LCU register selecting this piece.
    pub slot: usize,
    /// `1` or `i`.
    pub weight: C64,
    /// Phases of the piece scaled by `2^L`.
    pub phases: PhaseFactors,
}

/// A circuit whose block (ancillas leading, all zero) encodes `polynomial(A/α)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QsvtCircuit {
    pub circuit: Circuit,
    pub ancillas: usize,
    pub polynomial: PolynomialSpec,
    pub error_bound: f64,
    /// Uses of the input block-encoding or its adjoint.
    pub degree: usize,
    pub lcu_register: Option<String>,
    pub signal_register: String,
    pub pieces: Vec<Piece>,
}

impl QsvtCircuit {
    pub fn block_encoding(&self) -> Result<BlockEncoding> {
        BlockEncoding::new(self.circuit.clone(), 1.0, self.ancillas, self.error_bound)
    }

    pub fn extract_block(&self) -> Result<CMatrix> {
        self.block_encoding()?.extract_block()
    }
}

fn fresh_name(layout: &Layout, base: &str) -> String {
    let taken = |n: &str| layout.registers.iter().any(|r| r.name == n);
    if !taken(base) {
        return base.to_string();
    }
    (1..).map(|i| format!("{base}{i}")).find(|n| !taken(n)).expect("unbounded")
}

fn check_hermitian(be: &BlockEncoding) -> Result<()> {
    if be.width() <= HERMITIAN_CHECK_WIDTH {
        let block = dense_block(&be.circuit, be.ancillas, HERMITIAN_CHECK_WIDTH)?;
        let r = dense::hermiticity_residual(&block);
        if r > 1e-9 + 2.0 * be.epsilon {
            return Err(Error::NonHermitian(r));
        }
    }
    Ok(())
}

fn lemma_bound(be: &BlockEncoding, d: usize, delta: f64) -> f64 {
    let dim = (1usize << be.system_width) as f64;
    4.0 * d as f64 * (be.epsilon / be.alpha).sqrt() + dim * delta
}

/// Projectors of a (possibly rectangular) block: the qubits that must read
/// zero on the input side and on the output side of the unitary.
#[derive(Clone, Debug)]
pub struct Projectors {
    pub input: Vec<usize>,
    pub output: Vec<usize>,
}

impl Projectors {
    pub fn leading(ancillas: usize) -> Self {
        Self { input: (0..ancillas).collect(), output: (0..ancillas).collect() }
    }
}

/// Interleave `u`, `u†`, … with multiplexed projector phases. Each piece has
/// either `d` or `d − 1` uses; in the second case the last use is skipped on
/// its slots, which requires the parity bit `parity_bit` to select them.
fn build_interleaved(
    u: &Circuit,
    proj: &Projectors,
    pieces: &[Piece],
    lcu_width: usize,
    parity_bit: Option<usize>,
    d: usize,
) -> Result<(Circuit, String, Option<String>)> {
    let be_layout = u.layout();
    let be_layout = if be_layout.registers.is_empty() { Layout::anonymous(u.width()) } else { be_layout };
    let sig_name = fresh_name(&be_layout, "sig");
    let lcu_name = fresh_name(&be_layout, "lcu");
    let mut regs = Vec::new();
    if lcu_width > 0 {
        regs.push(Register::new(lcu_name.clone(), lcu_width));
    }
    regs.push(Register::new(sig_name.clone(), 1));
    regs.extend(be_layout.registers.iter().cloned());
    let layout = Layout::new(regs)?;
    let off = lcu_width + 1;
    let sig = lcu_width;
    let map: Vec<usize> = (off..off + u.width()).collect();
    let proj_in: Vec<Control> = proj.input.iter().map(|&q| Control::zero(off + q)).collect();
    let proj_out: Vec<Control> = proj.output.iter().map(|&q| Control::zero(off + q)).collect();
    let slot_controls = |slot: usize| -> Vec<Control> {
        (0..lcu_width).map(|q| if (slot >> (lcu_width - 1 - q)) & 1 == 1 { Control::one(q) } else { Control::zero(q) }).collect()
    };

    let mut c = Circuit::with_layout(&layout);
    for q in 0..lcu_width {
        c.push(Gate::h(q))?;
    }
    c.push(Gate::h(sig))?;
    for t in 0..=d {
        // Angle of each piece at time slot t.
        let angles: Vec<f64> = pieces
            .iter()
            .map(|p| {
                let len = p.phases.angles.len() - 1;
                if t <= len { p.phases.angles[len - t] } else { 0.0 }
            })
            .collect();
        let uniform = pieces.len() == 1 << lcu_width && angles.iter().all(|a| *a == angles[0]);
        let any = angles.iter().any(|a| *a != 0.0);
        if any {
            let proj = if t % 2 == 0 { &proj_in } else { &proj_out };
            c.push(Gate::x(sig).with_controls(proj.iter().copied()))?;
            if uniform {
                c.push(Gate::rz(2.0 * angles[0], sig))?;
            } else {
                for (p, a) in pieces.iter().zip(&angles) {
                    if *a != 0.0 {
                        c.push(Gate::rz(2.0 * a, sig).with_controls(slot_controls(p.slot)))?;
                    }
                }
            }
            c.push(Gate::x(sig).with_controls(proj.iter().copied()))?;
        }
        if t < d {
            let controls: Vec<Control> = match parity_bit {
                Some(q) if t + 1 == d => vec![Control::one(q)],
                _ => Vec::new(),
            };
            if t % 2 == 0 {
                c.push_block("BE", u, &map, Charge::Inherit, &controls)?;
            } else {
                c.push_block_adjoint("BE", u, &map, Charge::Inherit, &controls)?;
            }
        }
    }
    c.push(Gate::h(sig))?;
    for p in pieces {
        if p.weight.im != 0.0 {
            let phase = p.weight.arg();
            if lcu_width == 0 {
                c.push(Gate::global_phase(phase))?;
            } else {
                c.push(Gate::global_phase(phase).with_controls(slot_controls(p.slot)))?;
            }
        }
    }
    for q in 0..lcu_width {
        c.push(Gate::h(q))?;
    }
    Ok((c, sig_name, if lcu_width > 0 { Some(lcu_name) } else { None }))
}

/// QSVT of a Hermitian block-encoding by a real definite-parity polynomial.
pub fn assemble_qsvt(be: &BlockEncoding, phases: &PhaseFactors) -> Result<QsvtCircuit> {
    check_hermitian(be)?;
    assemble_qsvt_unchecked(be, phases)
}

fn assemble_qsvt_unchecked(be: &BlockEncoding, phases: &PhaseFactors) -> Result<QsvtCircuit> {
    let d = phases.angles.len() - 1;
    let piece = Piece { name: "p".into(), slot: 0, weight: C64::new(1.0, 0.0), phases: phases.clone() };
    let (circuit, sig, _) = build_interleaved(&be.circuit, &Projectors::leading(be.ancillas), std::slice::from_ref(&piece), 0, None, d)?;
    let polynomial = reconstructed(phases);
    Ok(QsvtCircuit {
        circuit,
        ancillas: be.ancillas + 1,
        polynomial,
        error_bound: lemma_bound(be, d, phases.tol.max(phases.residual)),
        degree: d,
        lcu_register: None,
        signal_register: sig,
        pieces: vec![piece],
    })
}

/// Singular value transformation of the block `Π_out · u · Π_in` by a real
/// polynomial of definite parity. The signal qubit leads the returned circuit;
/// the transformed block sits where the signal reads zero, the input side
/// projected by `proj.input` and the output side by `proj.output` (odd `d`).
pub fn assemble_qsvt_projected(u: &Circuit, proj: &Projectors, phases: &PhaseFactors) -> Result<QsvtCircuit> {
    let d = phases.angles.len() - 1;
    let piece = Piece { name: "p".into(), slot: 0, weight: C64::new(1.0, 0.0), phases: phases.clone() };
    let (circuit, sig, _) = build_interleaved(u, proj, std::slice::from_ref(&piece), 0, None, d)?;
    Ok(QsvtCircuit {
        circuit,
        ancillas: 1,
        polynomial: reconstructed(phases),
        error_bound: (1usize << u.width()) as f64 * phases.tol.max(phases.residual),
        degree: d,
        lcu_register: None,
        signal_register: sig,
        pieces: vec![piece],
    })
}

fn reconstructed(phases: &PhaseFactors) -> PolynomialSpec {
    let d = phases.degree;
    // Interpolate the realized polynomial at d + 1 Chebyshev nodes.
    crate::poly::chebyshev_fit(|x| phases.eval(x), d, 101)
        .map(|p| p.with_label(phases.target.clone()))
        .unwrap_or_else(|_| PolynomialSpec::zero())
}

/// Block-encoding of `p(A/α)` for a complex polynomial of arbitrary parity.
/// `p` is split into up to four real definite-parity pieces whose scaled
/// transforms are combined with a uniform linear combination of unitaries.
/// Each piece, multiplied by `2^L` for `L` LCU qubits, must stay within `[-1, 1]`.
pub fn lcu_poly_block(be: &BlockEncoding, p: &PolynomialSpec, opts: &SolverOptions) -> Result<QsvtCircuit> {
    check_hermitian(be)?;
    lcu_poly_block_unchecked(be, p, opts)
}

pub(crate) fn lcu_poly_block_unchecked(be: &BlockEncoding, p: &PolynomialSpec, opts: &SolverOptions) -> Result<QsvtCircuit> {
    let re = p.real_part();
    let im = p.imag_part();
    let mut raw: Vec<(String, PolynomialSpec, usize, C64)> = Vec::new();
    for (name, part, w) in [("re", &re, C64::new(1.0, 0.0)), ("im", &im, C64::new(0.0, 1.0))] {
        let (e, o) = crate::poly::parity_split(part);
        if !e.is_zero() {
            raw.push((format!("{name}-even"), e, 0, w));
        }
        if !o.is_zero() {
            raw.push((format!("{name}-odd"), o, 1, w));
        }
    }
    if raw.is_empty() {
        return zero_block(be, p);
    }
    let lcu_width = match raw.len() {
        1 => 0,
        2 => 1,
        _ => 2,
    };
    let d = raw.iter().map(|r| r.1.degree).max().unwrap_or(0);
    let long = d % 2;
    let mixed = raw.iter().any(|r| r.2 != long);
    let scale = (1usize << lcu_width) as f64;

    // Slot assignment: with mixed parity the leading LCU bit is the parity
    // (1 = parity of d); the remaining bit, if any, tells Re from Im.
    let slot_of = |parity: usize, weight: C64| -> usize {
        let reim = usize::from(weight.im != 0.0);
        match (lcu_width, mixed) {
            (0, _) => 0,
            (1, true) => usize::from(parity == long),
            (1, false) => reim,
            (_, true) => (usize::from(parity == long) << 1) | reim,
            (_, false) => reim,
        }
    };
    let mut pieces = Vec::new();
    let mut used = vec![false; 1 << lcu_width];
    let solve = |name: String, poly: &PolynomialSpec, parity: usize, weight: C64, slot: usize| -> Result<Piece> {
        let len = if parity == long { d } else { d - 1 };
        let scaled = poly.scale(C64::new(scale, 0.0));
        let sup = scaled.grid_sup(DEFAULT_GRID);
        if sup > 1.0 + 1e-12 {
            return Err(Error::SupNormViolation { sup: sup / scale, bound: 1.0 / scale });
        }
        let phases = compute_phase_factors_with_degree(&scaled, len, opts)?;
        Ok(Piece { name, slot, weight, phases })
    };
    for (name, poly, parity, w) in &raw {
        let slot = slot_of(*parity, *w);
        used[slot] = true;
        pieces.push(solve(name.clone(), poly, *parity, *w, slot)?);
    }
    // Unused slots of a two-qubit register get a transform equal to zero.
    for slot in 0..used.len() {
        if !used[slot] {
            let parity = if mixed && (slot >> 1) & 1 == 0 { 1 - long } else { long };
            pieces.push(solve("zero".into(), &PolynomialSpec::zero(), parity, C64::new(1.0, 0.0), slot)?);
        }
    }
    pieces.sort_by_key(|p| p.slot);
    let parity_bit = if mixed { Some(0) } else { None };
    let (circuit, sig, lcu) = build_interleaved(&be.circuit, &Projectors::leading(be.ancillas), &pieces, lcu_width, parity_bit, d)?;
    let delta = pieces.iter().map(|p| p.phases.tol.max(p.phases.residual)).fold(0.0, f64::max);
    Ok(QsvtCircuit {
        circuit,
        ancillas: be.ancillas + 1 + lcu_width,
        polynomial: p.clone(),
        error_bound: lemma_bound(be, d, delta),
        degree: d,
        lcu_register: lcu,
        signal_register: sig,
        pieces,
    })
}

fn zero_block(be: &BlockEncoding, p: &PolynomialSpec) -> Result<QsvtCircuit> {
    let (mut circuit, sig, _) = build_interleaved(&be.circuit, &Projectors::leading(be.ancillas), &[], 0, None, 0)?;
    let s = circuit.layout().qubit(&sig)?;
    circuit.push(Gate::x(s))?;
    Ok(QsvtCircuit {
        circuit,
        ancillas: be.ancillas + 1,
        polynomial: p.clone(),
        error_bound: 0.0,
        degree: 0,
        lcu_register: None,
        signal_register: sig,
        pieces: Vec::new(),
    })
}

/// [`lcu_poly_block`] with solver tolerance `delta`. Any `p` with `|p| ≤ 1/4`
/// is admissible; larger polynomials are accepted when every scaled piece
/// still fits in `[-1, 1]`.
pub fn complex_poly_block(be: &BlockEncoding, p: &PolynomialSpec, delta: f64) -> Result<QsvtCircuit> {
    lcu_poly_block(be, p, &SolverOptions::with_tol(delta))
}

/// `V p(Λ) V†` for Hermitian `A = V Λ V†`.
pub fn reference_matrix_function(a: &CMatrix, p: &PolynomialSpec) -> Result<CMatrix> {
    let (vals, vecs) = dense::hermitian_eigen(a, 1e-9)?;
    let diag = CMatrix::from_diagonal(&DVector::from_iterator(vals.len(), vals.iter().map(|&v| p.eval(v))));
    Ok(&vecs * diag * vecs.adjoint())
}
