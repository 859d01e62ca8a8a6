//! Nonlinear transformation of complex amplitudes.
//!
//! Given `U|0⟩ = Σ c_k |k⟩` with `c_k = x_k + i y_k`, the combiner circuit
//! prepares, after post-selection, a state proportional to
//! `Σ_k (P(x_k) + Q(y_k)) |k⟩`.
//!
//! Register layout of the full circuit, most significant first:
//! `[comb, lcu(2), sig, be, ad(n), da(n), b]`. The five leading qubits are
//! flags that must read zero; `da` and `b` are returned to zero by the
//! uncomputation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::amplify::{self, GoodSubspace, Grover, PROBABILITY_FLOOR};
use crate::block_encoding::{build_gtilde, build_w, AmplitudePart, ADDRESS, BE_ANCILLA, DATA, FLAG};
use crate::error::{Error, Result};
use crate::oracle::{rotation_cascade, synthesize_state_prep, AmplitudeVector};
use crate::poly::PolynomialSpec;
use crate::qsvt::{lcu_poly_block_unchecked, QsvtCircuit, SolverOptions};
use crate::statevector::{Charge, Circuit, Control, Gate, Layout, Program, QuantumState, QueryCount, Register, C64};

/// Oracle uses of one combiner invocation beyond the `4(d_P + d_Q)` spent in
/// the transforms: `W`, `W′` and their inverses each use `U` once and `U†` once.
pub const C0: u64 = 4;
pub const COMBINER: &str = "comb";
pub const LCU: &str = "lcu";
pub const SIGNAL: &str = "sig";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    #[default]
    Full,
    /// Restrict the address superposition to the first `N₁` entries.
    Partial(usize),
    /// Real polynomial on the real parts only, three flag qubits.
    RealOnly,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Amplification {
    #[default]
    None,
    MeasureUntilSuccess,
    AmplitudeAmplify,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NtcaConfig {
    pub input: AmplitudeVector,
    pub p: PolynomialSpec,
    #[serde(default = "PolynomialSpec::zero")]
    pub q: PolynomialSpec,
    #[serde(default)]
    pub gamma: Option<f64>,
    pub epsilon: f64,
    #[serde(default)]
    pub variant: Variant,
    #[serde(default)]
    pub amplification: Amplification,
    #[serde(default)]
    pub seed: u64,
}

impl NtcaConfig {
    pub fn new(input: AmplitudeVector, p: PolynomialSpec, q: PolynomialSpec, epsilon: f64) -> Self {
        Self { input, p, q, gamma: None, epsilon, variant: Variant::Full, amplification: Amplification::None, seed: 0 }
    }

    pub fn with_variant(mut self, v: Variant) -> Self {
        self.variant = v;
        self
    }

    pub fn with_amplification(mut self, a: Amplification) -> Self {
        self.amplification = a;
        self
    }

    pub fn with_gamma(mut self, g: f64) -> Self {
        self.gamma = Some(g);
        self
    }
}

/// The smallest admissible `γ`: the grid sup of each approximant plus its
/// certified distance to the target, so that it bounds both.
pub fn default_gamma(p: &PolynomialSpec, q: &PolynomialSpec) -> f64 {
    (p.gamma + p.certified_error).max(q.gamma + q.certified_error)
}

pub(crate) fn resolve_gamma(p: &PolynomialSpec, q: &PolynomialSpec, given: Option<f64>) -> Result<f64> {
    let sup = p.gamma.max(q.gamma);
    match given {
        Some(g) if g + 1e-12 < sup || !g.is_finite() => Err(Error::GammaTooSmall { gamma: g, sup }),
        Some(g) => Ok(g),
        None => Ok(default_gamma(p, q)),
    }
}

/// A combiner-style circuit together with what is needed to read it out.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NtcaCircuit {
    pub circuit: Circuit,
    /// Qubits that must read zero: the flags followed by `da` and `b`.
    pub flags: Vec<usize>,
    pub work: Vec<usize>,
    pub address: Vec<usize>,
    /// Factor between the post-selected amplitude on `|k⟩` and `P′(x_k) + Q′(y_k)`.
    pub prefactor: f64,
    pub n_eff: usize,
    pub gamma: f64,
    pub p_block: QsvtCircuit,
    pub q_block: Option<QsvtCircuit>,
}

impl NtcaCircuit {
    pub fn good_subspace(&self) -> GoodSubspace {
        let all: Vec<usize> = self.flags.iter().chain(&self.work).copied().collect();
        GoodSubspace::zeros(self.circuit.width(), &all)
    }

    pub fn queries(&self) -> QueryCount {
        self.circuit.queries()
    }

    /// Simulate from `|0…0⟩` and return the good amplitudes on the address register.
    pub fn good_amplitudes(&self) -> Vec<C64> {
        let w = self.circuit.width();
        let mut amps = vec![C64::default(); 1 << w];
        amps[0] = C64::new(1.0, 0.0);
        Program::compile(&self.circuit).run(&mut amps);
        self.extract_address(&amps)
    }

    pub fn extract_address(&self, amps: &[C64]) -> Vec<C64> {
        address_amplitudes(amps, self.circuit.width(), &self.address)
    }
}

/// Amplitudes on `address` with every other qubit of a `width`-qubit state at zero.
pub fn address_amplitudes(amps: &[C64], width: usize, address: &[usize]) -> Vec<C64> {
    let n = address.len();
    (0..1usize << n).map(|k| amps[address_index(width, address, k)]).collect()
}

/// Basis index with `address` holding `k` and every other qubit at zero.
pub fn address_index(width: usize, address: &[usize], k: usize) -> usize {
    let n = address.len();
    address.iter().enumerate().fold(0usize, |acc, (j, &q)| {
        if (k >> (n - 1 - j)) & 1 == 1 {
            acc | (1 << (width - 1 - q))
        } else {
            acc
        }
    })
}

fn address_prep(n: usize, n_eff: usize) -> Result<Circuit> {
    let mut c = Circuit::new(n);
    if n_eff.is_power_of_two() {
        let m = n_eff.trailing_zeros() as usize;
        for q in n - m..n {
            c.push(Gate::h(q))?;
        }
    } else {
        let amp = 1.0 / (n_eff as f64).sqrt();
        let v = AmplitudeVector::new((0..1usize << n).map(|k| C64::new(if k < n_eff { amp } else { 0.0 }, 0.0)).collect())?;
        c = rotation_cascade(&v);
    }
    Ok(c)
}

fn check_n_eff(u: &Circuit, n_eff: usize) -> Result<()> {
    if n_eff == 0 || n_eff > 1usize << u.width() {
        return Err(Error::InvalidConfig(format!("address range {n_eff} does not fit {} qubits", u.width())));
    }
    Ok(())
}

/// `𝒫`: a block-encoding of `P′(−(G+G†)/2)/(4γ)` built on `G̃` (or `G̃′`).
pub fn build_p_unitary(u: &Circuit, p: &PolynomialSpec, gamma: f64, delta: f64, part: AmplitudePart) -> Result<QsvtCircuit> {
    let be = build_gtilde(u, part)?;
    let scaled = p.scale(C64::new(1.0 / (4.0 * gamma), 0.0));
    lcu_poly_block_unchecked(&be, &scaled, &SolverOptions::with_tol(delta))
}

/// Map a transform's registers onto the shared `[lcu, sig, be, ad, da, b]`
/// block of the combiner layout, right-aligning its LCU qubits.
fn transform_map(block: &QsvtCircuit, layout: &Layout, lcu_width: usize) -> Result<Vec<usize>> {
    let lcu = layout.range(LCU)?;
    let mut map = Vec::new();
    let own_lcu = block.ancillas - 2;
    if own_lcu > lcu_width {
        return Err(Error::RegisterMismatch(format!("transform needs {own_lcu} LCU qubits, layout has {lcu_width}")));
    }
    map.extend(lcu.end - own_lcu..lcu.end);
    map.push(layout.qubit(SIGNAL)?);
    map.push(layout.qubit(BE_ANCILLA)?);
    map.extend(layout.range(ADDRESS)?);
    map.extend(layout.range(DATA)?);
    map.push(layout.qubit(FLAG)?);
    Ok(map)
}

fn combiner_layout(n: usize, with_combiner: bool, lcu_width: usize) -> Result<Layout> {
    let mut regs = Vec::new();
    if with_combiner {
        regs.push(Register::new(COMBINER, 1));
    }
    regs.extend([
        Register::new(LCU, lcu_width),
        Register::new(SIGNAL, 1),
        Register::new(BE_ANCILLA, 1),
        Register::new(ADDRESS, n),
        Register::new(DATA, n),
        Register::new(FLAG, 1),
    ]);
    Layout::new(regs)
}

fn flag_and_work(layout: &Layout, with_combiner: bool) -> Result<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    let mut flags = Vec::new();
    if with_combiner {
        flags.push(layout.qubit(COMBINER)?);
    }
    flags.extend(layout.range(LCU)?);
    flags.push(layout.qubit(SIGNAL)?);
    flags.push(layout.qubit(BE_ANCILLA)?);
    let mut work: Vec<usize> = layout.qubits(DATA)?;
    work.push(layout.qubit(FLAG)?);
    Ok((flags, work, layout.qubits(ADDRESS)?))
}

/// The combiner circuit over an arbitrary state-preparation oracle `u`,
/// with the address superposition over the first `n_eff` basis states.
pub fn build_fig3_from_oracle(
    u: &Circuit,
    n_eff: usize,
    p: &PolynomialSpec,
    q: &PolynomialSpec,
    gamma: f64,
    delta: f64,
) -> Result<NtcaCircuit> {
    check_n_eff(u, n_eff)?;
    let n = u.width();
    let layout = combiner_layout(n, true, 2)?;
    let comb = layout.qubit(COMBINER)?;
    let wq: Vec<usize> = layout.range(ADDRESS)?.chain(layout.range(DATA)?).chain([layout.qubit(FLAG)?]).collect();
    let ad = layout.qubits(ADDRESS)?;

    let w = build_w(u, AmplitudePart::Real)?;
    let w2 = build_w(u, AmplitudePart::Imag)?;
    let pb = build_p_unitary(u, p, gamma, delta, AmplitudePart::Real)?;
    let qb = build_p_unitary(u, q, gamma, delta, AmplitudePart::Imag)?;
    let zero = [Control::zero(comb)];
    let one = [Control::one(comb)];

    let mut c = Circuit::with_layout(&layout);
    c.push(Gate::h(comb))?;
    c.append_mapped(&address_prep(n, n_eff)?, &ad)?;
    c.push_block("W", &w, &wq, Charge::Inherit, &zero)?;
    c.push_block("W'", &w2, &wq, Charge::Inherit, &one)?;
    c.push_block("P", &pb.circuit, &transform_map(&pb, &layout, 2)?, Charge::Inherit, &zero)?;
    c.push_block("Q", &qb.circuit, &transform_map(&qb, &layout, 2)?, Charge::Inherit, &one)?;
    c.push_block_adjoint("W", &w, &wq, Charge::Inherit, &zero)?;
    c.push_block_adjoint("W'", &w2, &wq, Charge::Inherit, &one)?;
    c.push(Gate::h(comb))?;

    let (flags, work, address) = flag_and_work(&layout, true)?;
    Ok(NtcaCircuit {
        circuit: c,
        flags,
        work,
        address,
        prefactor: 1.0 / (8.0 * gamma * (n_eff as f64).sqrt()),
        n_eff,
        gamma,
        p_block: pb,
        q_block: Some(qb),
    })
}

/// The three-flag real-only circuit: `W`, `𝒫` for `P′/(2γ)`, `W†`.
pub fn build_real_from_oracle(u: &Circuit, n_eff: usize, p: &PolynomialSpec, gamma: f64, delta: f64) -> Result<NtcaCircuit> {
    check_n_eff(u, n_eff)?;
    if !p.is_real() {
        return Err(Error::InvalidConfig("the real-only variant needs a real polynomial".into()));
    }
    let n = u.width();
    let layout = combiner_layout(n, false, 1)?;
    let wq: Vec<usize> = layout.range(ADDRESS)?.chain(layout.range(DATA)?).chain([layout.qubit(FLAG)?]).collect();
    let ad = layout.qubits(ADDRESS)?;
    let w = build_w(u, AmplitudePart::Real)?;
    let be = build_gtilde(u, AmplitudePart::Real)?;
    let scaled = p.scale(C64::new(1.0 / (2.0 * gamma), 0.0));
    let pb = lcu_poly_block_unchecked(&be, &scaled, &SolverOptions::with_tol(delta))?;

    let mut c = Circuit::with_layout(&layout);
    c.append_mapped(&address_prep(n, n_eff)?, &ad)?;
    c.push_block("W", &w, &wq, Charge::Inherit, &[])?;
    c.push_block("P", &pb.circuit, &transform_map(&pb, &layout, 1)?, Charge::Inherit, &[])?;
    c.push_block_adjoint("W", &w, &wq, Charge::Inherit, &[])?;

    let (flags, work, address) = flag_and_work(&layout, false)?;
    Ok(NtcaCircuit {
        circuit: c,
        flags,
        work,
        address,
        prefactor: 1.0 / (2.0 * gamma * (n_eff as f64).sqrt()),
        n_eff,
        gamma,
        p_block: pb,
        q_block: None,
    })
}

/// The full combiner circuit for classical input `c`.
pub fn build_fig3_circuit(c: &AmplitudeVector, p: &PolynomialSpec, q: &PolynomialSpec, gamma: f64) -> Result<Circuit> {
    let delta = 1e-10;
    Ok(build_fig3_from_oracle(&synthesize_state_prep(c), c.len(), p, q, gamma, delta)?.circuit)
}

/// Block value realized by a transform at eigenvalue `x`, from its phases.
pub fn realized_value(block: &QsvtCircuit, x: f64) -> C64 {
    let l = block.lcu_register.as_ref().map(|_| block.ancillas - 2).unwrap_or(0);
    if block.pieces.is_empty() {
        return C64::default();
    }
    let scale = (1usize << l) as f64;
    block.pieces.iter().map(|pc| pc.weight * pc.phases.eval(x)).sum::<C64>() / scale
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct PartLedger {
    /// `sup |P − P′|` as certified by the approximant.
    pub approximation: f64,
    /// `4γ` times the realized block error bound.
    pub qsvt_bound: f64,
    /// `max_k |P′(x_k) − 4γ P″(x_k)|` from the realized phases.
    pub qsvt_measured: f64,
    pub total_bound: f64,
}

/// Per-point error budget of one run, term by term.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ErrorLedger {
    pub n: usize,
    pub epsilon: f64,
    pub budget_approximation: f64,
    pub budget_qsvt: f64,
    pub budget_part: f64,
    pub budget_total: f64,
    pub p: PartLedger,
    pub q: PartLedger,
    pub combined_bound: f64,
    /// `max_k |b_k − P′(x_k) − Q′(y_k)|` plus both approximation terms.
    pub combined_measured: f64,
    pub within_budget: bool,
}

impl ErrorLedger {
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let mut check = |name: &str, val: f64, budget: f64| {
            if !(val <= budget) {
                v.push(format!("{name}: {val:e} > {budget:e}"));
            }
        };
        for (tag, part) in [("P", &self.p), ("Q", &self.q)] {
            check(&format!("{tag} approximation"), part.approximation, self.budget_approximation);
            check(&format!("{tag} qsvt"), part.qsvt_bound, self.budget_qsvt);
            check(&format!("{tag} qsvt measured"), part.qsvt_measured, self.budget_qsvt);
            check(&format!("{tag} part"), part.total_bound, self.budget_part);
        }
        check("combined bound", self.combined_bound, self.budget_total);
        check("combined measured", self.combined_measured, self.budget_total);
        v
    }
}

fn part_ledger(block: &QsvtCircuit, poly: &PolynomialSpec, scale: f64, points: &[f64]) -> PartLedger {
    let l = block.lcu_register.as_ref().map(|_| block.ancillas - 2).unwrap_or(0);
    let residual: f64 = block.pieces.iter().map(|pc| pc.phases.residual).sum::<f64>() / (1usize << l) as f64;
    let qsvt_bound = scale * residual;
    let qsvt_measured = points.iter().map(|&x| (poly.eval(x) - realized_value(block, x) * scale).norm()).fold(0.0, f64::max);
    PartLedger { approximation: poly.certified_error, qsvt_bound, qsvt_measured, total_bound: poly.certified_error + qsvt_bound }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NtcaResult {
    pub variant: Variant,
    pub amplification: Amplification,
    /// Normalized post-selected state on the address register.
    pub output_state: QuantumState,
    /// Rescaled amplitudes `b_k`, comparable with `P(x_k) + Q(y_k)`.
    pub output_amplitudes: Vec<C64>,
    pub expected_amplitudes: Vec<C64>,
    pub success_probability: f64,
    pub predicted_success_probability: f64,
    pub amplification_rounds: f64,
    pub grover_iterations: usize,
    pub amplified_success_probability: f64,
    pub queries_per_invocation: QueryCount,
    /// Total controlled-`U`/`U†` uses including repetition or amplification.
    pub queries_controlled_u: u64,
    pub expected_queries: f64,
    pub fidelity_vs_target: f64,
    pub per_point_error_bound: f64,
    pub per_point_errors: Vec<f64>,
    pub max_point_error: f64,
    pub gamma: f64,
    pub degree_p: usize,
    pub degree_q: usize,
    pub flag_qubits: usize,
    pub global_phase: f64,
    pub ledger: ErrorLedger,
}

/// Options for [`run_on_oracle`].
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub epsilon: f64,
    pub gamma: Option<f64>,
    pub variant: Variant,
    pub amplification: Amplification,
    pub seed: u64,
    /// Simulate the Grover iterate when amplifying.
    pub simulate_amplification: bool,
}

impl RunOptions {
    pub fn new(epsilon: f64) -> Self {
        Self { epsilon, gamma: None, variant: Variant::Full, amplification: Amplification::None, seed: 0, simulate_amplification: true }
    }
}

pub(crate) fn check_budget(p: &PolynomialSpec, q: &PolynomialSpec, epsilon: f64, n: usize) -> Result<()> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidConfig(format!("epsilon must be positive, got {epsilon}")));
    }
    let budget = epsilon / (4.0 * n as f64);
    for (name, poly) in [("P", p), ("Q", q)] {
        if poly.certified_error > budget {
            return Err(Error::BudgetViolated(format!(
                "{name} certified error {:e} exceeds eps/(4N) = {budget:e}",
                poly.certified_error
            )));
        }
    }
    Ok(())
}

/// Run the transformation on oracle `u` whose prepared amplitudes are `values`
/// (used for the classical reference and the ledger).
pub fn run_on_oracle(u: &Circuit, values: &[C64], p: &PolynomialSpec, q: &PolynomialSpec, opts: &RunOptions) -> Result<NtcaResult> {
    let dim = 1usize << u.width();
    let (n_eff, real_only) = match opts.variant {
        Variant::Full => (values.len(), false),
        Variant::Partial(n1) => {
            if n1 == 0 || n1 > values.len() {
                return Err(Error::InvalidConfig(format!("N1 = {n1} outside 1..={}", values.len())));
            }
            (n1, false)
        }
        Variant::RealOnly => (values.len(), true),
    };
    if values.len() > dim {
        return Err(Error::WidthMismatch { expected: dim, got: values.len() });
    }
    let zero_q = PolynomialSpec::zero();
    let q = if real_only { &zero_q } else { q };
    check_budget(p, q, opts.epsilon, n_eff)?;
    let gamma = resolve_gamma(p, q, opts.gamma)?;
    if gamma <= 0.0 {
        return Err(Error::Unamplifiable { probability: 0.0, floor: PROBABILITY_FLOOR });
    }
    let delta = opts.epsilon / (16.0 * gamma * n_eff as f64);
    let nc = if real_only {
        build_real_from_oracle(u, n_eff, p, gamma, delta)?
    } else {
        build_fig3_from_oracle(u, n_eff, p, q, gamma, delta)?
    };
    finish(&nc, values, p, q, opts, real_only)
}

fn finish(nc: &NtcaCircuit, values: &[C64], p: &PolynomialSpec, q: &PolynomialSpec, opts: &RunOptions, real_only: bool) -> Result<NtcaResult> {
    let n_eff = nc.n_eff;
    let gamma = nc.gamma;
    let good = nc.good_subspace();
    let w = nc.circuit.width();
    let program = Program::compile(&nc.circuit);
    let mut amps = vec![C64::default(); 1 << w];
    amps[0] = C64::new(1.0, 0.0);
    program.run(&mut amps);
    let success_probability = good.probability(&amps);
    let addr = nc.extract_address(&amps);

    let expected: Vec<C64> = values[..n_eff].iter().map(|c| p.eval(c.re) + q.eval(c.im)).collect();
    let predicted: f64 = expected.iter().map(|v| v.norm_sqr()).sum::<f64>() * nc.prefactor * nc.prefactor;
    if !(success_probability >= PROBABILITY_FLOOR) {
        return Err(Error::Unamplifiable { probability: success_probability, floor: PROBABILITY_FLOOR });
    }

    let mut b: Vec<C64> = addr[..n_eff].iter().map(|a| a / nc.prefactor).collect();
    let kmax = (0..n_eff).max_by(|&i, &j| expected[i].norm().total_cmp(&expected[j].norm())).unwrap_or(0);
    let global_phase = if expected[kmax].norm() > 0.0 && b[kmax].norm() > 0.0 { (expected[kmax] * b[kmax].conj()).arg() } else { 0.0 };
    let rot = C64::from_polar(1.0, global_phase);
    for v in b.iter_mut() {
        *v *= rot;
    }
    let per_point_errors: Vec<f64> = b.iter().zip(&expected).map(|(x, y)| (x - y).norm()).collect();
    let max_point_error = per_point_errors.iter().copied().fold(0.0, f64::max);

    let n_addr = nc.address.len();
    let out_layout = Layout::new(vec![Register::new(ADDRESS, n_addr)])?;
    let output_state = QuantumState::normalized(out_layout, addr.iter().map(|a| a * rot).collect())?;
    let target_norm: f64 = expected.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let overlap: C64 = expected.iter().zip(output_state.amplitudes()).map(|(t, o)| t.conj() * o).sum();
    let fidelity_vs_target = if target_norm > 0.0 { overlap.norm_sqr() / (target_norm * target_norm) } else { 0.0 };

    // Ledger
    let n = n_eff as f64;
    let xs: Vec<f64> = values[..n_eff].iter().map(|c| c.re).collect();
    let ys: Vec<f64> = values[..n_eff].iter().map(|c| c.im).collect();
    let p_scale = if real_only { 2.0 * gamma } else { 4.0 * gamma };
    let pl = part_ledger(&nc.p_block, p, p_scale, &xs);
    let ql = match &nc.q_block {
        Some(qb) => part_ledger(qb, q, 4.0 * gamma, &ys),
        None => PartLedger::default(),
    };
    let mut ledger = ErrorLedger {
        n: n_eff,
        epsilon: opts.epsilon,
        budget_approximation: opts.epsilon / (4.0 * n),
        budget_qsvt: opts.epsilon / (4.0 * n),
        budget_part: opts.epsilon / (2.0 * n),
        budget_total: opts.epsilon / n,
        combined_bound: pl.total_bound + ql.total_bound,
        combined_measured: max_point_error + p.certified_error + q.certified_error,
        p: pl,
        q: ql,
        within_budget: false,
    };
    ledger.within_budget = ledger.violations().is_empty();

    let per = nc.queries();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let (rounds, expected_invocations, iterations, amplified) = match opts.amplification {
        Amplification::None => (1.0, 1.0, 0, success_probability),
        Amplification::MeasureUntilSuccess => {
            let mut r = 1u64;
            while rng.gen::<f64>() >= success_probability && r < 100_000_000 {
                r += 1;
            }
            (r as f64, 1.0 / success_probability, 0, success_probability)
        }
        Amplification::AmplitudeAmplify => {
            let cost = amplify::schedule_cost(success_probability)?;
            let j = amplify::optimal_iterations(success_probability);
            let amplified = if opts.simulate_amplification {
                let g = Grover::new(&nc.circuit, good);
                good.probability(&g.run(j))
            } else {
                let theta = success_probability.sqrt().asin();
                (((2 * j + 1) as f64) * theta).sin().powi(2)
            };
            (cost.expected_rounds, cost.expected_invocations, j, amplified)
        }
    };
    let invocations = match opts.amplification {
        Amplification::MeasureUntilSuccess => rounds,
        _ => expected_invocations,
    };
    let expected_queries = per.total() as f64 * expected_invocations;
    Ok(NtcaResult {
        variant: opts.variant,
        amplification: opts.amplification,
        output_state,
        output_amplitudes: b,
        expected_amplitudes: expected,
        success_probability,
        predicted_success_probability: predicted,
        amplification_rounds: rounds,
        grover_iterations: iterations,
        amplified_success_probability: amplified,
        queries_per_invocation: per,
        queries_controlled_u: (per.total() as f64 * invocations).ceil() as u64,
        expected_queries,
        fidelity_vs_target,
        per_point_error_bound: opts.epsilon / n,
        per_point_errors,
        max_point_error,
        gamma,
        degree_p: nc.p_block.degree,
        degree_q: nc.q_block.as_ref().map(|b| b.degree).unwrap_or(0),
        flag_qubits: nc.flags.len(),
        global_phase,
        ledger,
    })
}

pub fn run_ntca(config: &NtcaConfig) -> Result<NtcaResult> {
    let u = synthesize_state_prep(&config.input);
    let opts = RunOptions {
        epsilon: config.epsilon,
        gamma: config.gamma,
        variant: config.variant,
        amplification: config.amplification,
        seed: config.seed,
        simulate_amplification: true,
    };
    run_on_oracle(&u, config.input.entries(), &config.p, &config.q, &opts)
}

pub fn run_partial_ntca(config: &NtcaConfig, n1: usize) -> Result<NtcaResult> {
    run_ntca(&NtcaConfig { variant: Variant::Partial(n1), ..config.clone() })
}

pub fn run_real_ntca(c: &AmplitudeVector, p: &PolynomialSpec, gamma: Option<f64>, epsilon: f64) -> Result<NtcaResult> {
    let mut cfg = NtcaConfig::new(c.clone(), p.clone(), PolynomialSpec::zero(), epsilon).with_variant(Variant::RealOnly);
    cfg.gamma = gamma;
    run_ntca(&cfg)
}

/// Run the configuration and return its error ledger.
pub fn error_ledger(config: &NtcaConfig) -> Result<ErrorLedger> {
    Ok(run_ntca(config)?.ledger)
}
