//! Neural networks on amplitudes.
//!
//! A layer maps `ψ ↦ Σ_k F(Σ_j v_kj ψ_j) |k⟩` with `F(z) = P(Re z) + Q(Im z)`,
//! realized by running the transformation on the oracle `V·U_ψ`. Deeper
//! networks remove the post-selection prefactor of each inner layer by
//! uniform singular value amplification and feed the result to the next one.
//!
//! Inner layers are handed on as a compressed oracle: the good amplitudes of
//! the amplified circuit, plus one slot collecting everything else, prepared
//! on `n + 1` qubits and charged with the query count of the circuit it
//! stands for. This keeps the simulated width at `2(n + 1) + 6` per layer.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::amplify::{self, AmplitudeEstimate, EstimationMode, GoodSubspace};
use crate::dense::{unitarity_residual, CMatrix};
use crate::error::{Error, Result};
use crate::ntca::{self, address_amplitudes, address_index, build_fig3_from_oracle, NtcaCircuit, NtcaResult, RunOptions, Variant};
use crate::oracle::{rotation_cascade, synthesize_state_prep, AmplitudeVector};
use crate::poly::{linear_amplifier, taylor_tanh, uniform_grid, PolynomialSpec};
use crate::qsvt::{assemble_qsvt_projected, compute_phase_factors_with_degree, Projectors, QsvtCircuit, SolverOptions};
use crate::statevector::{Charge, Circuit, Gate, Program, QueryCount, C64};

pub const UNITARY_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_LAYERS: usize = 3;

/// An activation given by name or as an explicit polynomial.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Activation {
    Named(String),
    Polynomial(PolynomialSpec),
}

impl Activation {
    /// Names: `zero`, `identity`/`x`, `iy` (`Q(y) = i y`), `x2`/`square`,
    /// `tanh-d<terms>` (the truncated Taylor series, taken as exact).
    pub fn resolve(&self) -> Result<PolynomialSpec> {
        match self {
            Activation::Polynomial(p) => Ok(p.clone()),
            Activation::Named(name) => match name.as_str() {
                "zero" => Ok(PolynomialSpec::zero()),
                "identity" | "x" => Ok(PolynomialSpec::identity()),
                "iy" => Ok(PolynomialSpec::identity().scale(C64::new(0.0, 1.0)).with_label("iy")),
                "x2" | "square" => Ok(PolynomialSpec::from_real_monomial("x2", &[0.0, 0.0, 1.0])),
                other => match other.strip_prefix("tanh-d").and_then(|t| t.parse::<usize>().ok()) {
                    Some(terms) => Ok(taylor_tanh(terms)?.with_certified_error(0.0)),
                    None => Err(Error::InvalidConfig(format!("unknown activation '{other}'"))),
                },
            },
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLayer {
    weights: Vec<Vec<C64>>,
    width: usize,
    p: Activation,
    #[serde(default)]
    q: Option<Activation>,
    #[serde(default)]
    real: bool,
}

/// One network layer: a `2^n × 2^n` unitary `V` whose first `width` output
/// rows are kept, and the activation `F(z) = P(Re z) + Q(Im z)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawLayer", into = "RawLayer")]
pub struct LayerSpec {
    pub weights: CMatrix,
    pub width: usize,
    pub p: PolynomialSpec,
    pub q: PolynomialSpec,
    pub real: bool,
}

impl TryFrom<RawLayer> for LayerSpec {
    type Error = Error;

    fn try_from(raw: RawLayer) -> Result<Self> {
        let n = raw.weights.len();
        if raw.weights.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidConfig("weight matrix must be square".into()));
        }
        let m = DMatrix::from_fn(n, n, |i, j| raw.weights[i][j]);
        let q = match raw.q {
            Some(a) => a.resolve()?,
            None => PolynomialSpec::zero(),
        };
        let layer = LayerSpec::new(m, raw.width, raw.p.resolve()?, q)?;
        if raw.real {
            layer.into_real()
        } else {
            Ok(layer)
        }
    }
}

impl From<LayerSpec> for RawLayer {
    fn from(l: LayerSpec) -> Self {
        let n = l.weights.nrows();
        RawLayer {
            weights: (0..n).map(|i| (0..n).map(|j| l.weights[(i, j)]).collect()).collect(),
            width: l.width,
            p: Activation::Polynomial(l.p),
            q: Some(Activation::Polynomial(l.q)),
            real: l.real,
        }
    }
}

impl LayerSpec {
    pub fn new(weights: CMatrix, width: usize, p: PolynomialSpec, q: PolynomialSpec) -> Result<Self> {
        let dim = weights.nrows();
        if dim != weights.ncols() || dim < 2 || !dim.is_power_of_two() {
            return Err(Error::InvalidConfig(format!("weights must be 2^n x 2^n, got {}x{}", dim, weights.ncols())));
        }
        let r = unitarity_residual(&weights);
        if r > UNITARY_TOL {
            return Err(Error::NotUnitary(r));
        }
        if width == 0 || width > dim {
            return Err(Error::InvalidConfig(format!("layer width {width} outside 1..={dim}")));
        }
        Ok(Self { weights, width, p, q, real: false })
    }

    /// Mark the layer as real; the weights must then be orthogonal.
    pub fn into_real(mut self) -> Result<Self> {
        let im = self.weights.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        if im > UNITARY_TOL {
            return Err(Error::InvalidConfig(format!("real layer has complex weights (max |Im| = {im:e})")));
        }
        self.real = true;
        Ok(self)
    }

    pub fn identity(dim: usize, width: usize, p: PolynomialSpec, q: PolynomialSpec) -> Result<Self> {
        Self::new(CMatrix::identity(dim, dim), width, p, q)
    }

    pub fn num_qubits(&self) -> usize {
        self.weights.nrows().trailing_zeros() as usize
    }

    pub fn activation(&self, z: C64) -> C64 {
        self.p.eval(z.re) + self.q.eval(z.im)
    }

    /// Classical evaluation on a vector of length `2^n`.
    pub fn apply(&self, psi: &[C64]) -> Vec<C64> {
        let dim = self.weights.nrows();
        let mut v = vec![C64::default(); dim];
        for (k, out) in v.iter_mut().enumerate().take(self.width) {
            let z: C64 = (0..dim).map(|j| self.weights[(k, j)] * psi.get(j).copied().unwrap_or_default()).sum();
            *out = self.activation(z);
        }
        v
    }
}

/// A random orthogonal matrix from the QR factorization of a uniform one.
pub fn random_orthogonal<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let a = DMatrix::<f64>::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
    let qr = a.qr();
    let (q, r) = (qr.q(), qr.r());
    // Fix column signs so the factorization is unique.
    let q = DMatrix::from_fn(dim, dim, |i, j| q[(i, j)] * r[(j, j)].signum());
    q.map(|x| C64::new(x, 0.0))
}

/// Classical network output, one entry per basis state of the last layer.
pub fn classical_network(input: &AmplitudeVector, layers: &[LayerSpec]) -> Vec<C64> {
    let mut psi = input.padded();
    for l in layers {
        psi = l.apply(&psi);
    }
    psi
}

/// `V·U`: `V` acts on the trailing `log₂ dim` qubits of `u`.
pub fn layer_oracle(u: &Circuit, v: &CMatrix) -> Result<Circuit> {
    let m = v.nrows().trailing_zeros() as usize;
    if m > u.width() {
        return Err(Error::WidthMismatch { expected: u.width(), got: m });
    }
    let mut c = u.clone();
    c.push(Gate::unitary(v, (u.width() - m..u.width()).collect()))?;
    Ok(c)
}

#[derive(Clone, Debug)]
pub struct QnnOptions {
    /// Headroom of the uniform amplification: the amplified norm must stay below `1 − eta`.
    pub eta: f64,
    /// Deviation allowed to the amplification polynomial; defaults to a quarter of the per-point layer budget.
    pub amplifier_tol: Option<f64>,
    pub degree_cap: usize,
    pub max_layers: usize,
}

impl Default for QnnOptions {
    fn default() -> Self {
        Self { eta: 0.3, amplifier_tol: None, degree_cap: 200, max_layers: DEFAULT_MAX_LAYERS }
    }
}

/// Output of uniform singular value amplification on one layer.
#[derive(Clone, Debug)]
pub struct AmplifiedLayer {
    pub qsvt: QsvtCircuit,
    pub address: Vec<usize>,
    pub gain: f64,
    pub amplifier: PolynomialSpec,
    /// Good amplitudes before and after amplification, on the address register.
    pub before: Vec<C64>,
    pub amplitudes: Vec<C64>,
    pub queries: QueryCount,
}

impl AmplifiedLayer {
    pub fn circuit(&self) -> &Circuit {
        &self.qsvt.circuit
    }

    /// Basis index of node `k` in the amplified circuit.
    pub fn node_index(&self, k: usize) -> usize {
        address_index(self.qsvt.circuit.width(), &self.address, k)
    }
}

fn simulate(c: &Circuit) -> Vec<C64> {
    let mut amps = vec![C64::default(); 1 << c.width()];
    amps[0] = C64::new(1.0, 0.0);
    Program::compile(c).run(&mut amps);
    amps
}

/// Compose `next` (if any) onto the address register of `nc`, then remove the
/// prefactor `1/(8γ√N)` from the good block with an odd polynomial `≈ gain·x`.
pub fn amplify_layer(nc: &NtcaCircuit, next: Option<&CMatrix>, eta: f64, tol: f64, degree_cap: usize) -> Result<AmplifiedLayer> {
    let mut a = nc.circuit.clone();
    if let Some(v) = next {
        let m = v.nrows().trailing_zeros() as usize;
        if m > nc.address.len() {
            return Err(Error::WidthMismatch { expected: nc.address.len(), got: m });
        }
        let targets = nc.address[nc.address.len() - m..].to_vec();
        a.push(Gate::unitary(v, targets))?;
    }
    let w = a.width();
    let before = address_amplitudes(&simulate(&a), w, &nc.address);
    let gain = 1.0 / nc.prefactor;
    let scaled = gain * before.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if scaled > 1.0 - eta {
        return Err(Error::SupNormViolation { sup: scaled, bound: 1.0 - eta });
    }
    let amplifier = linear_amplifier(gain, eta, tol, degree_cap)?;
    let opts = SolverOptions { degree_cap, ..SolverOptions::with_tol(1e-10) };
    let phases = compute_phase_factors_with_degree(&amplifier, amplifier.degree, &opts)?;
    let output: Vec<usize> = nc.flags.iter().chain(&nc.work).copied().collect();
    let proj = Projectors { input: (0..w).collect(), output };
    let qsvt = assemble_qsvt_projected(&a, &proj, &phases)?;
    let address: Vec<usize> = nc.address.iter().map(|q| q + 1).collect();
    let amplitudes = address_amplitudes(&simulate(&qsvt.circuit), qsvt.circuit.width(), &address);
    let queries = qsvt.circuit.queries();
    Ok(AmplifiedLayer { qsvt, address, gain, amplifier, before, amplitudes, queries })
}

/// An oracle on `n + 1` qubits preparing `g` on the first `2^n` states and the
/// remaining weight on state `2^n`, charged as `charge` per use.
pub fn compressed_oracle(g: &[C64], n: usize, charge: QueryCount) -> Result<(Circuit, Vec<C64>)> {
    let dim = 1usize << n;
    let mut v = vec![C64::default(); 2 * dim];
    v[..dim].copy_from_slice(&g[..dim]);
    let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    if norm > 1.0 + 1e-9 {
        return Err(Error::NotNormalized { norm_sqr: norm });
    }
    v[dim] = C64::new((1.0 - norm).max(0.0).sqrt(), 0.0);
    let av = AmplitudeVector::normalize(v)?;
    let raw = rotation_cascade(&av);
    let mut u = Circuit::new(n + 1);
    u.push_block("A'", &raw, &(0..n + 1).collect::<Vec<_>>(), Charge::Fixed(charge), &[])?;
    Ok((u, av.entries().to_vec()))
}

/// `max |P′| + max |Q′|` on `[−1, 1]`.
pub fn lipschitz(p: &PolynomialSpec, q: &PolynomialSpec) -> f64 {
    let d = |s: &PolynomialSpec| -> f64 {
        uniform_grid(2001)
            .map(|x| s.monomial.iter().enumerate().skip(1).map(|(j, a)| a * (j as f64) * x.powi(j as i32 - 1)).sum::<C64>().norm())
            .fold(0.0, f64::max)
    };
    d(p) + d(q)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LayerReport {
    pub width: usize,
    pub degree_p: usize,
    pub degree_q: usize,
    pub gamma: f64,
    pub amplifier_degree: usize,
    pub amplifier_deviation: f64,
    /// `U_ψ` uses of one application of this layer's (amplified) circuit.
    pub queries: QueryCount,
    /// Per-point error bound after this layer.
    pub error_bound: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QnnResult {
    pub output: NtcaResult,
    pub classical: Vec<C64>,
    pub per_point_errors: Vec<f64>,
    pub max_error: f64,
    /// Composed per-point budget of the whole network.
    pub composed_budget: f64,
    pub layers: Vec<LayerReport>,
    /// `U_ψ` uses of one invocation of the final circuit.
    pub queries: u64,
    /// `d^ℓ √(N₁ ⋯ N_{ℓ−1})` with `d` the largest activation degree.
    pub predicted_scaling: f64,
    pub fidelity_vs_classical: f64,
}

impl QnnResult {
    /// Output node values `b_k` scaled to unit norm.
    pub fn normalized_output(&self) -> Vec<C64> {
        let b = &self.output.output_amplitudes;
        let norm = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        b.iter().map(|z| z / norm).collect()
    }
}

fn check_layers(n: usize, layers: &[LayerSpec], cap: usize) -> Result<()> {
    if layers.is_empty() || layers.len() > cap {
        return Err(Error::InvalidConfig(format!("network needs 1..={cap} layers, got {}", layers.len())));
    }
    for (i, l) in layers.iter().enumerate() {
        if l.num_qubits() != n {
            return Err(Error::RegisterMismatch(format!("layer {} acts on {} qubits, input has {n}", i + 1, l.num_qubits())));
        }
    }
    Ok(())
}

/// Layers `1..ℓ−1` built, composed with the next weights and amplified;
/// returns the oracle and values handed to the last layer.
struct Prefix {
    u: Circuit,
    values: Vec<C64>,
    reports: Vec<LayerReport>,
    amplified: Option<AmplifiedLayer>,
    /// Bound on `|g_k − (classical)_k|` for the values handed on.
    value_error: f64,
}

fn build_prefix(u_psi: &Circuit, psi: &[C64], layers: &[LayerSpec], eps_layer: f64, opts: &QnnOptions, amplify_last: bool) -> Result<Prefix> {
    let n = layers[0].num_qubits();
    let mut u = layer_oracle(u_psi, &layers[0].weights)?;
    let mut values = crate::dense::mat_vec(&layers[0].weights, &pad(psi, 1 << n));
    let mut reports = Vec::new();
    let mut value_error = 0.0;
    let mut amplified = None;
    let upto = if amplify_last { layers.len() } else { layers.len() - 1 };
    for i in 0..upto {
        let l = &layers[i];
        let gamma = ntca::resolve_gamma(&l.p, &l.q, None)?;
        ntca::check_budget(&l.p, &l.q, eps_layer, l.width)?;
        let delta = eps_layer / (16.0 * gamma * l.width as f64);
        let nc = build_fig3_from_oracle(&u, l.width, &l.p, &l.q, gamma, delta)?;
        let tol = opts.amplifier_tol.unwrap_or(eps_layer / (4.0 * l.width as f64));
        let next = layers.get(i + 1).map(|nl| &nl.weights);
        let amp = amplify_layer(&nc, next, opts.eta, tol, opts.degree_cap)?;
        let point = eps_layer / l.width as f64 + lipschitz(&l.p, &l.q) * value_error;
        // Each next-layer input mixes up to `width` outputs with unit-norm rows.
        value_error = (l.width as f64).sqrt() * point + amp.amplifier.certified_error;
        reports.push(LayerReport {
            width: l.width,
            degree_p: nc.p_block.degree,
            degree_q: nc.q_block.as_ref().map(|b| b.degree).unwrap_or(0),
            gamma,
            amplifier_degree: amp.amplifier.degree,
            amplifier_deviation: amp.amplifier.certified_error,
            queries: amp.queries,
            error_bound: point,
        });
        let (cu, cv) = compressed_oracle(&amp.amplitudes, n, amp.queries)?;
        u = cu;
        values = cv;
        amplified = Some(amp);
    }
    Ok(Prefix { u, values, reports, amplified, value_error })
}

fn pad(v: &[C64], dim: usize) -> Vec<C64> {
    let mut out = v.to_vec();
    out.resize(dim, C64::default());
    out
}

/// Run a network of up to `opts.max_layers` layers on the oracle `u_psi`
/// whose prepared amplitudes are `psi`. The budget `eps` is split equally.
pub fn multi_layer_on_oracle(u_psi: &Circuit, psi: &[C64], layers: &[LayerSpec], eps: f64, opts: &QnnOptions) -> Result<QnnResult> {
    let n = u_psi.width();
    check_layers(n, layers, opts.max_layers)?;
    let eps_layer = eps / layers.len() as f64;
    let prefix = build_prefix(u_psi, psi, layers, eps_layer, opts, false)?;
    let last = layers.last().expect("checked non-empty");
    let variant = if last.width == prefix.values.len() { Variant::Full } else { Variant::Partial(last.width) };
    let run = RunOptions { variant, ..RunOptions::new(eps_layer) };
    let output = ntca::run_on_oracle(&prefix.u, &prefix.values, &last.p, &last.q, &run)?;

    let av = AmplitudeVector::normalize(pad(psi, 1 << n))?;
    let classical: Vec<C64> = classical_network(&av, layers)[..last.width].to_vec();
    let per_point_errors: Vec<f64> = output.output_amplitudes.iter().zip(&classical).map(|(b, c)| (b - c).norm()).collect();
    let max_error = per_point_errors.iter().copied().fold(0.0, f64::max);
    let composed_budget = eps_layer / last.width as f64 + lipschitz(&last.p, &last.q) * prefix.value_error;
    let mut reports = prefix.reports;
    reports.push(LayerReport {
        width: last.width,
        degree_p: output.degree_p,
        degree_q: output.degree_q,
        gamma: output.gamma,
        amplifier_degree: 0,
        amplifier_deviation: 0.0,
        queries: output.queries_per_invocation,
        error_bound: composed_budget,
    });
    let d = layers.iter().map(|l| l.p.degree.max(l.q.degree)).max().unwrap_or(1).max(1) as f64;
    let widths: f64 = layers[..layers.len() - 1].iter().map(|l| l.width as f64).product();
    let predicted_scaling = d.powi(layers.len() as i32) * widths.sqrt();
    let cn: f64 = classical.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let overlap: C64 = classical.iter().zip(output.output_state.amplitudes()).map(|(c, o)| c.conj() * o).sum();
    let fidelity_vs_classical = if cn > 0.0 { overlap.norm_sqr() / cn } else { 0.0 };
    Ok(QnnResult {
        queries: output.queries_per_invocation.total(),
        output,
        classical,
        per_point_errors,
        max_error,
        composed_budget,
        layers: reports,
        predicted_scaling,
        fidelity_vs_classical,
    })
}

pub fn single_layer(input: &AmplitudeVector, layer: &LayerSpec, eps: f64) -> Result<QnnResult> {
    multi_layer(input, std::slice::from_ref(layer), eps, &QnnOptions::default())
}

pub fn two_layer(input: &AmplitudeVector, layer1: &LayerSpec, layer2: &LayerSpec, eps: f64, opts: &QnnOptions) -> Result<QnnResult> {
    multi_layer(input, &[layer1.clone(), layer2.clone()], eps, opts)
}

pub fn multi_layer(input: &AmplitudeVector, layers: &[LayerSpec], eps: f64, opts: &QnnOptions) -> Result<QnnResult> {
    multi_layer_on_oracle(&synthesize_state_prep(input), &input.padded(), layers, eps, opts)
}

/// Every layer built and amplified, including the last; node `k` of the
/// network is the amplitude of [`AmplifiedLayer::node_index`]`(k)`.
pub fn network_oracle(input: &AmplitudeVector, layers: &[LayerSpec], eps: f64, opts: &QnnOptions) -> Result<AmplifiedLayer> {
    check_layers(input.num_qubits(), layers, opts.max_layers)?;
    let eps_layer = eps / layers.len() as f64;
    let prefix = build_prefix(&synthesize_state_prep(input), &input.padded(), layers, eps_layer, opts, true)?;
    Ok(prefix.amplified.expect("at least one layer amplified"))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NodeEstimate {
    pub k: usize,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
    pub beta: f64,
    pub true_value: C64,
    /// `U_ψ` uses over the three estimations.
    pub queries_used: u64,
}

/// Amplitude estimation of `|⟨target|A|0⟩|` to additive error `beta`.
pub fn estimate_amplitude<R: Rng + ?Sized>(a: &Circuit, target: usize, beta: f64, mode: EstimationMode, rng: &mut R) -> Result<AmplitudeEstimate> {
    let good = GoodSubspace { mask: (1usize << a.width()) - 1, value: target };
    amplify::amplitude_estimation(a, good, beta, mode, rng)
}

/// The circuit with amplitude `(1 + a)/2` (or `(1 + i a)/2` when `imag`) on
/// `|0⟩|target⟩`, where `a = ⟨target|A|0⟩`. The extra qubit leads.
pub fn interference_circuit(a: &Circuit, target: usize, imag: bool) -> Result<Circuit> {
    use crate::statevector::Control;
    let w = a.width();
    let mut c = Circuit::new(w + 1);
    c.push(Gate::h(0))?;
    for q in 0..w {
        if (target >> (w - 1 - q)) & 1 == 1 {
            c.push(Gate::x(q + 1).with_control(Control::zero(0)))?;
        }
    }
    c.push_block("A", a, &(1..=w).collect::<Vec<_>>(), Charge::Inherit, &[Control::one(0)])?;
    if imag {
        c.push(Gate::s(0))?;
    }
    c.push(Gate::h(0))?;
    Ok(c)
}

/// Estimate `Re a_k` and `Im a_k` for each node from `|a|`, `|1 + a|` and
/// `|1 + i a|`, each to error `β/6` so that both parts land within `β`.
pub fn estimate_nodes<R: Rng + ?Sized>(
    a: &Circuit,
    node_index: impl Fn(usize) -> usize,
    ks: std::ops::Range<usize>,
    beta: f64,
    mode: EstimationMode,
    rng: &mut R,
) -> Result<Vec<NodeEstimate>> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidConfig(format!("beta must lie in (0, 1), got {beta}")));
    }
    let inner = beta / 6.0;
    let amps = simulate(a);
    let per_use = a.queries().total();
    let mut out = Vec::new();
    for k in ks {
        let t = node_index(k);
        let e0 = estimate_amplitude(a, t, inner, mode, rng)?;
        let e1 = estimate_amplitude(&interference_circuit(a, t, false)?, t, inner, mode, rng)?;
        let e2 = estimate_amplitude(&interference_circuit(a, t, true)?, t, inner, mode, rng)?;
        let abs = e0.estimate;
        let one_plus = 2.0 * e1.estimate;
        let one_plus_i = 2.0 * e2.estimate;
        let (re, im) = reconstruct(abs, one_plus, one_plus_i);
        out.push(NodeEstimate {
            k,
            re,
            im,
            abs,
            beta,
            true_value: amps[t],
            queries_used: (e0.invocations + e1.invocations + e2.invocations) * per_use,
        });
    }
    Ok(out)
}

/// `(Re a, Im a)` from `|a|`, `|1 + a|` and `|1 + i a|`.
pub fn reconstruct(abs: f64, one_plus: f64, one_plus_i: f64) -> (f64, f64) {
    let a2 = abs * abs;
    ((one_plus * one_plus - a2 - 1.0) / 2.0, (1.0 + a2 - one_plus_i * one_plus_i) / 2.0)
}
