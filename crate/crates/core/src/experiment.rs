//! Batch experiments: a JSON config names one task and its parameters, and
//! running it produces a JSON report with the results and every check made.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::amplify::{self, EstimationMode};
use crate::block_encoding::{build_gtilde, AmplitudePart};
use crate::dense::{self, hermiticity_residual};
use crate::error::{Error, Result};
use crate::ntca::{run_ntca, run_on_oracle, NtcaConfig, RunOptions};
use crate::oracle::{synthesize_state_prep, AmplitudeVector};
use crate::poly::{taylor_tanh, PolynomialSpec};
use crate::qnn::{estimate_nodes, multi_layer, network_oracle, LayerSpec, NodeEstimate, QnnOptions};
use crate::qsvt::{lcu_poly_block, reference_matrix_function, SolverOptions};
use crate::statevector::{C64, DEFAULT_DENSE_CAP};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TaskKind {
    BlockEncode,
    QsvtCheck,
    Ntca,
    Qnn,
    ScalingSweep,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    pub task: TaskKind,
    pub params: Value,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub dense_cap: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidConfig(format!("schema_version {} is not supported (expected {SCHEMA_VERSION})", cfg.schema_version)));
        }
        Ok(cfg)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockEncodeParams {
    pub input: AmplitudeVector,
    #[serde(default = "both_parts")]
    pub parts: Vec<AmplitudePart>,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn both_parts() -> Vec<AmplitudePart> {
    vec![AmplitudePart::Real, AmplitudePart::Imag]
}

fn default_tol() -> f64 {
    1e-9
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QsvtCheckParams {
    pub input: AmplitudeVector,
    pub polynomial: PolynomialSpec,
    #[serde(default = "real_part")]
    pub part: AmplitudePart,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn real_part() -> AmplitudePart {
    AmplitudePart::Real
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Readout {
    #[default]
    None,
    Estimate(f64),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QnnParams {
    pub input: AmplitudeVector,
    pub layers: Vec<LayerSpec>,
    pub epsilon: f64,
    #[serde(default)]
    pub readout: Readout,
    #[serde(default = "exact_mode")]
    pub estimation: EstimationMode,
    #[serde(default)]
    pub eta: Option<f64>,
}

fn exact_mode() -> EstimationMode {
    EstimationMode::Exact
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepActivation {
    /// Truncated tanh series of the requested (odd) degree.
    #[default]
    Tanh,
    /// `P(x) = x`; only degree 1.
    Identity,
    /// The all-zero target.
    Zero,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub sizes: Vec<usize>,
    pub degrees: Vec<usize>,
    #[serde(default = "default_eps")]
    pub epsilon: f64,
    #[serde(default)]
    pub activation: SweepActivation,
}

fn default_eps() -> f64 {
    1e-2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub degree: usize,
    pub status: String,
    pub success_probability: f64,
    pub queries_per_invocation: u64,
    pub expected_invocations: f64,
    pub expected_queries: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// Least-squares slope of `log queries` against `log N`, per degree.
    pub exponent_n: Vec<(usize, f64)>,
    /// Slope of `log queries` against `log d`, per size.
    pub exponent_d: Vec<(usize, f64)>,
    pub monotone_in_n: bool,
}

impl SweepReport {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn sweep_polynomial(activation: SweepActivation, degree: usize) -> Result<PolynomialSpec> {
    match activation {
        SweepActivation::Zero => Ok(PolynomialSpec::zero()),
        SweepActivation::Identity if degree == 1 => Ok(PolynomialSpec::identity()),
        SweepActivation::Identity => Err(Error::InvalidConfig("identity sweep supports degree 1 only".into())),
        SweepActivation::Tanh if degree % 2 == 1 => Ok(taylor_tanh(degree.div_ceil(2))?.with_certified_error(0.0)),
        SweepActivation::Tanh => Err(Error::InvalidConfig(format!("tanh sweep needs odd degrees, got {degree}"))),
    }
}

fn sweep_point(n: usize, degree: usize, spec: &SweepSpec) -> Result<SweepRow> {
    let p = sweep_polynomial(spec.activation, degree)?;
    let amp = 1.0 / (n as f64).sqrt();
    let input = AmplitudeVector::new(vec![C64::new(amp, 0.0); n])?;
    let u = synthesize_state_prep(&input);
    let opts = RunOptions { simulate_amplification: false, ..RunOptions::new(spec.epsilon) };
    let mut row = SweepRow {
        n,
        degree,
        status: "OK".into(),
        success_probability: 0.0,
        queries_per_invocation: 0,
        expected_invocations: f64::NAN,
        expected_queries: f64::NAN,
    };
    match run_on_oracle(&u, input.entries(), &p, &p, &opts) {
        Ok(res) => {
            let cost = amplify::schedule_cost(res.success_probability)?;
            row.success_probability = res.success_probability;
            row.queries_per_invocation = res.queries_per_invocation.total();
            row.expected_invocations = cost.expected_invocations;
            row.expected_queries = cost.expected_invocations * row.queries_per_invocation as f64;
        }
        Err(Error::Unamplifiable { probability, .. }) => {
            row.status = "UNAMPLIFIABLE".into();
            row.success_probability = probability;
        }
        Err(e) => return Err(e),
    }
    Ok(row)
}

fn log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x.ln(), b + y.ln()));
    let (mx, my) = (sx / n, sy / n);
    let num: f64 = points.iter().map(|(x, y)| (x.ln() - mx) * (y.ln() - my)).sum();
    let den: f64 = points.iter().map(|(x, _)| (x.ln() - mx).powi(2)).sum();
    num / den
}

/// Amplified query counts over the grid `sizes × degrees`, on uniform real
/// inputs with `P = Q`. Points run in parallel; row order is the grid order.
pub fn scaling_sweep(spec: &SweepSpec) -> Result<SweepReport> {
    let grid: Vec<(usize, usize)> = spec.degrees.iter().flat_map(|&d| spec.sizes.iter().map(move |&n| (n, d))).collect();
    let rows: Vec<SweepRow> = grid.par_iter().map(|&(n, d)| sweep_point(n, d, spec)).collect::<Result<_>>()?;
    let ok = |r: &&SweepRow| r.status == "OK";
    let exponent_n = spec
        .degrees
        .iter()
        .filter_map(|&d| {
            let pts: Vec<(f64, f64)> = rows.iter().filter(ok).filter(|r| r.degree == d).map(|r| (r.n as f64, r.expected_queries)).collect();
            (pts.len() >= 2).then(|| (d, log_slope(&pts)))
        })
        .collect();
    let exponent_d = spec
        .sizes
        .iter()
        .filter_map(|&n| {
            let pts: Vec<(f64, f64)> = rows.iter().filter(ok).filter(|r| r.n == n).map(|r| (r.degree as f64, r.expected_queries)).collect();
            (pts.len() >= 2).then(|| (n, log_slope(&pts)))
        })
        .collect();
    let monotone_in_n = spec.degrees.iter().all(|&d| {
        let mut by_n: Vec<&SweepRow> = rows.iter().filter(ok).filter(|r| r.degree == d).collect();
        by_n.sort_by_key(|r| r.n);
        by_n.windows(2).all(|w| w[1].expected_queries >= w[0].expected_queries)
    });
    Ok(SweepReport { rows, exponent_n, exponent_d, monotone_in_n })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Assertion {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub crate_version: String,
    pub task: TaskKind,
    pub seed: u64,
    pub elapsed_ms: f64,
    pub result: Value,
    pub assertions: Vec<Assertion>,
    pub passed: bool,
}

fn params<T: for<'de> Deserialize<'de>>(v: &Value) -> Result<T> {
    Ok(serde_json::from_value(v.clone())?)
}

fn block_encode_task(p: &BlockEncodeParams, cap: usize) -> Result<(Value, Vec<Assertion>)> {
    let u = synthesize_state_prep(&p.input);
    let mut out = Vec::new();
    let mut checks = Vec::new();
    for &part in &p.parts {
        let be = build_gtilde(&u, part)?;
        let block = be.extract_block_with_cap(cap)?;
        let herm = hermiticity_residual(&block);
        let spectrum = dense::hermitian_eigenvalues(&block, 1e-9)?;
        let targets = match part {
            AmplitudePart::Real => p.input.real_parts(),
            AmplitudePart::Imag => p.input.imag_parts(),
        };
        let contains = dense::multiset_contains(&spectrum, &targets, p.tol);
        let name = serde_json::to_value(part)?;
        let name = name.as_str().unwrap_or("part");
        checks.push(Assertion::new(format!("spectrum-contains-{name}"), contains, format!("tol {:e}", p.tol)));
        checks.push(Assertion::new(format!("hermitian-{name}"), herm < 1e-10, format!("residual {herm:e}")));
        out.push(serde_json::json!({
            "part": part,
            "spectrum": spectrum,
            "targets": targets,
            "hermiticity_residual": herm,
            "queries": be.circuit.queries(),
        }));
    }
    Ok((Value::Array(out), checks))
}

fn qsvt_check_task(p: &QsvtCheckParams, cap: usize) -> Result<(Value, Vec<Assertion>)> {
    let be = build_gtilde(&synthesize_state_prep(&p.input), p.part)?;
    let q = lcu_poly_block(&be, &p.polynomial, &SolverOptions::with_tol(p.tol))?;
    let block = q.block_encoding()?.extract_block_with_cap(cap)?;
    let reference = reference_matrix_function(&be.extract_block_with_cap(cap)?, &p.polynomial)?;
    let residual = dense::spectral_norm(&(&block - &reference));
    let checks = vec![Assertion::new("block-matches-reference", residual <= q.error_bound, format!("{residual:e} <= {:e}", q.error_bound))];
    let result = serde_json::json!({
        "degree": q.degree,
        "ancillas": q.ancillas,
        "residual": residual,
        "error_bound": q.error_bound,
        "queries": q.circuit.queries(),
        "pieces": q.pieces.iter().map(|pc| serde_json::json!({"name": pc.name, "angles": pc.phases.angles, "residual": pc.phases.residual})).collect::<Vec<_>>(),
    });
    Ok((result, checks))
}

fn ntca_task(cfg: &NtcaConfig) -> Result<(Value, Vec<Assertion>)> {
    let res = run_ntca(cfg)?;
    let checks = vec![
        Assertion::new("per-point-error", res.max_point_error <= res.per_point_error_bound, format!("{:e} <= {:e}", res.max_point_error, res.per_point_error_bound)),
        Assertion::new(
            "success-probability",
            (res.success_probability - res.predicted_success_probability).abs() <= 1e-9,
            format!("measured {:e}, predicted {:e}", res.success_probability, res.predicted_success_probability),
        ),
        Assertion::new("error-ledger", res.ledger.within_budget, res.ledger.violations().join("; ")),
    ];
    Ok((serde_json::to_value(&res)?, checks))
}

fn qnn_task(p: &QnnParams, seed: u64) -> Result<(Value, Vec<Assertion>)> {
    let mut opts = QnnOptions::default();
    if let Some(eta) = p.eta {
        opts.eta = eta;
    }
    let res = multi_layer(&p.input, &p.layers, p.epsilon, &opts)?;
    let mut checks = vec![Assertion::new(
        "network-matches-classical",
        res.max_error <= res.composed_budget,
        format!("{:e} <= {:e}", res.max_error, res.composed_budget),
    )];
    let mut nodes: Vec<NodeEstimate> = Vec::new();
    if let Readout::Estimate(beta) = p.readout {
        let net = network_oracle(&p.input, &p.layers, p.epsilon, &opts)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let width = p.layers.last().map(|l| l.width).unwrap_or(0);
        nodes = estimate_nodes(net.circuit(), |k| net.node_index(k), 0..width, beta, p.estimation, &mut rng)?;
        let worst = nodes.iter().map(|e| (e.re - e.true_value.re).abs().max((e.im - e.true_value.im).abs())).fold(0.0, f64::max);
        checks.push(Assertion::new("node-estimates", worst <= beta, format!("{worst:e} <= {beta}")));
    }
    Ok((serde_json::json!({ "network": res, "nodes": nodes }), checks))
}

/// Run one experiment. The report is deterministic given the config, apart
/// from `elapsed_ms`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    let start = Instant::now();
    let cap = cfg.dense_cap.unwrap_or(DEFAULT_DENSE_CAP);
    let (result, assertions) = match cfg.task {
        TaskKind::BlockEncode => block_encode_task(&params(&cfg.params)?, cap)?,
        TaskKind::QsvtCheck => qsvt_check_task(&params(&cfg.params)?, cap)?,
        TaskKind::Ntca => {
            let mut n: NtcaConfig = params(&cfg.params)?;
            n.seed = cfg.seed;
            ntca_task(&n)?
        }
        TaskKind::Qnn => qnn_task(&params(&cfg.params)?, cfg.seed)?,
        TaskKind::ScalingSweep => {
            let sweep = scaling_sweep(&params(&cfg.params)?)?;
            let checks = vec![Assertion::new("monotone-in-n", sweep.monotone_in_n, format!("{:?}", sweep.exponent_n))];
            (serde_json::to_value(&sweep)?, checks)
        }
    };
    let passed = assertions.iter().all(|a| a.passed);
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        task: cfg.task,
        seed: cfg.seed,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        result,
        assertions,
        passed,
    })
}
