use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;
use serde::Serialize;

use ntca::amplify::EstimationMode;
use ntca::block_encoding::{build_gtilde, AmplitudePart, BlockEncoding};
use ntca::dense::{self, hermiticity_residual};
use ntca::experiment::{run_experiment, scaling_sweep, ExperimentConfig, SweepActivation, SweepSpec};
use ntca::ntca::{run_ntca, Amplification, NtcaConfig, Variant};
use ntca::oracle::{synthesize_state_prep, AmplitudeVector};
use ntca::poly::{chebyshev_fit, fit_tanh, FitMethod, PolynomialSpec};
use ntca::qnn::{estimate_nodes, multi_layer, network_oracle, LayerSpec, QnnOptions};
use ntca::qsvt::{assemble_qsvt, compute_phase_factors, reference_matrix_function, PhaseFactors};
use ntca::statevector::DEFAULT_DENSE_CAP;
use ntca::{Error, Result};

#[derive(Parser)]
#[command(name = "ntca", version, about = "Nonlinear transformation of complex amplitudes on a statevector simulator")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Widest circuit turned into a dense matrix.
    #[arg(long, global = true)]
    dense_cap: Option<usize>,
    /// Write the main artifact of the command to this file.
    #[arg(long, global = true)]
    emit: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the block-encoding of the real or imaginary parts of a vector.
    BlockEncode {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "real")]
        kind: AmplitudePart,
        /// Compare the block spectrum with the input amplitudes.
        #[arg(long)]
        check: bool,
    },
    /// Polynomial approximations.
    #[command(subcommand)]
    Poly(PolyCommand),
    /// Phase factors and QSVT circuits.
    #[command(subcommand)]
    Qsvt(QsvtCommand),
    /// Transform the amplitudes of a state.
    #[command(subcommand)]
    Ntca(NtcaCommand),
    /// Networks on amplitudes.
    #[command(subcommand)]
    Qnn(QnnCommand),
    /// Amplified query counts over a grid of sizes and degrees, as CSV.
    Sweep {
        #[arg(long, value_delimiter = ',', default_value = "2,4,8")]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        degrees: Vec<usize>,
        #[arg(long, default_value_t = 1e-2)]
        eps: f64,
        #[arg(long, default_value = "identity")]
        activation: String,
    },
    /// Run an experiment config and write its report.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Subcommand)]
enum PolyCommand {
    Fit {
        #[arg(long = "fn", default_value = "tanh")]
        function: String,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value = "taylor")]
        method: FitMethod,
    },
}

#[derive(Subcommand)]
enum QsvtCommand {
    Phases {
        #[arg(long)]
        poly: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Residual between the QSVT block and the polynomial applied to the input block.
    Check {
        #[arg(long)]
        be: PathBuf,
        #[arg(long)]
        phases: PathBuf,
    },
}

#[derive(Subcommand)]
enum NtcaCommand {
    Run {
        #[arg(long)]
        input: PathBuf,
        #[arg(long = "poly-p")]
        poly_p: PathBuf,
        #[arg(long = "poly-q")]
        poly_q: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-2)]
        eps: f64,
        #[arg(long)]
        gamma: Option<f64>,
        /// full, partial:N1 or real
        #[arg(long, default_value = "full")]
        variant: String,
        /// none, measure or auto
        #[arg(long, default_value = "none")]
        amplify: String,
    },
}

#[derive(Subcommand)]
enum QnnCommand {
    Run {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        layers: PathBuf,
        #[arg(long, default_value_t = 1e-2)]
        eps: f64,
        /// none or estimate:BETA
        #[arg(long, default_value = "none")]
        readout: String,
    },
}

fn read(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

fn read_vector(path: &Path) -> Result<AmplitudeVector> {
    let s = read(path)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        AmplitudeVector::from_csv_str(&s)
    } else {
        AmplitudeVector::from_json_str(&s)
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&read(path)?)?)
}

fn emit_json<T: Serialize>(path: &Option<PathBuf>, value: &T) -> Result<()> {
    if let Some(p) = path {
        std::fs::write(p, serde_json::to_string_pretty(value)?)?;
        info!("wrote {}", p.display());
    }
    Ok(())
}

fn print<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn parse_variant(s: &str) -> Result<Variant> {
    match s {
        "full" => Ok(Variant::Full),
        "real" => Ok(Variant::RealOnly),
        _ => match s.strip_prefix("partial:").map(str::parse::<usize>) {
            Some(Ok(n)) => Ok(Variant::Partial(n)),
            _ => Err(Error::InvalidConfig(format!("unknown variant '{s}'"))),
        },
    }
}

fn parse_amplify(s: &str) -> Result<Amplification> {
    match s {
        "none" => Ok(Amplification::None),
        "measure" => Ok(Amplification::MeasureUntilSuccess),
        "auto" | "amplify" => Ok(Amplification::AmplitudeAmplify),
        _ => Err(Error::InvalidConfig(format!("unknown amplification '{s}'"))),
    }
}

/// `Ok(false)` when the command ran but one of its checks failed.
fn run(cli: Cli) -> Result<bool> {
    let cap = cli.dense_cap.unwrap_or(DEFAULT_DENSE_CAP);
    match cli.command {
        Command::BlockEncode { input, kind, check } => {
            let c = read_vector(&input)?;
            let be = build_gtilde(&synthesize_state_prep(&c), kind)?;
            emit_json(&cli.emit, &be)?;
            let mut out = serde_json::json!({
                "kind": kind,
                "width": be.width(),
                "ancillas": be.ancillas,
                "queries": be.circuit.queries(),
            });
            let mut ok = true;
            if check {
                let block = be.extract_block_with_cap(cap)?;
                let spectrum = dense::hermitian_eigenvalues(&block, 1e-9)?;
                let targets = match kind {
                    AmplitudePart::Real => c.real_parts(),
                    AmplitudePart::Imag => c.imag_parts(),
                };
                let herm = hermiticity_residual(&block);
                ok = dense::multiset_contains(&spectrum, &targets, 1e-9) && herm < 1e-10;
                out["spectrum"] = serde_json::to_value(&spectrum)?;
                out["targets"] = serde_json::to_value(&targets)?;
                out["hermiticity_residual"] = herm.into();
                out["contains_targets"] = ok.into();
            }
            print(&out)?;
            Ok(ok)
        }
        Command::Poly(PolyCommand::Fit { function, eps, method }) => {
            if function != "tanh" {
                return Err(Error::InvalidConfig(format!("unsupported function '{function}' (only tanh)")));
            }
            let p = fit_tanh(method, eps)?;
            emit_json(&cli.emit, &p)?;
            print(&serde_json::json!({
                "label": p.label,
                "degree": p.degree,
                "parity": p.parity,
                "gamma": p.gamma,
                "certified_error": p.certified_error,
            }))?;
            Ok(true)
        }
        Command::Qsvt(QsvtCommand::Phases { poly, tol }) => {
            let p: PolynomialSpec = read_json(&poly)?;
            let phases = compute_phase_factors(&p, tol)?;
            emit_json(&cli.emit, &phases)?;
            print(&phases)?;
            Ok(true)
        }
        Command::Qsvt(QsvtCommand::Check { be, phases }) => {
            let be: BlockEncoding = read_json(&be)?;
            let phases: PhaseFactors = read_json(&phases)?;
            let q = assemble_qsvt(&be, &phases)?;
            let realized = chebyshev_fit(|x| phases.eval(x), phases.degree, 101)?;
            let a = be.extract_block_with_cap(cap)?;
            let reference = reference_matrix_function(&a.unscale(be.alpha), &realized)?;
            let block = q.block_encoding()?.extract_block_with_cap(cap)?;
            let residual = dense::spectral_norm(&(&block - &reference));
            let ok = residual <= q.error_bound;
            print(&serde_json::json!({ "residual": residual, "error_bound": q.error_bound, "degree": q.degree, "within_bound": ok }))?;
            Ok(ok)
        }
        Command::Ntca(NtcaCommand::Run { input, poly_p, poly_q, eps, gamma, variant, amplify }) => {
            let q = match poly_q {
                Some(path) => read_json(&path)?,
                None => PolynomialSpec::zero(),
            };
            let mut cfg = NtcaConfig::new(read_vector(&input)?, read_json(&poly_p)?, q, eps)
                .with_variant(parse_variant(&variant)?)
                .with_amplification(parse_amplify(&amplify)?);
            cfg.gamma = gamma;
            cfg.seed = cli.seed;
            let res = run_ntca(&cfg)?;
            emit_json(&cli.emit, &res)?;
            print(&res)?;
            Ok(res.max_point_error <= res.per_point_error_bound)
        }
        Command::Qnn(QnnCommand::Run { input, layers, eps, readout }) => {
            let c = read_vector(&input)?;
            let layers: Vec<LayerSpec> = read_json(&layers)?;
            let opts = QnnOptions::default();
            let res = multi_layer(&c, &layers, eps, &opts)?;
            let mut ok = res.max_error <= res.composed_budget;
            let mut nodes = Vec::new();
            if readout != "none" {
                let beta = readout
                    .strip_prefix("estimate:")
                    .and_then(|b| b.parse::<f64>().ok())
                    .ok_or_else(|| Error::InvalidConfig(format!("unknown readout '{readout}'")))?;
                let net = network_oracle(&c, &layers, eps, &opts)?;
                let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(cli.seed);
                let width = layers.last().map(|l| l.width).unwrap_or(0);
                nodes = estimate_nodes(net.circuit(), |k| net.node_index(k), 0..width, beta, EstimationMode::Exact, &mut rng)?;
                ok &= nodes.iter().all(|e| (e.re - e.true_value.re).abs() <= beta && (e.im - e.true_value.im).abs() <= beta);
            }
            let out = serde_json::json!({ "network": res, "nodes": nodes });
            emit_json(&cli.emit, &out)?;
            print(&out)?;
            Ok(ok)
        }
        Command::Sweep { sizes, degrees, eps, activation } => {
            let activation: SweepActivation = serde_json::from_value(serde_json::Value::String(activation))?;
            let report = scaling_sweep(&SweepSpec { sizes, degrees, epsilon: eps, activation })?;
            let csv = report.to_csv()?;
            match &cli.emit {
                Some(p) => std::fs::write(p, &csv)?,
                None => print!("{csv}"),
            }
            for (d, e) in &report.exponent_n {
                eprintln!("degree {d}: fitted exponent in N = {e:.3} (ideal 0.5)");
            }
            for (n, e) in &report.exponent_d {
                eprintln!("N = {n}: fitted exponent in d = {e:.3} (ideal 1)");
            }
            Ok(report.monotone_in_n)
        }
        Command::Run { config } => {
            let cfg = ExperimentConfig::from_json_str(&read(&config)?)?;
            let report = run_experiment(&cfg)?;
            let target = cli.emit.clone().or_else(|| cfg.output.as_ref().map(PathBuf::from));
            emit_json(&target, &report)?;
            if target.is_none() {
                print(&report)?;
            }
            for a in &report.assertions {
                eprintln!("{} {}: {}", if a.passed { "PASS" } else { "FAIL" }, a.name, a.detail);
            }
            Ok(report.passed)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("NTCA_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: a numerical check failed");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
