//! Browser bindings. Every export takes and returns JSON strings so the page
//! needs no generated typings; errors come back as plain messages.

use ntca::block_encoding::{build_gtilde, AmplitudePart};
use ntca::dense::{hermitian_eigenvalues, hermiticity_residual};
use ntca::ntca::{run_ntca, NtcaConfig};
use ntca::oracle::{synthesize_state_prep, AmplitudeVector};
use ntca::poly::{fit_tanh, FitMethod, PolynomialSpec};
use ntca::statevector::C64;
use serde_json::json;
use wasm_bindgen::prelude::*;

const PLOT_POINTS: usize = 201;

fn fail(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Parses `[[re, im], ...]` or `[x, ...]` and rescales to unit norm.
fn parse_input(input: &str) -> Result<AmplitudeVector, String> {
    let v: serde_json::Value = serde_json::from_str(input).map_err(fail)?;
    let rows = v.as_array().ok_or("expected a JSON array")?;
    let mut entries = Vec::with_capacity(rows.len());
    for r in rows {
        let z = match r {
            serde_json::Value::Number(x) => C64::new(x.as_f64().unwrap_or(f64::NAN), 0.0),
            serde_json::Value::Array(p) if p.len() == 2 => C64::new(
                p[0].as_f64().ok_or("non-numeric entry")?,
                p[1].as_f64().ok_or("non-numeric entry")?,
            ),
            _ => return Err("entries must be numbers or [re, im] pairs".into()),
        };
        entries.push(z);
    }
    AmplitudeVector::normalize(entries).map_err(fail)
}

/// `eps` is the per-part approximation budget.
fn activation(name: &str, eps: f64) -> Result<PolynomialSpec, String> {
    match name {
        "identity" => Ok(PolynomialSpec::identity()),
        "square" => Ok(PolynomialSpec::from_real_monomial("x^2", &[0.0, 0.0, 1.0])),
        "tanh" => fit_tanh(FitMethod::Taylor, eps).map_err(fail),
        "zero" => Ok(PolynomialSpec::zero()),
        other => serde_json::from_str(other).map_err(fail),
    }
}

/// Spectrum of the block encoding of `Re c` or `Im c`.
#[wasm_bindgen]
pub fn block_encode(input: &str, part: &str) -> Result<String, String> {
    let c = parse_input(input)?;
    let part = match part {
        "real" => AmplitudePart::Real,
        "imag" => AmplitudePart::Imag,
        _ => return Err(format!("unknown part '{part}'")),
    };
    let be = build_gtilde(&synthesize_state_prep(&c), part).map_err(fail)?;
    let block = be.extract_block().map_err(fail)?;
    let spectrum = hermitian_eigenvalues(&block, 1e-9).map_err(fail)?;
    let targets = match part {
        AmplitudePart::Real => c.real_parts(),
        AmplitudePart::Imag => c.imag_parts(),
    };
    Ok(json!({
        "amplitudes": c.entries(),
        "spectrum": spectrum,
        "targets": targets,
        "hermiticity_residual": hermiticity_residual(&block),
        "width": be.width(),
        "queries": be.circuit.queries(),
    })
    .to_string())
}

/// Runs the full transform with `P` applied to real parts and `Q` to
/// imaginary parts. Activations are `identity`, `square`, `tanh`, `zero` or a
/// polynomial JSON object.
#[wasm_bindgen]
pub fn transform(input: &str, p: &str, q: &str, eps: f64) -> Result<String, String> {
    let c = parse_input(input)?;
    let part = eps / (4.0 * c.len() as f64);
    let cfg = NtcaConfig::new(c, activation(p, part)?, activation(q, part)?, eps);
    let r = run_ntca(&cfg).map_err(fail)?;
    Ok(json!({
        "expected": r.expected_amplitudes,
        "output": r.output_amplitudes,
        "success_probability": r.success_probability,
        "fidelity": r.fidelity_vs_target,
        "max_point_error": r.max_point_error,
        "error_bound": r.per_point_error_bound,
        "queries": r.queries_per_invocation,
        "flag_qubits": r.flag_qubits,
        "gamma": r.gamma,
    })
    .to_string())
}

/// Smallest polynomial approximating `tanh` on [-1, 1] to `eps`, sampled for
/// plotting.
#[wasm_bindgen]
pub fn tanh_fit(eps: f64, method: &str) -> Result<String, String> {
    let method: FitMethod = method.parse().map_err(fail)?;
    let p = fit_tanh(method, eps).map_err(fail)?;
    let xs: Vec<f64> = (0..PLOT_POINTS).map(|i| -1.0 + 2.0 * i as f64 / (PLOT_POINTS - 1) as f64).collect();
    let fit: Vec<f64> = xs.iter().map(|&x| p.eval(x).re).collect();
    let target: Vec<f64> = xs.iter().map(|x| x.tanh()).collect();
    Ok(json!({
        "label": p.label,
        "degree": p.degree,
        "certified_error": p.certified_error,
        "coefficients": p.real_coefficients(),
        "xs": xs,
        "fit": fit,
        "target": target,
    })
    .to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> serde_json::Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn spectrum_contains_targets() {
        let out = parse(&block_encode("[0.6, [0, 0.8]]", "imag").unwrap());
        let spec: Vec<f64> = serde_json::from_value(out["spectrum"].clone()).unwrap();
        for t in [0.0, 0.8] {
            assert!(spec.iter().any(|s| (s - t).abs() < 1e-9));
        }
    }

    #[test]
    fn unnormalized_input_is_rescaled() {
        let out = parse(&block_encode("[3, 4]", "real").unwrap());
        assert!((out["targets"][1].as_f64().unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn transform_identity() {
        let out = parse(&transform("[[0.6, 0], [0, 0.8]]", "identity", "identity", 1e-3).unwrap());
        assert!((out["fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-9);
        let out = parse(&transform("[[0.4, 0.2], [0.1, -0.5], [-0.6, 0.1], [0.3, 0.25]]", "tanh", "square", 1e-3).unwrap());
        assert!(out["max_point_error"].as_f64().unwrap() <= out["error_bound"].as_f64().unwrap());
    }

    #[test]
    fn tanh_fit_is_close() {
        let out = parse(&tanh_fit(1e-3, "chebyshev").unwrap());
        let fit: Vec<f64> = serde_json::from_value(out["fit"].clone()).unwrap();
        let target: Vec<f64> = serde_json::from_value(out["target"].clone()).unwrap();
        let worst = fit.iter().zip(&target).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(worst <= 1e-3);
    }

    #[test]
    fn errors_are_messages() {
        assert!(block_encode("{}", "real").is_err());
        assert!(block_encode("[1]", "sideways").is_err());
        assert!(transform("[1, 1]", "zero", "zero", 1e-3).is_err());
    }
}
