use ntca_wasm::{block_encode, tanh_fit, transform};
use serde_json::Value;

fn json(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn block_encode_reports_fields_the_page_reads() {
    let v = json(block_encode("[[0.5, 0.1], [-0.3, 0.6], [0.2, -0.4], 0.3]", "real").unwrap());
    for key in ["spectrum", "targets", "hermiticity_residual", "width", "queries"] {
        assert!(!v[key].is_null(), "{key}");
    }
    assert_eq!(v["queries"]["u"], 2);
    assert_eq!(v["spectrum"].as_array().unwrap().len(), 1 << (v["width"].as_u64().unwrap() - 1));
}

#[test]
fn transform_handles_every_menu_entry() {
    let input = "[[0.4, 0.2], [0.1, -0.5], [-0.6, 0.1], [0.3, 0.25]]";
    for p in ["identity", "square", "tanh"] {
        for q in ["identity", "square", "tanh", "zero"] {
            let v = json(transform(input, p, q, 1e-3).unwrap());
            assert!(v["max_point_error"].as_f64().unwrap() <= v["error_bound"].as_f64().unwrap(), "{p} {q}");
            assert_eq!(v["output"].as_array().unwrap().len(), 4);
        }
    }
    let custom = json(transform(input, r#"{"monomial": [[0,0],[0.5,0]]}"#, "zero", 1e-3).unwrap());
    assert!((custom["fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn fit_degree_grows_as_eps_shrinks() {
    let d = |eps: f64| json(tanh_fit(eps, "taylor").unwrap())["degree"].as_u64().unwrap();
    assert!(d(1e-2) < d(1e-4));
    assert!(tanh_fit(1e-3, "pade").is_err());
}
