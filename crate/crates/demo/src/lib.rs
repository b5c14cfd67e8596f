//! Browser bindings for the law catalog: JSON-in, JSON-out wrappers thin
//! enough to drive from a static page. Errors come back as `{"error": ...}`
//! objects instead of thrown exceptions so the page can render them inline.
//!
//! Build for the web with `wasm-pack build --target web crates/demo` (or
//! `cargo build --target wasm32-unknown-unknown` plus `wasm-bindgen`); the
//! functions are ordinary Rust on native targets, which is how the unit
//! tests drive them.

use std::collections::BTreeMap;

use lattice_laws::checks::{run_suite, SUITE_NAMES};
use lattice_laws::laws::LawSpec;
use lattice_laws::series::pow_int;
use wasm_bindgen::prelude::*;

fn error_json(msg: impl std::fmt::Display) -> String {
    serde_json::json!({ "error": msg.to_string() }).to_string()
}

fn parse_params(params_json: &str) -> Result<BTreeMap<String, f64>, String> {
    if params_json.trim().is_empty() {
        return Ok(BTreeMap::new());
    }
    serde_json::from_str(params_json).map_err(|e| format!("bad parameter object: {e}"))
}

/// Families the page can offer, in catalog order.
#[wasm_bindgen]
pub fn family_names_json() -> String {
    let names = [
        "bernoulli",
        "alpha-bernoulli",
        "binomial",
        "alpha-binomial",
        "poisson",
        "alpha-poisson",
        "geometric0",
        "geometric-shifted",
        "dml",
        "dss",
        "dsml",
        "degenerate-at-one",
    ];
    serde_json::json!(names).to_string()
}

/// Verification suites, in the fixed output order.
#[wasm_bindgen]
pub fn suite_names_json() -> String {
    serde_json::json!(SUITE_NAMES).to_string()
}

/// pmf table of one law: `{"law", "order", "p": [...], "tail_mass"}`, or a
/// violation report when the candidate pmf has genuinely negative
/// coefficients.
#[wasm_bindgen]
pub fn pmf_json(family: &str, params_json: &str, order: usize) -> String {
    let params = match parse_params(params_json) {
        Ok(p) => p,
        Err(e) => return error_json(e),
    };
    let law = match LawSpec::from_params(family, &params) {
        Ok(law) => law,
        Err(e) => return error_json(e),
    };
    match law.pmf(order) {
        Ok(pmf) => serde_json::json!({
            "law": law.to_string(),
            "order": order,
            "p": pmf.series.coeffs(),
            "tail_mass": pmf.tail_mass,
        })
        .to_string(),
        Err(e) => error_json(e),
    }
}

/// Runs one named verification suite and returns its report.
#[wasm_bindgen]
pub fn verify_json(suite: &str, params_json: &str) -> String {
    let params = match parse_params(params_json) {
        Ok(p) => p,
        Err(e) => return error_json(e),
    };
    match run_suite(suite, &params) {
        Ok(report) => serde_json::to_string(&report).expect("reports serialize"),
        Err(e) => error_json(e),
    }
}

/// The Mittag-Leffler-to-stable convergence picture: the n-fold
/// convolution of DML(lambda/n, alpha) against the alpha-Poisson limit,
/// with the largest coefficient gap.
#[wasm_bindgen]
pub fn convergence_json(lambda: f64, alpha: f64, n: u32, order: usize) -> String {
    if n < 1 {
        return error_json("n must be at least 1");
    }
    let step = match LawSpec::dml(lambda / n as f64, alpha) {
        Ok(law) => law,
        Err(e) => return error_json(e),
    };
    let limit = match LawSpec::alpha_poisson(lambda, alpha) {
        Ok(law) => law,
        Err(e) => return error_json(e),
    };
    let approx = match step.pmf_series(order) {
        Ok(s) => pow_int(&s, n),
        Err(e) => return error_json(e),
    };
    let limit_pmf = match limit.pmf_series(order) {
        Ok(s) => s,
        Err(e) => return error_json(e),
    };
    let gap = approx
        .coeffs()
        .iter()
        .zip(limit_pmf.coeffs())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    serde_json::json!({
        "lambda": lambda,
        "alpha": alpha,
        "n": n,
        "order": order,
        "approx": approx.coeffs(),
        "limit": limit_pmf.coeffs(),
        "max_gap": gap,
    })
    .to_string()
}
