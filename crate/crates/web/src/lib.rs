//! Browser bindings: each export takes expression strings and grid
//! parameters and returns a JSON string for the page to plot.

use serde_json::{json, Value};
use varlp::experiments::{falsify, FalsifyOptions};
use varlp::modular::DEFAULT_RTOL;
use varlp::{luxemburg_norm, maximal_fast, modular, parse, ExponentField, GridDomain, GridFunction};
use wasm_bindgen::prelude::*;

const MAX_CELLS: usize = 20_000;

fn interval(a: f64, b: f64, h: f64) -> Result<GridDomain, String> {
    let cells = (b - a) / h;
    if h <= 0.0 || cells.is_nan() || cells > MAX_CELLS as f64 {
        return Err(format!("at most {MAX_CELLS} cells, pick a larger h"));
    }
    GridDomain::interval(a, b, h).map_err(|e| e.to_string())
}

fn function(src: &str, dom: &GridDomain) -> Result<GridFunction, String> {
    let e = parse(src).map_err(|e| format!("f: {e}"))?;
    GridFunction::sample(&e, dom).map_err(|e| format!("f: {e}"))
}

fn exponent(name: &str, src: &str, dom: &GridDomain) -> Result<ExponentField, String> {
    let e = parse(src).map_err(|e| format!("{name}: {e}"))?;
    ExponentField::sample(&e, dom).map_err(|e| format!("{name}: {e}"))
}

fn centers(dom: &GridDomain) -> Vec<f64> {
    dom.cells().map(|i| dom.center(i)[0]).collect()
}

pub fn maximal_profile_value(f: &str, a: f64, b: f64, h: f64) -> Result<Value, String> {
    let dom = interval(a, b, h)?;
    let f = function(f, &dom)?;
    let m = maximal_fast(&f);
    Ok(json!({
        "x": centers(&dom),
        "f": f.values(),
        "mf": m.mf.values(),
        "windows": m.windows.iter().map(|w| [w.start[0], w.len as i64]).collect::<Vec<_>>(),
    }))
}

/// `λ ↦ ρ(f/λ)` on a log-spaced range around the norm, plus the norm itself.
pub fn luxemburg_curve_value(p: &str, f: &str, a: f64, b: f64, h: f64) -> Result<Value, String> {
    let dom = interval(a, b, h)?;
    let p = exponent("p", p, &dom)?;
    let f = function(f, &dom)?;
    let norm = luxemburg_norm(&f, &p, &dom, DEFAULT_RTOL).map_err(|e| e.to_string())?;
    let centre = if norm > 0.0 { norm } else { 1.0 };
    let mut lambdas = Vec::new();
    let mut rho = Vec::new();
    for k in -40..=40 {
        let lambda = centre * 2f64.powf(k as f64 / 20.0);
        let scaled = f.scale(1.0 / lambda).map_err(|e| e.to_string())?;
        let m = modular(&scaled, &p, &dom).map_err(|e| e.to_string())?;
        lambdas.push(lambda);
        rho.push(if m.overflow { Value::Null } else { json!(m.value) });
    }
    Ok(json!({ "norm": norm, "lambda": lambdas, "rho": rho }))
}

pub fn falsify_trajectory_value(p: &str, q: &str, a: f64, b: f64, h: f64, budget: u32) -> Result<Value, String> {
    let dom = interval(a, b, h)?;
    let p = exponent("p", p, &dom)?;
    let q = exponent("q", q, &dom)?;
    let opts = FalsifyOptions {
        budget: budget.clamp(1, 60),
        ..FalsifyOptions::default()
    };
    let outcome = falsify(&p, &q, &dom, &opts).map_err(|e| e.to_string())?;
    let mut doc = serde_json::to_value(&outcome).map_err(|e| e.to_string())?;
    if let Some(w) = doc.as_object_mut() {
        // Cell lists are large and the page only needs their measures.
        w.remove("e_alpha");
        w.remove("e_beta");
    }
    Ok(doc)
}

fn respond(r: Result<Value, String>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn maximal_profile(f: &str, a: f64, b: f64, h: f64) -> Result<String, JsError> {
    respond(maximal_profile_value(f, a, b, h))
}

#[wasm_bindgen]
pub fn luxemburg_curve(p: &str, f: &str, a: f64, b: f64, h: f64) -> Result<String, JsError> {
    respond(luxemburg_curve_value(p, f, a, b, h))
}

#[wasm_bindgen]
pub fn falsify_trajectory(p: &str, q: &str, a: f64, b: f64, h: f64, budget: u32) -> Result<String, JsError> {
    respond(falsify_trajectory_value(p, q, a, b, h, budget))
}
