//! Browser bindings for the static demo page in `www/`.
//!
//! The plain functions return JSON text and are usable from native tests; the
//! `#[wasm_bindgen]` wrappers convert their errors into JS exceptions.

use cpmilp::bench::{maxcut, maxcut_brute_force, Graph};
use cpmilp::linearize::linearize_model;
use cpmilp::milp::write_lp_string;
use cpmilp::modelfile::parse_model;
use cpmilp::solver::{solve, SolveParams};
use serde_json::{json, Map, Value};
use wasm_bindgen::prelude::*;

/// Largest graph for which the demo also reports the brute-force optimum.
pub const BRUTE_FORCE_LIMIT: usize = 16;

fn params(time_limit: f64) -> SolveParams {
    if time_limit > 0.0 && time_limit.is_finite() {
        SolveParams::default().with_time_limit(time_limit)
    } else {
        SolveParams::default()
    }
}

/// Parses a JSON model, solves it with the embedded solver and reports the result.
/// A non-positive `time_limit` means no limit.
pub fn solve_model(text: &str, time_limit: f64) -> Result<String, String> {
    let model = parse_model(text).map_err(|e| e.to_string())?;
    let lin = linearize_model(&model).map_err(|e| e.to_string())?;
    let sol = solve(&lin.program, &params(time_limit)).map_err(|e| e.to_string())?;
    let mut assignment = Map::new();
    if let Some(x) = &sol.assignment {
        for (var, v) in model.vars().iter().zip(lin.project(x)) {
            assignment.insert(var.name.clone(), json!(v));
        }
    }
    let st = lin.program.stats();
    Ok(json!({
        "status": format!("{:?}", sol.status),
        "objective": sol.objective_value,
        "assignment": assignment,
        "vars": st.vars(),
        "binaries": st.binaries,
        "constraints": st.rows(),
        "nodes": sol.nodes,
        "millis": sol.wall_time.as_secs_f64() * 1000.0,
    })
    .to_string())
}

/// Linearizes a JSON model and returns it in LP format.
pub fn export_model(text: &str) -> Result<String, String> {
    let model = parse_model(text).map_err(|e| e.to_string())?;
    let lin = linearize_model(&model).map_err(|e| e.to_string())?;
    Ok(write_lp_string(&lin.program))
}

/// Solves Max-Cut on a seeded random graph and returns the graph with the cut.
pub fn maxcut_random(n: usize, density: f64, seed: u64, time_limit: f64) -> Result<String, String> {
    if !(2..=24).contains(&n) {
        return Err(format!("vertex count must be between 2 and 24, got {n}"));
    }
    if !(0.0..=1.0).contains(&density) {
        return Err(format!("density must be in [0, 1], got {density}"));
    }
    let g = Graph::random(n, density, seed);
    let lin = linearize_model(&maxcut(&g)).map_err(|e| e.to_string())?;
    let sol = solve(&lin.program, &params(time_limit)).map_err(|e| e.to_string())?;
    let side: Vec<bool> = match &sol.assignment {
        Some(x) => lin.project(x)[..n].iter().map(|&v| v > 0.0).collect(),
        None => vec![false; n],
    };
    let edges: Vec<Value> = g.edges.iter().map(|&(u, v, w)| json!([u, v, w])).collect();
    Ok(json!({
        "n": n,
        "edges": edges,
        "side": side,
        "cut": g.cut_weight(&side),
        "status": format!("{:?}", sol.status),
        "brute_force": (n <= BRUTE_FORCE_LIMIT).then(|| maxcut_brute_force(&g)),
        "nodes": sol.nodes,
        "millis": sol.wall_time.as_secs_f64() * 1000.0,
    })
    .to_string())
}

#[wasm_bindgen(js_name = solveModel)]
pub fn solve_model_js(text: &str, time_limit: f64) -> Result<String, JsError> {
    solve_model(text, time_limit).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = exportLp)]
pub fn export_lp_js(text: &str) -> Result<String, JsError> {
    export_model(text).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = maxcutDemo)]
pub fn maxcut_demo_js(n: usize, density: f64, seed: u32, time_limit: f64) -> Result<String, JsError> {
    maxcut_random(n, density, seed as u64, time_limit).map_err(|e| JsError::new(&e))
}
