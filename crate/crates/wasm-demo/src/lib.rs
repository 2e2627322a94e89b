//! WebAssembly bindings behind the static page in `www/`.
//!
//! Every export returns a flat `Float64Array`; the row layout is given on
//! each function. The `*_rows` functions hold the logic as plain Rust so
//! they can be tested natively.

use std::sync::Arc;

use tempered_ldg::dg::DgFunction;
use tempered_ldg::mesh::uniform_mesh;
use tempered_ldg::problems::{example_4_3, Problem, EXAMPLE_4_3_DOMAIN};
use tempered_ldg::solver::{InitialData, SchemeConfig, Solver};
use tempered_ldg::study::{random_coefficients, spatial_study, MeshKind, StudyOptions};
use wasm_bindgen::prelude::*;

/// Caps that keep a single call interactive in a browser tab.
pub const MAX_CELLS: usize = 2000;
pub const MAX_STEPS: usize = 20_000;
pub const MAX_DEGREE: usize = 4;

const STUDY_CELLS: [usize; 4] = [5, 10, 20, 40];

fn check_sizes(k: usize, cells: usize, steps: usize) -> Result<(), String> {
    if k > MAX_DEGREE {
        return Err(format!("degree k = {k} exceeds the demo limit {MAX_DEGREE}"));
    }
    if !(2..=MAX_CELLS).contains(&cells) {
        return Err(format!("cell count {cells} outside 2..={MAX_CELLS}"));
    }
    if !(1..=MAX_STEPS).contains(&steps) {
        return Err(format!("step count {steps} outside 1..={MAX_STEPS}"));
    }
    Ok(())
}

/// `(x, u)` at `samples` equispaced points per cell, cell ends included.
fn sample(u: &DgFunction, samples: usize) -> Vec<(f64, f64)> {
    let samples = samples.max(2);
    let mesh = u.mesh();
    let mut out = Vec::with_capacity(mesh.num_cells() * samples);
    for j in 0..mesh.num_cells() {
        for s in 0..samples {
            let xi = -1.0 + 2.0 * s as f64 / (samples - 1) as f64;
            out.push((mesh.to_physical(j, xi), u.eval_in_cell(j, xi)));
        }
    }
    out
}

/// Gaussian pulse `e^{-5(x-3)^2}` on `[0, 6]` with `f = 0`.
///
/// Returns triples `[x, u_h(x, 0), u_h(x, T)]`.
#[allow(clippy::too_many_arguments)]
pub fn pulse_rows(
    alpha: f64,
    gamma: f64,
    delta: f64,
    k: usize,
    cells: usize,
    steps: usize,
    final_time: f64,
    samples: usize,
) -> Result<Vec<f64>, String> {
    check_sizes(k, cells, steps)?;
    let problem = example_4_3(gamma, alpha, EXAMPLE_4_3_DOMAIN).map_err(|e| e.to_string())?;
    let (a, b) = problem.domain();
    let mesh = Arc::new(uniform_mesh(a, b, cells).map_err(|e| e.to_string())?);
    let cfg = SchemeConfig::for_problem(&problem, delta, k, mesh, steps, final_time);
    let mut solver =
        Solver::setup(cfg, InitialData::Function(&**problem.initial())).map_err(|e| e.to_string())?;
    let start = sample(&solver.u(), samples);
    solver.run(None).map_err(|e| e.to_string())?;
    let end = sample(&solver.u(), samples);
    Ok(start.iter().zip(&end).flat_map(|(&(x, u0), &(_, ut))| [x, u0, ut]).collect())
}

/// Spatial refinement over `N = 5, 10, 20, 40` on `[0, 1]` at `T = 1`.
///
/// `problem` is `"ex4.1"` or `"ex4.2"`. Returns rows
/// `[N, h_max, l2_error, l2_order, linf_error, linf_order]`; orders are NaN
/// on the first row.
#[allow(clippy::too_many_arguments)]
pub fn convergence_rows(
    problem: &str,
    alpha: f64,
    gamma: f64,
    delta: f64,
    k: usize,
    steps: usize,
    perturbed: bool,
    seed: u64,
) -> Result<Vec<f64>, String> {
    check_sizes(k, STUDY_CELLS[3], steps)?;
    let problem = match problem {
        "ex4.1" | "ex4.2" => Problem::by_label(problem, gamma, alpha, None).map_err(|e| e.to_string())?,
        other => return Err(format!("unknown problem '{other}' (expected ex4.1 or ex4.2)")),
    };
    let mesh = if perturbed { MeshKind::Perturbed { seed } } else { MeshKind::Uniform };
    let opts = StudyOptions {
        threads: Some(0),
        record_timing: false,
        ..StudyOptions::default()
    };
    let r = spatial_study(&problem, delta, k, &STUDY_CELLS, steps, 1.0, mesh, &opts).map_err(|e| e.to_string())?;
    if let Some(f) = r.failure {
        return Err(f);
    }
    Ok(r.rows
        .iter()
        .flat_map(|row| {
            [
                row.param,
                row.scale,
                row.l2_error,
                row.l2_order.unwrap_or(f64::NAN),
                row.linf_error,
                row.linf_order.unwrap_or(f64::NAN),
            ]
        })
        .collect())
}

/// Unforced run from seeded random coefficients on `[0, 1]`.
///
/// Returns `‖u^n‖ / ‖u^0‖` for `n = 0..=steps`.
#[allow(clippy::too_many_arguments)]
pub fn stability_rows(
    alpha: f64,
    gamma: f64,
    delta: f64,
    k: usize,
    cells: usize,
    tau: f64,
    steps: usize,
    seed: u64,
) -> Result<Vec<f64>, String> {
    check_sizes(k, cells, steps)?;
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(format!("time step must be positive, got {tau}"));
    }
    let mesh = Arc::new(uniform_mesh(0.0, 1.0, cells).map_err(|e| e.to_string())?);
    let cfg = SchemeConfig {
        alpha,
        gamma,
        rho: 0.0,
        delta,
        degree: k,
        mesh,
        steps,
        final_time: tau * steps as f64,
        initial_projection: Default::default(),
        quad_order: tempered_ldg::basis::default_quad_order(k),
        check_stability: false,
    };
    let u0 = random_coefficients(seed, 0, cells * (k + 1));
    let mut solver = Solver::setup(cfg, InitialData::Coefficients(u0)).map_err(|e| e.to_string())?;
    solver.run(None).map_err(|e| e.to_string())?;
    let norms = &solver.diagnostics().norms;
    Ok(norms.iter().map(|n| n / norms[0]).collect())
}

fn js(r: Result<Vec<f64>, String>) -> Result<Vec<f64>, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn pulse(
    alpha: f64,
    gamma: f64,
    delta: f64,
    k: usize,
    cells: usize,
    steps: usize,
    final_time: f64,
    samples: usize,
) -> Result<Vec<f64>, JsValue> {
    js(pulse_rows(alpha, gamma, delta, k, cells, steps, final_time, samples))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn convergence(
    problem: &str,
    alpha: f64,
    gamma: f64,
    delta: f64,
    k: usize,
    steps: usize,
    perturbed: bool,
    seed: u32,
) -> Result<Vec<f64>, JsValue> {
    js(convergence_rows(problem, alpha, gamma, delta, k, steps, perturbed, seed as u64))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn stability_trace(
    alpha: f64,
    gamma: f64,
    delta: f64,
    k: usize,
    cells: usize,
    tau: f64,
    steps: usize,
    seed: u32,
) -> Result<Vec<f64>, JsValue> {
    js(stability_rows(alpha, gamma, delta, k, cells, tau, steps, seed as u64))
}
