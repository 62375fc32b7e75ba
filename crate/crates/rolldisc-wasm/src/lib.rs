//! Browser bindings for the `rolldisc` library.
//!
//! Three operations back the static demo page in `www/`: an overlay of a
//! numerically integrated disc extremal against the closed-form geodesic
//! of its nilpotent approximation, a symmetry-orbit family of that
//! geodesic, and the cut time/point report. Each returns a self-contained
//! SVG or JSON string, so the page needs no plotting framework.
//!
//! The functions are plain Rust (`Result<String, String>`) and compile on
//! native targets, where the test suite exercises them directly;
//! `wasm-bindgen` turns the `Err` branch into a thrown JavaScript string.
//!
//! Build the browser package with
//! `wasm-pack build --target web --out-dir www/pkg`.

use rolldisc::nilgeo::{constants_from_initial, cut_point, cut_time, eval_state};
use rolldisc::plot::{curves_from_orbits, render_svg, Curve};
use rolldisc::solver::{integrate_rkf45, ExtremalState, SolverOptions, SystemKind};
use rolldisc::symmetry::{orbit_closed, orbit_numeric, symmetry_field, ClosedFlow, OrbitCurve};
use serde_json::json;
use wasm_bindgen::prelude::wasm_bindgen;

/// Relative tolerance of the integrator behind the demo; fixed rather
/// than user-facing to keep the page responsive.
const REL_TOL: f64 = 1e-9;
/// Tolerance of the numerically integrated symmetry flows (t5, t7, t8).
const FLOW_TOL: f64 = 1e-9;
/// Hard cap on the sample count a single call may render.
const MAX_GRID: usize = 4001;

fn validate(horizon: f64, grid: usize) -> Result<(), String> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(format!("horizon must be positive and finite, got {horizon}"));
    }
    if !(2..=MAX_GRID).contains(&grid) {
        return Err(format!("grid must be between 2 and {MAX_GRID}, got {grid}"));
    }
    Ok(())
}

fn uniform_times(horizon: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| horizon * i as f64 / (n - 1) as f64).collect()
}

/// Overlay of the integrated disc extremal and the closed-form
/// approximation geodesic from the covector `(h1, h2, h3)`, drawn in the
/// `(x, y)` plane. The title reports the sup-norm gap between the curves.
#[wasm_bindgen]
pub fn compare_svg(h1: f64, h2: f64, h3: f64, horizon: f64, grid: usize) -> Result<String, String> {
    validate(horizon, grid)?;
    let s0 = ExtremalState::from_covector(h1, h2, h3);
    let opts = SolverOptions {
        rel_tol: REL_TOL,
        abs_tol: REL_TOL * 1e-2,
        max_step: None,
        grid: Some(grid),
    };
    let traj = integrate_rkf45(SystemKind::Original.rhs(), &s0, horizon, &opts)
        .map_err(|e| e.to_string())?;

    // The approximation is evaluated in closed form at the exact times of
    // the numeric trajectory, so the gap carries no interpolation error.
    let c = constants_from_initial([h1, h2, h3]);
    let closed: Vec<[f64; 3]> = traj
        .times
        .iter()
        .map(|&t| {
            let s = eval_state(&c, t);
            [s.x, s.y, s.theta]
        })
        .collect();
    let gap = traj
        .states
        .iter()
        .zip(&closed)
        .map(|(a, b)| {
            (a.x - b[0])
                .abs()
                .max((a.y - b[1]).abs())
                .max((a.theta - b[2]).abs())
        })
        .fold(0.0f64, f64::max);

    let curves = [
        Curve::from_trajectory(&traj, "original"),
        Curve::new("nilpotent", traj.times.clone(), closed).map_err(|e| e.to_string())?,
    ];
    let title = format!("original vs nilpotent, sup gap {gap:.2e}");
    Ok(render_svg(&curves, (0, 1), &title))
}

/// Orbit family of the approximation geodesic under the symmetry `sym`
/// (one of `t0 … t8`), one curve per comma-separated entry of `s_values`.
#[wasm_bindgen]
pub fn orbit_svg(
    sym: &str,
    s_values: &str,
    h1: f64,
    h2: f64,
    h3: f64,
    horizon: f64,
    grid: usize,
) -> Result<String, String> {
    validate(horizon, grid)?;
    let k: usize = sym
        .trim()
        .strip_prefix('t')
        .and_then(|d| d.parse().ok())
        .filter(|&k| k <= 8)
        .ok_or_else(|| format!("symmetry must be one of t0 … t8, got `{sym}`"))?;
    let s: Vec<f64> = s_values
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| {
            v.parse()
                .map_err(|_| format!("`{v}` is not a number"))
        })
        .collect::<Result<_, String>>()?;
    if s.is_empty() {
        return Err("at least one s value is required".into());
    }

    let c = constants_from_initial([h1, h2, h3]);
    let times = uniform_times(horizon, grid);
    let base: Vec<Vec<f64>> = times
        .iter()
        .map(|&t| {
            let st = eval_state(&c, t);
            vec![st.x, st.y, st.theta]
        })
        .collect();

    let orbits: Vec<OrbitCurve> = match k {
        0 => orbit_closed(&ClosedFlow::Rotation, &s, &base),
        1 => orbit_closed(&ClosedFlow::Translation { b1: 1.0, b2: 0.0, b3: 0.0 }, &s, &base),
        2 => orbit_closed(&ClosedFlow::Translation { b1: 0.0, b2: 1.0, b3: 0.0 }, &s, &base),
        3 => orbit_closed(&ClosedFlow::Translation { b1: 0.0, b2: 0.0, b3: 1.0 }, &s, &base),
        4 => orbit_closed(&ClosedFlow::Dilation, &s, &base),
        6 => orbit_closed(&ClosedFlow::Projective, &s, &base),
        k => orbit_numeric(&symmetry_field(k), &s, &base, FLOW_TOL),
    }
    .map_err(|e| e.to_string())?;

    let curves = curves_from_orbits(&orbits, &times).map_err(|e| e.to_string())?;
    Ok(render_svg(&curves, (0, 1), &format!("t{k} orbit family")))
}

/// Cut time and cut point of the approximation geodesic from
/// `(h1, h2, h3)`, as JSON. Degenerate covectors (`h3 = 0` or
/// `h1 = h2 = 0`) yield a report with an `error` field instead.
#[wasm_bindgen]
pub fn cutpoint_json(h1: f64, h2: f64, h3: f64) -> String {
    let c = constants_from_initial([h1, h2, h3]);
    let doc = match (cut_time(&c), cut_point(&c)) {
        (Some(t), Some(p)) => json!({
            "schema_version": 1,
            "h": [h1, h2, h3],
            "cut_time": t,
            "cut_point": p,
        }),
        _ => json!({
            "schema_version": 1,
            "h": [h1, h2, h3],
            "error": "degenerate: h3 = 0 or h1 = h2 = 0; the geodesic is optimal forever",
        }),
    };
    serde_json::to_string_pretty(&doc).expect("JSON serializes")
}
