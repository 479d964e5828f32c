//! Browser bindings. Every function returns a flat `Float64Array`-compatible
//! vector so the page can plot it without parsing.

use wasm_bindgen::prelude::*;

use asep_lab::kpz::{she_moment_nested, Boundary, ContourSpec, KpzParams};
use asep_lab::model::{ModelParams, OrderedSites};
use asep_lab::moments::{first_moment_closed, QuadratureSpec};
use asep_lab::simulator::{estimate, SimConfig, SimModel};

fn js_err(e: asep_lab::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn params(q: f64, rho: f64) -> Result<ModelParams, JsError> {
    ModelParams::with_rho_f64(1.0, q, rho).map_err(js_err)
}

/// E[q^{N_x(t)}] for x = 1..=x_max from the exact formula (𝗉 = 1, 𝗊 = q).
#[wasm_bindgen]
pub fn first_moment_profile(t: f64, q: f64, rho: f64, x_max: u32) -> Result<Vec<f64>, JsError> {
    let m = params(q, rho)?;
    let quad = QuadratureSpec::auto();
    (1..=x_max as i64).map(|x| first_moment_closed(t, x, &m, &quad).map_err(js_err)).collect()
}

/// Monte Carlo estimates of the same profile: `[mean_1, se_1, mean_2, se_2, …]`.
#[wasm_bindgen]
pub fn monte_carlo_profile(t: f64, q: f64, rho: f64, x_max: u32, trajectories: u32, seed: u32) -> Result<Vec<f64>, JsError> {
    let cfg = SimConfig {
        model: SimModel::HalfLine(params(q, rho)?),
        t_end: t,
        trajectories: trajectories as usize,
        seed: seed as u64,
        observables: (1..=x_max as i64).map(|x| OrderedSites::raw(vec![x])).collect(),
    };
    let rep = estimate(&cfg).map_err(js_err)?;
    Ok(rep.estimates.iter().flat_map(|e| [e.mean, e.std_error]).collect())
}

/// E[Z(t, x)] for the Robin half-line heat equation on an even grid of `points` values in [0, x_max].
#[wasm_bindgen]
pub fn she_first_moment(a: f64, t: f64, x_max: f64, points: u32) -> Result<Vec<f64>, JsError> {
    let contours = ContourSpec::standard(1);
    (0..points.max(2))
        .map(|i| {
            let x = x_max * i as f64 / (points.max(2) - 1) as f64;
            let k = KpzParams::new(Boundary::Robin { a }, t, vec![x]).map_err(js_err)?;
            she_moment_nested(&k, &contours).map(|r| r.value).map_err(js_err)
        })
        .collect()
}
