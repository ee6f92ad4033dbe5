//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each export takes plain numbers and returns a JSON string, so the page
//! needs no generated type glue beyond `wasm-bindgen`'s own. The pure-Rust
//! functions underneath are what the native tests exercise.

use hawkes_ldp::empirical::{empirical_functional, WindowFunctional};
use hawkes_ldp::{
    intensity_at, mean_matched_proposal, rare_event_probability, simulate_path, IntensityModel, LinearRateParams,
    SimConfig, Tail,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Most points a simulated intensity trace will be sampled at.
const TRACE_POINTS: usize = 1500;

#[derive(Debug, Serialize)]
pub struct RateCurve {
    pub mean: f64,
    pub x: Vec<f64>,
    pub rate: Vec<f64>,
}

/// `I(x)` for a linear Hawkes process on `points` equally spaced `x`.
pub fn rate_curve(nu: f64, hnorm: f64, stop: f64, points: usize) -> Result<RateCurve, String> {
    let params = LinearRateParams::new(nu, hnorm).map_err(|e| e.to_string())?;
    if !(stop > 0.0 && stop.is_finite()) || points < 2 {
        return Err("need stop > 0 and at least two points".into());
    }
    let x: Vec<f64> = (0..points).map(|i| stop * i as f64 / (points - 1) as f64).collect();
    let rate = x.iter().map(|&x| params.rate_function(x)).collect();
    Ok(RateCurve {
        mean: params.mean(),
        x,
        rate,
    })
}

#[derive(Debug, Serialize)]
pub struct PathTrace {
    pub horizon: f64,
    pub events: Vec<f64>,
    pub t: Vec<f64>,
    pub intensity: Vec<f64>,
    pub rate: f64,
    pub mean: Option<f64>,
    pub window: f64,
    pub window_count: f64,
}

/// One linear exponential Hawkes path from empty history, with its intensity
/// sampled on a grid plus just before and after every event, and the
/// empirical-measure average of `N[s, s + window]`.
pub fn path_trace(
    nu: f64,
    amplitude: f64,
    decay: f64,
    horizon: f64,
    seed: u64,
    window: f64,
) -> Result<PathTrace, String> {
    let model = IntensityModel::linear_exponential(nu, amplitude, decay).map_err(|e| e.to_string())?;
    let mut cfg = SimConfig::new(seed, horizon);
    cfg.max_events = 200_000;
    let path = simulate_path(&model, &cfg, None, 0).map_err(|e| e.to_string())?;

    let mut t: Vec<f64> = (0..=TRACE_POINTS).map(|i| horizon * i as f64 / TRACE_POINTS as f64).collect();
    if path.len() <= TRACE_POINTS {
        for &e in path.times() {
            t.push(e);
            t.push(e + 1e-9 * horizon);
        }
        t.sort_by(f64::total_cmp);
    }
    let intensity = t.iter().map(|&s| intensity_at(&model, &path, s)).collect();
    let window_count =
        empirical_functional(&path, &WindowFunctional::count(window)).map_err(|e| e.to_string())?;
    Ok(PathTrace {
        horizon,
        events: path.times().to_vec(),
        t,
        intensity,
        rate: path.len() as f64 / horizon,
        mean: model.lln_mean(),
        window,
        window_count,
    })
}

#[derive(Debug, Serialize)]
pub struct RareEvent {
    pub horizon: f64,
    pub threshold: f64,
    pub p_hat: f64,
    pub std_err: f64,
    pub rate_hat: Option<f64>,
    pub rate_explicit: Option<f64>,
    pub ess: f64,
    pub unreliable: bool,
    pub proposal: String,
}

/// `P(N_t/t ≥ threshold)` by importance sampling under the mean-matched proposal.
pub fn rare_event(
    nu: f64,
    amplitude: f64,
    decay: f64,
    threshold: f64,
    horizon: f64,
    replicas: usize,
    seed: u64,
) -> Result<RareEvent, String> {
    let model = IntensityModel::linear_exponential(nu, amplitude, decay).map_err(|e| e.to_string())?;
    let cfg = SimConfig::new(seed, horizon).with_replicas(replicas);
    let proposal = mean_matched_proposal(&model, threshold, &cfg).map_err(|e| e.to_string())?;
    let est = rare_event_probability(&model, Tail::Upper(threshold), horizon, &proposal, &cfg)
        .map_err(|e| e.to_string())?;
    Ok(RareEvent {
        horizon,
        threshold,
        p_hat: est.p_hat,
        std_err: est.std_err,
        rate_hat: est.rate_hat,
        rate_explicit: est.i_explicit,
        ess: est.ess,
        unreliable: est.unreliable,
        proposal: est.proposal,
    })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = rateCurve)]
pub fn rate_curve_js(nu: f64, hnorm: f64, stop: f64, points: usize) -> Result<String, JsValue> {
    to_js(rate_curve(nu, hnorm, stop, points))
}

#[wasm_bindgen(js_name = simulatePath)]
pub fn path_trace_js(nu: f64, amplitude: f64, decay: f64, horizon: f64, seed: u32, window: f64) -> Result<String, JsValue> {
    to_js(path_trace(nu, amplitude, decay, horizon, u64::from(seed), window))
}

#[wasm_bindgen(js_name = rareEvent)]
pub fn rare_event_js(
    nu: f64,
    amplitude: f64,
    decay: f64,
    threshold: f64,
    horizon: f64,
    replicas: usize,
    seed: u32,
) -> Result<String, JsValue> {
    to_js(rare_event(nu, amplitude, decay, threshold, horizon, replicas, u64::from(seed)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_touches_zero_at_the_mean() {
        let c = rate_curve(1.0, 0.5, 4.0, 41).unwrap();
        assert_eq!(c.mean, 2.0);
        assert_eq!(c.x[20], 2.0);
        assert!(c.rate[20].abs() < 1e-12);
        assert_eq!(c.rate[0], 1.0);
        assert!(rate_curve(1.0, 1.0, 4.0, 41).is_err());
    }

    #[test]
    fn trace_jumps_at_events() {
        let p = path_trace(1.0, 1.0, 2.0, 20.0, 3, 1.0).unwrap();
        assert!(!p.events.is_empty());
        assert_eq!(p.t.len(), p.intensity.len());
        assert!(p.intensity.iter().all(|&l| l >= 1.0));
        assert!((p.window_count - p.rate).abs() < 1e-9, "count functional is L·N/t");
        let json = serde_json::to_string(&p).unwrap();
        assert!(json.contains("\"window_count\""));
    }

    #[test]
    fn small_rare_event_run() {
        let r = rare_event(1.0, 1.0, 2.0, 3.0, 20.0, 400, 1).unwrap();
        assert!(r.p_hat > 0.0 && r.p_hat < 1.0);
        assert!(r.rate_hat.unwrap() > r.rate_explicit.unwrap());
        assert!(rare_event(1.0, 3.0, 2.0, 3.0, 20.0, 400, 1).unwrap_err().contains("supercritical"));
    }
}
