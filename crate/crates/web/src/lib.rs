//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each export takes plain strings and numbers and returns a JSON string, so the
//! page needs no generated type glue beyond `JSON.parse`.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use embezzlemeter::families::power_sweep;
use embezzlemeter::io::parse_probvec;
use embezzlemeter::{
    embezzle_scan, geometric_schedule, majorizes, star_distance, ConversionReport, FamilySpec,
    Normalization,
};

/// Bound on the total number of coefficients the page may ask for in one call.
pub const WORK_LIMIT: usize = 200_000_000;

#[derive(Serialize)]
struct PairReport {
    #[serde(flatten)]
    report: ConversionReport,
    convertible: bool,
    psi: Vec<f64>,
    phi: Vec<f64>,
}

/// Star distance, Nielsen verdict and bounds for two coefficient lists
/// (JSON arrays or one number per line); inputs are renormalized.
pub fn star_distance_report(psi: &str, phi: &str) -> Result<String, String> {
    let p = parse_probvec(psi, Normalization::Renormalize).map_err(|e| format!("ψ: {e}"))?;
    let q = parse_probvec(phi, Normalization::Renormalize).map_err(|e| format!("φ: {e}"))?;
    let report = star_distance(&p, &q);
    let out = PairReport {
        convertible: majorizes(&q, &p),
        report,
        psi: p.entries().to_vec(),
        phi: q.entries().to_vec(),
    };
    Ok(serde_json::to_string(&out).expect("report serializes"))
}

#[derive(Serialize)]
struct CurvePoint {
    alpha: f64,
    limit: Option<f64>,
    lower: f64,
    upper: f64,
    finite: Option<f64>,
}

/// Limit curve of the power families `x^α` for `α` from `start` to `end`, with
/// the finite-`n` distance alongside.
pub fn power_curve(
    m: usize,
    start: f64,
    end: f64,
    count: usize,
    n: usize,
) -> Result<String, String> {
    if count < 1 {
        return Err("need at least one α".into());
    }
    if count.saturating_mul(n) > WORK_LIMIT {
        return Err(format!(
            "{count} values × n = {n} is too much work for the browser"
        ));
    }
    let alphas: Vec<f64> = match count {
        1 => vec![start],
        _ => (0..count)
            .map(|i| start + (end - start) * i as f64 / (count - 1) as f64)
            .collect(),
    };
    let rows = power_sweep(m, &alphas, &[n]).map_err(|e| e.to_string())?;
    let points: Vec<CurvePoint> = rows
        .into_iter()
        .map(|r| CurvePoint {
            alpha: r.alpha,
            limit: r.limits.limit,
            lower: r.limits.lower,
            upper: r.limits.upper,
            finite: r.finite[0].1.as_ref().ok().copied(),
        })
        .collect();
    Ok(serde_json::to_string(&points).expect("curve serializes"))
}

#[derive(Serialize)]
struct TrajectoryPoint {
    n: usize,
    d_star: f64,
    criterion: f64,
    p1: f64,
    bound: Option<f64>,
}

/// Embezzlement distance of a built-in family (`vdh`, `power:α`, `log:k`, `osc`)
/// along a geometric schedule of `n`.
pub fn embezzle_trajectory(
    family: &str,
    m: usize,
    start: f64,
    factor: f64,
    count: usize,
) -> Result<String, String> {
    let spec = FamilySpec::parse(family).map_err(|e| e.to_string())?;
    let schedule = geometric_schedule(start, factor, count).map_err(|e| e.to_string())?;
    if schedule.iter().sum::<usize>() > WORK_LIMIT {
        return Err("schedule is too long for the browser".into());
    }
    let points: Vec<TrajectoryPoint> = embezzle_scan(&spec, m, &schedule)
        .map_err(|e| e.to_string())?
        .into_iter()
        .filter_map(|r| r.ok())
        .map(|e| TrajectoryPoint {
            n: e.n,
            d_star: e.d_star_value,
            criterion: e.criterion_value,
            p1: e.p1,
            bound: spec.finite_n_bound(e.n, m),
        })
        .collect();
    Ok(serde_json::to_string(&points).expect("trajectory serializes"))
}

#[wasm_bindgen(js_name = starDistance)]
pub fn star_distance_js(psi: &str, phi: &str) -> Result<String, JsError> {
    star_distance_report(psi, phi).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = powerCurve)]
pub fn power_curve_js(
    m: usize,
    start: f64,
    end: f64,
    count: usize,
    n: usize,
) -> Result<String, JsError> {
    power_curve(m, start, end, count, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = embezzleTrajectory)]
pub fn embezzle_trajectory_js(
    family: &str,
    m: usize,
    start: f64,
    factor: f64,
    count: usize,
) -> Result<String, JsError> {
    embezzle_trajectory(family, m, start, factor, count).map_err(|e| JsError::new(&e))
}
