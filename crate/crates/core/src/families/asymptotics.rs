//! Limits of `d⋆(χ_n → χ_n ⊗ Φ_m)`: closed forms for `f = x^α` and the
//! integral ratio `M(y) = max_{1≤a≤y/m} ∫_a^{am} g / ∫_1^y g`.

use serde::{Deserialize, Serialize};

use super::FamilySpec;
use crate::embezzlement::embezzle_scan;
use crate::special::zeta;
use crate::{Error, Result};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

const DERIVATIVE_SAMPLES: usize = 256;
const GRID_SAMPLES: usize = 4096;
const DIVERGENCE_CHECK_N: usize = 100_000;
const DIVERGENCE_RATIO_TOL: f64 = 1e-6;

/// Caveat attached to every report that compares finite `n` against limits.
pub const FINITE_N_NOTE: &str =
    "finite-n values approach the limits at an unquantified rate; agreement within 0.02 at n = 1e7 is an engineering tolerance";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLimits {
    pub limit: Option<f64>,
    pub lower: f64,
    pub upper: f64,
}

/// Limit (or bounds, for `α < −1`) of the embezzlement distance of `f = x^α`.
pub fn power_limits(alpha: f64, m: usize) -> Result<PowerLimits> {
    if m < 2 {
        return Err(Error::validation(format!("m must be at least 2 (got {m})")));
    }
    if !alpha.is_finite() {
        return Err(Error::validation(format!("α must be finite (got {alpha})")));
    }
    let mf = m as f64;
    let exact = |v: f64| PowerLimits {
        limit: Some(v),
        lower: v,
        upper: v,
    };
    Ok(if alpha == -1.0 {
        exact(0.0)
    } else if alpha > -1.0 && alpha < 0.0 {
        exact(1.0 - mf.powf(-(alpha + 1.0)))
    } else if alpha == 0.0 {
        exact(1.0 - 1.0 / mf)
    } else if alpha > 0.0 {
        let ratio = (mf - 1.0) / (mf.powf(1.0 + 1.0 / alpha) - 1.0);
        exact((mf - 1.0) * ratio.powf(alpha))
    } else {
        let z = zeta(-alpha)?;
        let lower = (1.0 - 1.0 / mf) / z;
        let upper = ((1.0 + (mf.powf(alpha + 1.0) - 1.0) / (alpha + 1.0)) / z).min(1.0);
        PowerLimits {
            limit: None,
            lower,
            upper,
        }
    })
}

/// Maximizer `(y+1)(m^{1/α} − 1)/(m^{1+1/α} − 1)` of the integral ratio for `α > 0`.
pub fn a_max(alpha: f64, m: usize, y: f64) -> f64 {
    let mf = m as f64;
    (y + 1.0) * (mf.powf(1.0 / alpha) - 1.0) / (mf.powf(1.0 + 1.0 / alpha) - 1.0)
}

/// `M(y)` at one `y` with its maximizer; the grid search runs independently
/// of the derivative-based search so the two can be compared.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioMax {
    pub value: f64,
    pub maximizer: f64,
    pub grid_value: f64,
    pub grid_maximizer: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MPoint {
    pub y: f64,
    #[serde(rename = "M")]
    pub value: Option<f64>,
    pub maximizer: Option<f64>,
    pub grid_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub a_max: Option<f64>,
    /// Infimum and supremum of `M` over this and all later `y`.
    pub tail_inf: Option<f64>,
    pub tail_sup: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub n: usize,
    pub d_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsReport {
    pub family: String,
    pub m: usize,
    pub analytic_limit: Option<f64>,
    pub analytic_lower: Option<f64>,
    pub analytic_upper: Option<f64>,
    #[serde(rename = "numeric_M")]
    pub numeric_m: Vec<MPoint>,
    pub finite_n_tail: Vec<TailPoint>,
    pub warnings: Vec<String>,
}

impl AsymptoticsReport {
    fn empty(family: String, m: usize) -> Self {
        Self {
            family,
            m,
            analytic_limit: None,
            analytic_lower: None,
            analytic_upper: None,
            numeric_m: Vec::new(),
            finite_n_tail: Vec::new(),
            warnings: Vec::new(),
        }
    }

    fn set_limits(&mut self, l: PowerLimits) {
        self.analytic_limit = l.limit;
        self.analytic_lower = Some(l.lower);
        self.analytic_upper = Some(l.upper);
    }

    /// Adds finite-`n` embezzlement distances along `schedule`.
    pub fn with_finite_tail(mut self, spec: &FamilySpec, schedule: &[usize]) -> Result<Self> {
        self.finite_n_tail = embezzle_scan(spec, self.m, schedule)?
            .into_iter()
            .zip(schedule)
            .map(|(r, &n)| match r {
                Ok(e) => TailPoint {
                    n,
                    d_star: Some(e.d_star_value),
                    error: None,
                },
                Err(e) => TailPoint {
                    n,
                    d_star: None,
                    error: Some(e.to_string()),
                },
            })
            .collect();
        if self.analytic_lower.is_some() && !self.finite_n_tail.is_empty() {
            self.warnings.push(FINITE_N_NOTE.into());
        }
        Ok(self)
    }
}

pub fn analytic_limit_power(alpha: f64, m: usize) -> Result<AsymptoticsReport> {
    let mut report = AsymptoticsReport::empty(FamilySpec::power(alpha)?.label(), m);
    report.set_limits(power_limits(alpha, m)?);
    Ok(report)
}

/// `y = 10³ · 2^j` for `j = 0..=14`.
pub fn default_y_schedule() -> Vec<f64> {
    (0..=14).map(|j| 1e3 * 2f64.powi(j)).collect()
}

/// Warns when `F_n` barely grows between `n` and `10n`, a sign that `Σ f`
/// converges and the family cannot embezzle.
pub fn divergence_check(spec: &FamilySpec, n: usize) -> Result<Option<String>> {
    let small = spec.normalizer(n)?;
    let large = spec.normalizer(10 * n)?;
    let rel = (large - small).abs() / large.abs();
    Ok((rel <= DIVERGENCE_RATIO_TOL).then(|| {
        format!("F_n appears to converge (F_{n} and F_{} differ by {rel:.3e} relative); the family cannot embezzle", 10 * n)
    }))
}

#[derive(Clone, Copy, PartialEq)]
enum Orientation {
    /// `g(x) = f(x)` for non-increasing `f`.
    Direct,
    /// `g(x) = f(y + 1 − x)` for non-decreasing `f`.
    Reversed,
}

fn orientation(spec: &FamilySpec, y: f64) -> Result<Orientation> {
    let samples: Vec<f64> = (0..=512)
        .map(|i| y.powf(i as f64 / 512.0))
        .map(|x| spec.value(x))
        .collect();
    if samples.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Domain(format!(
            "f is not positive and finite on [1, {y}]"
        )));
    }
    let slack = |a: f64| 1e-12 * a.abs();
    if samples.windows(2).all(|w| w[1] <= w[0] + slack(w[0])) {
        Ok(Orientation::Direct)
    } else if samples.windows(2).all(|w| w[1] >= w[0] - slack(w[0])) {
        Ok(Orientation::Reversed)
    } else {
        Err(Error::Unsupported(format!(
            "f is not monotone on [1, {y}]; regularize it beyond a cutoff first"
        )))
    }
}

struct Ratio<'a> {
    spec: &'a FamilySpec,
    m: f64,
    y: f64,
    tol: f64,
    orient: Orientation,
    denominator: f64,
}

impl Ratio<'_> {
    fn g(&self, x: f64) -> f64 {
        match self.orient {
            Orientation::Direct => self.spec.value(x),
            Orientation::Reversed => self.spec.value(self.y + 1.0 - x),
        }
    }

    fn ratio(&self, a: f64) -> Result<f64> {
        let b = a * self.m;
        let num = match self.orient {
            Orientation::Direct => self.spec.integral(a, b, self.tol)?,
            Orientation::Reversed => {
                self.spec
                    .integral((self.y + 1.0 - b).max(1.0), self.y + 1.0 - a, self.tol)?
            }
        };
        Ok(num / self.denominator)
    }

    /// Sign of `m·g(am) − g(a)`, with values near rounding level treated as zero.
    fn derivative_sign(&self, a: f64) -> i8 {
        let up = self.m * self.g(a * self.m);
        let down = self.g(a);
        let d = up - down;
        if d.abs() <= 1e-12 * (up.abs() + down.abs()) {
            0
        } else if d > 0.0 {
            1
        } else {
            -1
        }
    }
}

fn log_points(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (l, h) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (l + (h - l) * i as f64 / (count - 1) as f64).exp())
        .map(|x| x.clamp(lo, hi))
        .collect()
}

fn best_of(r: &Ratio<'_>, candidates: impl IntoIterator<Item = f64>) -> Result<(f64, f64)> {
    let mut best = (f64::NEG_INFINITY, 1.0);
    for a in candidates {
        let v = r.ratio(a)?;
        if v > best.0 {
            best = (v, a);
        }
    }
    Ok(best)
}

fn derivative_search(r: &Ratio<'_>, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let pts = log_points(lo, hi, DERIVATIVE_SAMPLES);
    let signs: Vec<i8> = pts.iter().map(|&a| r.derivative_sign(a)).collect();
    let mut candidates = vec![lo, hi];
    let mut last_positive: Option<usize> = None;
    for (i, &s) in signs.iter().enumerate() {
        match s {
            1 => last_positive = Some(i),
            -1 => {
                if let Some(j) = last_positive.take() {
                    let (mut a, mut b) = (pts[j], pts[i]);
                    while b - a > 1e-14 * b {
                        let mid = (a * b).sqrt();
                        if mid <= a || mid >= b {
                            break;
                        }
                        match r.derivative_sign(mid) {
                            1 => a = mid,
                            -1 => b = mid,
                            _ => {
                                a = mid;
                                b = mid;
                            }
                        }
                    }
                    candidates.push(0.5 * (a + b));
                }
            }
            _ => candidates.push(pts[i]),
        }
    }
    best_of(r, candidates)
}

fn grid_search(r: &Ratio<'_>, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let pts = log_points(lo, hi, GRID_SAMPLES);
    let mut values = Vec::with_capacity(pts.len());
    for &a in &pts {
        values.push(r.ratio(a)?);
    }
    let (i, _) = values
        .iter()
        .enumerate()
        .fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
        );
    // Golden-section polish on the neighbouring cells.
    let (mut a, mut b) = (pts[i.saturating_sub(1)], pts[(i + 1).min(pts.len() - 1)]);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (r.ratio(c)?, r.ratio(d)?);
    for _ in 0..100 {
        if b - a <= 1e-13 * b {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = r.ratio(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = r.ratio(d)?;
        }
    }
    best_of(r, [pts[i], c, d])
}

/// `M(y)` for a monotone `f` by adaptive quadrature (tolerance `quad_tol`
/// relative to each integral, absolute below 1).
pub fn integral_ratio(spec: &FamilySpec, m: usize, y: f64, quad_tol: f64) -> Result<RatioMax> {
    if m < 2 {
        return Err(Error::validation(format!("m must be at least 2 (got {m})")));
    }
    let mf = m as f64;
    if !(y >= mf && y.is_finite()) {
        return Err(Error::validation(format!(
            "y must be finite and at least m (got {y})"
        )));
    }
    let orient = orientation(spec, y)?;
    let denominator = spec.integral(1.0, y, quad_tol)?;
    let r = Ratio {
        spec,
        m: mf,
        y,
        tol: quad_tol,
        orient,
        denominator,
    };
    let (lo, hi) = (1.0, y / mf);
    if hi <= lo {
        let v = r.ratio(lo)?;
        return Ok(RatioMax {
            value: v,
            maximizer: lo,
            grid_value: v,
            grid_maximizer: lo,
        });
    }
    let (value, maximizer) = derivative_search(&r, lo, hi)?;
    let (grid_value, grid_maximizer) = grid_search(&r, lo, hi)?;
    Ok(RatioMax {
        value,
        maximizer,
        grid_value,
        grid_maximizer,
    })
}

/// `M(y)` along `y_schedule` with running tail extrema; analytic limits are
/// attached for power families.
pub fn integral_asymptotics(
    spec: &FamilySpec,
    m: usize,
    y_schedule: &[f64],
    quad_tol: f64,
) -> Result<AsymptoticsReport> {
    if m < 2 {
        return Err(Error::validation(format!("m must be at least 2 (got {m})")));
    }
    if !(quad_tol > 0.0) {
        return Err(Error::validation(format!(
            "quadrature tolerance must be positive (got {quad_tol})"
        )));
    }
    if let Some(w) = y_schedule.windows(2).find(|w| !(w[0] < w[1])) {
        return Err(Error::validation(format!(
            "y schedule must be increasing ({} then {})",
            w[0], w[1]
        )));
    }
    let mut report = AsymptoticsReport::empty(spec.label(), m);
    let alpha = spec.power_exponent();
    if let Some(a) = alpha {
        report.set_limits(power_limits(a, m)?);
    }
    match divergence_check(spec, DIVERGENCE_CHECK_N) {
        Ok(Some(w)) => report.warnings.push(w),
        Ok(None) => {}
        Err(e) => report
            .warnings
            .push(format!("divergence check skipped: {e}")),
    }

    let eval = |&y: &f64| integral_ratio(spec, m, y, quad_tol);
    #[cfg(feature = "parallel")]
    let results: Vec<Result<RatioMax>> = y_schedule.par_iter().map(eval).collect();
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<RatioMax>> = y_schedule.iter().map(eval).collect();

    report.numeric_m = y_schedule
        .iter()
        .zip(results)
        .map(|(&y, r)| {
            let a_max = alpha.filter(|&a| a > 0.0).map(|a| a_max(a, m, y));
            match r {
                Ok(r) => MPoint {
                    y,
                    value: Some(r.value.max(r.grid_value)),
                    maximizer: Some(if r.grid_value > r.value {
                        r.grid_maximizer
                    } else {
                        r.maximizer
                    }),
                    grid_value: Some(r.grid_value),
                    a_max,
                    tail_inf: None,
                    tail_sup: None,
                    error: None,
                },
                Err(e) => MPoint {
                    y,
                    value: None,
                    maximizer: None,
                    grid_value: None,
                    a_max,
                    tail_inf: None,
                    tail_sup: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let (mut inf, mut sup) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in report.numeric_m.iter_mut().rev() {
        if let Some(v) = p.value {
            inf = inf.min(v);
            sup = sup.max(v);
        }
        if inf.is_finite() {
            p.tail_inf = Some(inf);
            p.tail_sup = Some(sup);
        }
    }
    Ok(report)
}

/// One line of the `α` sweep: analytic limit or bounds and finite-`n` estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSweepRow {
    pub alpha: f64,
    pub limits: PowerLimits,
    pub finite: Vec<(usize, Result<f64>)>,
}

/// Evaluates `power(α)` for every `α` (in order) at each `n` of `ns`.
pub fn power_sweep(m: usize, alphas: &[f64], ns: &[usize]) -> Result<Vec<PowerSweepRow>> {
    let row = |&alpha: &f64| -> Result<PowerSweepRow> {
        let limits = power_limits(alpha, m)?;
        let spec = FamilySpec::power(alpha)?;
        let finite = ns
            .iter()
            .map(|&n| {
                let d = spec.member(n).and_then(|mem| {
                    crate::embezzlement::embezzle_distance_by(n, n, m, |i| mem.coeff(i))
                        .map(|e| e.d_star_value)
                });
                (n, d)
            })
            .collect();
        Ok(PowerSweepRow {
            alpha,
            limits,
            finite,
        })
    };
    #[cfg(feature = "parallel")]
    let rows = alphas.par_iter().map(row).collect();
    #[cfg(not(feature = "parallel"))]
    let rows = alphas.iter().map(row).collect();
    rows
}
