//! Families `χ_n` generated by a positive function `f`:
//! `p_x^(n) = f(x) / F_n` with `F_n = Σ_{x=1}^n f(x)`, sorted non-increasingly.

mod asymptotics;
mod regularize;

use std::fmt;
use std::sync::Arc;

use crate::majorization::ProbVec;
use crate::quadrature::integrate_log;
use crate::special::harmonic;
use crate::summation::CompensatedSum;
use crate::{Error, Result};

pub use asymptotics::{
    a_max, analytic_limit_power, default_y_schedule, divergence_check, integral_asymptotics,
    integral_ratio, power_limits, power_sweep, AsymptoticsReport, MPoint, PowerLimits,
    PowerSweepRow, RatioMax, TailPoint, DEFAULT_QUAD_TOL,
};
pub use regularize::{regularize, LimitClass};

/// Piecewise-linear `f` through tabulated points, undefined outside them.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    xs: Vec<f64>,
    fs: Vec<f64>,
    /// `∫_{x_0}^{x_i} f` of the interpolant.
    areas: Vec<f64>,
}

impl Table {
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::validation("a table needs at least two points"));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (i, &(x, f)) in points.iter().enumerate() {
            if !x.is_finite() || !f.is_finite() {
                return Err(Error::validation(format!(
                    "table row {} is not finite ({x}, {f})",
                    i + 1
                )));
            }
            if f <= 0.0 {
                return Err(Error::validation(format!(
                    "table row {} has non-positive f({x}) = {f}",
                    i + 1
                )));
            }
        }
        if let Some(w) = points.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::validation(format!(
                "table has duplicate x = {}",
                w[0].0
            )));
        }
        let (xs, fs): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
        let mut areas = Vec::with_capacity(xs.len());
        let mut acc = CompensatedSum::new();
        areas.push(0.0);
        for i in 1..xs.len() {
            acc.add(0.5 * (fs[i - 1] + fs[i]) * (xs[i] - xs[i - 1]));
            areas.push(acc.value());
        }
        Ok(Self { xs, fs, areas })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    /// Index `i` with `xs[i] ≤ x ≤ xs[i+1]`, for `x` inside the domain.
    fn segment(&self, x: f64) -> usize {
        self.xs
            .partition_point(|&v| v <= x)
            .saturating_sub(1)
            .min(self.xs.len() - 2)
    }

    pub fn value(&self, x: f64) -> f64 {
        let (lo, hi) = self.domain();
        if !(lo..=hi).contains(&x) {
            return f64::NAN;
        }
        let i = self.segment(x);
        let t = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
        self.fs[i] + t * (self.fs[i + 1] - self.fs[i])
    }

    /// `∫_{x_0}^{x} f` of the interpolant.
    fn area_to(&self, x: f64) -> f64 {
        let i = self.segment(x);
        0.5 * (self.fs[i] + self.value(x)) * (x - self.xs[i]) + self.areas[i]
    }

    pub fn integral(&self, a: f64, b: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if a < lo || b > hi {
            return Err(Error::Domain(format!(
                "[{a}, {b}] leaves the table domain [{lo}, {hi}]"
            )));
        }
        Ok(self.area_to(b) - self.area_to(a))
    }
}

#[derive(Clone)]
enum Kind {
    Vdh,
    Power(f64),
    LogCorrected(f64),
    Oscillating,
    Constant(f64),
    Table {
        name: String,
        table: Arc<Table>,
    },
    Closure {
        name: String,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
    Regularized {
        base: Arc<FamilySpec>,
        cutoff: f64,
    },
}

/// Immutable description of a family; cheap to clone and share across threads.
#[derive(Clone)]
pub struct FamilySpec {
    kind: Kind,
}

impl fmt::Debug for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FamilySpec({})", self.label())
    }
}

impl FamilySpec {
    /// `f(x) = 1/x`.
    pub fn vdh() -> Self {
        Self { kind: Kind::Vdh }
    }

    /// `f(x) = x^α`.
    pub fn power(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::validation(format!(
                "power exponent must be finite (got {alpha})"
            )));
        }
        Ok(Self {
            kind: Kind::Power(alpha),
        })
    }

    /// `f(x) = (1 + ln x)^k / x`.
    pub fn log_corrected(k: f64) -> Result<Self> {
        if !k.is_finite() {
            return Err(Error::validation(format!(
                "log exponent must be finite (got {k})"
            )));
        }
        Ok(Self {
            kind: Kind::LogCorrected(k),
        })
    }

    /// `f(x) = (1 + (1 + sin ln ln x)·ln x) / x`, non-increasing for `x ≥ e`
    /// while `x·f(x)` keeps oscillating.
    pub fn oscillating() -> Self {
        Self {
            kind: Kind::Oscillating,
        }
    }

    pub fn constant(level: f64) -> Result<Self> {
        if !(level > 0.0 && level.is_finite()) {
            return Err(Error::validation(format!(
                "constant level must be positive (got {level})"
            )));
        }
        Ok(Self {
            kind: Kind::Constant(level),
        })
    }

    /// Linear interpolation through `(x, f(x))` points.
    pub fn from_table(points: Vec<(f64, f64)>) -> Result<Self> {
        Self::named_table("table", points)
    }

    pub fn named_table(name: impl Into<String>, points: Vec<(f64, f64)>) -> Result<Self> {
        Ok(Self {
            kind: Kind::Table {
                name: name.into(),
                table: Arc::new(Table::new(points)?),
            },
        })
    }

    /// Arbitrary `f`; positivity is checked when members are generated.
    pub fn from_fn(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            kind: Kind::Closure {
                name: name.into(),
                f: Arc::new(f),
            },
        }
    }

    pub(crate) fn plateau(base: FamilySpec, cutoff: f64) -> Self {
        Self {
            kind: Kind::Regularized {
                base: Arc::new(base),
                cutoff,
            },
        }
    }

    /// Parses `vdh`, `power:α`, `log:k`, `osc` or `custom:PATH` (two-column CSV).
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let (head, arg) = match text.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (text, None),
        };
        let number = |a: Option<&str>| -> Result<f64> {
            let a = a.ok_or_else(|| Error::Parse(format!("family `{text}` needs a parameter")))?;
            a.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad family parameter `{a}`")))
        };
        match head {
            "vdh" if arg.is_none() => Ok(Self::vdh()),
            "osc" if arg.is_none() => Ok(Self::oscillating()),
            "power" => Self::power(number(arg)?),
            "log" => Self::log_corrected(number(arg)?),
            "custom" => {
                let path = arg
                    .filter(|p| !p.is_empty())
                    .ok_or_else(|| Error::Parse("custom family needs a file".into()))?;
                let body = std::fs::read_to_string(path)
                    .map_err(|e| Error::Parse(format!("cannot read {path}: {e}")))?;
                Self::named_table(path, crate::io::parse_table_csv(&body)?)
            }
            _ => Err(Error::Parse(format!(
                "unknown family `{text}` (expected vdh, power:α, log:k, osc or custom:FILE)"
            ))),
        }
    }

    pub fn label(&self) -> String {
        match &self.kind {
            Kind::Vdh => "vdh".into(),
            Kind::Power(a) => format!("power:{a}"),
            Kind::LogCorrected(k) => format!("log:{k}"),
            Kind::Oscillating => "osc".into(),
            Kind::Constant(l) => format!("const:{l}"),
            Kind::Table { name, .. } => format!("custom:{name}"),
            Kind::Closure { name, .. } => format!("fn:{name}"),
            Kind::Regularized { base, cutoff } => {
                format!("regularized({}, M={cutoff})", base.label())
            }
        }
    }

    /// Exponent `α` when `f(x) = c·x^α`.
    pub fn power_exponent(&self) -> Option<f64> {
        match self.kind {
            Kind::Vdh => Some(-1.0),
            Kind::Power(a) => Some(a),
            Kind::Constant(_) => Some(0.0),
            _ => None,
        }
    }

    /// `f(x)` extended to real `x ≥ 1`; NaN where undefined.
    pub fn value(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Vdh => 1.0 / x,
            Kind::Power(a) => {
                if *a == -1.0 {
                    1.0 / x
                } else {
                    x.powf(*a)
                }
            }
            Kind::LogCorrected(k) => (1.0 + x.ln()).powf(*k) / x,
            Kind::Oscillating => {
                if x == 1.0 {
                    return 1.0;
                }
                let l = x.ln();
                (1.0 + (1.0 + l.ln().sin()) * l) / x
            }
            Kind::Constant(c) => *c,
            Kind::Table { table, .. } => table.value(x),
            Kind::Closure { f, .. } => f(x),
            Kind::Regularized { base, cutoff } => base.value(x.max(*cutoff)),
        }
    }

    /// `∫_a^b f` for `1 ≤ a ≤ b`: exact for tables and plateaus, adaptive
    /// quadrature otherwise.
    pub fn integral(&self, a: f64, b: f64, tol: f64) -> Result<f64> {
        match &self.kind {
            Kind::Constant(c) => Ok(c * (b - a)),
            Kind::Table { table, .. } => table.integral(a, b),
            Kind::Regularized { base, cutoff } => {
                let flat = base.value(*cutoff) * (b.min(*cutoff) - a).max(0.0);
                let rest = if b > *cutoff {
                    base.integral(a.max(*cutoff), b, tol)?
                } else {
                    0.0
                };
                Ok(flat + rest)
            }
            _ => integrate_log(|x| self.value(x), a, b, tol).map(|q| q.value),
        }
    }

    /// The analytic finite-`n` upper bound `(1 + ln m)/H_n` available for `f = 1/x`.
    pub fn finite_n_bound(&self, n: usize, m: usize) -> Option<f64> {
        (self.power_exponent() == Some(-1.0)).then(|| (1.0 + (m as f64).ln()) / harmonic(n as u64))
    }

    /// Streaming access to the sorted coefficients of `χ_n`.
    pub fn member(&self, n: usize) -> Result<Member<'_>> {
        if n == 0 {
            return Err(Error::validation("family index n must be at least 1"));
        }
        if let Kind::Table { table, .. } = &self.kind {
            let (lo, hi) = table.domain();
            if lo > 1.0 || hi < n as f64 {
                return Err(Error::Domain(format!(
                    "n = {n} leaves the table domain [{lo}, {hi}]"
                )));
            }
        }
        let mut total = CompensatedSum::new();
        let (mut non_increasing, mut non_decreasing) = (true, true);
        let mut prev = f64::NAN;
        for x in 1..=n {
            let v = self.checked_value(x)?;
            if x > 1 {
                non_increasing &= v <= prev;
                non_decreasing &= v >= prev;
            }
            prev = v;
            total.add(v);
        }
        let norm = total.value();
        if !norm.is_finite() {
            return Err(Error::Domain(format!("F_{n} overflows")));
        }
        let layout = if non_increasing {
            Layout::Forward
        } else if non_decreasing {
            Layout::Reverse
        } else {
            let mut values: Vec<f64> = (1..=n).map(|x| self.value(x as f64) / norm).collect();
            values.sort_by(|a, b| b.total_cmp(a));
            Layout::Sorted(values)
        };
        Ok(Member {
            spec: self,
            n,
            norm,
            layout,
        })
    }

    fn checked_value(&self, x: usize) -> Result<f64> {
        let v = self.value(x as f64);
        if v.is_nan() {
            return Err(Error::Domain(format!("f is undefined at x = {x}")));
        }
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::validation(format!(
                "f({x}) = {v} is not a positive finite number"
            )));
        }
        Ok(v)
    }

    /// `F_n = Σ_{x=1}^n f(x)`.
    pub fn normalizer(&self, n: usize) -> Result<f64> {
        (1..=n)
            .try_fold(CompensatedSum::new(), |mut acc, x| {
                acc.add(self.checked_value(x)?);
                Ok(acc)
            })
            .map(|acc| acc.value())
    }
}

enum Layout {
    Forward,
    Reverse,
    Sorted(Vec<f64>),
}

/// The sorted Schmidt coefficients of one family member.
pub struct Member<'a> {
    spec: &'a FamilySpec,
    n: usize,
    norm: f64,
    layout: Layout,
}

impl Member<'_> {
    /// The `(i+1)`-th largest coefficient.
    #[inline]
    pub fn coeff(&self, i: usize) -> f64 {
        match &self.layout {
            Layout::Forward => self.spec.value((i + 1) as f64) / self.norm,
            Layout::Reverse => self.spec.value((self.n - i) as f64) / self.norm,
            Layout::Sorted(v) => v[i],
        }
    }

    pub fn normalizer(&self) -> f64 {
        self.norm
    }

    pub fn to_probvec(&self) -> ProbVec {
        ProbVec::from_nonnegative((0..self.n).map(|i| self.coeff(i)).collect())
    }
}

/// The `n`-th member as an explicit vector.
pub fn family_member(spec: &FamilySpec, n: usize) -> Result<ProbVec> {
    Ok(spec.member(n)?.to_probvec())
}
