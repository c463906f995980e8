//! Probability-vector algebra on Schmidt coefficients.
//!
//! Every binary operation zero-pads the shorter vector on the right, so
//! vectors of different length can be compared directly.

mod oracle;
mod steepest;

use serde::{Deserialize, Serialize};

use crate::summation::{self, CompensatedSum};
use crate::{Error, Result};

pub use oracle::{
    oracle_max_fidelity_over_majorizing, oracle_min_l1_over_majorizing, OracleMethod,
    DEFAULT_FIDELITY_RESOLUTION,
};
pub use steepest::{steepest_approximation, EpsBallQuery};

/// Tolerance on `|Σ p − 1|` under [`Normalization::Strict`]; also the
/// magnitude below which negative entries are clamped to zero.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Slack used when comparing cumulative sums.
pub const ORDER_TOL: f64 = 1e-12;

/// How [`ProbVec::new`] treats input that does not sum to one.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// Reject inputs whose sum is further than [`NORMALIZATION_TOL`] from 1.
    #[default]
    Strict,
    /// Divide by the sum unconditionally.
    Renormalize,
}

/// A probability vector sorted non-increasingly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbVec {
    entries: Vec<f64>,
    rank: usize,
}

impl ProbVec {
    /// Validates, clamps, sorts and (optionally) rescales `raw`.
    pub fn new(raw: &[f64], policy: Normalization) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::validation("empty probability vector"));
        }
        let mut entries = Vec::with_capacity(raw.len());
        for (i, &v) in raw.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::validation(format!(
                    "entry {} is not finite ({v})",
                    i + 1
                )));
            }
            if v < -NORMALIZATION_TOL {
                return Err(Error::validation(format!(
                    "entry {} is negative ({v})",
                    i + 1
                )));
            }
            entries.push(v.max(0.0));
        }
        let total = summation::sum(&entries);
        if total <= 0.0 {
            return Err(Error::validation("entries sum to zero"));
        }
        match policy {
            Normalization::Strict => {
                if (total - 1.0).abs() > NORMALIZATION_TOL {
                    return Err(Error::validation(format!(
                        "entries sum to {total}, expected 1 within {NORMALIZATION_TOL:e}"
                    )));
                }
            }
            Normalization::Renormalize => {
                for v in &mut entries {
                    *v /= total;
                }
            }
        }
        Ok(Self::from_nonnegative(entries))
    }

    /// Sorts already non-negative, normalized entries. Stable with respect to ties.
    pub(crate) fn from_nonnegative(mut entries: Vec<f64>) -> Self {
        entries.sort_by(|a, b| b.total_cmp(a));
        let rank = entries.iter().rposition(|&v| v > 0.0).map_or(0, |i| i + 1);
        Self { entries, rank }
    }

    /// The separable vector `(1, 0, …, 0)` of length `dim`.
    pub fn e1(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        let mut entries = vec![0.0; dim];
        entries[0] = 1.0;
        Self { entries, rank: 1 }
    }

    /// The maximally mixed vector of length `dim`.
    pub fn uniform(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        Self {
            entries: vec![1.0 / dim as f64; dim],
            rank: dim,
        }
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    /// Number of strictly positive entries (the Schmidt rank).
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Largest entry.
    pub fn largest(&self) -> f64 {
        self.entries[0]
    }

    pub fn is_separable(&self) -> bool {
        self.rank == 1
    }

    /// Zero-pads on the right to `dim`; never truncates.
    pub fn padded(&self, dim: usize) -> ProbVec {
        if dim <= self.dim() {
            return self.clone();
        }
        let mut entries = self.entries.clone();
        entries.resize(dim, 0.0);
        Self {
            entries,
            rank: self.rank,
        }
    }

    /// Compensated cumulative sums, `out[k - 1] = ‖p‖₍k₎`.
    pub fn cumulative(&self) -> Vec<f64> {
        summation::prefix_sums(&self.entries)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.entries
    }
}

impl TryFrom<Vec<f64>> for ProbVec {
    type Error = Error;

    fn try_from(raw: Vec<f64>) -> Result<Self> {
        ProbVec::new(&raw, Normalization::Strict)
    }
}

impl From<ProbVec> for Vec<f64> {
    fn from(p: ProbVec) -> Vec<f64> {
        p.entries
    }
}

/// `k`-th Ky Fan norm: the sum of the `k` largest entries. `k = 0` gives 0.
pub fn ky_fan(p: &ProbVec, k: usize) -> Result<f64> {
    if k > p.dim() {
        return Err(Error::Index {
            index: k,
            dim: p.dim(),
        });
    }
    Ok(summation::sum(&p.entries[..k]))
}

/// The entanglement monotone `E_k = 1 − ‖p‖₍k₎`, for `1 ≤ k ≤ dim`.
pub fn entanglement_monotone(p: &ProbVec, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Index {
            index: 0,
            dim: p.dim(),
        });
    }
    Ok(1.0 - ky_fan(p, k)?)
}

/// Cumulative sums of `a` and `b` after padding both to a common length.
pub(crate) fn paired_cumulative(a: &ProbVec, b: &ProbVec) -> (Vec<f64>, Vec<f64>) {
    let dim = a.dim().max(b.dim());
    (a.padded(dim).cumulative(), b.padded(dim).cumulative())
}

/// `r ≻ p`: every cumulative sum of `r` dominates that of `p` (within [`ORDER_TOL`]).
pub fn majorizes(r: &ProbVec, p: &ProbVec) -> bool {
    let (cr, cp) = paired_cumulative(r, p);
    cr.iter().zip(&cp).all(|(a, b)| *a >= b - ORDER_TOL)
}

fn padded_pairs<'a>(p: &'a ProbVec, q: &'a ProbVec) -> impl Iterator<Item = (f64, f64)> + 'a {
    let dim = p.dim().max(q.dim());
    (0..dim).map(move |i| {
        (
            p.entries.get(i).copied().unwrap_or(0.0),
            q.entries.get(i).copied().unwrap_or(0.0),
        )
    })
}

/// Classical trace distance `½ Σ |p_x − q_x|`.
pub fn trace_distance(p: &ProbVec, q: &ProbVec) -> f64 {
    let total: CompensatedSum = padded_pairs(p, q).map(|(a, b)| (a - b).abs()).collect();
    (0.5 * total.value()).clamp(0.0, 1.0)
}

/// Classical fidelity `Σ √(p_x q_x)`.
pub fn fidelity(p: &ProbVec, q: &ProbVec) -> f64 {
    let total: CompensatedSum = padded_pairs(p, q).map(|(a, b)| (a * b).sqrt()).collect();
    total.value().clamp(0.0, 1.0)
}

/// Classical purified distance `√(1 − F²)`.
pub fn purified_distance(p: &ProbVec, q: &ProbVec) -> f64 {
    purified_from_fidelity(fidelity(p, q))
}

pub(crate) fn purified_from_fidelity(f: f64) -> f64 {
    let f = f.clamp(0.0, 1.0);
    // (1 − f)(1 + f) loses less precision than 1 − f² near f = 1.
    ((1.0 - f) * (1.0 + f)).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(v: &[f64]) -> ProbVec {
        ProbVec::new(v, Normalization::Strict).unwrap()
    }

    #[test]
    fn construction_sorts_and_records_rank() {
        let p = pv(&[0.2, 0.5, 0.3]);
        assert_eq!(p.entries(), &[0.5, 0.3, 0.2]);
        assert_eq!(p.rank(), 3);
        let one = pv(&[1.0]);
        assert_eq!(one.entries(), &[1.0]);
        assert_eq!(one.rank(), 1);
        let r = ProbVec::new(&[2.0, 1.0, 1.0], Normalization::Renormalize).unwrap();
        assert_eq!(r.entries(), &[0.5, 0.25, 0.25]);
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            ProbVec::new(&[0.5, -0.1, 0.6], Normalization::Strict),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            ProbVec::new(&[0.0, 0.0], Normalization::Renormalize),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            ProbVec::new(&[0.5, 0.4], Normalization::Strict),
            Err(Error::Validation(_))
        ));
        assert!(ProbVec::new(&[], Normalization::Renormalize).is_err());
        assert!(ProbVec::new(&[f64::NAN, 1.0], Normalization::Renormalize).is_err());
    }

    #[test]
    fn tiny_negatives_are_clamped() {
        let p = pv(&[1.0, -5e-13]);
        assert_eq!(p.entries(), &[1.0, 0.0]);
        assert_eq!(p.rank(), 1);
    }

    #[test]
    fn ky_fan_values() {
        let p = pv(&[0.5, 0.3, 0.2]);
        assert!((ky_fan(&p, 2).unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(ky_fan(&p, 0).unwrap(), 0.0);
        assert_eq!(ky_fan(&pv(&[1.0, 0.0]), 2).unwrap(), 1.0);
        assert_eq!(ky_fan(&p, 4), Err(Error::Index { index: 4, dim: 3 }));
    }

    #[test]
    fn monotone_values() {
        assert!((entanglement_monotone(&pv(&[0.5, 0.5]), 1).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(entanglement_monotone(&pv(&[1.0, 0.0]), 1).unwrap(), 0.0);
        // 1 − (0.7 + 0.2)
        let e = entanglement_monotone(&pv(&[0.7, 0.2, 0.1]), 2).unwrap();
        let brute = 1.0 - [0.7, 0.2].iter().sum::<f64>();
        assert!((e - 0.1).abs() < 1e-12 && (e - brute).abs() < 1e-15);
        assert!(
            entanglement_monotone(&pv(&[0.7, 0.2, 0.1]), 3)
                .unwrap()
                .abs()
                < 1e-15
        );
    }

    #[test]
    fn majorization_examples() {
        assert!(majorizes(&pv(&[1.0, 0.0]), &pv(&[0.5, 0.5])));
        assert!(majorizes(&pv(&[0.5, 0.5]), &pv(&[0.5, 0.5])));
        assert!(!majorizes(&pv(&[0.6, 0.4]), &pv(&[0.7, 0.3])));
        // padding: (1) majorizes everything of any length
        assert!(majorizes(&pv(&[1.0]), &pv(&[0.25, 0.25, 0.25, 0.25])));
    }

    #[test]
    fn distance_examples() {
        let half = pv(&[0.5, 0.5]);
        assert_eq!(trace_distance(&half, &half), 0.0);
        assert_eq!(trace_distance(&pv(&[1.0, 0.0]), &pv(&[0.0, 1.0])), 0.0);
        assert!((trace_distance(&pv(&[0.6, 0.4]), &half) - 0.1).abs() < 1e-15);

        assert!((fidelity(&half, &half) - 1.0).abs() < 1e-15);
        assert!((fidelity(&pv(&[1.0, 0.0]), &half) - 0.5f64.sqrt()).abs() < 1e-15);
        let f = fidelity(&pv(&[0.8, 0.2]), &half);
        assert!((f - (0.4f64.sqrt() + 0.1f64.sqrt())).abs() < 1e-15);
        assert!((f - 0.9487).abs() < 1e-4);

        assert_eq!(purified_distance(&half, &half), 0.0);
        assert!((purified_distance(&pv(&[1.0, 0.0]), &half) - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn serde_roundtrip_validates() {
        let p: ProbVec = serde_json::from_str("[0.25, 0.75]").unwrap();
        assert_eq!(p.entries(), &[0.75, 0.25]);
        assert!(serde_json::from_str::<ProbVec>("[0.25, 0.5]").is_err());
        assert_eq!(serde_json::to_string(&p).unwrap(), "[0.75,0.25]");
    }
}
