use super::ProbVec;
use crate::summation::CompensatedSum;
use crate::{Error, Result};

/// The trace-distance ball of radius `radius` around `center`.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsBallQuery {
    pub center: ProbVec,
    pub radius: f64,
}

impl EpsBallQuery {
    pub fn new(center: ProbVec, radius: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&radius) {
            return Err(Error::validation(format!("radius {radius} outside [0, 1]")));
        }
        Ok(Self { center, radius })
    }
}

/// The steepest ε-approximation of the ball's center: the element of the
/// ball that majorizes every other element.
///
/// Mass `ε` moves onto the first entry and is removed from the tail, so the
/// result is `(q₁ + ε, q₂, …, q_k, 1 − ε − ‖q‖₍k₎, 0, …)` where `k` is the
/// last index with `‖q‖₍k₎ ≤ 1 − ε`.
pub fn steepest_approximation(query: &EpsBallQuery) -> Result<ProbVec> {
    let eps = query.radius;
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::validation(format!("radius {eps} outside [0, 1]")));
    }
    let q = &query.center;
    let dim = q.dim();
    if eps == 0.0 {
        return Ok(q.clone());
    }
    if 1.0 - q.largest() <= eps {
        return Ok(ProbVec::e1(dim));
    }

    let budget = 1.0 - eps;
    let mut acc = CompensatedSum::new();
    let mut kept = 0usize;
    for &v in q.entries() {
        let mut next = acc;
        next.add(v);
        if next.value() > budget {
            break;
        }
        acc = next;
        kept += 1;
    }
    if kept == dim {
        // ε below rounding resolution of the tail.
        return Ok(q.clone());
    }

    let mut out = vec![0.0; dim];
    out[..kept].copy_from_slice(&q.entries()[..kept]);
    out[0] += eps;
    out[kept] = (budget - acc.value()).max(0.0);
    Ok(ProbVec::from_nonnegative(out))
}
