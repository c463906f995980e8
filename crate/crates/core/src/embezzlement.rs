//! Finite-`n` embezzlement: the closed embezzlement distance
//! `d⋆(χ → χ ⊗ Φ_m)`, the characterization criterion and scans over `n`.

use serde::{Deserialize, Serialize};

use crate::families::FamilySpec;
use crate::majorization::ProbVec;
use crate::summation::CompensatedSum;
use crate::{Error, Result};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `p ⊗ u^(m)`: each entry replaced by `m` copies of `p_x / m`.
pub fn tensor_with_uniform(p: &ProbVec, m: usize) -> Result<ProbVec> {
    check_factor(m)?;
    let scale = m as f64;
    let entries = p
        .entries()
        .iter()
        .flat_map(|&v| std::iter::repeat_n(v / scale, m))
        .collect();
    Ok(ProbVec::from_nonnegative(entries))
}

/// `p ⊗ e₁`: `p` zero-padded to length `dim · m`.
pub fn tensor_with_e1(p: &ProbVec, m: usize) -> Result<ProbVec> {
    check_factor(m)?;
    Ok(p.padded(p.dim() * m))
}

fn check_factor(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::validation(
            "tensor factor dimension must be at least 1",
        ));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbezzleEvaluation {
    pub n: usize,
    pub m: usize,
    /// `d⋆(χ → χ ⊗ Φ_m)`.
    pub d_star_value: f64,
    /// `max_{l ≤ ⌈rank/2⌉} ‖p‖₍2l−1₎ − ‖p‖₍l−1₎`.
    pub criterion_value: f64,
    pub p1: f64,
    pub argmax_k: usize,
    pub argmax_l: usize,
}

/// One pass over the sorted coefficients `coeff(0) ≥ coeff(1) ≥ …` of a
/// state of rank `rank`, in constant memory.
///
/// The distance is `max_k S_k − S_{a_k} − (b_k/m)·p_{a_k+1}` with
/// `a_k = ⌊k/m⌋`, `b_k = k − a_k m`; a leading sum tracks `S_k` and two
/// lagging sums track `S_{a_k}` and `S_{l−1}`.
pub fn embezzle_distance_by(
    n: usize,
    rank: usize,
    m: usize,
    coeff: impl Fn(usize) -> f64,
) -> Result<EmbezzleEvaluation> {
    if m < 2 {
        return Err(Error::validation(format!(
            "embezzlement target dimension must be at least 2 (got {m})"
        )));
    }
    if rank == 0 {
        return Err(Error::validation("state has rank zero"));
    }
    let inv_m = 1.0 / m as f64;
    let criterion_len = rank.div_ceil(2);

    let mut lead = CompensatedSum::new();
    let mut lag = CompensatedSum::new();
    let mut lag_l = CompensatedSum::new();
    let mut a = 0usize;
    let mut next_lag = coeff(0);
    let mut l_done = 0usize;

    let mut best_d = f64::NEG_INFINITY;
    let mut argmax_k = 1;
    let mut best_c = f64::NEG_INFINITY;
    let mut argmax_l = 1;

    for k in 1..=rank {
        lead.add(coeff(k - 1));
        if k / m > a {
            // a advances by one each time k crosses a multiple of m.
            lag.add(next_lag);
            a += 1;
            next_lag = coeff(a);
        }
        let b = (k - a * m) as f64;
        let d = lead.value() - lag.value() - b * inv_m * next_lag;
        if d > best_d {
            best_d = d;
            argmax_k = k;
        }

        if k % 2 == 1 {
            let l = k.div_ceil(2);
            if l <= criterion_len {
                while l_done + 1 < l {
                    lag_l.add(coeff(l_done));
                    l_done += 1;
                }
                let c = lead.value() - lag_l.value();
                if c > best_c {
                    best_c = c;
                    argmax_l = l;
                }
            }
        }
    }

    Ok(EmbezzleEvaluation {
        n,
        m,
        d_star_value: best_d.clamp(0.0, 1.0),
        criterion_value: best_c.clamp(0.0, 1.0),
        p1: coeff(0),
        argmax_k,
        argmax_l,
    })
}

/// Closed embezzlement distance and criterion for a single state.
pub fn embezzle_distance(p: &ProbVec, m: usize) -> Result<EmbezzleEvaluation> {
    let e = p.entries();
    embezzle_distance_by(p.dim(), p.rank(), m, |i| e[i])
}

/// `max_{l ≤ ⌈rank(p)/2⌉} ‖p‖₍2l−1₎ − ‖p‖₍l−1₎` and the smallest maximizing `l`.
pub fn embezzle_criterion(p: &ProbVec) -> (f64, usize) {
    let e = p.entries();
    let eval = embezzle_distance_by(p.dim(), p.rank(), 2, |i| e[i]).expect("m = 2 and rank ≥ 1");
    (eval.criterion_value, eval.argmax_l)
}

/// `round(start · factor^j)` for `j < count`; rejects schedules that are
/// not strictly increasing after rounding.
pub fn geometric_schedule(start: f64, factor: f64, count: usize) -> Result<Vec<usize>> {
    if !(start >= 1.0 && start.is_finite()) || !(factor > 1.0 && factor.is_finite()) {
        return Err(Error::validation(format!(
            "geometric schedule needs start ≥ 1 and factor > 1 (got {start}, {factor})"
        )));
    }
    let out: Vec<usize> = (0..count)
        .map(|j| (start * factor.powi(j as i32)).round())
        .map(|v| {
            if v < usize::MAX as f64 {
                Ok(v as usize)
            } else {
                Err(Error::validation("schedule overflows"))
            }
        })
        .collect::<Result<_>>()?;
    check_schedule(&out)?;
    Ok(out)
}

fn check_schedule(schedule: &[usize]) -> Result<()> {
    if let Some(&first) = schedule.first() {
        if first == 0 {
            return Err(Error::validation("schedule entries must be positive"));
        }
    }
    if let Some(w) = schedule.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::validation(format!(
            "schedule must be strictly increasing ({} is followed by {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Evaluates `χ_n` of `family` for every `n` in `schedule`, in schedule order.
///
/// Members with a closed-form monotone `f` are streamed; a failing member
/// yields an error entry without aborting the scan.
pub fn embezzle_scan(
    family: &FamilySpec,
    m: usize,
    schedule: &[usize],
) -> Result<Vec<Result<EmbezzleEvaluation>>> {
    if m < 2 {
        return Err(Error::validation(format!(
            "embezzlement target dimension must be at least 2 (got {m})"
        )));
    }
    check_schedule(schedule)?;
    let eval = |&n: &usize| -> Result<EmbezzleEvaluation> {
        let member = family.member(n)?;
        embezzle_distance_by(n, n, m, |i| member.coeff(i))
    };
    #[cfg(feature = "parallel")]
    let out = schedule.par_iter().map(eval).collect();
    #[cfg(not(feature = "parallel"))]
    let out = schedule.iter().map(eval).collect();
    Ok(out)
}
