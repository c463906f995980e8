//! Brute-force references for the minima over `{r : r ≻ p}`.
//!
//! These never use the closed formula or the purified optimizer; tests and
//! the CLI compare against them.

use microlp::{ComparisonOp, OptimizationDirection, Problem};

use super::{paired_cumulative, ProbVec};
use crate::{Error, Result};

/// Default lattice resolution for the fidelity grid.
pub const DEFAULT_FIDELITY_RESOLUTION: usize = 2000;

const FEASIBILITY_SLACK: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleMethod {
    /// Enumerate sorted points of the simplex lattice with spacing `1/resolution` (dim ≤ 3).
    Grid { resolution: usize },
    /// Solve the linear program with split absolute values.
    Lp,
}

impl OracleMethod {
    /// Grid with the default resolution for `dim`: 1000 for dim ≤ 2, 300 for dim 3.
    pub fn default_grid(dim: usize) -> Self {
        let resolution = if dim <= 2 { 1000 } else { 300 };
        OracleMethod::Grid { resolution }
    }
}

/// Sorted compositions of `resolution` into `dim ≤ 3` parts, as counts.
fn sorted_lattice(dim: usize, resolution: usize, mut visit: impl FnMut(&[usize])) {
    let n = resolution;
    match dim {
        1 => visit(&[n]),
        2 => {
            for i in n.div_ceil(2)..=n {
                visit(&[i, n - i]);
            }
        }
        3 => {
            for i in n.div_ceil(3)..=n {
                let rest = n - i;
                for j in rest.div_ceil(2)..=rest.min(i) {
                    visit(&[i, j, rest - j]);
                }
            }
        }
        _ => unreachable!("lattice enumeration is limited to dim ≤ 3"),
    }
}

fn check_grid_dim(dim: usize, resolution: usize) -> Result<()> {
    if dim > 3 {
        return Err(Error::Unsupported(format!(
            "grid oracle supports dim ≤ 3 (got {dim})"
        )));
    }
    if resolution == 0 {
        return Err(Error::validation("grid resolution must be positive"));
    }
    Ok(())
}

fn cumulative_dominates(r: &[f64], target_cum: &[f64]) -> bool {
    let mut acc = 0.0;
    for (v, t) in r.iter().zip(target_cum) {
        acc += v;
        if acc < t - FEASIBILITY_SLACK {
            return false;
        }
    }
    true
}

/// `min { ½‖r − q‖₁ : r ≻ p }` by enumeration or linear programming.
///
/// The grid result overestimates the optimum by at most `dim / resolution`.
pub fn oracle_min_l1_over_majorizing(
    p: &ProbVec,
    q: &ProbVec,
    method: OracleMethod,
) -> Result<f64> {
    let dim = p.dim().max(q.dim());
    let p = p.padded(dim);
    let q = q.padded(dim);
    match method {
        OracleMethod::Grid { resolution } => {
            check_grid_dim(dim, resolution)?;
            let (pc, _) = paired_cumulative(&p, &q);
            let scale = resolution as f64;
            let mut best = f64::INFINITY;
            let mut r = [0.0; 3];
            sorted_lattice(dim, resolution, |counts| {
                for (slot, &c) in r.iter_mut().zip(counts) {
                    *slot = c as f64 / scale;
                }
                if cumulative_dominates(&r[..dim], &pc) {
                    let d: f64 = r[..dim]
                        .iter()
                        .zip(q.entries())
                        .map(|(a, b)| (a - b).abs())
                        .sum();
                    best = best.min(0.5 * d);
                }
            });
            if best.is_finite() {
                Ok(best)
            } else {
                Err(Error::Internal("no lattice point majorizes p".into()))
            }
        }
        OracleMethod::Lp => lp_min_l1(&p, &q),
    }
}

fn lp_min_l1(p: &ProbVec, q: &ProbVec) -> Result<f64> {
    let dim = p.dim();
    let pc = p.cumulative();
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let r: Vec<_> = (0..dim).map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
    let t: Vec<_> = (0..dim)
        .map(|_| lp.add_var(0.5, (0.0, f64::INFINITY)))
        .collect();
    for x in 0..dim {
        let qx = q.entries()[x];
        lp.add_constraint([(t[x], 1.0), (r[x], -1.0)], ComparisonOp::Ge, -qx);
        lp.add_constraint([(t[x], 1.0), (r[x], 1.0)], ComparisonOp::Ge, qx);
        if x + 1 < dim {
            lp.add_constraint([(r[x], 1.0), (r[x + 1], -1.0)], ComparisonOp::Ge, 0.0);
        }
    }
    for k in 1..dim {
        let terms: Vec<_> = r[..k].iter().map(|&v| (v, 1.0)).collect();
        lp.add_constraint(terms.as_slice(), ComparisonOp::Ge, pc[k - 1]);
    }
    let all: Vec<_> = r.iter().map(|&v| (v, 1.0)).collect();
    lp.add_constraint(all.as_slice(), ComparisonOp::Eq, 1.0);

    let outcome = lp
        .solve()
        .map_err(|e| Error::Internal(format!("LP oracle failed: {e}")))?;
    let solution = outcome
        .into_solution()
        .map_err(|_| Error::Internal("LP oracle was interrupted".into()))?;
    // Recompute from the primal point rather than trusting the objective.
    let d: f64 = r
        .iter()
        .zip(q.entries())
        .map(|(&v, &qx)| (solution.var_value(v) - qx).abs())
        .sum();
    Ok(0.5 * d)
}

fn fidelity_of(r: &[f64], q: &[f64]) -> f64 {
    r.iter().zip(q).map(|(a, b)| (a * b).sqrt()).sum()
}

/// `max { Σ √(r_x q_x) : r ≻ p }` over a lattice (dim ≤ 3), followed by
/// successive local lattice refinements around the incumbent.
pub fn oracle_max_fidelity_over_majorizing(
    p: &ProbVec,
    q: &ProbVec,
    resolution: usize,
) -> Result<f64> {
    let dim = p.dim().max(q.dim());
    check_grid_dim(dim, resolution)?;
    let p = p.padded(dim);
    let q = q.padded(dim);
    let pc = p.cumulative();
    let qv = q.entries();

    let feasible = |free: &[f64]| -> Option<[f64; 3]> {
        let mut r = [0.0; 3];
        let head: f64 = free.iter().sum();
        r[..dim - 1].copy_from_slice(free);
        r[dim - 1] = 1.0 - head;
        let r = &r[..dim];
        if r.iter().any(|&v| v < 0.0) || r.windows(2).any(|w| w[0] < w[1]) {
            return None;
        }
        cumulative_dominates(r, &pc).then(|| {
            let mut out = [0.0; 3];
            out[..dim].copy_from_slice(r);
            out
        })
    };

    let scale = resolution as f64;
    let mut best_val = f64::NEG_INFINITY;
    let mut best = [0.0f64; 3];
    sorted_lattice(dim, resolution, |counts| {
        let mut r = [0.0; 3];
        for (slot, &c) in r.iter_mut().zip(counts) {
            *slot = c as f64 / scale;
        }
        if cumulative_dominates(&r[..dim], &pc) {
            let f = fidelity_of(&r[..dim], qv);
            if f > best_val {
                best_val = f;
                best = r;
            }
        }
    });
    if !best_val.is_finite() {
        return Err(Error::Internal("no lattice point majorizes p".into()));
    }
    if dim == 1 {
        return Ok(best_val.min(1.0));
    }

    // Zoom: window of ±2h sampled at h/10, repeated until h is negligible.
    let mut h = 1.0 / scale;
    const STEPS: i32 = 20;
    while h > 1e-13 {
        let step = h / 10.0;
        let center = best;
        if dim == 2 {
            for i in -STEPS..=STEPS {
                let free = [center[0] + i as f64 * step];
                if let Some(r) = feasible(&free) {
                    let f = fidelity_of(&r[..dim], qv);
                    if f > best_val {
                        best_val = f;
                        best = r;
                    }
                }
            }
        } else {
            for i in -STEPS..=STEPS {
                for j in -STEPS..=STEPS {
                    let free = [center[0] + i as f64 * step, center[1] + j as f64 * step];
                    if let Some(r) = feasible(&free) {
                        let f = fidelity_of(&r[..dim], qv);
                        if f > best_val {
                            best_val = f;
                            best = r;
                        }
                    }
                }
            }
        }
        h = step;
    }
    Ok(best_val.min(1.0))
}
