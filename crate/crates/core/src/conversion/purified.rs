//! `min_{r ≻ p} √(1 − F(r, q)²)` by a log-barrier interior-point method.
//!
//! Maximizing the fidelity `F(r, q) = Σ √(q_x r_x)` is a concave program over
//! the polytope `{r sorted, ‖r‖₍k₎ ≥ ‖p‖₍k₎}`. Any majorizing `r` has rank at
//! most `K = rank(p)`, so the search runs over `r ∈ ℝ^K` with `r_K` eliminated
//! through normalization.

use nalgebra::{DMatrix, DVector};

use crate::majorization::{majorizes, purified_from_fidelity, ProbVec};
use crate::{Error, Result};

pub const DEFAULT_PURIFIED_TOL: f64 = 1e-10;
pub const DEFAULT_EVALUATION_BUDGET: usize = 100_000;

/// Optimal value and the fidelity-maximizing `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct PurifiedOptimum {
    pub distance: f64,
    pub fidelity: f64,
    pub optimizer: ProbVec,
    pub evaluations: usize,
}

/// Purified star conversion distance, accurate to `tol` in fidelity.
pub fn star_distance_purified(psi: &ProbVec, phi: &ProbVec, tol: f64) -> Result<f64> {
    purified_optimum(psi, phi, tol, DEFAULT_EVALUATION_BUDGET).map(|o| o.distance)
}

/// Linear constraint `a·y ≥ b` in the reduced variables.
struct Constraint {
    a: Vec<f64>,
    b: f64,
}

struct Problem<'a> {
    q: &'a [f64],
    cons: Vec<Constraint>,
    k: usize,
}

impl Problem<'_> {
    fn full(&self, y: &[f64]) -> Vec<f64> {
        let mut r = y.to_vec();
        r.push(1.0 - y.iter().sum::<f64>());
        r
    }

    fn slacks(&self, y: &[f64]) -> Option<Vec<f64>> {
        let s: Vec<f64> = self
            .cons
            .iter()
            .map(|c| c.a.iter().zip(y).map(|(a, v)| a * v).sum::<f64>() - c.b)
            .collect();
        s.iter().all(|&v| v > 0.0).then_some(s)
    }

    fn fidelity(&self, y: &[f64]) -> f64 {
        self.full(y)
            .iter()
            .zip(self.q)
            .map(|(r, q)| (r.max(0.0) * q).sqrt())
            .sum()
    }

    /// Barrier objective `t·F + Σ ln s_i`, or `None` outside the interior.
    fn barrier(&self, y: &[f64], t: f64) -> Option<f64> {
        let s = self.slacks(y)?;
        Some(t * self.fidelity(y) + s.iter().map(|v| v.ln()).sum::<f64>())
    }

    /// Gradient and negated Hessian of the barrier objective.
    fn derivatives(&self, y: &[f64], s: &[f64], t: f64) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.k - 1;
        let r = self.full(y);
        let h: Vec<f64> = r
            .iter()
            .zip(self.q)
            .map(|(r, q)| 0.5 * (q / r).sqrt())
            .collect();
        let d: Vec<f64> = r.iter().zip(&h).map(|(r, h)| 0.5 * h / r).collect();

        let mut grad = DVector::from_fn(n, |x, _| t * (h[x] - h[n]));
        let mut neg_hess =
            DMatrix::from_fn(n, n, |i, j| t * d[n] + if i == j { t * d[i] } else { 0.0 });
        for (c, &si) in self.cons.iter().zip(s) {
            for i in 0..n {
                grad[i] += c.a[i] / si;
                let ai = c.a[i] / (si * si);
                if ai == 0.0 {
                    continue;
                }
                for j in 0..n {
                    neg_hess[(i, j)] += ai * c.a[j];
                }
            }
        }
        (grad, neg_hess)
    }
}

fn build_problem<'a>(p: &ProbVec, q: &'a [f64]) -> Problem<'a> {
    let k = p.rank();
    let n = k - 1;
    let pc = p.cumulative();
    // r expressed through y: r_x = y_x for x < K and r_K = 1 − Σ y.
    let reduce = |c: Vec<f64>, rhs: f64| -> Constraint {
        let last = c[n];
        Constraint {
            a: c[..n].iter().map(|v| v - last).collect(),
            b: rhs - last,
        }
    };
    let mut cons = Vec::with_capacity(2 * k - 1);
    for len in 1..k {
        let c: Vec<f64> = (0..k).map(|x| if x < len { 1.0 } else { 0.0 }).collect();
        cons.push(reduce(c, pc[len - 1]));
    }
    for x in 0..n {
        let mut c = vec![0.0; k];
        c[x] = 1.0;
        c[x + 1] = -1.0;
        cons.push(reduce(c, 0.0));
    }
    let mut c = vec![0.0; k];
    c[n] = 1.0;
    cons.push(reduce(c, 0.0));
    Problem { q, cons, k }
}

/// Strictly feasible start `(1 − t − s)p + t·e₁ + s·v` with `v` strictly decreasing.
fn interior_start(p: &ProbVec) -> Vec<f64> {
    let k = p.rank();
    let t = 0.1;
    let s = 0.5 * t * p.entries()[k - 1];
    let norm = (k * (k + 1)) as f64 / 2.0;
    (0..k - 1)
        .map(|x| {
            let v = (k - x) as f64 / norm;
            (1.0 - t - s) * p.entries()[x] + if x == 0 { t } else { 0.0 } + s * v
        })
        .collect()
}

/// Solves the purified star-distance program to fidelity accuracy `tol`
/// within `budget` barrier evaluations.
pub fn purified_optimum(
    psi: &ProbVec,
    phi: &ProbVec,
    tol: f64,
    budget: usize,
) -> Result<PurifiedOptimum> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::validation(format!(
            "tolerance must be positive (got {tol})"
        )));
    }
    let dim = psi.dim().max(phi.dim());
    let p = psi.padded(dim);
    let q = phi.padded(dim);
    let k = p.rank();

    if majorizes(&q, &p) {
        return Ok(PurifiedOptimum {
            distance: 0.0,
            fidelity: 1.0,
            optimizer: q,
            evaluations: 0,
        });
    }
    if k == 1 {
        let f = q.largest().sqrt();
        return Ok(PurifiedOptimum {
            distance: purified_from_fidelity(f),
            fidelity: f,
            optimizer: ProbVec::e1(dim),
            evaluations: 0,
        });
    }

    let problem = build_problem(&p, &q.entries()[..k]);
    let m = problem.cons.len() as f64;
    let mut y = interior_start(&p);
    let mut evaluations = 0usize;
    let mut t = 1.0;
    let best_distance = |y: &[f64]| purified_from_fidelity(problem.fidelity(y).min(1.0));

    loop {
        // Centering by damped Newton.
        for _ in 0..200 {
            let s = problem
                .slacks(&y)
                .ok_or_else(|| Error::Internal("iterate left the interior".into()))?;
            let (grad, neg_hess) = problem.derivatives(&y, &s, t);
            let step = match neg_hess.clone().cholesky() {
                Some(ch) => ch.solve(&grad),
                None => {
                    let scale = neg_hess.diagonal().amax().max(1.0);
                    let reg = neg_hess + DMatrix::identity(k - 1, k - 1) * (1e-12 * scale);
                    reg.cholesky()
                        .ok_or_else(|| Error::Internal("barrier Hessian is singular".into()))?
                        .solve(&grad)
                }
            };
            let decrement = grad.dot(&step);
            if decrement <= 1e-14 {
                break;
            }
            let current = t * problem.fidelity(&y) + s.iter().map(|v| v.ln()).sum::<f64>();
            let mut alpha = 1.0;
            let mut moved = false;
            while alpha > 1e-20 {
                let trial: Vec<f64> = y
                    .iter()
                    .zip(step.iter())
                    .map(|(a, d)| a + alpha * d)
                    .collect();
                evaluations += 1;
                if evaluations > budget {
                    return Err(Error::NonConvergence {
                        evaluations: budget,
                        best: best_distance(&y),
                    });
                }
                if let Some(v) = problem.barrier(&trial, t) {
                    if v >= current + 0.25 * alpha * decrement {
                        y = trial;
                        moved = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !moved {
                break;
            }
        }
        if m / t <= tol {
            break;
        }
        t *= 10.0;
    }

    let fidelity = problem.fidelity(&y).min(1.0);
    let mut r = problem.full(&y);
    r.resize(dim, 0.0);
    for v in &mut r {
        *v = v.max(0.0);
    }
    Ok(PurifiedOptimum {
        distance: purified_from_fidelity(fidelity),
        fidelity,
        optimizer: ProbVec::from_nonnegative(r),
        evaluations,
    })
}
