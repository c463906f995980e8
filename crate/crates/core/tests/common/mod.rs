#![allow(dead_code)]

use embezzlemeter::{Normalization, ProbVec};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random sorted vector of length `dim`; each entry is zero with probability `zero_prob`
/// (the first entry always stays positive).
pub fn probvec(rng: &mut ChaCha8Rng, dim: usize, zero_prob: f64) -> ProbVec {
    let raw: Vec<f64> = (0..dim)
        .map(|i| {
            if i > 0 && rng.gen_bool(zero_prob) {
                0.0
            } else {
                // Exponential weights give a uniform point on the simplex.
                -(1.0 - rng.gen::<f64>()).ln() + 1e-300
            }
        })
        .collect();
    ProbVec::new(&raw, Normalization::Renormalize).unwrap()
}

/// Like [`probvec`] but with every entry at least `floor / dim`.
pub fn full_rank(rng: &mut ChaCha8Rng, dim: usize, floor: f64) -> ProbVec {
    let raw: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() + floor).collect();
    ProbVec::new(&raw, Normalization::Renormalize).unwrap()
}

pub fn uniform_simplex(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..dim).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

/// A point `q + λ(r − q)` of the trace-distance ball of radius `eps` around `q`.
pub fn ball_member(rng: &mut ChaCha8Rng, q: &ProbVec, eps: f64) -> ProbVec {
    let dim = q.dim();
    let r = uniform_simplex(rng, dim);
    let tv = 0.5
        * q.entries()
            .iter()
            .zip(&r)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>();
    let reach = if tv > 0.0 { (eps / tv).min(1.0) } else { 0.0 };
    let lambda = reach * rng.gen::<f64>().powf(1.0 / dim as f64);
    let raw: Vec<f64> = q
        .entries()
        .iter()
        .zip(&r)
        .map(|(a, b)| a + lambda * (b - a))
        .collect();
    ProbVec::new(&raw, Normalization::Renormalize).unwrap()
}
