//! Riemann zeta on the real axis and harmonic numbers.

use crate::summation::CompensatedSum;
use crate::{Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `B_{2j} / (2j)!` for `j = 1..=8`.
const BERNOULLI_OVER_FACTORIAL: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30_240.0,
    -1.0 / 1_209_600.0,
    1.0 / 47_900_160.0,
    -691.0 / 1_307_674_368_000.0,
    1.0 / 74_724_249_600.0,
    -3617.0 / 10_670_622_842_880_000.0,
];

const EM_CUTOFF: usize = 20;

/// `ζ(s)` for real `s > 1` by Euler–Maclaurin summation.
pub fn zeta(s: f64) -> Result<f64> {
    if !(s > 1.0) || !s.is_finite() {
        if s == f64::INFINITY {
            return Ok(1.0);
        }
        return Err(Error::Domain(format!("zeta requires s > 1 (got {s})")));
    }
    let n = EM_CUTOFF as f64;
    let mut acc: CompensatedSum = (1..EM_CUTOFF).map(|k| (k as f64).powf(-s)).collect();
    acc.add(n.powf(1.0 - s) / (s - 1.0));
    acc.add(0.5 * n.powf(-s));
    // Rising factorial s(s+1)…(s+2j−2) times N^{−s−2j+1}.
    let mut rising = s;
    let mut power = n.powf(-s - 1.0);
    for (j, c) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        if j > 0 {
            let base = s + (2 * j - 1) as f64;
            rising *= base * (base + 1.0);
            power /= n * n;
        }
        acc.add(c * rising * power);
    }
    Ok(acc.value())
}

/// `H_n = Σ_{x=1}^{n} 1/x`.
pub fn harmonic(n: u64) -> f64 {
    if n < 64 {
        return (1..=n)
            .map(|x| 1.0 / x as f64)
            .collect::<CompensatedSum>()
            .value();
    }
    let x = n as f64;
    let inv2 = 1.0 / (x * x);
    x.ln() + EULER_GAMMA + 0.5 / x - inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 / 252.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_known_values() {
        let pi = std::f64::consts::PI;
        assert!((zeta(2.0).unwrap() - pi * pi / 6.0).abs() < 1e-15);
        assert!((zeta(4.0).unwrap() - pi.powi(4) / 90.0).abs() < 1e-15);
        assert!((zeta(3.0).unwrap() - 1.202_056_903_159_594_2).abs() < 1e-15);
        assert!((zeta(1.5).unwrap() - 2.612_375_348_685_488).abs() < 1e-14);
        assert!((zeta(1.1).unwrap() - 10.584_448_464_950_81).abs() < 1e-12);
        assert!((zeta(40.0).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(zeta(f64::INFINITY).unwrap(), 1.0);
    }

    #[test]
    fn zeta_domain() {
        assert!(zeta(1.0).is_err());
        assert!(zeta(0.5).is_err());
        assert!(zeta(f64::NAN).is_err());
    }

    #[test]
    fn harmonic_matches_direct_sum() {
        for n in [1u64, 2, 10, 63, 64, 65, 1000, 123_456] {
            let direct: CompensatedSum = (1..=n).map(|x| 1.0 / x as f64).collect();
            assert!((harmonic(n) - direct.value()).abs() < 1e-13, "n = {n}");
        }
        assert_eq!(harmonic(0), 0.0);
    }
}
