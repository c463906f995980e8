use serde::{Deserialize, Serialize};

use super::FamilySpec;
use crate::{Error, Result};

/// Asymptotic class of `f` as `x → ∞`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "class", content = "value")]
pub enum LimitClass {
    Finite(f64),
    Zero,
    Infinity,
}

const INTEGER_SAMPLES: usize = 10_000;
const LOG_SAMPLES: usize = 2_000;
const LOG_DECADES: f64 = 8.0;

/// Replaces `f` by a monotone `f̃` with the same asymptotics.
///
/// A finite limit `ℓ` gives the constant family `ℓ`; otherwise `f̃(x) = f(M)`
/// for `x ≤ M` and `f(x)` beyond. Monotonicity beyond `M` is checked on
/// sampled points and the first violating `x` is reported.
pub fn regularize(spec: &FamilySpec, class: LimitClass, cutoff: usize) -> Result<FamilySpec> {
    if let LimitClass::Finite(level) = class {
        return FamilySpec::constant(level);
    }
    if cutoff == 0 {
        return Err(Error::validation("cutoff must be at least 1"));
    }
    let decreasing = class == LimitClass::Zero;
    let start = cutoff as f64;
    let integers = (0..INTEGER_SAMPLES).map(|i| start + i as f64);
    let last = start + (INTEGER_SAMPLES - 1) as f64;
    let spread =
        (1..=LOG_SAMPLES).map(|i| last * 10f64.powf(LOG_DECADES * i as f64 / LOG_SAMPLES as f64));

    let mut prev: Option<(f64, f64)> = None;
    for x in integers.chain(spread) {
        let v = spec.value(x);
        if v.is_nan() {
            // Tabulated f ends here.
            break;
        }
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::validation(format!(
                "f({x}) = {v} is not positive beyond the cutoff"
            )));
        }
        if let Some((px, pv)) = prev {
            let slack = 1e-12 * pv.abs();
            let violated = if decreasing {
                v > pv + slack
            } else {
                v < pv - slack
            };
            if violated {
                let dir = if decreasing {
                    "non-increasing"
                } else {
                    "non-decreasing"
                };
                return Err(Error::validation(format!(
                    "f is not {dir} beyond the cutoff: first violation at x = {x} (f({px}) = {pv}, f({x}) = {v})"
                )));
            }
        }
        prev = Some((x, v));
    }
    Ok(FamilySpec::plateau(spec.clone(), start))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embezzlement::embezzle_distance;
    use crate::families::family_member;

    #[test]
    fn finite_class_gives_constant() {
        let c = FamilySpec::constant(2.0).unwrap();
        let r = regularize(&c, LimitClass::Finite(2.0), 7).unwrap();
        assert_eq!(r.label(), "const:2");
        assert_eq!(r.value(123.0), 2.0);
        assert!(regularize(&c, LimitClass::Finite(0.0), 7).is_err());
    }

    #[test]
    fn plateau_then_base() {
        let vdh = FamilySpec::vdh();
        let r = regularize(&vdh, LimitClass::Zero, 10).unwrap();
        let p = family_member(&r, 12).unwrap();
        let raw: Vec<f64> = (1..=12)
            .map(|x| if x <= 10 { 0.1 } else { 1.0 / x as f64 })
            .collect();
        let total: f64 = raw.iter().sum();
        for (a, b) in p.entries().iter().zip(&raw) {
            assert!((a - b / total).abs() < 1e-15);
        }

        let lin = FamilySpec::power(1.0).unwrap();
        let r = regularize(&lin, LimitClass::Infinity, 5).unwrap();
        assert_eq!(r.value(2.0), 5.0);
        assert_eq!(r.value(5.0), 5.0);
        assert_eq!(r.value(8.0), 8.0);
    }

    #[test]
    fn regularized_vdh_keeps_its_trajectory() {
        let vdh = FamilySpec::vdh();
        let r = regularize(&vdh, LimitClass::Zero, 10).unwrap();
        let mut gaps = Vec::new();
        for n in [1_000, 100_000] {
            let a = embezzle_distance(&family_member(&vdh, n).unwrap(), 2)
                .unwrap()
                .d_star_value;
            let b = embezzle_distance(&family_member(&r, n).unwrap(), 2)
                .unwrap()
                .d_star_value;
            gaps.push((a - b).abs());
        }
        assert!(gaps[1] < 0.5 * gaps[0], "{gaps:?}");
    }

    #[test]
    fn violations_are_located() {
        let bump = FamilySpec::from_fn("bump", |x| {
            if (20.0..21.0).contains(&x) {
                1.0
            } else {
                1.0 / x
            }
        });
        let err = regularize(&bump, LimitClass::Zero, 10).unwrap_err();
        assert!(err.to_string().contains("x = 20"), "{err}");
        assert!(regularize(&FamilySpec::vdh(), LimitClass::Infinity, 3).is_err());
        assert!(regularize(&FamilySpec::vdh(), LimitClass::Zero, 0).is_err());
    }
}
