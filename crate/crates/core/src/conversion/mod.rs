//! Exact LOCC convertibility tests and conversion distances between pure states.

mod purified;

use serde::{Deserialize, Serialize};

use crate::majorization::{majorizes, paired_cumulative, ProbVec, NORMALIZATION_TOL, ORDER_TOL};
use crate::summation::CompensatedSum;
use crate::{Error, Result};

pub use purified::{
    purified_optimum, star_distance_purified, PurifiedOptimum, DEFAULT_EVALUATION_BUDGET,
    DEFAULT_PURIFIED_TOL,
};

/// Star-distance maxima within this distance of zero are reported as zero.
pub const ZERO_TOL: f64 = 1e-12;

/// ψ → φ is possible by LOCC iff `E_k(ψ) ≥ E_k(φ)` for all `k`, i.e. `q ≻ p`.
pub fn nielsen_convertible(psi: &ProbVec, phi: &ProbVec) -> bool {
    majorizes(phi, psi)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMember {
    pub weight: f64,
    pub state: ProbVec,
}

/// Weighted collection of pure states `{t_z, φ_z}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawEnsemble")]
pub struct Ensemble {
    members: Vec<EnsembleMember>,
}

#[derive(Deserialize)]
struct RawEnsemble {
    members: Vec<EnsembleMember>,
}

impl TryFrom<RawEnsemble> for Ensemble {
    type Error = String;

    fn try_from(raw: RawEnsemble) -> std::result::Result<Self, String> {
        Ensemble::new(raw.members).map_err(|e| match e {
            Error::Validation(m) => m,
            other => other.to_string(),
        })
    }
}

impl Ensemble {
    pub fn new(members: Vec<EnsembleMember>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::validation("ensemble has no members"));
        }
        let mut total = CompensatedSum::new();
        for (i, m) in members.iter().enumerate() {
            if !m.weight.is_finite() || m.weight < 0.0 || m.weight > 1.0 {
                return Err(Error::validation(format!(
                    "member {} has weight {} outside [0, 1]",
                    i + 1,
                    m.weight
                )));
            }
            total.add(m.weight);
        }
        if (total.value() - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::validation(format!(
                "ensemble weights sum to {}, expected 1",
                total.value()
            )));
        }
        Ok(Self { members })
    }

    /// Single-member ensemble `{(1, state)}`.
    pub fn pure(state: ProbVec) -> Self {
        Self {
            members: vec![EnsembleMember { weight: 1.0, state }],
        }
    }

    pub fn members(&self) -> &[EnsembleMember] {
        &self.members
    }

    fn dim(&self) -> usize {
        self.members
            .iter()
            .map(|m| m.state.dim())
            .max()
            .unwrap_or(1)
    }
}

/// Outcome of the ensemble (Jonathan–Plenio) test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleCheck {
    pub convertible: bool,
    /// Smallest `k` attaining the minimum margin.
    pub worst_k: usize,
    /// `min_k { E_k(ψ) − Σ_z t_z E_k(φ_z) }`.
    pub margin: f64,
}

/// Tests whether ψ can be converted by LOCC into the ensemble `{t_z, φ_z}`.
pub fn ensemble_convertible(psi: &ProbVec, ens: &Ensemble) -> EnsembleCheck {
    let dim = psi.dim().max(ens.dim());
    let psi_cum = psi.padded(dim).cumulative();
    let member_cums: Vec<(f64, Vec<f64>)> = ens
        .members
        .iter()
        .map(|m| (m.weight, m.state.padded(dim).cumulative()))
        .collect();

    let mut worst_k = 1;
    let mut margin = f64::INFINITY;
    for k in 0..dim {
        let mut mix = CompensatedSum::new();
        for (w, cum) in &member_cums {
            mix.add(w * (1.0 - cum[k]));
        }
        let value = (1.0 - psi_cum[k]) - mix.value();
        if value < margin {
            margin = value;
            worst_k = k + 1;
        }
    }
    EnsembleCheck {
        convertible: margin >= -ORDER_TOL,
        worst_k,
        margin,
    }
}

/// Checks ψ → σ for a *given* pure-state decomposition of σ.
///
/// `true` certifies the conversion; `false` says nothing about other
/// decompositions of the same mixed state.
pub fn pure_to_mixed_check(psi: &ProbVec, decomposition: &Ensemble) -> bool {
    ensemble_convertible(psi, decomposition).convertible
}

/// Result of a star conversion distance evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConversionReport {
    pub d_star: f64,
    /// Smallest `k` attaining the maximum Ky Fan difference.
    pub argmax_k: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub d_star_purified: Option<f64>,
    /// `½ d⋆²`, a lower bound on the trace conversion distance.
    pub sandwich_lo: f64,
    /// `√(2 d⋆)`, an upper bound on the trace conversion distance (not clamped).
    pub sandwich_hi: f64,
    /// `½(1 + d)` for the value `d` named in `discrimination_input`.
    pub discrimination_bound: f64,
    pub discrimination_input: DiscriminationInput,
}

/// Which conversion-distance value was fed to [`discrimination_bound`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "source", content = "value")]
pub enum DiscriminationInput {
    /// The rigorous lower bound `½ d⋆²` on `d(ψ → φ)`.
    SandwichLo,
    /// A value supplied by the caller.
    User(f64),
}

impl ConversionReport {
    /// Replaces the discrimination bound with one computed from a caller-supplied `d`.
    pub fn with_discrimination_input(mut self, d_value: f64) -> Self {
        self.discrimination_bound = discrimination_bound(d_value);
        self.discrimination_input = DiscriminationInput::User(d_value);
        self
    }
}

/// Closed-form maximum of `‖p‖₍k₎ − ‖q‖₍k₎` over `k ∈ [rank(p)]`, with the
/// smallest maximizing `k`.
pub(crate) fn star_distance_value(p: &ProbVec, q: &ProbVec) -> (f64, usize) {
    let (pc, qc) = paired_cumulative(p, q);
    let mut best = f64::NEG_INFINITY;
    let mut arg = 1;
    for k in 0..p.rank().max(1) {
        let diff = pc[k] - qc[k];
        if diff > best {
            best = diff;
            arg = k + 1;
        }
    }
    let value = if best.abs() <= ZERO_TOL {
        0.0
    } else {
        best.clamp(0.0, 1.0)
    };
    (value, arg)
}

/// Star conversion distance `min_{r ≻ p} ½‖r − q‖₁` via its closed formula.
pub fn star_distance(psi: &ProbVec, phi: &ProbVec) -> ConversionReport {
    let (d_star, argmax_k) = star_distance_value(psi, phi);
    let (sandwich_lo, sandwich_hi) = sandwich_bounds(d_star);
    ConversionReport {
        d_star,
        argmax_k,
        d_star_purified: None,
        sandwich_lo,
        sandwich_hi,
        discrimination_bound: discrimination_bound(sandwich_lo),
        discrimination_input: DiscriminationInput::SandwichLo,
    }
}

/// `(½ d⋆², √(2 d⋆))`: bounds on the trace conversion distance.
pub fn sandwich_bounds(d_star: f64) -> (f64, f64) {
    (0.5 * d_star * d_star, (2.0 * d_star).sqrt())
}

/// Helstrom-type lower bound `½(1 + d)` on the optimal guessing probability.
pub fn discrimination_bound(d_value: f64) -> f64 {
    0.5 * (1.0 + d_value)
}
