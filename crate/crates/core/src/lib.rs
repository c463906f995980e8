//! Exact pure-state LOCC convertibility, the star conversion distance and
//! diagnostics for embezzling families of bipartite pure states.
//!
//! Pure states enter only through their Schmidt coefficients, represented by
//! [`ProbVec`] (a validated, non-increasingly sorted probability vector).
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`majorization`] | Ky Fan norms, majorization, classical distances, steepest ε-approximations, brute-force oracles |
//! | [`conversion`] | Nielsen / ensemble / pure-to-mixed checks, star and purified star conversion distances |
//! | [`embezzlement`] | tensor constructions, the closed embezzlement distance, the characterization criterion, scans over `n` |
//! | [`families`] | `f`-generated families, analytic limits for `x^α`, integral asymptotics, regularization |
//! | [`io`] | JSON / CSV readers and writers shared by the CLI and the web demo |

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conversion;
pub mod embezzlement;
mod error;
pub mod families;
pub mod io;
pub mod majorization;
pub mod quadrature;
pub mod special;
mod summation;

pub use conversion::{
    discrimination_bound, ensemble_convertible, nielsen_convertible, pure_to_mixed_check,
    sandwich_bounds, star_distance, star_distance_purified, ConversionReport, DiscriminationInput,
    Ensemble, EnsembleCheck, EnsembleMember,
};
pub use embezzlement::{
    embezzle_criterion, embezzle_distance, embezzle_distance_by, embezzle_scan, geometric_schedule,
    tensor_with_e1, tensor_with_uniform, EmbezzleEvaluation,
};
pub use error::{Error, Result};
pub use families::{
    analytic_limit_power, family_member, integral_asymptotics, regularize, AsymptoticsReport,
    FamilySpec, LimitClass,
};
pub use majorization::{
    entanglement_monotone, fidelity, ky_fan, majorizes, purified_distance, steepest_approximation,
    trace_distance, EpsBallQuery, Normalization, ProbVec,
};
pub use summation::CompensatedSum;
