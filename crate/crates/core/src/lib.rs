//! Orthogonal polynomials on the bi-circle in two monomial orderings, their
//! recurrence coefficients, and the Fejer-Riesz factorization tests built on them.

pub mod error;
pub mod factorization;
pub mod fixtures;
pub mod linalg;
pub mod moments;
pub mod orthopoly;
pub mod poly;
pub mod recurrence;
pub mod stability;
pub mod toeplitz;

pub use error::{Error, Result};
pub use factorization::{
    check_conditions, factor_one_sided, stable_case_factor, verify_splitting_structure, ConditionReport,
};
pub use linalg::CMat;
pub use moments::{
    compute_moments, functional_apply, inner_product, is_positive_definite, moment_matrix, MomentMatrix, MomentTable,
    Ordering, QuadratureConfig, WeightSpec,
};
pub use orthopoly::{orthonormalize, CdLevels, OrthoLevel};
pub use poly::{LaurentPoly, C64};
pub use recurrence::{
    compute_coefficients, ehat_and_a, ehat_scan, verify_identities, verify_recurrences, RecurrenceSet, ResidualReport,
};
pub use stability::{one_sided_stable_w, one_sided_stable_z, schur_cohn, stable_bidisk, StabilityReport, Verdict};
