//! Numerical tolerances shared by validation code and tests.

/// Asserted normalization and isometry checks.
pub const ASSERT: f64 = 1e-10;

/// Algebraic identities that should hold up to floating-point accumulation.
pub const IDENTITY: f64 = 1e-12;

/// Golden-section refinement width, relative to the feasible interval.
pub const ARGMIN_REL: f64 = 1e-9;
