//! Numeric tolerances used across the crate.
//!
//! Every comparison against an analytic value goes through one of these
//! constants so the thresholds live in exactly one place.

/// Slack allowed on normalization sums and no-signaling marginal agreement.
pub const PROB_TOL: f64 = 1e-9;

/// Slack allowed on identities that hold exactly in real arithmetic and only
/// accumulate rounding error in floating point.
pub const EXACT_TOL: f64 = 1e-12;

/// Agreement required between the linear-programming oracle and analytic
/// trade-off values.
pub const LP_TOL: f64 = 1e-7;

/// Agreement required between bisection output and closed-form critical
/// CHSH values.
pub const CRITICAL_TOL: f64 = 1e-10;

/// Table entries in `[-NEGATIVITY_FLOOR, 0)` are treated as rounding noise
/// and clamped to zero; anything more negative is rejected.
pub const NEGATIVITY_FLOOR: f64 = 1e-12;
