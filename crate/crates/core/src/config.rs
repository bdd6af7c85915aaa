//! Frozen tolerances, seeds and size limits.
//!
//! Tolerances come in three tiers:
//! * exact identities on integer grids compare with [`EXACT_TOL`];
//! * floating identities compare with [`FLOAT_TOL`];
//! * discretization bounds are `C·h` with a per-scenario constant `C`.

/// Identities that hold bit-for-bit on integer data.
pub const EXACT_TOL: f64 = 0.0;

/// Identities subject to floating rounding only.
pub const FLOAT_TOL: f64 = 1e-9;

/// Finite extended reals compare equal within this absolute slack in tests.
pub const EXT_EQ_TOL: f64 = 1e-12;

/// A nonnegative quantity estimated on a dyadic refinement is reported as
/// zero when it does not exceed this value. Instance generators keep genuine
/// positives well above it.
pub const ZERO_TOL: f64 = 1.0 / 32.0;

/// Bracket lower bounds above this value mark a point as diverging to `+∞`.
pub const DIVERGENCE_CEILING: f64 = 1e9;

/// Default ε ladder for the δ⁺ surrogate, as powers of two.
pub const DELTA_EPS_EXPONENTS: std::ops::RangeInclusive<i32> = 1..=20;

/// Default r ladder `2^-k` for differential quotients.
pub const R_LADDER_EXPONENTS: std::ops::RangeInclusive<i32> = 1..=20;

/// "limit = 0" along a ladder means the last three rungs stay below this
/// value and do not increase.
pub const LIMIT_ZERO_TOL: f64 = 1e-6;

/// Number of budget units in the norm-ball dynamic program.
pub const DP_BUDGET_UNITS: usize = 400;

/// Slack constant `C` in the main-inequality check, applied as `C·h`.
pub const MAIN_INEQUALITY_SLACK_C: f64 = 4.0;

/// Tolerance multiplier for the epi-limit conjugate identity, applied as `k·h`.
pub const EPI_IDENTITY_C: f64 = 3.0;

/// Base seed of the scenario suite.
pub const DEFAULT_SEED: u64 = 0x0005_EED0_FE91_u64;

/// Stream separator: per-stream seeds are `seed ^ stream·GOLDEN`, then
/// expanded through SplitMix64 into the xoshiro256** state.
pub const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Seeded generator for a named stream.
pub fn rng(seed: u64, stream: u64) -> rand_xoshiro::Xoshiro256StarStar {
    use rand::SeedableRng;
    rand_xoshiro::Xoshiro256StarStar::seed_from_u64(seed ^ stream.wrapping_mul(GOLDEN))
}
