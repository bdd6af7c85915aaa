//! Discrete variational analysis on grids and finite measure spaces.
//!
//! The crate samples extended-real functions on uniform grids and measurable
//! functions on weighted atoms, then computes conjugates, convex envelopes,
//! epi-limits, integral functionals, the δ⁺ equi-integrability index and
//! subdifferentiability certificates. The [`scenarios`] module replays the
//! main identities and inequalities end to end.

pub mod config;
pub mod epilimit;
pub mod error;
pub mod extreal;
pub mod grid;
pub mod legendre;
pub mod measure;
pub mod scenarios;
pub mod sequence;
pub mod subdiff;

pub use error::{Error, Result};
pub use extreal::{upper_sum, ExtReal};
pub use grid::{Grid, GridFunction};
pub use legendre::{ConjugateResult, DualGrid};
