//! Finite measure spaces, upper integrals and integral functionals, `L_p`
//! and Orlicz gauges, the δ⁺ index, uniform integrability, the de la Vallée
//! Poussin construction, biting extraction and the conjugate interchange.
//!
//! Atomless behaviour is emulated by dyadic refinements of `(0, 1]`.

pub mod delta;
pub mod integral;
pub mod interchange;
pub mod space;
pub mod ui;

pub use delta::{
    default_eps_ladder, delta_plus_bruteforce, delta_plus_greedy, max_small_set, AtomSequence, DeltaReport,
};
pub use integral::{integral_functional, lp_norm, orlicz_gauge, upper_integral, Integrand, IntegrandFlags};
pub use interchange::{conjugate_interchange_check, InterchangeReport};
pub use space::{MeasureSpace, Refinement, SetSequence, SimpleFunction};
pub use ui::{
    biting_extract, ui_test_sequence, uniform_integrability_test, young_from_ui, BitingOptions, BitingReport, UiOptions, UiReport,
    YoungCertificate, YoungProfile,
};
