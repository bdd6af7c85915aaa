//! End-to-end scenarios and property suites with versioned JSON reports.
//!
//! Every scenario is deterministic in `(seed, profile)`: instances come from
//! per-index xoshiro streams, parallel maps preserve index order, and the
//! aggregate is sorted by name.

mod report;
mod semicontinuity;
mod suites;

use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};

pub use report::{Check, Profile, Relation, Report, SuiteReport, REPORT_VERSION};
pub use semicontinuity::{
    capped_product, necessity_construction, scenario_example7, scenario_formula4, scenario_main_inequality,
    scenario_necessity_construction, well_grid, MainInstance, MainOutcome, NecessityOutcome, PairInstance, PairKind,
    PairOutcome, SpliceStep, Well,
};
pub use suites::{
    random_integer_instance, random_real_instance, suite_biconjugate, suite_conjugacy, suite_delta_plus,
    suite_epi_identity, suite_infconv, suite_interchange, suite_subdiff_chain, suite_ui_equivalence, ui_library,
};

/// Size parameters of a profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sizes {
    pub example7_depth: u32,
    pub example7_n: usize,
    pub main_instances: usize,
    pub formula4_per_kind: usize,
    pub conj_instances: usize,
    pub fy_pairs_per_instance: usize,
    pub biconj_instances: usize,
    pub infconv_instances: usize,
    pub delta_instances: usize,
    pub ui_sequences: usize,
    pub interchange_instances: usize,
}

impl Sizes {
    pub fn for_profile(p: Profile) -> Sizes {
        match p {
            Profile::Quick => Sizes {
                example7_depth: 6,
                example7_n: 100,
                main_instances: 1000,
                formula4_per_kind: 20,
                conj_instances: 500,
                fy_pairs_per_instance: 200,
                biconj_instances: 200,
                infconv_instances: 200,
                delta_instances: 200,
                ui_sequences: 60,
                interchange_instances: 100,
            },
            Profile::Full => Sizes {
                example7_depth: 10,
                example7_n: 100,
                main_instances: 3000,
                formula4_per_kind: 100,
                conj_instances: 1000,
                fy_pairs_per_instance: 200,
                biconj_instances: 400,
                infconv_instances: 400,
                delta_instances: 600,
                ui_sequences: 180,
                interchange_instances: 300,
            },
        }
    }
}

/// Scenario names accepted by [`run_scenario`], in report order.
pub const SCENARIOS: [&str; 12] = [
    "biconjugate",
    "conjugacy",
    "delta-plus",
    "epi-identity",
    "example7",
    "formula4",
    "infconv",
    "interchange",
    "main-inequality",
    "necessity",
    "subdiff-chain",
    "ui-equivalence",
];

/// Runs one named scenario and records its wall time.
pub fn run_scenario(name: &str, seed: u64, profile: Profile) -> Result<Report> {
    let s = Sizes::for_profile(profile);
    let start = Instant::now();
    let mut report = match name {
        "biconjugate" => suite_biconjugate(seed, s.biconj_instances, profile),
        "conjugacy" => suite_conjugacy(seed, s.conj_instances, s.fy_pairs_per_instance, profile),
        "delta-plus" => suite_delta_plus(seed, s.delta_instances, profile),
        "epi-identity" => suite_epi_identity(seed, &[1e-2, 1e-3], profile),
        "example7" => scenario_example7(s.example7_depth, s.example7_n, seed, profile),
        "formula4" => scenario_formula4(seed, s.formula4_per_kind, profile),
        "infconv" => suite_infconv(seed, s.infconv_instances, profile),
        "interchange" => suite_interchange(seed, s.interchange_instances, profile),
        "main-inequality" => scenario_main_inequality(seed, s.main_instances, profile),
        "necessity" => scenario_necessity_construction(seed, profile),
        "subdiff-chain" => suite_subdiff_chain(seed, profile),
        "ui-equivalence" => suite_ui_equivalence(seed, s.ui_sequences, profile),
        other => Err(Error::InvalidInput(format!("unknown scenario '{other}'; expected all or one of {SCENARIOS:?}"))),
    }?;
    report.wall_time = start.elapsed();
    Ok(report)
}

/// Runs every scenario in parallel and aggregates the reports.
pub fn run_all(seed: u64, profile: Profile) -> Result<SuiteReport> {
    let reports: Vec<Report> = SCENARIOS.par_iter().map(|n| run_scenario(n, seed, profile)).collect::<Result<_>>()?;
    Ok(SuiteReport::new(seed, profile, reports))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_scenarios_are_input_errors() {
        assert!(matches!(run_scenario("nope", 1, Profile::Quick), Err(Error::InvalidInput(_))));
        assert!("fast".parse::<Profile>().is_err());
        assert_eq!("full".parse::<Profile>().unwrap(), Profile::Full);
    }

    #[test]
    fn scenario_names_are_sorted() {
        let mut s = SCENARIOS.to_vec();
        s.sort();
        assert_eq!(s, SCENARIOS.to_vec());
    }
}
