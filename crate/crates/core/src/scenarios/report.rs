use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::extreal::ExtReal;

/// Version tag written into every serialized report.
pub const REPORT_VERSION: u32 = 1;

/// Size profile of a scenario run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    Quick,
    Full,
}

impl std::str::FromStr for Profile {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Profile> {
        match s {
            "quick" => Ok(Profile::Quick),
            "full" => Ok(Profile::Full),
            other => Err(crate::Error::InvalidInput(format!("unknown profile '{other}'; expected quick or full"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    /// `lhs = rhs`; gap `|lhs − rhs|`.
    Eq,
    /// `lhs ≥ rhs`; gap `(rhs − lhs)⁺`.
    Ge,
    /// `lhs ≤ rhs`; gap `(lhs − rhs)⁺`.
    Le,
}

/// One named assertion of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// The statement this check instantiates, in words.
    pub cites: String,
    pub relation: Relation,
    pub lhs: ExtReal,
    pub rhs: ExtReal,
    pub gap: ExtReal,
    pub tolerance: f64,
    pub pass: bool,
}

fn violation(a: ExtReal, b: ExtReal) -> ExtReal {
    // (a − b)⁺ with matching infinities counting as no violation.
    if a == b {
        return ExtReal::ZERO;
    }
    a.upper_add(-b).pos_part()
}

impl Check {
    pub fn new(name: impl Into<String>, cites: impl Into<String>, relation: Relation, lhs: ExtReal, rhs: ExtReal, tolerance: f64) -> Check {
        let gap = match relation {
            Relation::Eq => violation(lhs, rhs).max(violation(rhs, lhs)),
            Relation::Ge => violation(rhs, lhs),
            Relation::Le => violation(lhs, rhs),
        };
        let pass = gap <= ExtReal::Finite(tolerance);
        Check { name: name.into(), cites: cites.into(), relation, lhs, rhs, gap, tolerance, pass }
    }

    pub fn eq(name: impl Into<String>, cites: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Check {
        Check::new(name, cites, Relation::Eq, ExtReal::from_f64(lhs), ExtReal::from_f64(rhs), tolerance)
    }

    pub fn ge(name: impl Into<String>, cites: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Check {
        Check::new(name, cites, Relation::Ge, ExtReal::from_f64(lhs), ExtReal::from_f64(rhs), tolerance)
    }

    pub fn le(name: impl Into<String>, cites: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Check {
        Check::new(name, cites, Relation::Le, ExtReal::from_f64(lhs), ExtReal::from_f64(rhs), tolerance)
    }

    /// A counted property: `violations = 0` exactly.
    pub fn count(name: impl Into<String>, cites: impl Into<String>, violations: usize) -> Check {
        Check::eq(name, cites, violations as f64, 0.0, 0.0)
    }
}

/// Outcome of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub report_v: u32,
    pub scenario: String,
    pub seed: u64,
    pub profile: Profile,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub pass: bool,
    /// Measured by the runner; left out of the JSON so reports stay
    /// byte-identical across runs.
    #[serde(skip)]
    pub wall_time: Duration,
}

impl Report {
    pub fn new(scenario: &str, seed: u64, profile: Profile, checks: Vec<Check>, notes: Vec<String>) -> Report {
        let pass = checks.iter().all(|c| c.pass);
        Report { report_v: REPORT_VERSION, scenario: scenario.to_string(), seed, profile, checks, notes, pass, wall_time: Duration::ZERO }
    }
}

/// Aggregate of [`run_all`](super::run_all), sorted by scenario name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub report_v: u32,
    pub seed: u64,
    pub profile: Profile,
    pub pass: bool,
    pub scenarios: Vec<Report>,
}

impl SuiteReport {
    pub fn new(seed: u64, profile: Profile, mut scenarios: Vec<Report>) -> SuiteReport {
        scenarios.sort_by(|a, b| a.scenario.cmp(&b.scenario));
        let pass = scenarios.iter().all(|r| r.pass);
        SuiteReport { report_v: REPORT_VERSION, seed, profile, pass, scenarios }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaps_follow_the_relation() {
        assert!(Check::ge("a", "", 1.0, 2.0, 1.0).pass);
        assert!(!Check::ge("a", "", 1.0, 2.0, 0.5).pass);
        assert_eq!(Check::le("a", "", 1.0, 2.0, 0.0).gap, ExtReal::ZERO);
        assert_eq!(Check::eq("a", "", 3.0, 1.0, 0.0).gap, ExtReal::Finite(2.0));
        let inf = Check::new("a", "", Relation::Eq, ExtReal::PosInf, ExtReal::PosInf, 0.0);
        assert!(inf.pass);
        let mixed = Check::new("a", "", Relation::Ge, ExtReal::Finite(0.0), ExtReal::PosInf, 1e9);
        assert!(!mixed.pass);
        assert!(Check::count("c", "", 0).pass && !Check::count("c", "", 1).pass);
    }

    #[test]
    fn wall_time_stays_out_of_json() {
        let mut r = Report::new("x", 1, Profile::Quick, vec![], vec![]);
        r.wall_time = Duration::from_secs(3);
        let s = SuiteReport::new(1, Profile::Quick, vec![r]);
        assert!(!s.to_json().contains("wall"));
        assert!(s.to_json().contains("\"report_v\": 1"));
    }
}
