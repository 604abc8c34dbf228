//! Inputs shared by the criterion benchmarks.

use vmsdta::dnl::ComplianceRates;
use vmsdta::scenario::fig1;
use vmsdta::{DepartureProfile, Scenario};

/// The `fig1` fixture with its default day-one profile and compliance rates.
pub fn fig1_day_one() -> (Scenario, DepartureProfile, ComplianceRates) {
    let scenario = fig1().validate().expect("fixture validates");
    let profile = vmsdta::daytoday::initial_profile(&scenario);
    let rates = scenario.affected_partitions().map(|p| ((p.od, p.sign), 0.5)).collect();
    (scenario, profile, rates)
}
