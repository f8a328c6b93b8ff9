//! Shared fixtures for the benchmarks: a realistic simulated stream over
//! eleven chairs and fourteen classes.

use sortition_audit::config::CourtConfig;
use sortition_audit::model::SampleUnit;
use sortition_audit::simulate::{
    simulate_assignments, AssignmentRule, AvailabilityScenario, GeneratorSpec,
};

pub fn court() -> CourtConfig {
    let labels = [
        "AC", "ACO", "ADI", "AI", "ARE", "HC", "Inq", "MI", "MS", "Pet", "RE", "RHC", "RMS",
        "Rcl",
    ];
    CourtConfig::with_proportion(11, &labels).unwrap()
}

/// A year of assignments with a rotating empty chair: about 5100 units.
pub fn year_of_data(config: &CourtConfig) -> Vec<SampleUnit> {
    let mut gen = GeneratorSpec::new(AssignmentRule::ProportionPenalized { gamma: 2.0 }, 365, 0, 17)
        .with_availability(AvailabilityScenario::RotatingUnavailable { period_days: 45 });
    gen.intensities = vec![4, 3, 3, 25, 36, 8, 3, 1, 1, 1, 21, 1, 1, 4];
    simulate_assignments(&gen, config).unwrap().sample
}
