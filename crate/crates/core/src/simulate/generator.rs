//! The assignment-stream generator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::CourtConfig;
use crate::date::Date;
use crate::error::{Error, Result};
use crate::ingest::{AssignmentEvent, AvailabilityCalendar, UnavailableInterval};
use crate::model::{
    probabilities_for, Circumstances, ModelSpec, ModelVariant, ParameterVector, SampleUnit,
};

/// How each case picks a chair among the available ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum AssignmentRule {
    /// Equal probability over available chairs.
    UniformAvailable,
    /// Weight `exp(-gamma * running_proportion)` per available chair; the
    /// stand-in for a caseload-balancing rule.
    ProportionPenalized { gamma: f64 },
    /// Fixed non-negative weight per chair (zero removes a chair from the
    /// draw without marking it unavailable).
    FixedBias { weights: Vec<f64> },
    /// Draw from a fitted-model family at the given coefficients.
    TrueModel {
        variant: ModelVariant,
        params: Vec<f64>,
    },
}

/// Where the per-chair proportion covariates of the generated sample come
/// from.
///
/// Running proportions mirror the real process but are self-averaging: as
/// history accumulates the chairs' proportions converge, the covariate loses
/// cross-chair variation, and proportion slopes become only weakly
/// identified no matter how long the stream runs. Estimator-validation
/// experiments therefore use exogenous draws, which keep the design
/// informative at every sample size.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum CovariateProcess {
    /// The class's cumulative assignment shares through the previous day
    /// (the uniform default before any history), exactly as the ingest
    /// pipeline reconstructs them.
    #[default]
    RunningProportions,
    /// A fresh uniform draw from the simplex for every (day, class) unit:
    /// normalized unit-exponential variates over all chairs.
    ExogenousUniform,
}

/// Which chairs are unavailable on which days.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum AvailabilityScenario {
    AllAvailable,
    /// Exactly one chair unavailable at a time, rotating through all chairs
    /// every `period_days` days (chair `(day / period) % n` sits out).
    RotatingUnavailable { period_days: usize },
    Calendar(AvailabilityCalendar),
}

impl AvailabilityScenario {
    fn mask(&self, day_index: usize, date: Date, n: usize) -> Vec<bool> {
        match self {
            AvailabilityScenario::AllAvailable => vec![true; n],
            AvailabilityScenario::RotatingUnavailable { period_days } => {
                let out = (day_index / period_days) % n;
                (0..n).map(|j| j != out).collect()
            }
            AvailabilityScenario::Calendar(cal) => cal.mask(date, n),
        }
    }

    /// Materialize the scenario as a calendar for the ingest pipeline.
    fn to_calendar(
        &self,
        start: Date,
        n_days: usize,
        n: usize,
        config: &CourtConfig,
    ) -> Result<AvailabilityCalendar> {
        match self {
            AvailabilityScenario::AllAvailable => Ok(AvailabilityCalendar::all_available()),
            AvailabilityScenario::Calendar(cal) => Ok(cal.clone()),
            AvailabilityScenario::RotatingUnavailable { period_days } => {
                let mut intervals = Vec::new();
                let mut date = start;
                let mut open: Option<(usize, Date, Date)> = None;
                for t in 0..n_days {
                    let out = (t / period_days) % n;
                    match open {
                        Some((chair, s, _)) if chair == out => open = Some((chair, s, date)),
                        Some((chair, s, e)) => {
                            intervals.push(UnavailableInterval {
                                chair_idx: chair,
                                start: s,
                                end: e,
                                reason: "rotation".into(),
                            });
                            open = Some((out, date, date));
                        }
                        None => open = Some((out, date, date)),
                    }
                    date = date.succ();
                }
                if let Some((chair, s, e)) = open {
                    intervals.push(UnavailableInterval {
                        chair_idx: chair,
                        start: s,
                        end: e,
                        reason: "rotation".into(),
                    });
                }
                AvailabilityCalendar::from_intervals(intervals, config)
            }
        }
    }
}

/// Full description of a synthetic stream; a fixed spec yields a
/// byte-identical stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub rule: AssignmentRule,
    pub n_days: usize,
    pub start_date: Date,
    /// Arrivals per (day, class); one entry per configured class.
    pub intensities: Vec<u64>,
    /// Draw arrivals as Poisson(intensity) instead of fixed counts.
    pub poisson_arrivals: bool,
    pub availability: AvailabilityScenario,
    #[serde(default)]
    pub covariates: CovariateProcess,
    pub seed: u64,
}

impl GeneratorSpec {
    /// Fixed-intensity, all-available spec with the given rule.
    pub fn new(rule: AssignmentRule, n_days: usize, intensity: u64, seed: u64) -> Self {
        GeneratorSpec {
            rule,
            n_days,
            start_date: "2020-01-01".parse().expect("valid date"),
            intensities: vec![intensity],
            poisson_arrivals: false,
            availability: AvailabilityScenario::AllAvailable,
            covariates: CovariateProcess::RunningProportions,
            seed,
        }
    }

    pub fn with_availability(mut self, availability: AvailabilityScenario) -> Self {
        self.availability = availability;
        self
    }

    pub fn with_covariates(mut self, covariates: CovariateProcess) -> Self {
        self.covariates = covariates;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self, config: &CourtConfig) -> Result<()> {
        if self.intensities.len() != config.n_classes() {
            return Err(Error::Generator(format!(
                "{} intensities for {} classes",
                self.intensities.len(),
                config.n_classes()
            )));
        }
        match &self.rule {
            AssignmentRule::UniformAvailable => {}
            AssignmentRule::ProportionPenalized { gamma } => {
                if !gamma.is_finite() {
                    return Err(Error::Generator(format!("gamma {gamma} is not finite")));
                }
            }
            AssignmentRule::FixedBias { weights } => {
                if weights.len() != config.n_chairs {
                    return Err(Error::Generator(format!(
                        "{} weights for {} chairs",
                        weights.len(),
                        config.n_chairs
                    )));
                }
                if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
                    return Err(Error::Generator("weights must be non-negative".into()));
                }
                if !weights.iter().any(|w| *w > 0.0) {
                    return Err(Error::Generator("at least one weight must be positive".into()));
                }
            }
            AssignmentRule::TrueModel { variant, params } => {
                let spec = ModelSpec::new(*variant, config)?;
                if params.len() != spec.param_count() {
                    return Err(Error::Generator(format!(
                        "model {variant} requires {} coefficients, got {}",
                        spec.param_count(),
                        params.len()
                    )));
                }
            }
        }
        if let AvailabilityScenario::RotatingUnavailable { period_days } = self.availability {
            if period_days == 0 {
                return Err(Error::Generator("rotation period must be at least 1".into()));
            }
        }
        Ok(())
    }
}

/// The exact probability vector used for one (day, class) block of draws.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub date: Date,
    pub class_idx: usize,
    pub availability: Vec<bool>,
    pub probabilities: Vec<f64>,
}

/// Everything a simulation run produces.
#[derive(Clone, Debug)]
pub struct SimOutput {
    pub events: Vec<AssignmentEvent>,
    pub truth: Vec<TruthRecord>,
    /// Calendar equivalent of the availability scenario, ready for
    /// [`crate::ingest::build_sample`].
    pub calendar: AvailabilityCalendar,
    /// Class-by-chair totals kept by the generator itself.
    pub totals: Vec<Vec<u64>>,
    /// The generated units with the exact covariates the rule saw; for
    /// running proportions this matches what
    /// [`crate::ingest::build_sample`] reconstructs from the events.
    pub sample: Vec<SampleUnit>,
}

/// Draw a synthetic assignment stream.
pub fn simulate_assignments(gen: &GeneratorSpec, config: &CourtConfig) -> Result<SimOutput> {
    config.validate()?;
    gen.validate(config)?;
    let n = config.n_chairs;
    let c = config.n_classes();
    let k = config.covariate_names.len();
    let prop_idx = config.proportion_idx();

    let model = match &gen.rule {
        AssignmentRule::TrueModel { variant, params } => {
            let spec = ModelSpec::new(*variant, config)?;
            let params = ParameterVector::from_values(&spec, params.clone())?;
            Some((spec, params))
        }
        _ => None,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(gen.seed);
    let mut cum = vec![vec![0u64; n]; c];
    let mut cum_total = vec![0u64; c];
    let mut totals = vec![vec![0u64; n]; c];
    let mut events = Vec::new();
    let mut truth = Vec::new();
    let mut sample = Vec::new();

    let mut date = gen.start_date;
    for day in 0..gen.n_days {
        let availability = gen.availability.mask(day, date, n);
        for class in 0..c {
            let arrivals = if gen.poisson_arrivals {
                poisson(&mut rng, gen.intensities[class] as f64)
            } else {
                gen.intensities[class]
            };
            if arrivals == 0 {
                continue;
            }
            if !availability.iter().any(|&a| a) {
                return Err(Error::Generator(format!(
                    "arrivals on {date} but no chair is available"
                )));
            }

            let proportions: Vec<f64> = match gen.covariates {
                CovariateProcess::RunningProportions => (0..n)
                    .map(|j| {
                        if cum_total[class] == 0 {
                            1.0 / n as f64
                        } else {
                            cum[class][j] as f64 / cum_total[class] as f64
                        }
                    })
                    .collect(),
                CovariateProcess::ExogenousUniform => {
                    // uniform on the simplex: normalized unit exponentials
                    let raw: Vec<f64> = (0..n)
                        .map(|_| -(1.0 - rng.gen::<f64>()).ln())
                        .collect();
                    let total: f64 = raw.iter().sum();
                    if total > 0.0 {
                        raw.iter().map(|e| e / total).collect()
                    } else {
                        vec![1.0 / n as f64; n]
                    }
                }
            };
            let probabilities =
                rule_probabilities(gen, config, &model, class, &availability, &proportions, k, prop_idx, date)?;

            let mut counts = vec![0u64; n];
            for _ in 0..arrivals {
                let u: f64 = rng.gen();
                counts[categorical(&probabilities, u)] += 1;
            }
            for (j, &count) in counts.iter().enumerate() {
                if count > 0 {
                    events.push(AssignmentEvent {
                        date,
                        class_idx: class,
                        chair_idx: j,
                        count,
                    });
                    totals[class][j] += count;
                }
            }
            truth.push(TruthRecord {
                date,
                class_idx: class,
                availability: availability.clone(),
                probabilities,
            });
            let covariates: Vec<Vec<f64>> = (0..n)
                .map(|j| {
                    let mut row = vec![0.0; k];
                    if let Some(p) = prop_idx {
                        row[p] = proportions[j];
                    }
                    row
                })
                .collect();
            sample.push(SampleUnit::new(
                config,
                date,
                class,
                counts,
                availability.clone(),
                covariates,
            )?);
        }
        // fold the day's draws into the running history after the day ends;
        // totals are all-time counters, so the cumulative state is a copy
        for class in 0..c {
            cum_total[class] = 0;
            for j in 0..n {
                cum[class][j] = totals[class][j];
                cum_total[class] += totals[class][j];
            }
        }
        date = date.succ();
    }

    let calendar = gen
        .availability
        .to_calendar(gen.start_date, gen.n_days, n, config)?;
    Ok(SimOutput {
        events,
        truth,
        calendar,
        totals,
        sample,
    })
}

#[allow(clippy::too_many_arguments)]
fn rule_probabilities(
    gen: &GeneratorSpec,
    config: &CourtConfig,
    model: &Option<(ModelSpec, ParameterVector)>,
    class: usize,
    availability: &[bool],
    proportions: &[f64],
    k: usize,
    prop_idx: Option<usize>,
    date: Date,
) -> Result<Vec<f64>> {
    let n = config.n_chairs;
    match &gen.rule {
        AssignmentRule::UniformAvailable => {
            let available = availability.iter().filter(|&&a| a).count();
            Ok(availability
                .iter()
                .map(|&a| if a { 1.0 / available as f64 } else { 0.0 })
                .collect())
        }
        AssignmentRule::ProportionPenalized { gamma } => {
            let weights: Vec<f64> = (0..n)
                .map(|j| {
                    if availability[j] {
                        (-gamma * proportions[j]).exp()
                    } else {
                        0.0
                    }
                })
                .collect();
            normalize(&weights, date)
        }
        AssignmentRule::FixedBias { weights } => {
            let masked: Vec<f64> = (0..n)
                .map(|j| if availability[j] { weights[j] } else { 0.0 })
                .collect();
            normalize(&masked, date)
        }
        AssignmentRule::TrueModel { .. } => {
            let (spec, params) = model.as_ref().expect("validated");
            let covariates: Vec<Vec<f64>> = (0..n)
                .map(|j| {
                    let mut row = vec![0.0; k];
                    if let Some(p) = prop_idx {
                        row[p] = proportions[j];
                    }
                    row
                })
                .collect();
            let circ = Circumstances {
                class_index: class,
                availability,
                covariates: &covariates,
            };
            probabilities_for(params, &circ, spec)
        }
    }
}

fn normalize(weights: &[f64], date: Date) -> Result<Vec<f64>> {
    let total: f64 = weights.iter().sum();
    if total.is_nan() || total <= 0.0 || total.is_infinite() {
        return Err(Error::Generator(format!(
            "no positive weight among available chairs on {date}"
        )));
    }
    Ok(weights.iter().map(|w| w / total).collect())
}

/// Index of the chair selected by uniform draw `u` over `probabilities`.
fn categorical(probabilities: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (j, &p) in probabilities.iter().enumerate() {
        if p > 0.0 {
            last_positive = j;
            acc += p;
            if u < acc {
                return j;
            }
        }
    }
    last_positive
}

/// Poisson draw by Knuth's product method, chunked so the exponential never
/// underflows for large means.
fn poisson(rng: &mut ChaCha8Rng, mut lambda: f64) -> u64 {
    let mut total = 0u64;
    while lambda > 0.0 {
        let chunk = lambda.min(30.0);
        lambda -= chunk;
        let l = (-chunk).exp();
        let mut p = 1.0;
        let mut k = 0u64;
        loop {
            p *= rng.gen::<f64>();
            if p <= l {
                break;
            }
            k += 1;
        }
        total += k;
    }
    total
}
