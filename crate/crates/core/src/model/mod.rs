//! Data model and likelihood of the multinomial logit with missing data.

mod likelihood;
mod params;
mod sample;
mod spec;

pub use likelihood::{
    assignment_probabilities, linear_predictor, log_likelihood, probabilities_for, score,
};
pub use params::ParameterVector;
pub use sample::{Circumstances, SampleUnit};
pub use spec::{param_count, ActiveCells, CellId, CellKind, ModelSpec, ModelVariant};

pub(crate) use likelihood::unit_softmax;
