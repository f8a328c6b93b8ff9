//! Flat coefficient vector for a model specification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::spec::{CellId, ModelSpec};

/// Stored coefficients in the flat order defined by [`ModelSpec::cells`].
/// Reference-chair coefficients are implicitly zero and not stored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterVector {
    values: Vec<f64>,
}

impl ParameterVector {
    /// The all-zero vector (the uniform model) for `spec`.
    pub fn zeros(spec: &ModelSpec) -> Self {
        ParameterVector {
            values: vec![0.0; spec.param_count()],
        }
    }

    pub fn from_values(spec: &ModelSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.param_count() {
            return Err(Error::ParameterLength {
                expected: spec.param_count(),
                got: values.len(),
            });
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Sample(format!("non-finite coefficient {bad}")));
        }
        Ok(ParameterVector { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, flat: usize) -> f64 {
        self.values[flat]
    }

    /// Coefficient for a semantic cell; `None` if the spec does not store it.
    pub fn cell(&self, spec: &ModelSpec, cell: &CellId) -> Option<f64> {
        spec.cell_index(cell).map(|i| self.values[i])
    }

    /// Set a coefficient by semantic cell.
    pub fn set_cell(&mut self, spec: &ModelSpec, cell: &CellId, value: f64) -> Result<()> {
        let idx = spec.cell_index(cell).ok_or_else(|| {
            Error::Config(format!("model {} has no cell {cell:?}", spec.variant()))
        })?;
        self.values[idx] = value;
        Ok(())
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Largest absolute coefficient (0 for an empty vector).
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Check that this vector matches `spec`'s layout.
    pub fn check_spec(&self, spec: &ModelSpec) -> Result<()> {
        if self.values.len() != spec.param_count() {
            return Err(Error::ParameterLength {
                expected: spec.param_count(),
                got: self.values.len(),
            });
        }
        Ok(())
    }
}
