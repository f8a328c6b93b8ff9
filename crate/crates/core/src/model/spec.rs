//! The six nested model parameterizations and their coefficient layouts.
//!
//! Every model is a multinomial logit over chairs in which the reference
//! chair's coefficients are pinned to zero (and not stored). The variants
//! differ in which coefficients exist and which are shared across chairs:
//!
//! * `M1`: class effect and proportion effect, both per chair
//! * `M2`: shared class effect, per-chair proportion effect
//! * `M3`: shared class effect, shared proportion effect
//! * `M4`: per-chair intercept and proportion effect, no class effect
//! * `M5`: per-chair class effect, no proportion effect
//! * `M6`: shared intercept and shared proportion effect

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::{CourtConfig, PROPORTION_COVARIATE};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelVariant {
    M1,
    M2,
    M3,
    M4,
    M5,
    M6,
}

impl ModelVariant {
    pub const ALL: [ModelVariant; 6] = [
        ModelVariant::M1,
        ModelVariant::M2,
        ModelVariant::M3,
        ModelVariant::M4,
        ModelVariant::M5,
        ModelVariant::M6,
    ];

    fn uses_proportion(self) -> bool {
        !matches!(self, ModelVariant::M5)
    }

    /// Whether `reduced` is a linear restriction of `self`'s coefficient
    /// space (reflexively true).
    pub fn nests(self, reduced: ModelVariant) -> bool {
        use ModelVariant::*;
        if self == reduced {
            return true;
        }
        match self {
            M1 => true,
            M2 => matches!(reduced, M3 | M6),
            M3 => reduced == M6,
            M4 => reduced == M6,
            M5 | M6 => false,
        }
    }
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModelVariant::M1 => "m1",
            ModelVariant::M2 => "m2",
            ModelVariant::M3 => "m3",
            ModelVariant::M4 => "m4",
            ModelVariant::M5 => "m5",
            ModelVariant::M6 => "m6",
        };
        f.write_str(s)
    }
}

impl FromStr for ModelVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "m1" => Ok(ModelVariant::M1),
            "m2" => Ok(ModelVariant::M2),
            "m3" => Ok(ModelVariant::M3),
            "m4" => Ok(ModelVariant::M4),
            "m5" => Ok(ModelVariant::M5),
            "m6" => Ok(ModelVariant::M6),
            other => Err(Error::Config(format!(
                "unknown model {other:?}, expected one of m1..m6"
            ))),
        }
    }
}

/// Number of stored coefficients for `variant` under `config`.
pub fn param_count(variant: ModelVariant, config: &CourtConfig) -> Result<usize> {
    config.validate()?;
    let n = config.n_chairs;
    let c = config.n_classes();
    Ok(match variant {
        ModelVariant::M1 => (c + 1) * (n - 1),
        ModelVariant::M2 => c + (n - 1),
        ModelVariant::M3 => c + 1,
        ModelVariant::M4 => 2 * (n - 1),
        ModelVariant::M5 => c * (n - 1),
        ModelVariant::M6 => 2,
    })
}

/// What a single stored coefficient multiplies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellKind {
    /// One-hot indicator of the given class (0-based index).
    Class(usize),
    /// Constant 1.
    Intercept,
    /// The chair's running-proportion covariate.
    Proportion,
}

/// Semantic identity of one stored coefficient: its kind plus the chair it
/// belongs to (`None` when shared across all non-reference chairs).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellId {
    /// 0-based chair index; `None` for a coefficient shared across chairs.
    pub chair: Option<usize>,
    pub kind: CellKind,
}

impl CellId {
    /// Human-readable label, e.g. `class[HC]@chair3` or `proportion`.
    pub fn label(&self, config: &CourtConfig) -> String {
        let kind = match self.kind {
            CellKind::Class(i) => match config.class_labels.get(i) {
                Some(name) => format!("class[{name}]"),
                None => format!("class[#{i}]"),
            },
            CellKind::Intercept => "intercept".to_string(),
            CellKind::Proportion => PROPORTION_COVARIATE.to_string(),
        };
        match self.chair {
            Some(idx) => format!("{kind}@chair{}", idx + 1),
            None => kind,
        }
    }
}

impl fmt::Display for CellId {
    /// Index-based label (class labels are not known here): `class[#2]@chair5`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            CellKind::Class(i) => write!(f, "class[#{i}]")?,
            CellKind::Intercept => f.write_str("intercept")?,
            CellKind::Proportion => f.write_str(PROPORTION_COVARIATE)?,
        }
        if let Some(idx) = self.chair {
            write!(f, "@chair{}", idx + 1)?;
        }
        Ok(())
    }
}

/// Up to two (flat index, covariate value) pairs active for one chair in one
/// unit. Every built-in variant touches at most a class/intercept cell and a
/// proportion cell per chair.
#[derive(Clone, Copy, Debug, Default)]
pub struct ActiveCells {
    len: usize,
    cells: [(usize, f64); 2],
}

impl ActiveCells {
    fn push(&mut self, index: usize, value: f64) {
        self.cells[self.len] = (index, value);
        self.len += 1;
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.cells[..self.len].iter().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

/// A model variant bound to a court configuration: owns the bijection
/// between flat coefficient indices and semantic cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    variant: ModelVariant,
    n_chairs: usize,
    n_classes: usize,
    reference_idx: usize,
    proportion_idx: Option<usize>,
    param_count: usize,
}

impl ModelSpec {
    pub fn new(variant: ModelVariant, config: &CourtConfig) -> Result<Self> {
        let count = param_count(variant, config)?;
        let proportion_idx = config.proportion_idx();
        if variant.uses_proportion() && proportion_idx.is_none() {
            return Err(Error::Config(format!(
                "model {variant} requires a {PROPORTION_COVARIATE:?} covariate, \
                 configuration has {:?}",
                config.covariate_names
            )));
        }
        Ok(ModelSpec {
            variant,
            n_chairs: config.n_chairs,
            n_classes: config.n_classes(),
            reference_idx: config.reference_idx(),
            proportion_idx,
            param_count: count,
        })
    }

    /// Rebind the same variant with a different reference chair (1-based).
    pub fn with_reference(&self, config: &CourtConfig, reference_chair: usize) -> Result<Self> {
        let mut config = config.clone();
        config.reference_chair = reference_chair;
        ModelSpec::new(self.variant, &config)
    }

    pub fn variant(&self) -> ModelVariant {
        self.variant
    }

    pub fn n_chairs(&self) -> usize {
        self.n_chairs
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn reference_idx(&self) -> usize {
        self.reference_idx
    }

    pub fn param_count(&self) -> usize {
        self.param_count
    }

    /// Position of a non-reference chair among the stored chairs.
    fn chair_slot(&self, chair_idx: usize) -> usize {
        debug_assert_ne!(chair_idx, self.reference_idx);
        if chair_idx < self.reference_idx {
            chair_idx
        } else {
            chair_idx - 1
        }
    }

    /// Semantic identities of the stored coefficients, in flat order.
    pub fn cells(&self) -> Vec<CellId> {
        let (n, c) = (self.n_chairs, self.n_classes);
        let chairs = (0..n).filter(|&j| j != self.reference_idx);
        let mut out = Vec::with_capacity(self.param_count);
        match self.variant {
            ModelVariant::M1 => {
                for j in chairs {
                    for i in 0..c {
                        out.push(CellId {
                            chair: Some(j),
                            kind: CellKind::Class(i),
                        });
                    }
                    out.push(CellId {
                        chair: Some(j),
                        kind: CellKind::Proportion,
                    });
                }
            }
            ModelVariant::M2 => {
                for i in 0..c {
                    out.push(CellId {
                        chair: None,
                        kind: CellKind::Class(i),
                    });
                }
                for j in chairs {
                    out.push(CellId {
                        chair: Some(j),
                        kind: CellKind::Proportion,
                    });
                }
            }
            ModelVariant::M3 => {
                for i in 0..c {
                    out.push(CellId {
                        chair: None,
                        kind: CellKind::Class(i),
                    });
                }
                out.push(CellId {
                    chair: None,
                    kind: CellKind::Proportion,
                });
            }
            ModelVariant::M4 => {
                for j in chairs {
                    out.push(CellId {
                        chair: Some(j),
                        kind: CellKind::Intercept,
                    });
                    out.push(CellId {
                        chair: Some(j),
                        kind: CellKind::Proportion,
                    });
                }
            }
            ModelVariant::M5 => {
                for j in chairs {
                    for i in 0..c {
                        out.push(CellId {
                            chair: Some(j),
                            kind: CellKind::Class(i),
                        });
                    }
                }
            }
            ModelVariant::M6 => {
                out.push(CellId {
                    chair: None,
                    kind: CellKind::Intercept,
                });
                out.push(CellId {
                    chair: None,
                    kind: CellKind::Proportion,
                });
            }
        }
        debug_assert_eq!(out.len(), self.param_count);
        out
    }

    /// Flat index of a semantic cell, if the variant stores it.
    pub fn cell_index(&self, cell: &CellId) -> Option<usize> {
        let c = self.n_classes;
        let slot = |chair: Option<usize>| -> Option<usize> {
            let j = chair?;
            (j != self.reference_idx && j < self.n_chairs).then(|| self.chair_slot(j))
        };
        match (self.variant, cell.kind, cell.chair) {
            (ModelVariant::M1, CellKind::Class(i), chair) if i < c => {
                Some(slot(chair)? * (c + 1) + i)
            }
            (ModelVariant::M1, CellKind::Proportion, chair) => Some(slot(chair)? * (c + 1) + c),
            (ModelVariant::M2, CellKind::Class(i), None) if i < c => Some(i),
            (ModelVariant::M2, CellKind::Proportion, chair) => Some(c + slot(chair)?),
            (ModelVariant::M3, CellKind::Class(i), None) if i < c => Some(i),
            (ModelVariant::M3, CellKind::Proportion, None) => Some(c),
            (ModelVariant::M4, CellKind::Intercept, chair) => Some(2 * slot(chair)?),
            (ModelVariant::M4, CellKind::Proportion, chair) => Some(2 * slot(chair)? + 1),
            (ModelVariant::M5, CellKind::Class(i), chair) if i < c => Some(slot(chair)? * c + i),
            (ModelVariant::M6, CellKind::Intercept, None) => Some(0),
            (ModelVariant::M6, CellKind::Proportion, None) => Some(1),
            _ => None,
        }
    }

    /// The (flat index, covariate value) pairs contributing to the linear
    /// predictor of `chair_idx` for a unit of class `class_idx` whose
    /// proportion covariate for that chair is `proportion`. Empty for the
    /// reference chair.
    pub fn active_cells(&self, class_idx: usize, chair_idx: usize, proportion: f64) -> ActiveCells {
        let mut out = ActiveCells::default();
        if chair_idx == self.reference_idx {
            return out;
        }
        let c = self.n_classes;
        let s = self.chair_slot(chair_idx);
        match self.variant {
            ModelVariant::M1 => {
                out.push(s * (c + 1) + class_idx, 1.0);
                out.push(s * (c + 1) + c, proportion);
            }
            ModelVariant::M2 => {
                out.push(class_idx, 1.0);
                out.push(c + s, proportion);
            }
            ModelVariant::M3 => {
                out.push(class_idx, 1.0);
                out.push(c, proportion);
            }
            ModelVariant::M4 => {
                out.push(2 * s, 1.0);
                out.push(2 * s + 1, proportion);
            }
            ModelVariant::M5 => {
                out.push(s * c + class_idx, 1.0);
            }
            ModelVariant::M6 => {
                out.push(0, 1.0);
                out.push(1, proportion);
            }
        }
        out
    }

    /// Index of the proportion covariate in each unit's covariate matrix.
    pub(crate) fn proportion_covariate(&self) -> Option<usize> {
        if self.variant.uses_proportion() {
            self.proportion_idx
        } else {
            None
        }
    }
}
