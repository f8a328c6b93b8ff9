//! Court configuration: chairs, case classes, and covariate names.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Static description of the court whose assignment stream is audited.
///
/// Chairs are numbered `1..=n_chairs` in files and reports; the library
/// indexes them `0..n_chairs` internally. One chair is the *reference*:
/// its coefficients are pinned to zero to identify the multinomial logit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CourtConfig {
    pub n_chairs: usize,
    pub class_labels: Vec<String>,
    /// 1-based chair number whose coefficients are pinned to zero.
    pub reference_chair: usize,
    /// Ordered names of per-chair covariates carried by each sample unit.
    pub covariate_names: Vec<String>,
}

/// Name of the running-proportion covariate used by the built-in models.
pub const PROPORTION_COVARIATE: &str = "proportion";

impl CourtConfig {
    pub fn new(
        n_chairs: usize,
        class_labels: Vec<String>,
        reference_chair: usize,
        covariate_names: Vec<String>,
    ) -> Result<Self> {
        let config = CourtConfig {
            n_chairs,
            class_labels,
            reference_chair,
            covariate_names,
        };
        config.validate()?;
        Ok(config)
    }

    /// A court with `n_chairs` chairs, the given classes, reference chair 1,
    /// and the single `proportion` covariate.
    pub fn with_proportion(n_chairs: usize, class_labels: &[&str]) -> Result<Self> {
        CourtConfig::new(
            n_chairs,
            class_labels.iter().map(|s| s.to_string()).collect(),
            1,
            vec![PROPORTION_COVARIATE.to_string()],
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_chairs < 2 {
            return Err(Error::Config(format!(
                "n_chairs must be at least 2, got {}",
                self.n_chairs
            )));
        }
        if self.reference_chair < 1 || self.reference_chair > self.n_chairs {
            return Err(Error::Config(format!(
                "reference chair {} outside 1..={}",
                self.reference_chair, self.n_chairs
            )));
        }
        if self.class_labels.is_empty() {
            return Err(Error::Config("class_labels must be non-empty".into()));
        }
        for (i, a) in self.class_labels.iter().enumerate() {
            if a.is_empty() {
                return Err(Error::Config("class labels must be non-empty".into()));
            }
            if a.contains(',') || a.contains('\n') || a.contains('\r') {
                return Err(Error::Config(format!(
                    "class label {a:?} must not contain commas or line breaks"
                )));
            }
            if self.class_labels[..i].contains(a) {
                return Err(Error::Config(format!("duplicate class label {a:?}")));
            }
        }
        for (i, a) in self.covariate_names.iter().enumerate() {
            if self.covariate_names[..i].contains(a) {
                return Err(Error::Config(format!("duplicate covariate name {a:?}")));
            }
        }
        Ok(())
    }

    pub fn n_classes(&self) -> usize {
        self.class_labels.len()
    }

    /// 0-based index of the reference chair.
    pub fn reference_idx(&self) -> usize {
        self.reference_chair - 1
    }

    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.class_labels.iter().position(|c| c == label)
    }

    pub fn covariate_index(&self, name: &str) -> Option<usize> {
        self.covariate_names.iter().position(|c| c == name)
    }

    /// Index of the running-proportion covariate, if configured.
    pub fn proportion_idx(&self) -> Option<usize> {
        self.covariate_index(PROPORTION_COVARIATE)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_configs() {
        assert!(CourtConfig::with_proportion(1, &["A"]).is_err());
        assert!(CourtConfig::with_proportion(3, &[]).is_err());
        assert!(CourtConfig::with_proportion(3, &["A", "A"]).is_err());
        assert!(CourtConfig::new(3, vec!["A".into()], 4, vec![]).is_err());
        assert!(CourtConfig::new(3, vec!["A".into()], 0, vec![]).is_err());
    }

    #[test]
    fn lookups() {
        let c = CourtConfig::with_proportion(11, &["HC", "RE"]).unwrap();
        assert_eq!(c.n_classes(), 2);
        assert_eq!(c.reference_idx(), 0);
        assert_eq!(c.class_index("RE"), Some(1));
        assert_eq!(c.class_index("??"), None);
        assert_eq!(c.proportion_idx(), Some(0));
    }
}
