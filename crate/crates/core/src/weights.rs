//! Weight functionals `A(D)`, kept in the log domain.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grouping::Consciousness;
use crate::qualia::QualiaDistribution;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightError {
    #[error("weight parameter {name} is not finite ({value})")]
    NonFinite { name: String, value: f64 },
    #[error("typed weight names unknown quale type `{0}`")]
    UnknownType(String),
    #[error("factorized weight needs the consciousness partition")]
    MissingComponents,
}

/// Exponential-family weights; all parameters zero gives `A = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    /// `A(D) = exp(beta * |D|)`
    Counting { beta: f64 },
    /// `A(D) = exp(sum_j beta_j * count_j(D))`; unlisted types get 0.
    Typed { betas: BTreeMap<String, f64> },
    /// `A(D) = prod_c exp(beta * |c|)` over consciousnesses `c`.
    Factorized { beta: f64 },
}

impl WeightSpec {
    pub fn counting(beta: f64) -> Self {
        WeightSpec::Counting { beta }
    }

    /// Checks parameters, and typed names against the quale types in play.
    pub fn validate(&self, quale_names: &[String]) -> Result<(), WeightError> {
        let finite = |name: &str, value: f64| {
            if value.is_finite() {
                Ok(())
            } else {
                Err(WeightError::NonFinite { name: name.into(), value })
            }
        };
        match self {
            WeightSpec::Counting { beta } | WeightSpec::Factorized { beta } => finite("beta", *beta),
            WeightSpec::Typed { betas } => {
                for (name, &b) in betas {
                    finite(name, b)?;
                    if !quale_names.contains(name) {
                        return Err(WeightError::UnknownType(name.clone()));
                    }
                }
                Ok(())
            }
        }
    }

    /// Same family with every parameter scaled to `beta` (typed: all types).
    pub fn with_beta(&self, beta: f64) -> Self {
        match self {
            WeightSpec::Counting { .. } => WeightSpec::Counting { beta },
            WeightSpec::Factorized { .. } => WeightSpec::Factorized { beta },
            WeightSpec::Typed { betas } => WeightSpec::Typed { betas: betas.keys().map(|k| (k.clone(), beta)).collect() },
        }
    }

    pub fn is_uniform(&self) -> bool {
        match self {
            WeightSpec::Counting { beta } | WeightSpec::Factorized { beta } => *beta == 0.0,
            WeightSpec::Typed { betas } => betas.values().all(|&b| b == 0.0),
        }
    }

    /// `ln A(D)`.
    pub fn log_weight(&self, d: &QualiaDistribution, components: Option<&[Consciousness]>) -> Result<f64, WeightError> {
        self.validate_finite()?;
        Ok(match self {
            WeightSpec::Counting { beta } => beta * d.len() as f64,
            WeightSpec::Typed { betas } => d
                .names()
                .iter()
                .zip(d.counts())
                .map(|(name, &n)| betas.get(name).copied().unwrap_or(0.0) * n as f64)
                .sum(),
            WeightSpec::Factorized { beta } => {
                let components = components.ok_or(WeightError::MissingComponents)?;
                components.iter().map(|c| beta * c.size() as f64).sum()
            }
        })
    }

    pub fn weight(&self, d: &QualiaDistribution, components: Option<&[Consciousness]>) -> Result<f64, WeightError> {
        self.log_weight(d, components).map(f64::exp)
    }

    fn validate_finite(&self) -> Result<(), WeightError> {
        match self {
            WeightSpec::Counting { beta } | WeightSpec::Factorized { beta } if !beta.is_finite() => {
                Err(WeightError::NonFinite { name: "beta".into(), value: *beta })
            }
            WeightSpec::Typed { betas } => match betas.iter().find(|(_, b)| !b.is_finite()) {
                Some((name, &value)) => Err(WeightError::NonFinite { name: name.clone(), value }),
                None => Ok(()),
            },
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Execution;
    use crate::grouping::group;
    use crate::lattice::SpacetimePoint;
    use crate::qualia::Quale;
    use std::sync::Arc;

    fn dist(cells: &[usize]) -> QualiaDistribution {
        let names: Arc<[String]> = vec!["a".to_string(), "b".to_string()].into();
        let qualia = cells.iter().enumerate().map(|(i, &x)| Quale { point: SpacetimePoint::on_line(x, 0), kind: i % 2 }).collect();
        QualiaDistribution::new(names, qualia)
    }

    #[test]
    fn zero_beta_is_unit_weight() {
        let d = dist(&[0, 3, 4]);
        let comps = group(&d, 1, Execution::Sequential);
        for spec in [WeightSpec::counting(0.0), WeightSpec::Factorized { beta: 0.0 }, WeightSpec::Typed { betas: BTreeMap::new() }] {
            assert_eq!(spec.weight(&d, Some(&comps)).unwrap(), 1.0);
            assert!(spec.is_uniform());
        }
    }

    #[test]
    fn counting_doubles_per_quale() {
        let w = WeightSpec::counting(2f64.ln()).weight(&dist(&[0, 1, 2]), None).unwrap();
        assert!((w - 8.0).abs() < 1e-12);
    }

    #[test]
    fn factorized_matches_counting() {
        let d = dist(&[0, 3, 4]);
        let comps = group(&d, 1, Execution::Sequential);
        assert_eq!(comps.iter().map(|c| c.size()).collect::<Vec<_>>(), vec![1, 2]);
        let f = WeightSpec::Factorized { beta: 1.0 }.log_weight(&d, Some(&comps)).unwrap();
        let c = WeightSpec::counting(1.0).log_weight(&d, None).unwrap();
        assert_eq!(f, 3.0);
        assert_eq!(f, c);
        assert_eq!(WeightSpec::Factorized { beta: 1.0 }.log_weight(&d, None), Err(WeightError::MissingComponents));
    }

    #[test]
    fn typed_weights_by_name() {
        let d = dist(&[0, 1, 2]); // kinds a, b, a
        let spec = WeightSpec::Typed { betas: BTreeMap::from([("a".into(), 0.5), ("b".into(), -1.0)]) };
        assert_eq!(spec.log_weight(&d, None).unwrap(), 0.0);
        assert!(spec.validate(d.names()).is_ok());
        let bad = WeightSpec::Typed { betas: BTreeMap::from([("zzz".into(), 1.0)]) };
        assert_eq!(bad.validate(d.names()), Err(WeightError::UnknownType("zzz".into())));
    }

    #[test]
    fn non_finite_rejected() {
        let d = dist(&[0]);
        assert!(matches!(WeightSpec::counting(f64::NAN).log_weight(&d, None), Err(WeightError::NonFinite { .. })));
        assert!(WeightSpec::counting(f64::INFINITY).validate(&[]).is_err());
    }

    #[test]
    fn large_log_weights_stay_finite() {
        let d = dist(&(0..100).collect::<Vec<_>>());
        assert_eq!(WeightSpec::counting(7.0).log_weight(&d, None).unwrap(), 700.0);
        assert!(WeightSpec::counting(7.0).weight(&d, None).unwrap().is_finite());
    }
}
