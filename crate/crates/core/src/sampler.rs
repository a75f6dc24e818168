//! Monte Carlo over histories with self-normalized reweighting.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use crate::pipeline::{Outcome, Pipeline};
use crate::substrate::SubstrateError;
use crate::weights::{WeightError, WeightSpec};

/// Default lower bound on `ESS / n` before a warning is raised.
pub const DEFAULT_MIN_ESS_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub outcome: Arc<Outcome>,
    pub log_p_q: f64,
}

/// `n` histories drawn from `P_q`. Sample `i` uses stream `i` of the seed,
/// so the set is independent of the execution policy.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseSamples {
    pub seed: u64,
    pub records: Vec<SampleRecord>,
    /// Number of distinct histories among the draws.
    pub unique_histories: usize,
}

impl BaseSamples {
    pub fn draw(pipeline: &Pipeline<'_>, n: usize, seed: u64) -> Result<Self, SubstrateError> {
        let substrate = pipeline.substrate;
        let histories = pipeline.exec.map_range(n, |i| substrate.sample_history_seeded(seed, i as u64));
        let mut index: HashMap<Vec<u32>, usize> = HashMap::new();
        let mut unique = Vec::new();
        let slots: Vec<usize> = histories
            .iter()
            .map(|h| {
                *index.entry(substrate.history_key(h)).or_insert_with(|| {
                    unique.push(h.clone());
                    unique.len() - 1
                })
            })
            .collect();
        let outcomes: Vec<Arc<Outcome>> = pipeline.outcomes(&unique)?.into_iter().map(Arc::new).collect();
        let records = histories
            .iter()
            .zip(slots)
            .map(|(h, slot)| SampleRecord { outcome: Arc::clone(&outcomes[slot]), log_p_q: h.log_probability })
            .collect();
        Ok(Self { seed, records, unique_histories: unique.len() })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Self-normalized importance weights `w_i ∝ A(D_i)`.
    pub fn reweight(self: &Arc<Self>, spec: &WeightSpec, min_ess_fraction: f64) -> Result<WeightedSamples, WeightError> {
        let log_weights = self
            .records
            .iter()
            .map(|r| spec.log_weight(&r.outcome.distribution, Some(&r.outcome.components)))
            .collect::<Result<Vec<_>, _>>()?;
        let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let raw: Vec<f64> = log_weights.iter().map(|lw| (lw - max).exp()).collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|r| r / total).collect();
        let ess = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
        let n = self.len() as f64;
        let warning = (ess < min_ess_fraction * n).then(|| {
            format!("effective sample size {ess:.1} is below {:.1}% of {} samples", 100.0 * min_ess_fraction, self.len())
        });
        Ok(WeightedSamples { base: Arc::clone(self), log_weights, weights, ess, warning })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSamples {
    pub base: Arc<BaseSamples>,
    pub log_weights: Vec<f64>,
    /// Normalized; exactly `1/n` each when the weight is constant.
    pub weights: Vec<f64>,
    pub ess: f64,
    pub warning: Option<String>,
}

impl WeightedSamples {
    /// Self-normalized estimate of `E_true[f(D)]` with the delta-method
    /// standard error `sqrt(sum w_i^2 (f_i - mean)^2)`.
    pub fn estimate(&self, f: impl Fn(&Outcome) -> f64) -> Estimate {
        let values: Vec<f64> = self.base.records.iter().map(|r| f(&r.outcome)).collect();
        let mean: f64 = values.iter().zip(&self.weights).map(|(v, w)| v * w).sum();
        let var: f64 = values.iter().zip(&self.weights).map(|(v, w)| w * w * (v - mean) * (v - mean)).sum();
        Estimate { mean, std_error: var.sqrt() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{mean_qualia, QuantumTable};
    use crate::exec::Execution;
    use crate::lattice::{Lattice, LatticeConfig};
    use crate::predicate::{parse_predicates, ParseContext};
    use crate::qualia::ProgramRules;
    use crate::substrate::{InitialState, Substrate, SubstrateConfig};

    fn setup() -> (Substrate, ProgramRules) {
        let lat = Lattice::new(LatticeConfig::line(3, 2, 1, 1)).unwrap();
        let rules = ProgramRules::new(parse_predicates("quale on: rho[0][0] > 0.6", &ParseContext::for_lattice(&lat)).unwrap());
        let s = Substrate::new(lat, SubstrateConfig::new(0.6, 0.5, InitialState::Product("100".into()))).unwrap();
        (s, rules)
    }

    #[test]
    fn uniform_weights_are_exact() {
        let (s, r) = setup();
        let base = Arc::new(BaseSamples::draw(&Pipeline::new(&s, &r, Execution::Parallel), 1000, 7).unwrap());
        let w = base.reweight(&WeightSpec::counting(0.0), DEFAULT_MIN_ESS_FRACTION).unwrap();
        assert!(w.weights.iter().all(|&x| x == 1.0 / 1000.0));
        assert!((w.ess - 1000.0).abs() < 1e-9);
        assert!(w.warning.is_none());
    }

    #[test]
    fn policies_draw_identical_samples() {
        let (s, r) = setup();
        let a = BaseSamples::draw(&Pipeline::new(&s, &r, Execution::Parallel), 300, 3).unwrap();
        let b = BaseSamples::draw(&Pipeline::new(&s, &r, Execution::Sequential), 300, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.unique_histories < 300);
    }

    #[test]
    fn estimate_near_exact() {
        let (s, r) = setup();
        let p = Pipeline::new(&s, &r, Execution::Parallel);
        let table = Arc::new(QuantumTable::build(&p, 1 << 16).unwrap());
        let base = Arc::new(BaseSamples::draw(&p, 20_000, 11).unwrap());
        for beta in [0.0, 1.0] {
            let spec = WeightSpec::counting(beta);
            let exact = table.reweight(&spec).unwrap().expectation(mean_qualia);
            let est = base.reweight(&spec, DEFAULT_MIN_ESS_FRACTION).unwrap().estimate(mean_qualia);
            assert!((est.mean - exact).abs() < 4.0 * est.std_error + 1e-12, "beta {beta}: {est:?} vs {exact}");
        }
    }

    #[test]
    fn ess_warning_for_extreme_weights() {
        let (s, r) = setup();
        let base = Arc::new(BaseSamples::draw(&Pipeline::new(&s, &r, Execution::Parallel), 500, 1).unwrap());
        let w = base.reweight(&WeightSpec::counting(60.0), 0.5).unwrap();
        assert!(w.weights.iter().all(|x| x.is_finite()));
        assert!(w.warning.is_some());
    }
}
