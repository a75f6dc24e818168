//! Exact quantum and reweighted laws over qualia distributions by
//! enumerating every positive-probability history.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::pipeline::{Outcome, Pipeline};
use crate::substrate::SubstrateError;
use crate::weights::{WeightError, WeightSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumEntry {
    pub outcome: Outcome,
    /// `P_q(D)`: total probability of the histories producing `D`.
    pub p_q: f64,
    /// Number of histories producing `D`.
    pub histories: usize,
}

/// The quantum law `P_q` over distinct qualia distributions, ordered by
/// canonical key.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumTable {
    pub entries: Vec<QuantumEntry>,
    pub history_count: usize,
    /// Sum of enumerated history probabilities (1 up to rounding).
    pub total_mass: f64,
}

impl QuantumTable {
    /// Enumerates histories (at most `cap`) and aggregates them by `D`.
    pub fn build(pipeline: &Pipeline<'_>, cap: usize) -> Result<Self, SubstrateError> {
        let histories = pipeline.substrate.enumerate_histories(cap)?;
        let outcomes = pipeline.outcomes(&histories)?;
        let lattice = pipeline.substrate.lattice();
        let mut by_key: BTreeMap<Vec<(u32, u32)>, QuantumEntry> = BTreeMap::new();
        let mut total_mass = 0.0;
        for (h, outcome) in histories.iter().zip(outcomes) {
            let p = h.probability();
            total_mass += p;
            by_key
                .entry(outcome.distribution.canonical_key(lattice))
                .and_modify(|e| {
                    e.p_q += p;
                    e.histories += 1;
                })
                .or_insert(QuantumEntry { outcome, p_q: p, histories: 1 });
        }
        Ok(Self { entries: by_key.into_values().collect(), history_count: histories.len(), total_mass })
    }

    /// `E_q[f(D)]`.
    pub fn expectation(&self, f: impl Fn(&Outcome) -> f64) -> f64 {
        self.entries.iter().map(|e| e.p_q * f(&e.outcome)).sum()
    }

    /// Reweights by `A`: `P_true(D) = C * P_q(D) * A(D)`, computed in the
    /// log domain. A constant weight returns `P_q` unchanged.
    pub fn reweight(self: &Arc<Self>, spec: &WeightSpec) -> Result<TrueDistribution, WeightError> {
        let log_weights = self
            .entries
            .iter()
            .map(|e| spec.log_weight(&e.outcome.distribution, Some(&e.outcome.components)))
            .collect::<Result<Vec<_>, _>>()?;
        let constant = log_weights.windows(2).all(|w| w[0] == w[1]);
        let (p_true, log_normalizer): (Vec<f64>, f64) = if constant {
            let lw = log_weights.first().copied().unwrap_or(0.0);
            (self.entries.iter().map(|e| e.p_q).collect(), -lw)
        } else {
            let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let scaled: Vec<f64> = self.entries.iter().zip(&log_weights).map(|(e, lw)| e.p_q * (lw - max).exp()).collect();
            let z: f64 = scaled.iter().sum();
            (scaled.iter().map(|s| s / z).collect(), -(max + z.ln()))
        };
        let rows = self
            .entries
            .iter()
            .zip(log_weights)
            .zip(p_true)
            .map(|((e, log_weight), p_true)| TrueRow { p_q: e.p_q, log_weight, weight: log_weight.exp(), p_true })
            .collect();
        Ok(TrueDistribution { table: Arc::clone(self), rows, log_normalizer, normalizer: log_normalizer.exp() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrueRow {
    pub p_q: f64,
    pub log_weight: f64,
    pub weight: f64,
    pub p_true: f64,
}

/// `P_true` aligned row by row with the entries of its quantum table.
#[derive(Debug, Clone, PartialEq)]
pub struct TrueDistribution {
    pub table: Arc<QuantumTable>,
    pub rows: Vec<TrueRow>,
    /// `C = 1 / E_q[A]`. May overflow to infinity or zero for extreme
    /// weights; `log_normalizer` stays finite.
    pub normalizer: f64,
    pub log_normalizer: f64,
}

impl TrueDistribution {
    /// `E_true[f(D)]`.
    pub fn expectation(&self, f: impl Fn(&Outcome) -> f64) -> f64 {
        self.table.entries.iter().zip(&self.rows).map(|(e, r)| r.p_true * f(&e.outcome)).sum()
    }

    pub fn total(&self) -> f64 {
        self.rows.iter().map(|r| r.p_true).sum()
    }

    /// Total variation distance to the quantum law.
    pub fn tv_to_quantum(&self) -> f64 {
        0.5 * self.rows.iter().map(|r| (r.p_true - r.p_q).abs()).sum::<f64>()
    }

    /// Largest `|P_true - C * P_q * A|` over rows.
    pub fn max_product_residual(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.p_true - (self.log_normalizer + r.log_weight).exp() * r.p_q).abs())
            .fold(0.0, f64::max)
    }
}

/// `E[|D|]` under a law given as an expectation operator.
pub fn mean_qualia(outcome: &Outcome) -> f64 {
    outcome.distribution.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Execution;
    use crate::lattice::{Lattice, LatticeConfig};
    use crate::predicate::{parse_predicates, ParseContext};
    use crate::qualia::ProgramRules;
    use crate::substrate::{InitialState, Substrate, SubstrateConfig, DEFAULT_BRANCH_CAP};
    use std::f64::consts::FRAC_PI_4;

    fn table(pc: f64, src: &str) -> Arc<QuantumTable> {
        let lat = Lattice::new(LatticeConfig::line(2, 2, 1, 1)).unwrap();
        let rules = ProgramRules::new(parse_predicates(src, &ParseContext::for_lattice(&lat)).unwrap());
        let s = Substrate::new(lat, SubstrateConfig::new(FRAC_PI_4, pc, InitialState::Product("10".into()))).unwrap();
        let p = Pipeline::new(&s, &rules, Execution::Parallel);
        Arc::new(QuantumTable::build(&p, DEFAULT_BRANCH_CAP).unwrap())
    }

    #[test]
    fn mass_is_conserved() {
        let t = table(0.5, "quale on: rho[0][0] > 0.75");
        assert!((t.total_mass - 1.0).abs() < 1e-12);
        let p: f64 = t.entries.iter().map(|e| e.p_q).sum();
        assert!((p - 1.0).abs() < 1e-12);
        assert!(t.entries.windows(2).all(|w| w[0].outcome.distribution != w[1].outcome.distribution));
    }

    #[test]
    fn zero_beta_is_identity() {
        let t = table(0.5, "quale on: rho[0][0] > 0.75");
        let d = t.reweight(&WeightSpec::counting(0.0)).unwrap();
        assert_eq!(d.tv_to_quantum(), 0.0);
        assert_eq!(d.normalizer, 1.0);
    }

    #[test]
    fn positive_beta_tilts_toward_more_qualia() {
        let t = table(0.5, "quale on: rho[0][0] > 0.75");
        let base = t.expectation(mean_qualia);
        let d = t.reweight(&WeightSpec::counting(1.0)).unwrap();
        assert!((d.total() - 1.0).abs() < 1e-12);
        assert!(d.max_product_residual() < 1e-12);
        assert!(d.expectation(mean_qualia) > base);
    }

    #[test]
    fn constant_weight_shortcut() {
        // Every point is a quale, so A is the same for every D.
        let t = table(0.5, "quale all: true");
        assert_eq!(t.entries.len(), 1);
        let d = t.reweight(&WeightSpec::counting(2.0)).unwrap();
        assert_eq!(d.rows[0].p_true, t.entries[0].p_q);
        assert_eq!(d.tv_to_quantum(), 0.0);
        assert!((d.log_normalizer + 8.0).abs() < 1e-12);
    }
}
