//! Two competing motifs on disjoint cell ranges of a line lattice, and how
//! a qualia-favoring weight shifts which one out-produces the other.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::exact::QuantumTable;
use crate::exec::Execution;
use crate::lattice::{Lattice, LatticeConfig};
use crate::pipeline::{Outcome, Pipeline};
use crate::predicate::{parse_predicates, ParseContext};
use crate::qualia::RegionalRules;
use crate::sampler::{BaseSamples, Estimate, DEFAULT_MIN_ESS_FRACTION};
use crate::substrate::{GateRegion, InitialState, Substrate, SubstrateConfig, DEFAULT_MAX_CELLS};
use crate::weights::WeightSpec;
use crate::Error;

/// Predicate of the stock qualia-rich motif: a quale whenever the
/// excitation has just arrived at a cell.
pub const RICH_PREDICATES: &str = "quale hop: rho[0][0] > 0.5 and rho[0][1] < 0.5\n";

/// Predicate of the stock rival: arrivals count only at the right end of
/// its range.
pub const RIVAL_PREDICATES: &str = "quale edge: rho[0][0] > 0.5 and rho[0][1] < 0.5 and not is_present(rho[1][0])\n";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotifSpec {
    pub name: String,
    pub start: usize,
    pub len: usize,
    /// One of `0 1 + -` per cell of the motif.
    pub initial: String,
    pub hopping_angle: f64,
    /// Predicate source; it sees only the motif's own cells.
    pub predicates: String,
}

/// The two-motif instance. `motifs[0]` is the focal (qualia-rich) motif.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Arena {
    pub cells: usize,
    pub steps: usize,
    pub neighborhood_radius: usize,
    pub grouping_radius: usize,
    pub collapse_rate: f64,
    pub motifs: [MotifSpec; 2],
}

fn motif(name: &str, start: usize, predicates: &str) -> MotifSpec {
    MotifSpec {
        name: name.into(),
        start,
        len: 3,
        initial: "100".into(),
        hopping_angle: std::f64::consts::FRAC_PI_4,
        predicates: predicates.into(),
    }
}

impl Arena {
    /// Six cells, four steps, a collapse at every point; the rich motif can
    /// produce up to two qualia, the rival at most one.
    pub fn stock_asymmetric() -> Self {
        Self {
            cells: 6,
            steps: 4,
            neighborhood_radius: 1,
            grouping_radius: 1,
            collapse_rate: 1.0,
            motifs: [motif("rich", 0, RICH_PREDICATES), motif("rival", 3, RIVAL_PREDICATES)],
        }
    }

    /// Same geometry with two identical rich motifs.
    pub fn stock_symmetric() -> Self {
        let mut a = Self::stock_asymmetric();
        a.motifs[1] = motif("twin", 3, RICH_PREDICATES);
        a
    }

    /// The arena with motif roles exchanged.
    pub fn swapped(&self) -> Self {
        let mut a = self.clone();
        a.motifs.swap(0, 1);
        a
    }

    pub fn validate(&self) -> Result<(), Error> {
        let [a, b] = &self.motifs;
        if a.len != b.len {
            return Err(Error::Config(format!("motif sizes differ ({} vs {})", a.len, b.len)));
        }
        if a.name == b.name {
            return Err(Error::Config(format!("motif names must differ, both are {:?}", a.name)));
        }
        for m in [a, b] {
            if m.len == 0 || m.start + m.len > self.cells {
                return Err(Error::Config(format!("motif {} range {}..{} outside 0..{}", m.name, m.start, m.start + m.len, self.cells)));
            }
            if m.initial.chars().count() != m.len {
                return Err(Error::Config(format!("motif {} initial pattern {:?} needs {} characters", m.name, m.initial, m.len)));
            }
        }
        if a.start < b.start + b.len && b.start < a.start + a.len {
            return Err(Error::Config("motif ranges overlap".into()));
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Scenario, Error> {
        self.validate()?;
        let lattice = Lattice::new(LatticeConfig::line(self.cells, self.steps, self.neighborhood_radius, self.grouping_radius))?;
        let mut pattern = vec!['0'; self.cells];
        for m in &self.motifs {
            for (i, ch) in m.initial.chars().enumerate() {
                pattern[m.start + i] = ch;
            }
        }
        let config = SubstrateConfig {
            hopping_angle: 0.0,
            collapse_rate: self.collapse_rate,
            initial_state: InitialState::Product(pattern.into_iter().collect()),
            max_cells: DEFAULT_MAX_CELLS,
            regions: self
                .motifs
                .iter()
                .map(|m| GateRegion { start: m.start, len: m.len, hopping_angle: m.hopping_angle })
                .collect(),
        };
        let ctx = ParseContext::for_lattice(&lattice);
        let regions = self
            .motifs
            .iter()
            .map(|m| Ok((m.name.clone(), m.start..m.start + m.len, parse_predicates(&m.predicates, &ctx)?)))
            .collect::<Result<Vec<_>, Error>>()?;
        let substrate = Substrate::new(lattice, config)?;
        Ok(Scenario { substrate, rules: RegionalRules::new(regions) })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelectionResult {
    pub beta: f64,
    pub dominance: Estimate,
    pub baseline: Estimate,
    /// Effective sample size; `None` under exact enumeration.
    pub ess: Option<f64>,
}

pub struct Scenario {
    pub substrate: Substrate,
    pub rules: RegionalRules,
}

impl Scenario {
    pub fn pipeline(&self, exec: Execution) -> Pipeline<'_> {
        Pipeline::new(&self.substrate, &self.rules, exec)
    }

    /// Qualia produced by each motif over the whole block.
    pub fn counts(&self, outcome: &Outcome) -> [usize; 2] {
        let lattice = self.substrate.lattice();
        let mut counts = [0; 2];
        for q in outcome.distribution.qualia() {
            if let Some(r) = self.rules.region_of(lattice.cell_index(&q.point.cell)) {
                counts[r] += 1;
            }
        }
        counts
    }

    /// 1 if the focal motif produced strictly more qualia, 1/2 on a tie.
    pub fn score(&self, outcome: &Outcome) -> f64 {
        let [a, b] = self.counts(outcome);
        match a.cmp(&b) {
            std::cmp::Ordering::Greater => 1.0,
            std::cmp::Ordering::Equal => 0.5,
            std::cmp::Ordering::Less => 0.0,
        }
    }

    /// Sampled dominance for each `beta`, reweighting one shared sample set.
    pub fn beta_sweep(&self, family: &WeightSpec, betas: &[f64], n: usize, seed: u64, exec: Execution) -> Result<Vec<SelectionResult>, Error> {
        let base = Arc::new(BaseSamples::draw(&self.pipeline(exec), n, seed)?);
        let baseline = base.reweight(&family.with_beta(0.0), DEFAULT_MIN_ESS_FRACTION)?.estimate(|o| self.score(o));
        betas
            .iter()
            .map(|&beta| {
                let w = base.reweight(&family.with_beta(beta), DEFAULT_MIN_ESS_FRACTION)?;
                Ok(SelectionResult { beta, dominance: w.estimate(|o| self.score(o)), baseline, ess: Some(w.ess) })
            })
            .collect()
    }

    pub fn run_selection(&self, spec: &WeightSpec, n: usize, seed: u64, exec: Execution) -> Result<SelectionResult, Error> {
        let base = Arc::new(BaseSamples::draw(&self.pipeline(exec), n, seed)?);
        let score = |o: &Outcome| self.score(o);
        let baseline = base.reweight(&spec.with_beta(0.0), DEFAULT_MIN_ESS_FRACTION)?.estimate(score);
        let w = base.reweight(spec, DEFAULT_MIN_ESS_FRACTION)?;
        Ok(SelectionResult { beta: beta_of(spec), dominance: w.estimate(score), baseline, ess: Some(w.ess) })
    }

    /// Exact dominance for each `beta` by enumeration (standard errors 0).
    pub fn exact_sweep(&self, family: &WeightSpec, betas: &[f64], cap: usize, exec: Execution) -> Result<Vec<SelectionResult>, Error> {
        let table = Arc::new(QuantumTable::build(&self.pipeline(exec), cap)?);
        let exact = |mean: f64| Estimate { mean, std_error: 0.0 };
        let baseline = exact(table.reweight(&family.with_beta(0.0))?.expectation(|o| self.score(o)));
        betas
            .iter()
            .map(|&beta| {
                let d = table.reweight(&family.with_beta(beta))?;
                Ok(SelectionResult { beta, dominance: exact(d.expectation(|o| self.score(o))), baseline, ess: None })
            })
            .collect()
    }

    pub fn exact_selection(&self, spec: &WeightSpec, cap: usize, exec: Execution) -> Result<SelectionResult, Error> {
        let table = Arc::new(QuantumTable::build(&self.pipeline(exec), cap)?);
        let exact = |mean: f64| Estimate { mean, std_error: 0.0 };
        let baseline = exact(table.reweight(&spec.with_beta(0.0))?.expectation(|o| self.score(o)));
        let dominance = exact(table.reweight(spec)?.expectation(|o| self.score(o)));
        Ok(SelectionResult { beta: beta_of(spec), dominance, baseline, ess: None })
    }
}

/// Representative `beta` of a weight setting (typed: the largest parameter).
fn beta_of(spec: &WeightSpec) -> f64 {
    match spec {
        WeightSpec::Counting { beta } | WeightSpec::Factorized { beta } => *beta,
        WeightSpec::Typed { betas } => betas.values().copied().fold(0.0, f64::max),
    }
}
