use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lattice::SpacetimePoint;

use super::{StateVector, Substrate, SubstrateError, ZERO_PROBABILITY};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CollapseEvent {
    pub point: SpacetimePoint,
    pub outcome: u8,
}

/// Collapse sites and outcomes of one run, in `(t, cell index)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct CollapseHistory {
    pub events: Vec<CollapseEvent>,
    /// Natural log of the site-selection probability times the Born
    /// probabilities of the outcomes.
    pub log_probability: f64,
}

/// Compact identity of a history: `(point index << 1) | outcome` per event.
pub type HistoryKey = Vec<u32>;

impl CollapseHistory {
    pub fn empty() -> Self {
        Self { events: Vec::new(), log_probability: 0.0 }
    }

    pub fn probability(&self) -> f64 {
        self.log_probability.exp()
    }

    pub fn sites(&self) -> impl Iterator<Item = SpacetimePoint> + '_ {
        self.events.iter().map(|e| e.point)
    }
}

impl Substrate {
    pub fn history_key(&self, h: &CollapseHistory) -> HistoryKey {
        h.events.iter().map(|e| ((self.lattice.point_index(&e.point) as u32) << 1) | e.outcome as u32).collect()
    }

    /// Draws one history from the collapse law with a stream-separated
    /// generator, so `(seed, stream)` fixes the draw regardless of how many
    /// other streams are drawn or in which order.
    pub fn sample_history_seeded(&self, seed: u64, stream: u64) -> CollapseHistory {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        self.sample_history(&mut rng)
    }

    /// Draws collapse sites independently with the collapse rate and
    /// outcomes by the Born rule with selective renormalization.
    pub fn sample_history<R: Rng + ?Sized>(&self, rng: &mut R) -> CollapseHistory {
        let pc = self.config.collapse_rate;
        let cells = self.lattice.num_cells();
        let mut psi = self.initial.clone();
        let mut events = Vec::new();
        let mut log_p = 0.0;
        for t in 0..self.lattice.steps() {
            if t > 0 {
                self.brickwork.apply_layer_pure(&mut psi, t - 1);
            }
            for cell in 0..cells {
                let collapse = if pc >= 1.0 {
                    true
                } else if pc <= 0.0 {
                    false
                } else {
                    let hit = rng.random::<f64>() < pc;
                    log_p += if hit { pc.ln() } else { (1.0 - pc).ln() };
                    hit
                };
                if !collapse {
                    continue;
                }
                let p1 = psi.outcome_probability(cell, 1);
                let p0 = psi.outcome_probability(cell, 0);
                let outcome = if p1 <= ZERO_PROBABILITY {
                    0
                } else if p0 <= ZERO_PROBABILITY {
                    1
                } else {
                    u8::from(rng.random::<f64>() * (p0 + p1) < p1)
                };
                let p = if outcome == 1 { p1 } else { p0 };
                log_p += p.ln();
                psi.project(cell, outcome, p);
                events.push(CollapseEvent { point: self.lattice.point_at(t * cells + cell), outcome });
            }
        }
        CollapseHistory { events, log_probability: log_p }
    }

    /// Number of `(site pattern, outcome)` branches before pruning
    /// impossible outcomes: `k^(points)` with `k` = 1, 2 or 3.
    pub fn branch_bound(&self) -> f64 {
        let pc = self.config.collapse_rate;
        let per_point: f64 = if pc <= 0.0 {
            1.0
        } else if pc >= 1.0 {
            2.0
        } else {
            3.0
        };
        per_point.powi(self.lattice.num_points() as i32)
    }

    /// Every history with positive probability, in depth-first order
    /// (per site: no collapse, outcome 0, outcome 1).
    ///
    /// Fails with [`SubstrateError::CapExceeded`] as soon as more than `cap`
    /// positive-probability histories are found.
    pub fn enumerate_histories(&self, cap: usize) -> Result<Vec<CollapseHistory>, SubstrateError> {
        let mut walker = Walker { substrate: self, cap, bound: self.branch_bound(), out: Vec::new(), events: Vec::new() };
        walker.visit(0, 0, self.initial.clone(), 0.0)?;
        Ok(walker.out)
    }
}

struct Walker<'a> {
    substrate: &'a Substrate,
    cap: usize,
    bound: f64,
    out: Vec<CollapseHistory>,
    events: Vec<super::CollapseEvent>,
}

impl Walker<'_> {
    fn visit(&mut self, t: usize, cell: usize, psi: StateVector, log_p: f64) -> Result<(), SubstrateError> {
        let lattice = &self.substrate.lattice;
        let cells = lattice.num_cells();
        if cell == cells {
            if t + 1 == lattice.steps() {
                if self.out.len() == self.cap {
                    return Err(SubstrateError::CapExceeded { cap: self.cap, bound: self.bound });
                }
                self.out.push(CollapseHistory { events: self.events.clone(), log_probability: log_p });
                return Ok(());
            }
            let mut next = psi;
            self.substrate.brickwork.apply_layer_pure(&mut next, t);
            return self.visit(t + 1, 0, next, log_p);
        }
        let pc = self.substrate.config.collapse_rate;
        if pc < 1.0 {
            let step = if pc > 0.0 { (1.0 - pc).ln() } else { 0.0 };
            self.visit(t, cell + 1, psi.clone(), log_p + step)?;
        }
        if pc > 0.0 {
            let point = lattice.point_at(t * cells + cell);
            for outcome in 0..2u8 {
                let p = psi.outcome_probability(cell, outcome);
                if p <= ZERO_PROBABILITY {
                    continue;
                }
                let mut branch = psi.clone();
                branch.project(cell, outcome, p);
                self.events.push(super::CollapseEvent { point, outcome });
                let result = self.visit(t, cell + 1, branch, log_p + pc.ln() + p.ln());
                self.events.pop();
                result?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Lattice, LatticeConfig};
    use crate::substrate::{InitialState, SubstrateConfig};
    use std::collections::HashMap;

    fn substrate(cells: usize, steps: usize, theta: f64, pc: f64, init: InitialState) -> Substrate {
        let lat = Lattice::new(LatticeConfig::line(cells, steps, 1, 1)).unwrap();
        Substrate::new(lat, SubstrateConfig::new(theta, pc, init)).unwrap()
    }

    fn product(s: &str) -> InitialState {
        InitialState::Product(s.into())
    }

    #[test]
    fn no_collapse_gives_empty_history() {
        let s = substrate(2, 3, 0.4, 0.0, product("10"));
        let h = s.sample_history_seeded(7, 0);
        assert!(h.events.is_empty());
        assert_eq!(h.log_probability, 0.0);
        let all = s.enumerate_histories(16).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].probability(), 1.0);
    }

    #[test]
    fn occupied_cell_collapses_to_one() {
        let s = substrate(1, 1, 0.0, 1.0, product("1"));
        let h = s.sample_history_seeded(3, 0);
        assert_eq!(h.events, vec![CollapseEvent { point: SpacetimePoint::on_line(0, 0), outcome: 1 }]);
        assert_eq!(h.log_probability, 0.0);
    }

    #[test]
    fn plus_state_branches_evenly() {
        let s = substrate(1, 1, 0.0, 1.0, product("+"));
        let all = s.enumerate_histories(16).unwrap();
        assert_eq!(all.len(), 2);
        for h in &all {
            assert!((h.probability() - 0.5).abs() < 1e-15);
        }
        let ones = (0..4000).filter(|&i| s.sample_history_seeded(11, i).events[0].outcome == 1).count();
        // Four standard errors of a fair coin over 4000 draws is about 126.
        assert!((ones as i64 - 2000).abs() < 127, "{ones}");
    }

    #[test]
    fn enumeration_mass_sums_to_one() {
        let s = substrate(2, 2, std::f64::consts::FRAC_PI_4, 0.5, product("10"));
        let all = s.enumerate_histories(1 << 20).unwrap();
        let total: f64 = all.iter().map(CollapseHistory::probability).sum();
        assert!((total - 1.0).abs() < 1e-10, "{total}");
        assert_eq!(s.branch_bound(), 81.0);
        assert!(all.len() <= 81);
    }

    #[test]
    fn cap_is_enforced() {
        let s = substrate(3, 3, 0.7, 0.5, product("+-+"));
        let err = s.enumerate_histories(10).unwrap_err();
        assert!(matches!(err, SubstrateError::CapExceeded { cap: 10, .. }));
    }

    #[test]
    fn sampled_log_probability_matches_enumeration() {
        let s = substrate(3, 2, 0.9, 0.4, InitialState::Bell { pair: [0, 2] });
        let table: HashMap<_, _> = s.enumerate_histories(1 << 20).unwrap().into_iter().map(|h| (s.history_key(&h), h.log_probability)).collect();
        for i in 0..200 {
            let h = s.sample_history_seeded(5, i);
            let expected = table[&s.history_key(&h)];
            assert!((h.log_probability - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn seeded_draws_are_reproducible() {
        let s = substrate(3, 3, 0.9, 0.4, product("1+0"));
        for i in 0..20 {
            assert_eq!(s.sample_history_seeded(99, i), s.sample_history_seeded(99, i));
        }
    }
}
