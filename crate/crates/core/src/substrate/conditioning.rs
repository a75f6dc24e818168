use crate::lattice::SpacetimePoint;

use super::{CollapseEvent, CollapseHistory, DensityOperator, LocalState, Substrate, SubstrateError};

/// Occupation expectation per lattice point, indexed like
/// [`Lattice::point_index`](crate::lattice::Lattice::point_index).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    cells: usize,
    values: Vec<f64>,
}

impl DensityField {
    pub fn from_values(cells: usize, values: Vec<f64>) -> Self {
        Self { cells, values }
    }

    pub fn at_index(&self, index: usize) -> f64 {
        self.values[index]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    /// Constant field, handy for predicate tests.
    pub fn constant(cells: usize, steps: usize, value: f64) -> Self {
        Self { cells, values: vec![value; cells * steps] }
    }
}

impl Substrate {
    fn check_history(&self, h: &CollapseHistory) -> Result<(), SubstrateError> {
        let mut last: Option<usize> = None;
        for e in &h.events {
            if !self.lattice.contains(&e.point) {
                return Err(SubstrateError::InconsistentHistory(format!("event at {} outside the lattice", e.point)));
            }
            if e.outcome > 1 {
                return Err(SubstrateError::InconsistentHistory(format!("outcome {} at {}", e.outcome, e.point)));
            }
            let idx = self.lattice.point_index(&e.point);
            if last.is_some_and(|l| idx <= l) {
                return Err(SubstrateError::InconsistentHistory(format!("event at {} out of order or repeated", e.point)));
            }
            last = Some(idx);
        }
        Ok(())
    }

    /// Global state at slice `p.t` conditioned on the events of `h`:
    /// selective projection for events in the past cone of `p`, dephasing
    /// for the rest. Events after `p.t` play no role.
    pub fn conditioned_state(&self, h: &CollapseHistory, p: &SpacetimePoint) -> Result<DensityOperator, SubstrateError> {
        self.conditioned_state_by(h, p, |e| self.lattice.in_past_cone(&e.point, p)).map(|(rho, _)| rho)
    }

    /// Like [`Substrate::conditioned_state`] with an arbitrary choice of
    /// which events act selectively. Also returns the joint Born
    /// probability of the selective outcomes.
    pub fn conditioned_state_by(
        &self,
        h: &CollapseHistory,
        p: &SpacetimePoint,
        selective: impl Fn(&CollapseEvent) -> bool,
    ) -> Result<(DensityOperator, f64), SubstrateError> {
        self.lattice.check(p)?;
        self.check_history(h)?;
        let mut rho = self.initial.to_density();
        let mut joint = 1.0;
        let mut events = h.events.iter().peekable();
        for t in 0..=p.t {
            if t > 0 {
                self.brickwork.apply_layer(&mut rho, t - 1);
            }
            while let Some(e) = events.next_if(|e| e.point.t == t) {
                let cell = self.lattice.cell_index(&e.point.cell);
                if selective(e) {
                    let prob = rho.project(cell, e.outcome);
                    if !(prob > 0.0) {
                        return Err(SubstrateError::InconsistentHistory(format!(
                            "outcome {} at {} has zero probability",
                            e.outcome, e.point
                        )));
                    }
                    joint *= prob;
                } else {
                    rho.dephase(cell);
                }
            }
        }
        Ok((rho, joint))
    }

    /// Local state of the cell of `p` given the collapses in its past cone.
    pub fn conditioned_local_state(&self, h: &CollapseHistory, p: &SpacetimePoint) -> Result<LocalState, SubstrateError> {
        let rho = self.conditioned_state(h, p)?;
        Ok(rho.partial_trace(self.lattice.cell_index(&p.cell)))
    }

    /// The mass-density ontology of one history.
    pub fn density_field(&self, h: &CollapseHistory) -> Result<DensityField, SubstrateError> {
        let values = self
            .lattice
            .points()
            .map(|p| self.conditioned_local_state(h, &p).map(|s| s.occupation().clamp(0.0, 1.0)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(DensityField { cells: self.lattice.num_cells(), values })
    }
}
