//! History -> density field -> qualia -> consciousnesses.

use crate::exec::Execution;
use crate::grouping::{group, Consciousness};
use crate::qualia::{assign_qualia, Diagnostic, QualiaDistribution, QualiaRules};
use crate::substrate::{CollapseHistory, Substrate, SubstrateError};

/// What one history produces.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub distribution: QualiaDistribution,
    pub components: Vec<Consciousness>,
    pub diagnostics: Vec<Diagnostic>,
}

/// A substrate together with the rules read off its density field.
///
/// Parallelism is applied across histories; the per-history work runs
/// sequentially.
pub struct Pipeline<'a> {
    pub substrate: &'a Substrate,
    pub rules: &'a dyn QualiaRules,
    pub exec: Execution,
}

impl<'a> Pipeline<'a> {
    pub fn new(substrate: &'a Substrate, rules: &'a dyn QualiaRules, exec: Execution) -> Self {
        Self { substrate, rules, exec }
    }

    pub fn outcome(&self, h: &CollapseHistory) -> Result<Outcome, SubstrateError> {
        let lattice = self.substrate.lattice();
        let field = self.substrate.density_field(h)?;
        let assignment = assign_qualia(self.rules, lattice, &field, Execution::Sequential);
        let components = group(&assignment.distribution, lattice.grouping_radius(), Execution::Sequential);
        Ok(Outcome { distribution: assignment.distribution, components, diagnostics: assignment.diagnostics })
    }

    /// Outcomes of many histories, in input order.
    pub fn outcomes(&self, histories: &[CollapseHistory]) -> Result<Vec<Outcome>, SubstrateError> {
        self.exec.try_map_slice(histories, |h| self.outcome(h))
    }
}
