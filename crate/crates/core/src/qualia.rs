//! Quale assignment over a density field.

use std::ops::Range;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::exec::Execution;
use crate::lattice::{Lattice, Offset, SpacetimePoint};
use crate::predicate::{Fault, PredicateProgram, Window};
use crate::substrate::DensityField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Quale {
    pub point: SpacetimePoint,
    /// Index into the rule set's quale names.
    pub kind: usize,
}

/// A predicate that failed to evaluate and was taken as false.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub point: SpacetimePoint,
    pub quale: String,
    pub fault: Fault,
}

/// Rules mapping a density window to at most one quale type.
pub trait QualiaRules: Sync {
    fn quale_names(&self) -> &[String];

    /// Quale type at `p`, plus any evaluation faults.
    fn evaluate(&self, lattice: &Lattice, field: &DensityField, p: &SpacetimePoint) -> (Option<usize>, Vec<Diagnostic>);
}

/// Read-only view of the field around a center point, optionally restricted
/// to a range of cell indices (cells outside read as absent).
pub struct FieldWindow<'a> {
    pub lattice: &'a Lattice,
    pub field: &'a DensityField,
    pub center: SpacetimePoint,
    pub mask: Option<Range<usize>>,
}

impl FieldWindow<'_> {
    fn lookup(&self, offset: &Offset, dt: usize) -> Option<f64> {
        if dt > self.center.t {
            return None;
        }
        let cell = self.lattice.shift(&self.center.cell, offset)?;
        let index = self.lattice.cell_index(&cell);
        if self.mask.as_ref().is_some_and(|m| !m.contains(&index)) {
            return None;
        }
        Some(self.field.at_index((self.center.t - dt) * self.lattice.num_cells() + index))
    }
}

impl Window for FieldWindow<'_> {
    fn value(&self, offset: &Offset, dt: usize) -> Option<f64> {
        self.lookup(offset, dt)
    }

    fn present_values(&self) -> Vec<f64> {
        let offsets = self.lattice.window_offsets();
        (0..=self.lattice.radius()).flat_map(|dt| offsets.iter().filter_map(move |o| self.lookup(o, dt))).collect()
    }
}

/// A parsed program applied uniformly over the lattice.
#[derive(Debug, Clone)]
pub struct ProgramRules {
    program: PredicateProgram,
    names: Vec<String>,
}

impl ProgramRules {
    pub fn new(program: PredicateProgram) -> Self {
        let names = program.quale_names();
        Self { program, names }
    }

    pub fn program(&self) -> &PredicateProgram {
        &self.program
    }
}

fn run_program(
    program: &PredicateProgram,
    names: &[String],
    name_offset: usize,
    window: &FieldWindow<'_>,
) -> (Option<usize>, Vec<Diagnostic>) {
    let ev = program.first_match(window);
    let diagnostics = ev
        .faults
        .into_iter()
        .map(|(i, fault)| Diagnostic { point: window.center, quale: names[name_offset + i].clone(), fault })
        .collect();
    (ev.quale.map(|q| q + name_offset), diagnostics)
}

impl QualiaRules for ProgramRules {
    fn quale_names(&self) -> &[String] {
        &self.names
    }

    fn evaluate(&self, lattice: &Lattice, field: &DensityField, p: &SpacetimePoint) -> (Option<usize>, Vec<Diagnostic>) {
        let window = FieldWindow { lattice, field, center: *p, mask: None };
        run_program(&self.program, &self.names, 0, &window)
    }
}

/// Separate programs on disjoint cell-index ranges. Each program sees only
/// its own range; points outside every range carry no quale. Quale names
/// are prefixed `<label>.`.
#[derive(Debug, Clone)]
pub struct RegionalRules {
    regions: Vec<(Range<usize>, PredicateProgram, usize)>,
    names: Vec<String>,
}

impl RegionalRules {
    pub fn new(regions: Vec<(String, Range<usize>, PredicateProgram)>) -> Self {
        let mut names = Vec::new();
        let regions = regions
            .into_iter()
            .map(|(label, range, program)| {
                let offset = names.len();
                names.extend(program.quale_names().into_iter().map(|n| format!("{label}.{n}")));
                (range, program, offset)
            })
            .collect();
        Self { regions, names }
    }

    /// Index of the region containing the cell, if any.
    pub fn region_of(&self, cell_index: usize) -> Option<usize> {
        self.regions.iter().position(|(r, _, _)| r.contains(&cell_index))
    }
}

impl QualiaRules for RegionalRules {
    fn quale_names(&self) -> &[String] {
        &self.names
    }

    fn evaluate(&self, lattice: &Lattice, field: &DensityField, p: &SpacetimePoint) -> (Option<usize>, Vec<Diagnostic>) {
        let index = lattice.cell_index(&p.cell);
        let Some((range, program, offset)) = self.regions.iter().find(|(r, _, _)| r.contains(&index)) else {
            return (None, Vec::new());
        };
        let window = FieldWindow { lattice, field, center: *p, mask: Some(range.clone()) };
        run_program(program, &self.names, *offset, &window)
    }
}

/// The qualia of a whole spacetime block.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QualiaDistribution {
    names: Arc<[String]>,
    /// Sorted by point; at most one quale per point.
    qualia: Vec<Quale>,
    counts: Vec<usize>,
}

impl QualiaDistribution {
    /// Builds a distribution from qualia on distinct points.
    ///
    /// # Panics
    /// If two qualia share a point or a kind is out of range.
    pub fn new(names: Arc<[String]>, mut qualia: Vec<Quale>) -> Self {
        qualia.sort();
        assert!(qualia.windows(2).all(|w| w[0].point != w[1].point), "two qualia on one point");
        let mut counts = vec![0; names.len()];
        for q in &qualia {
            counts[q.kind] += 1;
        }
        Self { names, qualia, counts }
    }

    pub fn empty(names: Arc<[String]>) -> Self {
        Self::new(names, Vec::new())
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn qualia(&self) -> &[Quale] {
        &self.qualia
    }

    pub fn len(&self) -> usize {
        self.qualia.len()
    }

    pub fn is_empty(&self) -> bool {
        self.qualia.is_empty()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// `(point index, kind)` pairs identifying the distribution.
    pub fn canonical_key(&self, lattice: &Lattice) -> Vec<(u32, u32)> {
        self.qualia.iter().map(|q| (lattice.point_index(&q.point) as u32, q.kind as u32)).collect()
    }

    /// First 16 hex digits of SHA-256 over the canonical serialization
    /// `t:x,y,z=name;` per quale.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        for q in &self.qualia {
            let c = q.point.cell;
            hasher.update(format!("{}:{},{},{}={};", q.point.t, c[0], c[1], c[2], self.names[q.kind]).as_bytes());
        }
        hasher.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Qualia of every lattice point together with evaluation diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub distribution: QualiaDistribution,
    pub diagnostics: Vec<Diagnostic>,
}

/// Evaluates the rules at every lattice point.
pub fn assign_qualia<R: QualiaRules + ?Sized>(rules: &R, lattice: &Lattice, field: &DensityField, exec: Execution) -> Assignment {
    let results = exec.map_range(lattice.num_points(), |i| {
        let p = lattice.point_at(i);
        let (kind, diags) = rules.evaluate(lattice, field, &p);
        (kind.map(|kind| Quale { point: p, kind }), diags)
    });
    let mut qualia = Vec::new();
    let mut diagnostics = Vec::new();
    for (q, d) in results {
        qualia.extend(q);
        diagnostics.extend(d);
    }
    let names: Arc<[String]> = rules.quale_names().into();
    Assignment { distribution: QualiaDistribution::new(names, qualia), diagnostics }
}
