//! Collapse-model quantum substrate.
//!
//! Each cell carries one occupation qubit. Time slice `t + 1` is produced
//! from slice `t` by one brickwork layer of number-conserving hopping gates;
//! after the layer, every cell of slice `t + 1` independently undergoes an
//! occupation-basis projective collapse with probability `collapse_rate`.
//! Slice 0 is the initial state followed by its own collapses.
//!
//! The mass-density ontology is the occupation expectation of each cell's
//! local state, conditioned selectively on the collapse outcomes in the past
//! light cone of the point and non-selectively on all others.

mod conditioning;
mod dynamics;
mod history;
mod state;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{Lattice, LatticeError};

pub use conditioning::DensityField;
pub use dynamics::{Brickwork, Gate};
pub use history::{CollapseEvent, CollapseHistory, HistoryKey};
pub use state::{DensityOperator, LocalState, StateVector};

use num_complex::Complex64;

/// Default upper bound on the number of cells (state dimension `2^cells`).
pub const DEFAULT_MAX_CELLS: usize = 12;

/// Default cap on enumerated histories.
pub const DEFAULT_BRANCH_CAP: usize = 1 << 20;

/// Collapse outcomes with Born probability at or below this are treated as
/// impossible, both when sampling and when enumerating.
pub const ZERO_PROBABILITY: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SubstrateError {
    #[error("collapse rate must lie in [0, 1], got {0}")]
    CollapseRate(f64),
    #[error("hopping angle must be finite, got {0}")]
    Angle(f64),
    #[error("lattice has {cells} cells, above the cap of {cap}")]
    TooManyCells { cells: usize, cap: usize },
    #[error("invalid initial state: {0}")]
    InitialState(String),
    #[error("invalid gate region: {0}")]
    Region(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("inconsistent history: {0}")]
    InconsistentHistory(String),
    #[error("history enumeration exceeds the cap of {cap} branches (a priori bound {bound:.3e}, more than {cap} with positive probability)")]
    CapExceeded { cap: usize, bound: f64 },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Initial pure state of the register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    /// One character per cell in cell-index order: `0`, `1`, `+` or `-`.
    Product(String),
    /// `(|01> + |10>)/sqrt(2)` on the given pair; other cells empty.
    Bell { pair: [usize; 2] },
}

/// A run of cells on a line lattice with its own hopping angle. When any
/// regions are configured, gates act only inside regions, each with a
/// brickwork parity relative to the region start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateRegion {
    pub start: usize,
    pub len: usize,
    pub hopping_angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubstrateConfig {
    /// Gate angle in radians; `pi/2` is a full swap.
    pub hopping_angle: f64,
    /// Per-cell, per-step collapse probability.
    pub collapse_rate: f64,
    pub initial_state: InitialState,
    #[serde(default = "default_max_cells")]
    pub max_cells: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub regions: Vec<GateRegion>,
}

fn default_max_cells() -> usize {
    DEFAULT_MAX_CELLS
}

impl SubstrateConfig {
    pub fn new(hopping_angle: f64, collapse_rate: f64, initial_state: InitialState) -> Self {
        Self { hopping_angle, collapse_rate, initial_state, max_cells: DEFAULT_MAX_CELLS, regions: Vec::new() }
    }

    /// Checks the configuration against a lattice.
    pub fn validate(&self, lattice: &Lattice) -> Result<(), SubstrateError> {
        if !(0.0..=1.0).contains(&self.collapse_rate) {
            return Err(SubstrateError::CollapseRate(self.collapse_rate));
        }
        if !self.hopping_angle.is_finite() {
            return Err(SubstrateError::Angle(self.hopping_angle));
        }
        let cells = lattice.num_cells();
        if cells > self.max_cells {
            return Err(SubstrateError::TooManyCells { cells, cap: self.max_cells });
        }
        match &self.initial_state {
            InitialState::Product(pattern) => {
                if pattern.chars().count() != cells {
                    return Err(SubstrateError::InitialState(format!(
                        "pattern {pattern:?} has {} characters for {cells} cells",
                        pattern.chars().count()
                    )));
                }
                if let Some(bad) = pattern.chars().find(|c| !matches!(c, '0' | '1' | '+' | '-')) {
                    return Err(SubstrateError::InitialState(format!("unknown cell state {bad:?}")));
                }
            }
            InitialState::Bell { pair: [a, b] } => {
                if a == b || *a >= cells || *b >= cells {
                    return Err(SubstrateError::InitialState(format!("bell pair [{a}, {b}] invalid for {cells} cells")));
                }
            }
        }
        if !self.regions.is_empty() {
            if lattice.dims() != 1 {
                return Err(SubstrateError::Region("gate regions require a one-dimensional lattice".into()));
            }
            let mut covered = vec![false; cells];
            for r in &self.regions {
                if !r.hopping_angle.is_finite() {
                    return Err(SubstrateError::Angle(r.hopping_angle));
                }
                if r.len == 0 || r.start + r.len > cells {
                    return Err(SubstrateError::Region(format!("region {}..{} outside 0..{cells}", r.start, r.start + r.len)));
                }
                for c in r.start..r.start + r.len {
                    if std::mem::replace(&mut covered[c], true) {
                        return Err(SubstrateError::Region(format!("regions overlap at cell {c}")));
                    }
                }
            }
        }
        Ok(())
    }

    fn initial_vector(&self, cells: usize) -> StateVector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let c = |re: f64| Complex64::new(re, 0.0);
        match &self.initial_state {
            InitialState::Product(pattern) => {
                let singles: Vec<[Complex64; 2]> = pattern
                    .chars()
                    .map(|ch| match ch {
                        '0' => [c(1.0), c(0.0)],
                        '1' => [c(0.0), c(1.0)],
                        '+' => [c(h), c(h)],
                        _ => [c(h), c(-h)],
                    })
                    .collect();
                StateVector::product(&singles)
            }
            InitialState::Bell { pair: [a, b] } => {
                let mut amps = vec![c(0.0); 1 << cells];
                amps[1 << a] = c(h);
                amps[1 << b] = c(h);
                StateVector::from_amplitudes(cells, amps).expect("bell amplitudes are normalized")
            }
        }
    }
}

/// A validated lattice and substrate with its gate schedule.
#[derive(Debug, Clone)]
pub struct Substrate {
    lattice: Lattice,
    config: SubstrateConfig,
    brickwork: Brickwork,
    initial: StateVector,
}

impl Substrate {
    pub fn new(lattice: Lattice, config: SubstrateConfig) -> Result<Self, SubstrateError> {
        config.validate(&lattice)?;
        let brickwork = Brickwork::new(&lattice, &config);
        let initial = config.initial_vector(lattice.num_cells());
        Ok(Self { lattice, config, brickwork, initial })
    }

    /// Replaces the gate schedule, e.g. to perturb a single gate.
    pub fn with_brickwork(mut self, brickwork: Brickwork) -> Result<Self, SubstrateError> {
        if brickwork.layers().len() != self.lattice.steps() - 1 {
            return Err(SubstrateError::DimensionMismatch {
                expected: self.lattice.steps() - 1,
                actual: brickwork.layers().len(),
            });
        }
        self.brickwork = brickwork;
        Ok(self)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn config(&self) -> &SubstrateConfig {
        &self.config
    }

    pub fn brickwork(&self) -> &Brickwork {
        &self.brickwork
    }

    pub fn initial_state(&self) -> &StateVector {
        &self.initial
    }

    pub fn collapse_rate(&self) -> f64 {
        self.config.collapse_rate
    }
}
