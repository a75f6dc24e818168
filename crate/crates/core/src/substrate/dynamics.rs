use crate::lattice::{Lattice, MAX_DIMS};

use super::{DensityOperator, StateVector, SubstrateConfig, SubstrateError};

/// Nearest-neighbor hopping gate between two cells (linear indices).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gate {
    pub a: usize,
    pub b: usize,
    pub theta: f64,
}

/// Gate schedule: `layers()[t]` maps slice `t` to slice `t + 1`.
///
/// Without regions, layer `t` acts along axis `(t / 2) mod d` on bonds whose
/// lower cell has even (`t` even) or odd (`t` odd) coordinate on that axis.
/// With regions, each region runs its own 1D brickwork with parity counted
/// from the region start and no bonds cross region boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct Brickwork {
    layers: Vec<Vec<Gate>>,
}

impl Brickwork {
    pub fn new(lattice: &Lattice, config: &SubstrateConfig) -> Self {
        let layers = (0..lattice.steps().saturating_sub(1))
            .map(|t| {
                if config.regions.is_empty() {
                    lattice_layer(lattice, t, config.hopping_angle)
                } else {
                    config
                        .regions
                        .iter()
                        .flat_map(|r| {
                            (0..r.len.saturating_sub(1))
                                .filter(move |k| k % 2 == t % 2)
                                .map(move |k| Gate { a: r.start + k, b: r.start + k + 1, theta: r.hopping_angle })
                        })
                        .collect()
                }
            })
            .collect();
        Self { layers }
    }

    pub fn from_layers(layers: Vec<Vec<Gate>>) -> Self {
        Self { layers }
    }

    pub fn layers(&self) -> &[Vec<Gate>] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Vec<Gate>] {
        &mut self.layers
    }

    pub fn apply_layer_pure(&self, state: &mut StateVector, t: usize) {
        for g in &self.layers[t] {
            state.hop(g.a, g.b, g.theta);
        }
    }

    pub fn apply_layer(&self, rho: &mut DensityOperator, t: usize) {
        for g in &self.layers[t] {
            rho.hop(g.a, g.b, g.theta);
        }
    }

    /// Advances `rho` from slice `t` to slice `t + 1`.
    pub fn evolve_step(&self, rho: &DensityOperator, cells: usize, t: usize) -> Result<DensityOperator, SubstrateError> {
        if rho.cells() != cells {
            return Err(SubstrateError::DimensionMismatch { expected: 1 << cells, actual: rho.dim() });
        }
        if t >= self.layers.len() {
            return Err(SubstrateError::DimensionMismatch { expected: self.layers.len(), actual: t });
        }
        let mut out = rho.clone();
        self.apply_layer(&mut out, t);
        Ok(out)
    }
}

fn lattice_layer(lattice: &Lattice, t: usize, theta: f64) -> Vec<Gate> {
    let axis = (t / 2) % lattice.dims();
    let parity = t % 2;
    let extent = lattice.extent();
    let mut step = [0i64; MAX_DIMS];
    step[axis] = 1;
    (0..lattice.num_cells())
        .filter_map(|a| {
            let coord = lattice.cell_coord(a);
            if coord[axis] % 2 != parity || coord[axis] + 1 >= extent[axis] {
                return None;
            }
            let other = lattice.shift(&coord, &step)?;
            Some(Gate { a, b: lattice.cell_index(&other), theta })
        })
        .collect()
}
