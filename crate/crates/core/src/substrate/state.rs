//! Pure and mixed states of a register of occupation qubits.
//!
//! Basis index bit `i` is the occupation of cell `i` (cell 0 is the least
//! significant bit).

use num_complex::Complex64;

use super::SubstrateError;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn bit(index: usize, cell: usize) -> usize {
    (index >> cell) & 1
}

/// Index pairs `(i, j)` where `i` has cell `a` occupied and `b` empty and
/// `j` is the same configuration with the excitation moved to `b`.
fn hop_pairs(dim: usize, a: usize, b: usize) -> impl Iterator<Item = (usize, usize)> {
    let flip = (1usize << a) | (1usize << b);
    (0..dim).filter(move |&i| bit(i, a) == 1 && bit(i, b) == 0).map(move |i| (i, i ^ flip))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    cells: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn basis(cells: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << cells];
        amps[index] = Complex64::new(1.0, 0.0);
        Self { cells, amps }
    }

    /// Normalizes `amps`; the length must be `2^cells`.
    pub fn from_amplitudes(cells: usize, amps: Vec<Complex64>) -> Result<Self, SubstrateError> {
        if amps.len() != 1 << cells {
            return Err(SubstrateError::DimensionMismatch { expected: 1 << cells, actual: amps.len() });
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(SubstrateError::InitialState("state has zero or non-finite norm".into()));
        }
        Ok(Self { cells, amps: amps.into_iter().map(|a| a / norm).collect() })
    }

    /// Tensor product of single-cell states, cell 0 first.
    pub fn product(singles: &[[Complex64; 2]]) -> Self {
        let cells = singles.len();
        let amps = (0..1usize << cells)
            .map(|i| singles.iter().enumerate().map(|(c, s)| s[bit(i, c)]).product())
            .collect();
        Self { cells, amps }
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn hop(&mut self, a: usize, b: usize, theta: f64) {
        let (c, s) = (theta.cos(), theta.sin());
        let mis = Complex64::new(0.0, -s);
        for (i, j) in hop_pairs(self.amps.len(), a, b) {
            let (x, y) = (self.amps[i], self.amps[j]);
            self.amps[i] = x * c + y * mis;
            self.amps[j] = x * mis + y * c;
        }
    }

    /// Probability of finding `cell` in `outcome`.
    pub fn outcome_probability(&self, cell: usize, outcome: u8) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| bit(*i, cell) == outcome as usize)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Projects `cell` onto `outcome` and renormalizes by `sqrt(probability)`.
    pub fn project(&mut self, cell: usize, outcome: u8, probability: f64) {
        let scale = 1.0 / probability.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if bit(i, cell) == outcome as usize {
                *a *= scale;
            } else {
                *a = ZERO;
            }
        }
    }

    pub fn to_density(&self) -> DensityOperator {
        let dim = self.amps.len();
        let mut data = vec![ZERO; dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                data[r * dim + c] = self.amps[r] * self.amps[c].conj();
            }
        }
        DensityOperator { cells: self.cells, dim, data }
    }
}

/// Dense density operator, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    cells: usize,
    dim: usize,
    data: Vec<Complex64>,
}

impl DensityOperator {
    pub fn from_matrix(cells: usize, data: Vec<Complex64>) -> Result<Self, SubstrateError> {
        let dim = 1usize << cells;
        if data.len() != dim * dim {
            return Err(SubstrateError::DimensionMismatch { expected: dim * dim, actual: data.len() });
        }
        Ok(Self { cells, dim, data })
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim + c]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i].re).sum()
    }

    /// `rho -> U rho U^dagger` for the hopping gate on cells `a`, `b`.
    pub fn hop(&mut self, a: usize, b: usize, theta: f64) {
        let (c, s) = (theta.cos(), theta.sin());
        let mis = Complex64::new(0.0, -s);
        let pis = Complex64::new(0.0, s);
        let dim = self.dim;
        let pairs: Vec<_> = hop_pairs(dim, a, b).collect();
        // Left multiplication mixes rows.
        for &(i, j) in &pairs {
            for col in 0..dim {
                let (x, y) = (self.data[i * dim + col], self.data[j * dim + col]);
                self.data[i * dim + col] = x * c + y * mis;
                self.data[j * dim + col] = x * mis + y * c;
            }
        }
        // Right multiplication by U^dagger mixes columns.
        for row in 0..dim {
            let base = row * dim;
            for &(i, j) in &pairs {
                let (x, y) = (self.data[base + i], self.data[base + j]);
                self.data[base + i] = x * c + y * pis;
                self.data[base + j] = x * pis + y * c;
            }
        }
    }

    pub fn outcome_probability(&self, cell: usize, outcome: u8) -> f64 {
        (0..self.dim).filter(|&i| bit(i, cell) == outcome as usize).map(|i| self.data[i * self.dim + i].re).sum()
    }

    /// Unnormalized selective projection; returns the Born probability.
    pub fn project_unnormalized(&mut self, cell: usize, outcome: u8) -> f64 {
        let o = outcome as usize;
        let dim = self.dim;
        for r in 0..dim {
            for c in 0..dim {
                if bit(r, cell) != o || bit(c, cell) != o {
                    self.data[r * dim + c] = ZERO;
                }
            }
        }
        self.trace()
    }

    /// Selective projection with renormalization; returns the Born probability.
    pub fn project(&mut self, cell: usize, outcome: u8) -> f64 {
        let p = self.project_unnormalized(cell, outcome);
        if p > 0.0 {
            self.scale(1.0 / p);
        }
        p
    }

    /// Non-selective occupation measurement of `cell`.
    pub fn dephase(&mut self, cell: usize) {
        let dim = self.dim;
        for r in 0..dim {
            for c in 0..dim {
                if bit(r, cell) != bit(c, cell) {
                    self.data[r * dim + c] = ZERO;
                }
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for z in &mut self.data {
            *z *= factor;
        }
    }

    /// `self + weight * other`.
    pub fn add_scaled(&mut self, other: &DensityOperator, weight: f64) {
        for (z, o) in self.data.iter_mut().zip(&other.data) {
            *z += o * weight;
        }
    }

    pub fn occupation(&self, cell: usize) -> f64 {
        self.outcome_probability(cell, 1)
    }

    /// Reduced state of one cell.
    pub fn partial_trace(&self, cell: usize) -> LocalState {
        let mut m = [[ZERO; 2]; 2];
        let mask = 1usize << cell;
        for rest in (0..self.dim).filter(|i| i & mask == 0) {
            for x in 0..2 {
                for y in 0..2 {
                    m[x][y] += self.data[(rest | (x * mask)) * self.dim + (rest | (y * mask))];
                }
            }
        }
        LocalState(m)
    }

    pub fn max_abs_diff(&self, other: &DensityOperator) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Largest `|rho - rho^dagger|` entry.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            for c in r..self.dim {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let m = nalgebra::DMatrix::from_fn(self.dim, self.dim, |r, c| (self.get(r, c) + self.get(c, r).conj()) * 0.5);
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// Single-cell density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalState(pub [[Complex64; 2]; 2]);

impl LocalState {
    pub fn trace(&self) -> f64 {
        self.0[0][0].re + self.0[1][1].re
    }

    pub fn occupation(&self) -> f64 {
        self.0[1][1].re
    }

    pub fn hermiticity_error(&self) -> f64 {
        let m = &self.0;
        (m[0][1] - m[1][0].conj()).norm().max(m[0][0].im.abs()).max(m[1][1].im.abs())
    }

    /// Eigenvalues `(low, high)` of the Hermitian part.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let m = &self.0;
        let (a, d) = (m[0][0].re, m[1][1].re);
        let b = (m[0][1] + m[1][0].conj()) * 0.5;
        let mid = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        (mid - rad, mid + rad)
    }

    pub fn max_abs_diff(&self, other: &LocalState) -> f64 {
        let mut worst: f64 = 0.0;
        for x in 0..2 {
            for y in 0..2 {
                worst = worst.max((self.0[x][y] - other.0[x][y]).norm());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn swap_at_half_pi() {
        // |10>: cell 0 occupied.
        let mut rho = StateVector::basis(2, 0b01).to_density();
        rho.hop(0, 1, FRAC_PI_2);
        assert!((rho.occupation(0)).abs() < 1e-15);
        assert!((rho.occupation(1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_angle_is_identity() {
        let psi = StateVector::product(&[[c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)], [c(0.6), c(0.8)]]);
        let rho = psi.to_density();
        let mut evolved = rho.clone();
        evolved.hop(0, 1, 0.0);
        assert!(evolved.max_abs_diff(&rho) < 1e-15);
    }

    #[test]
    fn quarter_pi_splits_occupation() {
        let mut rho = StateVector::basis(2, 0b01).to_density();
        rho.hop(0, 1, FRAC_PI_4);
        assert!((rho.occupation(0) - 0.5).abs() < 1e-12);
        assert!((rho.occupation(1) - 0.5).abs() < 1e-12);
        // Pure-state and density evolutions agree.
        let mut psi = StateVector::basis(2, 0b01);
        psi.hop(0, 1, FRAC_PI_4);
        assert!(psi.to_density().max_abs_diff(&rho) < 1e-14);
    }

    #[test]
    fn hop_preserves_spectrum() {
        let psi = StateVector::product(&[[c(0.6), c(0.8)], [c(FRAC_1_SQRT_2), c(-FRAC_1_SQRT_2)], [c(1.0), c(0.0)]]);
        let mut rho = psi.to_density();
        rho.dephase(1);
        let before = rho.eigenvalues();
        rho.hop(1, 2, 0.37);
        rho.hop(0, 1, 1.1);
        let after = rho.eigenvalues();
        for (a, b) in before.iter().zip(&after) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((rho.trace() - 1.0).abs() < 1e-12);
        assert!(rho.hermiticity_error() < 1e-12);
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let mut amps = vec![c(0.0); 4];
        amps[0b01] = c(1.0);
        amps[0b10] = c(1.0);
        let rho = StateVector::from_amplitudes(2, amps).unwrap().to_density();
        for cell in 0..2 {
            let local = rho.partial_trace(cell);
            assert!((local.0[0][0].re - 0.5).abs() < 1e-15);
            assert!((local.0[1][1].re - 0.5).abs() < 1e-15);
            assert!(local.0[0][1].norm() < 1e-15);
        }
    }

    #[test]
    fn dephasing_is_born_average_of_projections() {
        let psi = StateVector::product(&[[c(0.6), c(0.8)], [c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)]]);
        let mut rho = psi.to_density();
        rho.hop(0, 1, 0.4);
        let mut avg = DensityOperator::from_matrix(2, vec![c(0.0); 16]).unwrap();
        for o in 0..2 {
            let mut branch = rho.clone();
            branch.project_unnormalized(1, o);
            avg.add_scaled(&branch, 1.0);
        }
        let mut dephased = rho.clone();
        dephased.dephase(1);
        assert!(avg.max_abs_diff(&dephased) < 1e-15);
    }

    #[test]
    fn amplitude_length_checked() {
        assert!(matches!(
            StateVector::from_amplitudes(2, vec![c(1.0); 3]),
            Err(SubstrateError::DimensionMismatch { expected: 4, actual: 3 })
        ));
    }
}
