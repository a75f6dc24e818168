//! Discrete spacetime geometry.
//!
//! Cells are unit cubes of a regular lattice with 1 to 3 spatial dimensions
//! and time advances in unit steps, so a signal covers at most one cell
//! (Chebyshev metric) per step. Boundaries are open: cones and
//! neighborhoods are clipped, never wrapped.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Maximum number of spatial dimensions.
pub const MAX_DIMS: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("lattice must have between 1 and {MAX_DIMS} spatial dimensions, got {0}")]
    Dimensions(usize),
    #[error("extent entries must be at least 1, got {0:?}")]
    Extent(Vec<usize>),
    #[error("steps must be at least 1")]
    Steps,
    #[error("neighborhood radius must be at least 1")]
    NeighborhoodRadius,
    #[error("grouping radius must be at least 1")]
    GroupingRadius,
    #[error("point {0} lies outside the lattice")]
    InvalidPoint(SpacetimePoint),
}

/// User-facing lattice parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    /// Cells per spatial dimension; its length is the spatial dimension.
    pub extent: Vec<usize>,
    /// Number of time slices.
    pub steps: usize,
    /// Radius of the predicate window, in cells and in steps.
    pub neighborhood_radius: usize,
    /// Same-slice radius joining qualia into one consciousness.
    pub grouping_radius: usize,
}

impl LatticeConfig {
    pub fn line(cells: usize, steps: usize, neighborhood_radius: usize, grouping_radius: usize) -> Self {
        Self { extent: vec![cells], steps, neighborhood_radius, grouping_radius }
    }

    pub fn validate(&self) -> Result<(), LatticeError> {
        let dims = self.extent.len();
        if dims == 0 || dims > MAX_DIMS {
            return Err(LatticeError::Dimensions(dims));
        }
        if self.extent.iter().any(|&e| e == 0) {
            return Err(LatticeError::Extent(self.extent.clone()));
        }
        if self.steps == 0 {
            return Err(LatticeError::Steps);
        }
        if self.neighborhood_radius == 0 {
            return Err(LatticeError::NeighborhoodRadius);
        }
        if self.grouping_radius == 0 {
            return Err(LatticeError::GroupingRadius);
        }
        Ok(())
    }
}

/// A cube at a time slice. Unused trailing coordinates are zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpacetimePoint {
    // Field order gives time-major ordering under the derived `Ord`.
    pub t: usize,
    pub cell: [usize; MAX_DIMS],
}

impl SpacetimePoint {
    pub fn new(cell: [usize; MAX_DIMS], t: usize) -> Self {
        Self { t, cell }
    }

    pub fn on_line(x: usize, t: usize) -> Self {
        Self { t, cell: [x, 0, 0] }
    }
}

impl std::fmt::Display for SpacetimePoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{};t={})", self.cell[0], self.cell[1], self.cell[2], self.t)
    }
}

/// Spatial offset relative to a center cell.
pub type Offset = [i64; MAX_DIMS];

/// One slot of a neighborhood window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeighborSlot {
    pub offset: Offset,
    pub dt: usize,
    /// `None` when the slot falls outside the lattice.
    pub point: Option<SpacetimePoint>,
}

/// A validated lattice with indexing helpers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    config: LatticeConfig,
    dims: usize,
    extent: [usize; MAX_DIMS],
    cells: usize,
}

impl Lattice {
    pub fn new(config: LatticeConfig) -> Result<Self, LatticeError> {
        config.validate()?;
        let dims = config.extent.len();
        let mut extent = [1; MAX_DIMS];
        extent[..dims].copy_from_slice(&config.extent);
        let cells = extent.iter().product();
        Ok(Self { config, dims, extent, cells })
    }

    pub fn config(&self) -> &LatticeConfig {
        &self.config
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn extent(&self) -> [usize; MAX_DIMS] {
        self.extent
    }

    pub fn steps(&self) -> usize {
        self.config.steps
    }

    pub fn radius(&self) -> usize {
        self.config.neighborhood_radius
    }

    pub fn grouping_radius(&self) -> usize {
        self.config.grouping_radius
    }

    pub fn num_cells(&self) -> usize {
        self.cells
    }

    pub fn num_points(&self) -> usize {
        self.cells * self.config.steps
    }

    pub fn contains_cell(&self, cell: &[usize; MAX_DIMS]) -> bool {
        cell.iter().zip(&self.extent).all(|(&c, &e)| c < e)
    }

    pub fn contains(&self, p: &SpacetimePoint) -> bool {
        p.t < self.config.steps && self.contains_cell(&p.cell)
    }

    pub fn check(&self, p: &SpacetimePoint) -> Result<(), LatticeError> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(LatticeError::InvalidPoint(*p))
        }
    }

    /// Row-major linear index with the first coordinate varying fastest.
    pub fn cell_index(&self, cell: &[usize; MAX_DIMS]) -> usize {
        cell[0] + self.extent[0] * (cell[1] + self.extent[1] * cell[2])
    }

    pub fn cell_coord(&self, index: usize) -> [usize; MAX_DIMS] {
        let x = index % self.extent[0];
        let rest = index / self.extent[0];
        [x, rest % self.extent[1], rest / self.extent[1]]
    }

    pub fn point_index(&self, p: &SpacetimePoint) -> usize {
        p.t * self.cells + self.cell_index(&p.cell)
    }

    pub fn point_at(&self, index: usize) -> SpacetimePoint {
        SpacetimePoint { t: index / self.cells, cell: self.cell_coord(index % self.cells) }
    }

    /// All points in time-major, then cell-index order.
    pub fn points(&self) -> impl Iterator<Item = SpacetimePoint> + '_ {
        (0..self.num_points()).map(|i| self.point_at(i))
    }

    /// Cell displaced by `offset`, if it stays inside the lattice.
    pub fn shift(&self, cell: &[usize; MAX_DIMS], offset: &Offset) -> Option<[usize; MAX_DIMS]> {
        let mut out = [0; MAX_DIMS];
        for d in 0..MAX_DIMS {
            let c = cell[d] as i64 + offset[d];
            if c < 0 || c >= self.extent[d] as i64 {
                return None;
            }
            out[d] = c as usize;
        }
        Some(out)
    }

    /// Past light cone of `p` at one cell per step, including `p`.
    /// Points come out time-major, latest slice first.
    pub fn past_cone(&self, p: &SpacetimePoint) -> Result<Vec<SpacetimePoint>, LatticeError> {
        self.check(p)?;
        let mut out = Vec::new();
        for t in (0..=p.t).rev() {
            let r = (p.t - t) as i64;
            self.for_each_cell_in_ball(&p.cell, r, |cell| out.push(SpacetimePoint { t, cell }));
        }
        Ok(out)
    }

    /// Whether `q` lies in the past light cone of `p`.
    pub fn in_past_cone(&self, q: &SpacetimePoint, p: &SpacetimePoint) -> bool {
        q.t <= p.t && chebyshev(&q.cell, &p.cell) <= p.t - q.t
    }

    /// Predicate window of `p`: `(2N+1)^d` spatial offsets over `N+1` slices,
    /// ordered by `dt` then lexicographically by offset.
    pub fn neighborhood(&self, p: &SpacetimePoint) -> Result<Vec<NeighborSlot>, LatticeError> {
        self.check(p)?;
        let n = self.radius();
        let offsets = self.window_offsets();
        let mut out = Vec::with_capacity(offsets.len() * (n + 1));
        for dt in 0..=n {
            for offset in &offsets {
                let point = if dt <= p.t {
                    self.shift(&p.cell, offset).map(|cell| SpacetimePoint { t: p.t - dt, cell })
                } else {
                    None
                };
                out.push(NeighborSlot { offset: *offset, dt, point });
            }
        }
        Ok(out)
    }

    /// Spatial offsets of the window in lexicographic order.
    pub fn window_offsets(&self) -> Vec<Offset> {
        let n = self.radius() as i64;
        let span = |d: usize| if d < self.dims { -n..=n } else { 0..=0 };
        let mut out = Vec::new();
        for a in span(0) {
            for b in span(1) {
                for c in span(2) {
                    out.push([a, b, c]);
                }
            }
        }
        out
    }

    fn for_each_cell_in_ball(&self, center: &[usize; MAX_DIMS], r: i64, mut f: impl FnMut([usize; MAX_DIMS])) {
        let range = |d: usize| {
            let lo = (center[d] as i64 - r).max(0) as usize;
            let hi = ((center[d] as i64 + r) as usize).min(self.extent[d] - 1);
            lo..=hi
        };
        for z in range(2) {
            for y in range(1) {
                for x in range(0) {
                    f([x, y, z]);
                }
            }
        }
    }
}

/// Window size for an interior point with full past: `(2N+1)^d (N+1)`.
///
/// The asymptotic figure quoted for three dimensions is `8 N^4`; the ratio of
/// the two tends to one as `N` grows.
pub fn neighborhood_size(config: &LatticeConfig) -> usize {
    let n = config.neighborhood_radius;
    (2 * n + 1).pow(config.extent.len() as u32) * (n + 1)
}

pub fn chebyshev(a: &[usize; MAX_DIMS], b: &[usize; MAX_DIMS]) -> usize {
    a.iter().zip(b).map(|(&x, &y)| x.abs_diff(y)).max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn line(cells: usize, steps: usize, n: usize) -> Lattice {
        Lattice::new(LatticeConfig::line(cells, steps, n, 1)).unwrap()
    }

    fn set(points: &[(usize, usize)]) -> BTreeSet<SpacetimePoint> {
        points.iter().map(|&(x, t)| SpacetimePoint::on_line(x, t)).collect()
    }

    #[test]
    fn cone_interior() {
        let lat = line(8, 4, 1);
        let cone: BTreeSet<_> = lat.past_cone(&SpacetimePoint::on_line(3, 2)).unwrap().into_iter().collect();
        let expected = set(&[(3, 2), (2, 1), (3, 1), (4, 1), (1, 0), (2, 0), (3, 0), (4, 0), (5, 0)]);
        assert_eq!(cone, expected);
    }

    #[test]
    fn cone_at_origin_slice_is_point() {
        let lat = line(5, 3, 1);
        let p = SpacetimePoint::on_line(2, 0);
        assert_eq!(lat.past_cone(&p).unwrap(), vec![p]);
    }

    #[test]
    fn cone_clips_at_boundary() {
        let lat = line(3, 3, 1);
        let cone: BTreeSet<_> = lat.past_cone(&SpacetimePoint::on_line(0, 2)).unwrap().into_iter().collect();
        assert_eq!(cone, set(&[(0, 2), (0, 1), (1, 1), (0, 0), (1, 0), (2, 0)]));
    }

    #[test]
    fn invalid_point_rejected() {
        let lat = line(3, 3, 1);
        assert!(matches!(lat.past_cone(&SpacetimePoint::on_line(3, 0)), Err(LatticeError::InvalidPoint(_))));
        assert!(lat.neighborhood(&SpacetimePoint::on_line(0, 3)).is_err());
    }

    #[test]
    fn neighborhood_counts() {
        let lat = line(8, 4, 1);
        let slots = lat.neighborhood(&SpacetimePoint::on_line(4, 2)).unwrap();
        assert_eq!(slots.len(), 6);
        assert!(slots.iter().all(|s| s.point.is_some()));
        assert_eq!(slots[0].offset, [-1, 0, 0]);
        assert_eq!(slots[0].dt, 0);
        assert_eq!(slots[3].dt, 1);

        let cube = Lattice::new(LatticeConfig { extent: vec![7, 7, 7], steps: 5, neighborhood_radius: 2, grouping_radius: 1 }).unwrap();
        let slots = cube.neighborhood(&SpacetimePoint::new([3, 3, 3], 2)).unwrap();
        assert_eq!(slots.len(), 375);
        assert!(slots.iter().all(|s| s.point.is_some()));
        assert_eq!(neighborhood_size(cube.config()), 375);
    }

    #[test]
    fn first_slice_has_no_past() {
        let lat = line(8, 4, 2);
        let slots = lat.neighborhood(&SpacetimePoint::on_line(4, 0)).unwrap();
        assert!(slots.iter().filter(|s| s.point.is_some()).all(|s| s.dt == 0));
        assert_eq!(slots.iter().filter(|s| s.point.is_some()).count(), 5);
    }

    #[test]
    fn size_tends_to_quartic_estimate() {
        let cfg = |n| LatticeConfig { extent: vec![1, 1, 1], steps: 1, neighborhood_radius: n, grouping_radius: 1 };
        assert_eq!(neighborhood_size(&LatticeConfig::line(4, 4, 1, 1)), 6);
        let ratio = |n: usize| neighborhood_size(&cfg(n)) as f64 / (8.0 * (n as f64).powi(4));
        assert!((ratio(1000) - 1.0).abs() < 1e-2);
        assert!((ratio(1000) - 1.0).abs() < (ratio(10) - 1.0).abs());
    }

    #[test]
    fn config_validation() {
        assert!(LatticeConfig::line(0, 1, 1, 1).validate().is_err());
        assert!(LatticeConfig::line(1, 0, 1, 1).validate().is_err());
        assert!(LatticeConfig::line(1, 1, 0, 1).validate().is_err());
        assert!(LatticeConfig::line(1, 1, 1, 0).validate().is_err());
        let four = LatticeConfig { extent: vec![1; 4], steps: 1, neighborhood_radius: 1, grouping_radius: 1 };
        assert_eq!(four.validate(), Err(LatticeError::Dimensions(4)));
    }

    #[test]
    fn index_round_trip() {
        let lat = Lattice::new(LatticeConfig { extent: vec![3, 2, 2], steps: 2, neighborhood_radius: 1, grouping_radius: 1 }).unwrap();
        for i in 0..lat.num_points() {
            assert_eq!(lat.point_index(&lat.point_at(i)), i);
        }
    }
}
