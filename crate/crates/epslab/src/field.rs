//! Uniform grids and scalar fields.
//!
//! The unbounded domain is replaced by a box of edge length `L`, either as a
//! periodic torus (spectral path) or with homogeneous Dirichlet walls
//! (finite-difference path). A single point count `n` is shared by all axes,
//! so the spacing is `h = L/n` everywhere.
//!
//! Node layout:
//! - periodic: `x_i = -L/2 + i h` (the standard transform layout; the node
//!   set is symmetric about the box center modulo `L`),
//! - Dirichlet: `x_i = -L/2 + (i + 1/2) h` (cell centers; the walls at
//!   `±L/2` sit half a spacing outside the first and last node).
//!
//! Fields are immutable after construction and store one finite `f64` per
//! node in x-fastest order. All reductions run in a fixed sequential order,
//! so results are bitwise reproducible.

pub mod dft;

use std::sync::Arc;

use crate::error::{Error, Result};

/// Boundary condition of the surrogate box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bc {
    Periodic,
    Dirichlet,
}

/// Parameters of a uniform grid: dimension, points per axis, edge length,
/// boundary condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub dims: usize,
    pub n: usize,
    pub len: f64,
    pub bc: Bc,
}

impl GridSpec {
    pub fn new(dims: usize, n: usize, len: f64, bc: Bc) -> Self {
        Self { dims, n, len, bc }
    }

    fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dims) {
            return Err(Error::InvalidGrid(format!(
                "dims must be 1, 2 or 3, got {}",
                self.dims
            )));
        }
        if self.n < 8 {
            return Err(Error::InvalidGrid(format!(
                "need at least 8 points per axis, got {}",
                self.n
            )));
        }
        if !(self.len > 0.0) || !self.len.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "box edge length must be positive and finite, got {}",
                self.len
            )));
        }
        Ok(())
    }
}

/// A validated uniform grid with precomputed axis coordinates.
#[derive(Debug)]
pub struct Grid {
    spec: GridSpec,
    axis: Vec<f64>,
}

impl Grid {
    /// Validates the spec and builds the grid.
    pub fn build(spec: GridSpec) -> Result<Arc<Grid>> {
        spec.validate()?;
        let h = spec.len / spec.n as f64;
        let offset = match spec.bc {
            Bc::Periodic => 0.0,
            Bc::Dirichlet => 0.5,
        };
        let axis = (0..spec.n)
            .map(|i| -0.5 * spec.len + (i as f64 + offset) * h)
            .collect();
        Ok(Arc::new(Grid { spec, axis }))
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn dims(&self) -> usize {
        self.spec.dims
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn len(&self) -> f64 {
        self.spec.len
    }

    pub fn bc(&self) -> Bc {
        self.spec.bc
    }

    /// Grid spacing `h = L/n`.
    pub fn spacing(&self) -> f64 {
        self.spec.len / self.spec.n as f64
    }

    /// Total node count `n^dims`.
    pub fn num_nodes(&self) -> usize {
        self.spec.n.pow(self.spec.dims as u32)
    }

    /// Coordinate of index `i` along any axis.
    pub fn axis_coord(&self, i: usize) -> f64 {
        self.axis[i]
    }

    pub fn axis_coords(&self) -> &[f64] {
        &self.axis
    }

    /// Per-axis indices of a flat node index (x-fastest order).
    pub fn unravel(&self, flat: usize) -> [usize; 3] {
        let n = self.spec.n;
        [flat % n, (flat / n) % n, flat / (n * n)]
    }

    /// Flat index of per-axis indices.
    pub fn ravel(&self, ix: [usize; 3]) -> usize {
        let n = self.spec.n;
        ix[0] + n * (ix[1] + n * ix[2])
    }

    /// Coordinates of a flat node index; unused axes are zero.
    pub fn node_coords(&self, flat: usize) -> [f64; 3] {
        let ix = self.unravel(flat);
        let mut x = [0.0; 3];
        for d in 0..self.spec.dims {
            x[d] = self.axis[ix[d]];
        }
        x
    }

    /// Flat index of the node closest to the box center.
    pub fn center_index(&self) -> usize {
        let mid = self.spec.n / 2;
        let mut ix = [0usize; 3];
        for d in ix.iter_mut().take(self.spec.dims) {
            *d = mid;
        }
        self.ravel(ix)
    }
}

/// Real values sampled on a grid, one per node.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl ScalarField {
    /// Field identically equal to `c`.
    pub fn constant(grid: &Arc<Grid>, c: f64) -> Self {
        Self {
            grid: Arc::clone(grid),
            values: vec![c; grid.num_nodes()],
        }
    }

    /// Samples a closed-form expression at every node. Rejects non-finite
    /// values (poles, overflow) with the offending node index.
    pub fn sample<F>(grid: &Arc<Grid>, f: F) -> Result<Self>
    where
        F: Fn(&[f64; 3]) -> f64,
    {
        let mut values = Vec::with_capacity(grid.num_nodes());
        for flat in 0..grid.num_nodes() {
            let v = f(&grid.node_coords(flat));
            if !v.is_finite() {
                return Err(Error::NonFiniteSample { index: flat });
            }
            values.push(v);
        }
        Ok(Self {
            grid: Arc::clone(grid),
            values,
        })
    }

    /// Wraps raw per-node values after checking count and finiteness.
    pub fn from_values(grid: &Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.num_nodes() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                grid.num_nodes(),
                values.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample { index });
        }
        Ok(Self {
            grid: Arc::clone(grid),
            values,
        })
    }

    /// Internal constructor for values already known to be finite.
    pub(crate) fn from_values_unchecked(grid: &Arc<Grid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.num_nodes());
        Self {
            grid: Arc::clone(grid),
            values,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Sup norm `max |v_i|`, reduced in index order.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Sup norm of the pointwise difference. Panics if the grids differ.
    pub fn sup_distance(&self, other: &ScalarField) -> f64 {
        self.assert_same_grid(other);
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Pointwise map; the result is not re-checked for finiteness.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> ScalarField {
        let values = self.values.iter().map(|&v| f(v)).collect();
        ScalarField {
            grid: Arc::clone(&self.grid),
            values,
        }
    }

    /// Pointwise map that may fail (overflow guards in nonlinearities).
    pub fn try_map<F: Fn(f64) -> Result<f64>>(&self, f: F) -> Result<ScalarField> {
        let mut values = Vec::with_capacity(self.values.len());
        for &v in &self.values {
            values.push(f(v)?);
        }
        Ok(ScalarField {
            grid: Arc::clone(&self.grid),
            values,
        })
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with<F: Fn(f64, f64) -> f64>(&self, other: &ScalarField, f: F) -> ScalarField {
        self.assert_same_grid(other);
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        ScalarField {
            grid: Arc::clone(&self.grid),
            values,
        }
    }

    fn assert_same_grid(&self, other: &ScalarField) {
        assert_eq!(
            self.grid.spec(),
            other.grid.spec(),
            "fields live on different grids"
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid_1d(n: usize, len: f64) -> Arc<Grid> {
        Grid::build(GridSpec::new(1, n, len, Bc::Periodic)).unwrap()
    }

    #[test]
    fn build_grid_1d_basic() {
        let g = grid_1d(8, 1.0);
        assert_eq!(g.num_nodes(), 8);
        assert!((g.spacing() - 0.125).abs() < 1e-15);
        assert!((g.axis_coord(0) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn build_grid_3d_counts() {
        let g = Grid::build(GridSpec::new(3, 16, 4.0, Bc::Periodic)).unwrap();
        assert_eq!(g.num_nodes(), 4096);
        assert!((g.spacing() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn build_grid_rejects_small_n() {
        assert!(Grid::build(GridSpec::new(3, 7, 1.0, Bc::Periodic)).is_err());
    }

    #[test]
    fn build_grid_rejects_bad_len_and_dims() {
        assert!(Grid::build(GridSpec::new(1, 8, 0.0, Bc::Periodic)).is_err());
        assert!(Grid::build(GridSpec::new(1, 8, -1.0, Bc::Periodic)).is_err());
        assert!(Grid::build(GridSpec::new(0, 8, 1.0, Bc::Periodic)).is_err());
        assert!(Grid::build(GridSpec::new(4, 8, 1.0, Bc::Periodic)).is_err());
    }

    #[test]
    fn periodic_grid_contains_center_for_even_n() {
        let g = grid_1d(16, 1.0);
        assert!(g.axis_coords().iter().any(|&x| x == 0.0));
    }

    #[test]
    fn dirichlet_nodes_are_cell_centers() {
        let g = Grid::build(GridSpec::new(1, 8, 1.0, Bc::Dirichlet)).unwrap();
        // symmetric about the box center, walls half a spacing outside
        assert!((g.axis_coord(0) + g.axis_coord(7)).abs() < 1e-15);
        assert!((g.axis_coord(0) - (-0.5 + 0.0625)).abs() < 1e-15);
    }

    #[test]
    fn sample_constant() {
        let g = grid_1d(8, 1.0);
        let f = ScalarField::sample(&g, |_| 3.0).unwrap();
        assert!(f.values().iter().all(|&v| v == 3.0));
    }

    #[test]
    fn sample_sine_bounded_by_one() {
        let g = grid_1d(16, 2.0);
        let omega = 2.0 * std::f64::consts::PI / g.len();
        let f = ScalarField::sample(&g, |x| (omega * x[0]).sin()).unwrap();
        assert!(f.sup_norm() <= 1.0);
        assert!(f.sup_norm() > 0.98);
    }

    #[test]
    fn sample_rejects_pole() {
        // even-n periodic grids contain x1 = 0, where 1/x1 blows up
        let g = grid_1d(16, 1.0);
        let err = ScalarField::sample(&g, |x| 1.0 / x[0]);
        assert!(matches!(err, Err(Error::NonFiniteSample { .. })));
    }

    #[test]
    fn sup_norm_examples() {
        let g = grid_1d(8, 1.0);
        assert_eq!(ScalarField::constant(&g, 0.0).sup_norm(), 0.0);
        let mut vals = vec![0.0; 8];
        vals[0] = 1.0;
        vals[1] = -3.0;
        vals[2] = 2.0;
        let f = ScalarField::from_values(&g, vals).unwrap();
        assert_eq!(f.sup_norm(), 3.0);
    }

    #[test]
    fn sup_norm_of_sampled_sine_16() {
        // max over the 16 sampled sine nodes, computed directly
        let g = grid_1d(16, 1.0);
        let omega = 2.0 * std::f64::consts::PI;
        let expected = (0..16)
            .map(|i| (omega * g.axis_coord(i)).sin().abs())
            .fold(0.0f64, f64::max);
        let f = ScalarField::sample(&g, |x| (omega * x[0]).sin()).unwrap();
        assert!((f.sup_norm() - expected).abs() < 1e-15);
        assert!(f.sup_norm() > 0.98 && f.sup_norm() <= 1.0);
    }

    #[test]
    fn ravel_unravel_roundtrip() {
        let g = Grid::build(GridSpec::new(3, 8, 1.0, Bc::Periodic)).unwrap();
        for flat in [0usize, 1, 7, 8, 63, 64, 511] {
            assert_eq!(g.ravel(g.unravel(flat)), flat);
        }
    }

    proptest! {
        #[test]
        fn sup_norm_homogeneity(scale in -10.0f64..10.0, vals in proptest::collection::vec(-100.0f64..100.0, 8)) {
            let g = grid_1d(8, 1.0);
            let f = ScalarField::from_values(&g, vals).unwrap();
            let scaled = f.map(|v| scale * v);
            prop_assert!((scaled.sup_norm() - scale.abs() * f.sup_norm()).abs() <= 1e-12 * (1.0 + f.sup_norm()));
        }

        #[test]
        fn sup_norm_triangle_inequality(a in proptest::collection::vec(-100.0f64..100.0, 8), b in proptest::collection::vec(-100.0f64..100.0, 8)) {
            let g = grid_1d(8, 1.0);
            let fa = ScalarField::from_values(&g, a).unwrap();
            let fb = ScalarField::from_values(&g, b).unwrap();
            let sum = fa.zip_with(&fb, |x, y| x + y);
            prop_assert!(sum.sup_norm() <= fa.sup_norm() + fb.sup_norm() + 1e-12);
        }
    }
}
