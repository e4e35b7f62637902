//! Uniform periodic grids on `[-L, L)^d` and the fields sampled on them.
//!
//! Values are stored row-major with the last axis contiguous. Coordinates of
//! node `i` along an axis are `-L + i * h` with `h = 2L / n`, so the origin is
//! always a grid node.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported dimension for full tensor grids.
pub const MAX_DIM: usize = 3;

/// A point in space. Unused trailing coordinates are zero when `d < 3`.
pub type Point = [f64; MAX_DIM];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    n: usize,
    half_len: f64,
}

impl Grid {
    pub fn new(dim: usize, n: usize, half_len: f64) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::domain("Grid::new", format!("dimension {dim} not in 1..={MAX_DIM}")));
        }
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::domain("Grid::new", format!("n = {n} must be a power of two >= 4")));
        }
        if !(half_len.is_finite() && half_len > 0.0) {
            return Err(Error::domain("Grid::new", format!("half length {half_len} must be positive")));
        }
        Ok(Grid { dim, n, half_len })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_len(&self) -> f64 {
        self.half_len
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_len / self.n as f64
    }

    /// Total number of nodes, `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -self.half_len + i as f64 * self.spacing()
    }

    /// Signed lattice index `k` in `{-n/2, ..., n/2 - 1}` for DFT slot `i`.
    pub fn signed_index(&self, i: usize) -> i64 {
        signed_index(i, self.n)
    }

    /// Angular wavenumber `pi k / L` for DFT slot `i`.
    pub fn wavenumber(&self, i: usize) -> f64 {
        PI * self.signed_index(i) as f64 / self.half_len
    }

    /// Smallest nonzero wavenumber on the lattice.
    pub fn fundamental_wavenumber(&self) -> f64 {
        PI / self.half_len
    }

    /// Splits a flat index into per-axis indices.
    pub fn unflatten(&self, mut flat: usize) -> [usize; MAX_DIM] {
        let mut idx = [0usize; MAX_DIM];
        for axis in (0..self.dim).rev() {
            idx[axis] = flat % self.n;
            flat /= self.n;
        }
        idx
    }

    pub fn node(&self, flat: usize) -> Point {
        let idx = self.unflatten(flat);
        let mut x = [0.0; MAX_DIM];
        for axis in 0..self.dim {
            x[axis] = self.coordinate(idx[axis]);
        }
        x
    }

    pub fn nodes(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.len()).map(move |flat| self.node(flat))
    }

    /// Wavevector of DFT slot `flat`.
    pub fn frequency(&self, flat: usize) -> Point {
        let idx = self.unflatten(flat);
        let mut xi = [0.0; MAX_DIM];
        for axis in 0..self.dim {
            xi[axis] = self.wavenumber(idx[axis]);
        }
        xi
    }

    pub(crate) fn check_same(&self, other: &Grid, what: &str) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!("{what}: {self:?} vs {other:?}")));
        }
        Ok(())
    }

    /// True when a node lies in the outer shell `max_j |x_j| > (1 - frac) L`.
    pub fn in_outer_shell(&self, x: &Point, frac: f64) -> bool {
        let edge = (1.0 - frac) * self.half_len;
        x[..self.dim].iter().any(|c| c.abs() > edge)
    }
}

pub(crate) fn signed_index(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

pub fn norm_sq(x: &Point) -> f64 {
    x.iter().map(|c| c * c).sum()
}

/// Complex-valued function sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<Complex64>,
}

impl Field {
    pub fn zeros(grid: Grid) -> Self {
        Field { grid, values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_values(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Field { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(Point) -> Complex64) -> Self {
        let values = grid.nodes().map(f).collect();
        Field { grid, values }
    }

    pub fn from_real_fn(grid: Grid, f: impl Fn(Point) -> f64) -> Self {
        Field::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// `h^d * sum(values)`.
    pub fn integrate(&self) -> Complex64 {
        let sum: Complex64 = self.values.iter().sum();
        sum * self.grid.cell_volume()
    }

    /// `|u|^2` pointwise.
    pub fn density(&self) -> RealField {
        RealField {
            grid: self.grid,
            values: self.values.iter().map(|z| z.norm_sqr()).collect(),
        }
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn scaled(&self, c: Complex64) -> Field {
        Field { grid: self.grid, values: self.values.iter().map(|z| z * c).collect() }
    }

    pub fn scale_mut(&mut self, c: Complex64) {
        self.values.iter_mut().for_each(|z| *z *= c);
    }

    /// Multiplies by `exp(i * phase(x))` node by node.
    pub fn with_phase(&self, phase: impl Fn(Point) -> f64) -> Field {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(flat, z)| z * Complex64::from_polar(1.0, phase(self.grid.node(flat))))
            .collect();
        Field { grid: self.grid, values }
    }

    /// Relative L2 distance `||self - other|| / ||other||`.
    pub fn relative_distance(&self, other: &Field) -> f64 {
        let num: f64 = self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm_sqr()).sum();
        let den: f64 = other.values.iter().map(|b| b.norm_sqr()).sum();
        (num / den).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Fraction of `|u|^2` carried by the outer `frac` shell of the box.
    pub fn outer_shell_mass_fraction(&self, frac: f64) -> f64 {
        let mut total = 0.0;
        let mut shell = 0.0;
        for (flat, z) in self.values.iter().enumerate() {
            let w = z.norm_sqr();
            total += w;
            if self.grid.in_outer_shell(&self.grid.node(flat), frac) {
                shell += w;
            }
        }
        if total > 0.0 {
            shell / total
        } else {
            0.0
        }
    }

    /// Fraction of `|x|^2 |u|^2` carried by the outer `frac` shell of the box.
    pub fn outer_shell_variance_fraction(&self, frac: f64) -> f64 {
        let mut total = 0.0;
        let mut shell = 0.0;
        for (flat, z) in self.values.iter().enumerate() {
            let x = self.grid.node(flat);
            let w = norm_sq(&x) * z.norm_sqr();
            total += w;
            if self.grid.in_outer_shell(&x, frac) {
                shell += w;
            }
        }
        if total > 0.0 {
            shell / total
        } else {
            0.0
        }
    }
}

/// Real-valued function sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: Grid,
    values: Vec<f64>,
}

impl RealField {
    pub fn zeros(grid: Grid) -> Self {
        RealField { grid, values: vec![0.0; grid.len()] }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(RealField { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(Point) -> f64) -> Self {
        RealField { grid, values: grid.nodes().map(f).collect() }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn integrate(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> RealField {
        RealField { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn to_complex(&self) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_times_n_is_box_length() {
        for &(n, l) in &[(16usize, 3.0), (64, 8.0), (32, 0.7)] {
            let g = Grid::new(3, n, l).unwrap();
            assert_eq!(g.spacing() * n as f64, 2.0 * l);
        }
    }

    #[test]
    fn frequency_lattice_is_signed() {
        let g = Grid::new(1, 8, 2.0).unwrap();
        let ks: Vec<i64> = (0..8).map(|i| g.signed_index(i)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        assert!((g.wavenumber(1) - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(4, 8, 1.0).is_err());
        assert!(Grid::new(3, 12, 1.0).is_err());
        assert!(Grid::new(3, 8, 0.0).is_err());
    }

    #[test]
    fn constant_integrates_to_box_volume() {
        let g = Grid::new(3, 32, 4.0).unwrap();
        let one = Field::from_real_fn(g, |_| 1.0);
        let v = one.integrate();
        assert!((v.re - 512.0).abs() < 1e-9);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn odd_function_integrates_to_zero() {
        let g = Grid::new(3, 32, 6.0).unwrap();
        let f = Field::from_real_fn(g, |x| x[0] * (-norm_sq(&x)).exp());
        assert!(f.integrate().norm() < 1e-12);
    }

    #[test]
    fn gaussian_integral_matches_quadrature_oracle() {
        // Oracle: composite Simpson for the 1-D factor, cubed.
        let m = 20_000;
        let (a, b) = (-8.0f64, 8.0f64);
        let hq = (b - a) / m as f64;
        let mut s = 0.0;
        for i in 0..=m {
            let x = a + i as f64 * hq;
            let w = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * (-x * x).exp();
        }
        let oracle = (s * hq / 3.0).powi(3);
        let g = Grid::new(3, 64, 8.0).unwrap();
        let f = Field::from_real_fn(g, |x| (-norm_sq(&x)).exp());
        let v = f.integrate().re;
        assert!((v - oracle).abs() < 1e-10, "{v} vs {oracle}");
        assert!((v - PI.powf(1.5)).abs() < 1e-10);
    }

    #[test]
    fn origin_is_a_node() {
        let g = Grid::new(3, 16, 5.0).unwrap();
        let flat = (8 * 16 + 8) * 16 + 8;
        assert_eq!(g.node(flat), [0.0, 0.0, 0.0]);
    }
}
