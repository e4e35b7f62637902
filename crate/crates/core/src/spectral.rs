//! Fourier-multiplier calculus on a periodic grid.
//!
//! Transforms are unnormalized in the forward direction; `inverse` divides by
//! the number of nodes. With this layout the continuous transform
//! `f^(xi) = int f e^{-i xi.x} dx` is approximated by `h^d * DFT` up to a phase
//! from the box offset, which cancels in every quantity used here.

use rustfft::num_complex::Complex64;

use crate::fft::FftNd;
use crate::grid::{Field, Grid, Point, MAX_DIM};

#[derive(Debug)]
pub struct SpectralOps {
    grid: Grid,
    fft: FftNd,
    freq_sq: Vec<f64>,
}

impl SpectralOps {
    pub fn new(grid: Grid) -> Self {
        let freq_sq = (0..grid.len())
            .map(|flat| grid.frequency(flat).iter().map(|k| k * k).sum())
            .collect();
        SpectralOps { grid, fft: FftNd::new(grid.dim(), grid.n()), freq_sq }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `|xi|^2` for every DFT slot.
    pub fn frequency_sq(&self) -> &[f64] {
        &self.freq_sq
    }

    pub fn forward(&self, f: &Field) -> Vec<Complex64> {
        let mut data = f.values().to_vec();
        self.fft.forward(&mut data);
        data
    }

    pub fn forward_in_place(&self, data: &mut [Complex64]) {
        self.fft.forward(data);
    }

    /// Inverse transform including the `1/N` normalization.
    pub fn inverse(&self, mut spectrum: Vec<Complex64>) -> Field {
        self.inverse_in_place(&mut spectrum);
        Field::from_values(self.grid, spectrum).expect("spectrum length matches grid")
    }

    pub fn inverse_in_place(&self, data: &mut [Complex64]) {
        self.fft.inverse(data);
        let scale = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|z| *z *= scale);
    }

    /// Applies the multiplier `m(slot)` in Fourier space.
    pub fn multiply(&self, f: &Field, m: impl Fn(usize) -> Complex64) -> Field {
        let mut spec = self.forward(f);
        spec.iter_mut().enumerate().for_each(|(k, z)| *z *= m(k));
        self.inverse(spec)
    }

    /// Spectral gradient. The Nyquist slot of each axis is zeroed so that real
    /// inputs give real derivatives.
    pub fn gradient(&self, f: &Field) -> Vec<Field> {
        let spec = self.forward(f);
        self.gradient_from_spectrum(&spec)
    }

    pub fn gradient_from_spectrum(&self, spec: &[Complex64]) -> Vec<Field> {
        let n = self.grid.n();
        (0..self.grid.dim())
            .map(|axis| {
                let mut comp = spec.to_vec();
                for (flat, z) in comp.iter_mut().enumerate() {
                    let slot = self.grid.unflatten(flat)[axis];
                    if slot == n / 2 {
                        *z = Complex64::new(0.0, 0.0);
                    } else {
                        *z *= Complex64::new(0.0, self.grid.wavenumber(slot));
                    }
                }
                self.inverse(comp)
            })
            .collect()
    }

    /// Multiplier `-|xi|^2`.
    pub fn laplacian(&self, f: &Field) -> Field {
        self.multiply(f, |k| Complex64::new(-self.freq_sq[k], 0.0))
    }

    /// `||grad f||^2` evaluated through Parseval from the spectrum.
    pub fn grad_norm_sq_from_spectrum(&self, spec: &[Complex64]) -> f64 {
        let sum: f64 = spec.iter().zip(&self.freq_sq).map(|(z, k2)| k2 * z.norm_sqr()).sum();
        sum * self.grid.cell_volume() / spec.len() as f64
    }

    pub fn grad_norm_sq(&self, f: &Field) -> f64 {
        self.grad_norm_sq_from_spectrum(&self.forward(f))
    }

    /// `int |f|^2` through Parseval.
    pub fn mass_from_spectrum(&self, spec: &[Complex64]) -> f64 {
        spec.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_volume() / spec.len() as f64
    }

    /// Share of `|f^|^2` in slots whose largest per-axis index magnitude is at
    /// least `(1 - top) * n/2`.
    pub fn tail_fraction(&self, spec: &[Complex64], top: f64) -> f64 {
        let n = self.grid.n();
        let cutoff = (1.0 - top) * (n / 2) as f64;
        let mut total = 0.0;
        let mut tail = 0.0;
        for (flat, z) in spec.iter().enumerate() {
            let w = z.norm_sqr();
            total += w;
            let idx = self.grid.unflatten(flat);
            let kmax = idx[..self.grid.dim()]
                .iter()
                .map(|&i| self.grid.signed_index(i).unsigned_abs() as f64)
                .fold(0.0, f64::max);
            if kmax >= cutoff {
                tail += w;
            }
        }
        if total > 0.0 {
            tail / total
        } else {
            0.0
        }
    }

    /// Periodic translation `f(x - a)`, exact for band-limited data.
    pub fn translate(&self, f: &Field, shift: Point) -> Field {
        self.multiply(f, |flat| {
            let xi = self.grid.frequency(flat);
            let phase: f64 = (0..MAX_DIM).map(|j| xi[j] * shift[j]).sum();
            Complex64::from_polar(1.0, -phase)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::norm_sq;

    fn grid3(n: usize, l: f64) -> Grid {
        Grid::new(3, n, l).unwrap()
    }

    #[test]
    fn plane_wave_gradient_and_laplacian_are_exact() {
        let g = grid3(16, 3.0);
        let k0 = g.fundamental_wavenumber();
        let k = [2.0 * k0, -3.0 * k0, 1.0 * k0];
        let wave = Field::from_fn(g, |x| Complex64::from_polar(1.0, k[0] * x[0] + k[1] * x[1] + k[2] * x[2]));
        let ops = SpectralOps::new(g);
        let grad = ops.gradient(&wave);
        for j in 0..3 {
            for (a, b) in grad[j].values().iter().zip(wave.values()) {
                assert!((a - Complex64::new(0.0, k[j]) * b).norm() < 1e-12);
            }
        }
        let lap = ops.laplacian(&wave);
        let k2 = norm_sq(&k);
        for (a, b) in lap.values().iter().zip(wave.values()) {
            assert!((a + k2 * b).norm() < 1e-11);
        }
    }

    #[test]
    fn gradient_of_real_gaussian_is_real_and_vanishes_at_origin() {
        let g = grid3(32, 6.0);
        let ops = SpectralOps::new(g);
        let f = Field::from_real_fn(g, |x| (-norm_sq(&x)).exp());
        let grad = ops.gradient(&f);
        let origin = (16 * 32 + 16) * 32 + 16;
        for comp in &grad {
            assert!(comp.values().iter().all(|z| z.im.abs() < 1e-12));
            assert!(comp.values()[origin].norm() < 1e-10);
        }
    }

    #[test]
    fn laplacian_of_constant_is_zero() {
        let g = grid3(8, 2.0);
        let ops = SpectralOps::new(g);
        let c = Field::from_real_fn(g, |_| 3.5);
        assert!(ops.laplacian(&c).max_abs() < 1e-12);
    }

    #[test]
    fn laplacian_of_gaussian_matches_symbolic_derivative() {
        let g = grid3(64, 8.0);
        let ops = SpectralOps::new(g);
        let f = Field::from_real_fn(g, |x| (-norm_sq(&x)).exp());
        let lap = ops.laplacian(&f);
        let err = lap
            .values()
            .iter()
            .enumerate()
            .map(|(flat, z)| {
                let r2 = norm_sq(&g.node(flat));
                (z - Complex64::new((4.0 * r2 - 6.0) * (-r2).exp(), 0.0)).norm()
            })
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "sup error {err}");
    }

    #[test]
    fn parseval_and_gradient_consistency() {
        let g = grid3(64, 8.0);
        let ops = SpectralOps::new(g);
        let f = Field::from_fn(g, |x| {
            let r2 = (x[0] - 0.3).powi(2) + x[1] * x[1] + 2.0 * x[2] * x[2];
            Complex64::new((-r2).exp(), 0.5 * x[1] * (-r2 / 2.0).exp())
        });
        let spec = ops.forward(&f);
        let direct = f.l2_norm_sq();
        assert!((ops.mass_from_spectrum(&spec) - direct).abs() < 1e-12 * direct);

        let lap = ops.laplacian(&f);
        let lhs: Complex64 =
            f.values().iter().zip(lap.values()).map(|(a, b)| a.conj() * b).sum::<Complex64>() * g.cell_volume();
        let grad_sq: f64 = ops.gradient(&f).iter().map(|c| c.l2_norm_sq()).sum();
        assert!((lhs.re + grad_sq).abs() < 1e-10 * grad_sq);
        assert!((ops.grad_norm_sq(&f) - grad_sq).abs() < 1e-10 * grad_sq);
    }

    #[test]
    fn translation_by_lattice_vector_is_a_shift() {
        let g = grid3(16, 4.0);
        let ops = SpectralOps::new(g);
        let f = Field::from_real_fn(g, |x| (-norm_sq(&x)).exp());
        let h = g.spacing();
        let moved = ops.translate(&f, [h, 0.0, 0.0]);
        // moved(x) = f(x - h e_0): slot (i+1, j, k) receives slot (i, j, k).
        for i in 0..15 {
            let a = moved.values()[((i + 1) * 16 + 8) * 16 + 8];
            let b = f.values()[(i * 16 + 8) * 16 + 8];
            assert!((a - b).norm() < 1e-12);
        }
    }
}
