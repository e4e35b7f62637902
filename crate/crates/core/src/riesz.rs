//! Free-space Riesz potential `|x|^{-gamma} * g` on a periodic grid.
//!
//! The kernel is split with the Gamma-function identity
//!
//! ```text
//! |x|^{-gamma} = 1/Gamma(gamma/2) int_0^inf t^{gamma/2 - 1} e^{-t|x|^2} dt
//! ```
//!
//! at `t = alpha^2` into a long-range part `|x|^{-gamma} P(gamma/2, alpha^2|x|^2)`,
//! which is smooth and sampled in real space, and a short-range part whose
//! Fourier symbol is `c(d,gamma) |xi|^{gamma-d} P((d-gamma)/2, |xi|^2/(4 alpha^2))`
//! and which decays like a Gaussian. Here `P` is the regularized lower
//! incomplete Gamma function. Neither piece is singular in Fourier space, so no
//! zero-mode rule is needed.
//!
//! The convolution runs on a grid zero-padded to twice the box length per axis,
//! so that for sources and targets inside `[-L, L)^d` the result is the
//! free-space potential rather than its periodic image sum.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use statrs::function::gamma::{gamma, gamma_lr};

use crate::error::{Error, Result};
use crate::fft::FftNd;
use crate::grid::{signed_index, Grid, RealField};

/// Constant `c(d, gamma)` in `F[|x|^{-gamma}](xi) = c |xi|^{gamma - d}` for the
/// convention `f^(xi) = int f e^{-i xi.x} dx`.
pub fn riesz_symbol_constant(dim: usize, gamma_exp: f64) -> f64 {
    let d = dim as f64;
    PI.powf(d / 2.0) * 2f64.powf(d - gamma_exp) * gamma((d - gamma_exp) / 2.0) / gamma(gamma_exp / 2.0)
}

#[derive(Debug)]
pub struct RieszKernel {
    grid: Grid,
    gamma: f64,
    alpha: f64,
    padded: FftNd,
    /// Real multiplier on the padded lattice, with the inverse-FFT
    /// normalization folded in.
    multiplier: Vec<f64>,
}

impl RieszKernel {
    pub fn new(grid: &Grid, gamma_exp: f64) -> Result<Self> {
        let d = grid.dim() as f64;
        if !(gamma_exp > 0.0 && gamma_exp < d) {
            return Err(Error::domain(
                "riesz_convolve",
                format!("gamma = {gamma_exp} must lie in (0, {d})"),
            ));
        }
        let n = grid.n();
        let l = grid.half_len();
        let h = grid.spacing();
        // Balances the real-space image error exp(-4 alpha^2 L^2) of the short
        // part against the aliasing error exp(-(pi/h)^2 / (4 alpha^2)) of the
        // long part; both exponents equal pi n / 2.
        let alpha = (PI * n as f64 / 8.0).sqrt() / l;

        let m = 2 * n;
        let dim = grid.dim();
        let padded = FftNd::new(dim, m);
        let total = padded.total_len();

        // Both pieces depend only on the squared integer radius, at most d n^2.
        let max_q = dim * n * n;
        let long_by_q: Vec<f64> = (0..=max_q)
            .map(|q| long_range_kernel(h * (q as f64).sqrt(), gamma_exp, alpha))
            .collect();
        let dxi = PI / (2.0 * l);
        let short_by_q: Vec<f64> = (0..=max_q)
            .map(|q| short_range_symbol(dim, dxi * (q as f64).sqrt(), gamma_exp, alpha))
            .collect();

        let q_of = |mut flat: usize| {
            let mut q = 0usize;
            for _ in 0..dim {
                let k = signed_index(flat % m, m);
                q += (k * k) as usize;
                flat /= m;
            }
            q
        };

        let cell = grid.cell_volume();
        let mut work: Vec<Complex64> =
            (0..total).map(|flat| Complex64::new(long_by_q[q_of(flat)] * cell, 0.0)).collect();
        padded.forward(&mut work);
        let norm = 1.0 / total as f64;
        let multiplier = work
            .iter()
            .enumerate()
            .map(|(flat, z)| (z.re + short_by_q[q_of(flat)]) * norm)
            .collect();

        Ok(RieszKernel { grid: *grid, gamma: gamma_exp, alpha, padded, multiplier })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Ewald splitting parameter.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn convolve(&self, g: &RealField) -> Result<RealField> {
        self.grid.check_same(g.grid(), "riesz_convolve")?;
        let values = self.convolve_values(g.values());
        RealField::from_values(self.grid, values)
    }

    /// Convolves raw node values laid out on this kernel's grid.
    pub fn convolve_values(&self, g: &[f64]) -> Vec<f64> {
        let n = self.grid.n();
        let m = 2 * n;
        let dim = self.grid.dim();
        let mut work = vec![Complex64::new(0.0, 0.0); self.padded.total_len()];
        for_each_block_index(dim, n, m, |small, big| work[big] = Complex64::new(g[small], 0.0));
        self.padded.forward_pruned(&mut work, n);
        work.iter_mut().zip(&self.multiplier).for_each(|(z, k)| *z *= k);
        self.padded.inverse_pruned(&mut work, n);
        let mut out = vec![0.0; g.len()];
        for_each_block_index(dim, n, m, |small, big| out[small] = work[big].re);
        out
    }
}

/// Visits every node of the `n^d` block embedded in the low corner of an
/// `m^d` array, passing (block index, padded index).
fn for_each_block_index(dim: usize, n: usize, m: usize, mut f: impl FnMut(usize, usize)) {
    let total = n.pow(dim as u32);
    for small in 0..total {
        let mut rem = small;
        let mut big = 0;
        let mut stride = 1;
        for _ in 0..dim {
            big += (rem % n) * stride;
            rem /= n;
            stride *= m;
        }
        f(small, big);
    }
}

/// `r^{-gamma} P(gamma/2, alpha^2 r^2)`, finite at the origin.
fn long_range_kernel(r: f64, gamma_exp: f64, alpha: f64) -> f64 {
    let a = gamma_exp / 2.0;
    let z = alpha * alpha * r * r;
    if z < 1e-12 {
        return alpha.powf(gamma_exp) / gamma(a + 1.0);
    }
    r.powf(-gamma_exp) * gamma_lr(a, z)
}

/// Fourier symbol of the short-range remainder, finite at `xi = 0`.
fn short_range_symbol(dim: usize, xi: f64, gamma_exp: f64, alpha: f64) -> f64 {
    let d = dim as f64;
    let a = (d - gamma_exp) / 2.0;
    let z = xi * xi / (4.0 * alpha * alpha);
    if z < 1e-12 {
        return PI.powf(d / 2.0) * alpha.powf(gamma_exp - d) / (gamma(gamma_exp / 2.0) * a);
    }
    riesz_symbol_constant(dim, gamma_exp) * xi.powf(gamma_exp - d) * gamma_lr(a, z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::norm_sq;

    /// Adaptive Simpson on [a, b].
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
        let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        rec(f, a, b, fa, fm, fb, whole, tol, 48)
    }

    /// Radial oracle for `(|x|^{-gamma} * g)(r)` in d = 3 with radial `g(s)`:
    /// 2 pi int s^2 g(s) ((r+s)^{2-gamma} - |r-s|^{2-gamma}) / (r s (2-gamma)) ds.
    fn radial_riesz_oracle(g: &dyn Fn(f64) -> f64, r: f64, gamma_exp: f64, smax: f64) -> f64 {
        let p = 2.0 - gamma_exp;
        // With s = r -+ t^2 the kink |r - s|^{2-gamma} = t^{2p} is paired with
        // the Jacobian 2t, and t^{2p+1} is bounded for gamma <= 2.5.
        let piece = |s: f64, t: f64| {
            if s <= 0.0 {
                return 0.0;
            }
            let kink = if t == 0.0 && 2.0 * p + 1.0 > 0.0 { 0.0 } else { t.powf(2.0 * p + 1.0) };
            let smooth = (r + s).powf(p) * 2.0 * t;
            s * g(s) * (smooth - 2.0 * kink) / (r * p)
        };
        let below = |t: f64| piece(r - t * t, t);
        let above = |t: f64| piece(r + t * t, t);
        let lo = simpson(&below, 0.0, r.sqrt(), 1e-13);
        let hi = simpson(&above, 0.0, (smax - r).sqrt(), 1e-13);
        2.0 * PI * (lo + hi)
    }

    fn gaussian_at_origin_oracle(gamma_exp: f64) -> f64 {
        // 4 pi int_0^inf r^{2-gamma} e^{-r^2} dr with r = t^2.
        let f = |t: f64| 2.0 * t.powf(5.0 - 2.0 * gamma_exp) * (-t.powi(4)).exp();
        4.0 * PI * simpson(&f, 0.0, 3.0, 1e-14)
    }

    #[test]
    fn rejects_gamma_outside_range() {
        let g = Grid::new(3, 8, 2.0).unwrap();
        assert!(RieszKernel::new(&g, 0.0).is_err());
        assert!(RieszKernel::new(&g, 3.0).is_err());
        assert!(RieszKernel::new(&g, 2.5).is_ok());
    }

    #[test]
    fn zero_maps_to_zero() {
        let g = Grid::new(3, 16, 4.0).unwrap();
        let k = RieszKernel::new(&g, 2.5).unwrap();
        let out = k.convolve(&RealField::zeros(g)).unwrap();
        assert!(out.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn gaussian_value_at_origin_matches_radial_quadrature() {
        let grid = Grid::new(3, 64, 8.0).unwrap();
        let gamma_exp = 2.5;
        let kernel = RieszKernel::new(&grid, gamma_exp).unwrap();
        let g = RealField::from_fn(grid, |x| (-norm_sq(&x)).exp());
        let out = kernel.convolve(&g).unwrap();
        let origin = (32 * 64 + 32) * 64 + 32;
        let oracle = gaussian_at_origin_oracle(gamma_exp);
        // Closed form 2 pi Gamma((3 - gamma)/2) agrees with the oracle.
        assert!((oracle - 2.0 * PI * gamma(0.25)).abs() < 1e-10 * oracle, "{oracle}");
        let rel = (out.values()[origin] - oracle).abs() / oracle;
        assert!(rel < 1e-10, "relative error {rel}");
    }

    #[test]
    fn narrow_source_reproduces_direct_quadrature_profile() {
        let grid = Grid::new(3, 64, 8.0).unwrap();
        let h = grid.spacing();
        let gamma_exp = 2.5;
        let kernel = RieszKernel::new(&grid, gamma_exp).unwrap();
        let w = 2.0 * h;
        let src = |s: f64| (-(s * s) / (w * w)).exp();
        let g = RealField::from_fn(grid, |x| src(norm_sq(&x).sqrt()));
        let out = kernel.convolve(&g).unwrap();
        // Sample along the first axis for r in [4h, L/4].
        let mut i = 32 + 4;
        while grid.coordinate(i) <= grid.half_len() / 4.0 {
            let r = grid.coordinate(i);
            let flat = (i * 64 + 32) * 64 + 32;
            let oracle = radial_riesz_oracle(&src, r, gamma_exp, 12.0 * w + r);
            let rel = (out.values()[flat] - oracle).abs() / oracle;
            assert!(rel < 0.02, "r = {r}: rel {rel}");
            // Far from the source the profile is a pure power law.
            i += 1;
        }
    }

    #[test]
    fn is_linear_and_preserves_positivity() {
        let grid = Grid::new(3, 32, 6.0).unwrap();
        let kernel = RieszKernel::new(&grid, 2.3).unwrap();
        let a = RealField::from_fn(grid, |x| (-norm_sq(&x)).exp());
        let b = RealField::from_fn(grid, |x| (-(x[0] - 1.0).powi(2) - x[1] * x[1] - 2.0 * x[2] * x[2]).exp());
        let sum = RealField::from_values(grid, a.values().iter().zip(b.values()).map(|(p, q)| 2.0 * p + q).collect())
            .unwrap();
        let ka = kernel.convolve(&a).unwrap();
        let kb = kernel.convolve(&b).unwrap();
        let ks = kernel.convolve(&sum).unwrap();
        let scale = ks.max();
        for ((s, p), q) in ks.values().iter().zip(ka.values()).zip(kb.values()) {
            assert!((s - 2.0 * p - q).abs() < 1e-12 * scale);
        }
        assert!(ka.min() > -1e-10 * ka.max());
    }

    #[test]
    fn decays_like_free_space_potential_not_periodic_sum() {
        // Far-field multipole expansion at the box corner; a periodic image
        // sum would be several times larger.
        let grid = Grid::new(3, 32, 6.0).unwrap();
        let gamma_exp = 2.5;
        let kernel = RieszKernel::new(&grid, gamma_exp).unwrap();
        let g = RealField::from_fn(grid, |x| (-norm_sq(&x) * 4.0).exp());
        let mass = g.integrate();
        let out = kernel.convolve(&g).unwrap();
        let far = grid.node(0);
        let r2 = norm_sq(&far);
        // Per-axis variance of the blob is 1/8; the quadrupole correction is
        // (1/16) Laplacian of |x|^{-gamma}.
        let lap_factor = gamma_exp * (gamma_exp + 2.0 - 3.0) / r2;
        let expect = mass * r2.sqrt().powf(-gamma_exp) * (1.0 + lap_factor / 16.0);
        assert!((out.values()[0] - expect).abs() < 5e-5 * expect, "{} vs {}", out.values()[0], expect);
    }
}
