//! Multi-dimensional complex FFT on cubic tensor grids, built from 1-D
//! `rustfft` plans applied axis by axis.
//!
//! The pruned variants skip lines that are known to be zero on input (or
//! unneeded on output) when a block of side `active` sits in the low corner of
//! a larger zero-padded cube.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Columns gathered per batch when transforming a strided axis.
const COLUMN_BATCH: usize = 64;

pub(crate) struct FftNd {
    dim: usize,
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FftNd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftNd").field("dim", &self.dim).field("len", &self.len).finish()
    }
}

impl FftNd {
    pub fn new(dim: usize, len: usize) -> Self {
        let mut planner = FftPlanner::new();
        FftNd {
            dim,
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    pub fn total_len(&self) -> usize {
        self.len.pow(self.dim as u32)
    }

    /// Unnormalized forward transform in place.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.forward_pruned(data, self.len);
    }

    /// Unnormalized inverse transform in place.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.inverse_pruned(data, self.len);
    }

    /// Forward transform of data that vanishes outside `[0, active)^d`.
    pub fn forward_pruned(&self, data: &mut [Complex64], active: usize) {
        debug_assert_eq!(data.len(), self.total_len());
        for axis in (0..self.dim).rev() {
            self.axis_pass(data, axis, active, &self.forward);
        }
    }

    /// Inverse transform where only outputs in `[0, active)^d` are needed.
    /// Entries outside that block are left in an unspecified state.
    pub fn inverse_pruned(&self, data: &mut [Complex64], active: usize) {
        debug_assert_eq!(data.len(), self.total_len());
        for axis in 0..self.dim {
            self.axis_pass(data, axis, active, &self.inverse);
        }
    }

    /// Transforms every line along `axis` whose indices on the preceding axes
    /// are all below `outer_limit`.
    fn axis_pass(&self, data: &mut [Complex64], axis: usize, outer_limit: usize, fft: &Arc<dyn Fft<f64>>) {
        let len = self.len;
        let inner = len.pow((self.dim - 1 - axis) as u32);
        let block = len * inner;
        let outer_count = outer_limit.pow(axis as u32);
        let zero = Complex64::new(0.0, 0.0);
        let mut scratch = vec![zero; fft.get_inplace_scratch_len()];
        let batch = COLUMN_BATCH.min(inner);
        let mut buf = if inner == 1 { Vec::new() } else { vec![zero; batch * len] };

        for o in 0..outer_count {
            let mut rem = o;
            let mut offset = 0;
            let mut stride = block;
            for _ in 0..axis {
                offset += (rem % outer_limit) * stride;
                rem /= outer_limit;
                stride *= len;
            }
            let slab = &mut data[offset..offset + block];
            if inner == 1 {
                fft.process_with_scratch(slab, &mut scratch);
                continue;
            }
            let mut c0 = 0;
            while c0 < inner {
                let width = batch.min(inner - c0);
                let lines = &mut buf[..width * len];
                for i in 0..len {
                    let row = &slab[i * inner + c0..i * inner + c0 + width];
                    for (c, v) in row.iter().enumerate() {
                        lines[c * len + i] = *v;
                    }
                }
                fft.process_with_scratch(lines, &mut scratch);
                for i in 0..len {
                    let row = &mut slab[i * inner + c0..i * inner + c0 + width];
                    for (c, v) in row.iter_mut().enumerate() {
                        *v = lines[c * len + i];
                    }
                }
                c0 += width;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn naive_dft(data: &[Complex64], dim: usize, len: usize) -> Vec<Complex64> {
        let total = len.pow(dim as u32);
        let idx = |mut f: usize| {
            let mut v = vec![0usize; dim];
            for a in (0..dim).rev() {
                v[a] = f % len;
                f /= len;
            }
            v
        };
        (0..total)
            .map(|k| {
                let kk = idx(k);
                (0..total)
                    .map(|j| {
                        let jj = idx(j);
                        let phase: f64 =
                            kk.iter().zip(&jj).map(|(a, b)| (a * b) as f64).sum::<f64>() * -2.0 * PI / len as f64;
                        data[j] * Complex64::from_polar(1.0, phase)
                    })
                    .sum()
            })
            .collect()
    }

    fn sample(total: usize) -> Vec<Complex64> {
        (0..total).map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect()
    }

    #[test]
    fn matches_naive_dft_in_each_dimension() {
        for dim in 1..=3 {
            let len = 4;
            let plan = FftNd::new(dim, len);
            let data = sample(plan.total_len());
            let mut fast = data.clone();
            plan.forward(&mut fast);
            let slow = naive_dft(&data, dim, len);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn pruned_forward_equals_full_on_padded_input() {
        let (dim, len, active) = (3, 8, 4);
        let plan = FftNd::new(dim, len);
        let mut data = vec![Complex64::new(0.0, 0.0); plan.total_len()];
        for i in 0..active {
            for j in 0..active {
                for k in 0..active {
                    data[(i * len + j) * len + k] = Complex64::new((i + 2 * j) as f64, k as f64 - 1.0);
                }
            }
        }
        let mut full = data.clone();
        plan.forward(&mut full);
        let mut pruned = data;
        plan.forward_pruned(&mut pruned, active);
        for (a, b) in full.iter().zip(&pruned) {
            assert!((a - b).norm() < 1e-12);
        }
        // The pruned inverse reproduces the input block.
        plan.inverse_pruned(&mut pruned, active);
        for i in 0..active {
            for j in 0..active {
                for k in 0..active {
                    let v = pruned[(i * len + j) * len + k] / plan.total_len() as f64;
                    assert!((v - Complex64::new((i + 2 * j) as f64, k as f64 - 1.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn inverse_undoes_forward() {
        let plan = FftNd::new(2, 16);
        let data = sample(plan.total_len());
        let mut work = data.clone();
        plan.forward(&mut work);
        plan.inverse(&mut work);
        for (a, b) in work.iter().zip(&data) {
            assert!((a / 256.0 - b).norm() < 1e-13);
        }
    }
}
