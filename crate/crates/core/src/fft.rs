//! Complex 3-D FFT on an `n x n x n` row-major cube.
//!
//! The contiguous axis is transformed in one batched call. The two strided
//! axes are gathered a few lines at a time into a small buffer, so each
//! read and write touches short contiguous runs.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

/// Lines gathered per strided batch.
const BATCH: usize = 16;

pub(crate) struct Fft3 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("n", &self.n).finish()
    }
}

impl Fft3 {
    pub(crate) fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    /// Unnormalized forward transform, `sum_x f(x) e^{-ik.x}`.
    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
    }

    /// Unnormalized inverse transform, `sum_k c_k e^{ik.x}`.
    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse);
    }

    fn transform(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        debug_assert_eq!(data.len(), n * n * n);
        let scratch_len = fft.get_inplace_scratch_len();
        // last axis: n² contiguous lines
        data.par_chunks_mut(n * n).for_each_init(
            || vec![Complex64::default(); scratch_len],
            |scratch, plane| fft.process_with_scratch(plane, scratch),
        );
        // middle axis: stride n inside each plane
        data.par_chunks_mut(n * n).for_each_init(
            || (vec![Complex64::default(); scratch_len], vec![Complex64::default(); BATCH * n]),
            |(scratch, buf), plane| strided(plane, n, n, fft.as_ref(), scratch, buf),
        );
        // first axis: stride n² over the whole cube
        let mut scratch = vec![Complex64::default(); scratch_len];
        let mut buf = vec![Complex64::default(); BATCH * n];
        strided(data, n, n * n, fft.as_ref(), &mut scratch, &mut buf);
    }
}

/// Transforms the `stride` lines `data[m + k·stride]`, `k < n`, for every
/// `m < stride`, a batch of consecutive `m` at a time.
fn strided(
    data: &mut [Complex64],
    n: usize,
    stride: usize,
    fft: &dyn Fft<f64>,
    scratch: &mut [Complex64],
    buf: &mut [Complex64],
) {
    for m0 in (0..stride).step_by(BATCH) {
        let w = BATCH.min(stride - m0);
        for k in 0..n {
            let row = &data[k * stride + m0..k * stride + m0 + w];
            for (l, &z) in row.iter().enumerate() {
                buf[l * n + k] = z;
            }
        }
        fft.process_with_scratch(&mut buf[..w * n], scratch);
        for k in 0..n {
            let row = &mut data[k * stride + m0..k * stride + m0 + w];
            for (l, z) in row.iter_mut().enumerate() {
                *z = buf[l * n + k];
            }
        }
    }
}
