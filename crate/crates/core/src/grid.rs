use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fft::Fft3;

/// Uniform collocation grid on the periodic box `[0, 2π)³`.
///
/// Coefficients are stored row-major over FFT indices `(i1, i2, i3)`,
/// `i ∈ 0..n`, with wavenumber `k = i` for `i < n/2` and `k = i - n`
/// otherwise. The unpaired Nyquist index `i = n/2` (`k = -n/2`) is kept at
/// zero by every operation in this crate.
///
/// Cloning is cheap; the FFT plans are shared.
#[derive(Clone, Debug)]
pub struct Grid {
    n: usize,
    fft: Arc<Fft3>,
    /// `|k|²` per storage index.
    k2: Arc<[u32]>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

impl Eq for Grid {}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGridSize(n));
        }
        let h = (n / 2) as i64;
        let wn = |i: usize| if (i as i64) < h { i as i64 } else { i as i64 - n as i64 };
        let k2: Vec<u32> = (0..n * n * n)
            .map(|i| {
                let k = [wn(i / (n * n)), wn((i / n) % n), wn(i % n)];
                norm2(k) as u32
            })
            .collect();
        Ok(Self { n, fft: Arc::new(Fft3::new(n)), k2: k2.into() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of lattice points, `n³`.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.n as f64
    }

    /// Largest retained |k_m| under the 2/3 rule is `floor(n/3)`.
    pub fn dealias_cutoff(&self) -> f64 {
        self.n as f64 / 3.0
    }

    /// Largest lattice radius, `√3 · n/2`.
    pub fn max_radius(&self) -> f64 {
        3f64.sqrt() * (self.n / 2) as f64
    }

    pub(crate) fn fft(&self) -> &Fft3 {
        &self.fft
    }

    /// `|k|²` for every storage index.
    pub(crate) fn k2_table(&self) -> &[u32] {
        &self.k2
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self.n == other.n {
            Ok(())
        } else {
            Err(Error::GridMismatch(self.n, other.n))
        }
    }

    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    #[inline]
    pub fn wavevector(&self, index: usize) -> [i64; 3] {
        let n = self.n;
        [
            self.wavenumber(index / (n * n)),
            self.wavenumber((index / n) % n),
            self.wavenumber(index % n),
        ]
    }

    /// Storage index of wavevector `k`, if it lies on the lattice.
    pub fn index_of(&self, k: [i64; 3]) -> Option<usize> {
        let n = self.n as i64;
        let mut idx = 0usize;
        for &km in &k {
            if km < -n / 2 || km >= n / 2 {
                return None;
            }
            idx = idx * self.n + km.rem_euclid(n) as usize;
        }
        Some(idx)
    }

    #[inline]
    pub fn is_nyquist(&self, index: usize) -> bool {
        let h = (self.n / 2) as i64;
        self.wavevector(index).iter().any(|&k| k == -h)
    }

    /// Point `x` of the collocation grid for a storage index.
    pub fn point(&self, index: usize) -> [f64; 3] {
        let n = self.n;
        let h = self.spacing();
        [
            (index / (n * n)) as f64 * h,
            ((index / n) % n) as f64 * h,
            (index % n) as f64 * h,
        ]
    }
}

#[inline]
pub(crate) fn norm2(k: [i64; 3]) -> i64 {
    k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
}
