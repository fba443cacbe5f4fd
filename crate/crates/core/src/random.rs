//! Seeded band-limited random fields.
//!
//! Coefficients are drawn for every lattice point of the cube
//! `[-K, K]³`, `K = ⌈k_max⌉`, in lexicographic order, then masked to the
//! band. The draw sequence therefore depends only on the band and the seed,
//! so the same seed produces the same field on every grid that resolves it.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{SpectralField, VectorField};
use crate::grid::{norm2, Grid};

/// Radial spectral support `k_min ≤ |k| ≤ k_max` with a coefficient scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub k_min: f64,
    pub k_max: f64,
    pub amplitude: f64,
}

impl Band {
    pub fn new(k_min: f64, k_max: f64) -> Self {
        Self { k_min, k_max, amplitude: 1.0 }
    }

    pub fn with_amplitude(self, amplitude: f64) -> Self {
        Self { amplitude, ..self }
    }

    pub fn contains(&self, k2: i64) -> bool {
        let r = (k2 as f64).sqrt();
        k2 > 0 && r >= self.k_min && r <= self.k_max
    }

    /// Rejects bands that are empty or that reach past the 2/3 cutoff.
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.k_min >= 0.0 && self.k_min <= self.k_max && self.amplitude.is_finite()) {
            return Err(Error::invalid(format!("bad band [{}, {}]", self.k_min, self.k_max)));
        }
        if self.k_max.ceil() > grid.dealias_cutoff().floor() {
            return Err(Error::BandOverflow(format!(
                "band radius {} exceeds dealias cutoff {:.2} on n={}",
                self.k_max,
                grid.dealias_cutoff(),
                grid.n()
            )));
        }
        Ok(())
    }
}

/// Generator for sample `sample` of the experiment seeded with `seed`.
/// Distinct samples use distinct ChaCha streams.
pub fn sample_rng(seed: u64, sample: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample);
    rng
}

fn complex_gaussian(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Real scalar field with independent complex Gaussian coefficients in the
/// band, symmetrized `c_k = (a_k + conj a_{-k}) / 2`.
pub fn random_scalar(grid: &Grid, band: Band, rng: &mut impl Rng) -> Result<SpectralField> {
    band.validate(grid)?;
    let kmax = band.k_max.ceil() as i64;
    let side = (2 * kmax + 1) as usize;
    let mut raw = Vec::with_capacity(side * side * side);
    for _ in 0..side * side * side {
        raw.push(complex_gaussian(rng));
    }
    let at = |k: [i64; 3]| {
        let [a, b, c] = k.map(|x| (x + kmax) as usize);
        raw[(a * side + b) * side + c]
    };
    let mut f = SpectralField::zeros(grid);
    for k1 in -kmax..=kmax {
        for k2 in -kmax..=kmax {
            for k3 in -kmax..=kmax {
                let k = [k1, k2, k3];
                if !band.contains(norm2(k)) {
                    continue;
                }
                let idx = grid.index_of(k).expect("band validated against grid");
                let c = 0.5 * (at(k) + at([-k1, -k2, -k3]).conj());
                f.coefficients_mut()[idx] = band.amplitude * c;
            }
        }
    }
    Ok(f)
}

/// Three independent scalar draws; projected onto divergence-free fields
/// when `solenoidal` is set.
pub fn random_vector(grid: &Grid, band: Band, solenoidal: bool, rng: &mut impl Rng) -> Result<VectorField> {
    let a = random_scalar(grid, band, rng)?;
    let b = random_scalar(grid, band, rng)?;
    let c = random_scalar(grid, band, rng)?;
    let v = VectorField::new(a, b, c)?;
    Ok(if solenoidal { v.leray_project() } else { v })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_and_band_limited() {
        let g = Grid::new(16).unwrap();
        let band = Band::new(1.5, 4.0);
        let f = random_scalar(&g, band, &mut sample_rng(7, 0)).unwrap();
        assert!(f.conjugate_symmetry_defect() < 1e-15);
        for (i, c) in f.coefficients().iter().enumerate() {
            if c.norm() > 0.0 {
                assert!(band.contains(norm2(g.wavevector(i))));
            }
        }
        assert!(f.max_abs_coefficient() > 0.0);
    }

    #[test]
    fn resolution_independent() {
        let band = Band::new(1.0, 5.0);
        let (g16, g32) = (Grid::new(16).unwrap(), Grid::new(32).unwrap());
        let a = random_scalar(&g16, band, &mut sample_rng(3, 2)).unwrap();
        let b = random_scalar(&g32, band, &mut sample_rng(3, 2)).unwrap();
        for (i, c) in a.coefficients().iter().enumerate() {
            assert_eq!(*c, b.coefficient(g16.wavevector(i)));
        }
    }

    #[test]
    fn streams_differ_and_repeat() {
        let g = Grid::new(16).unwrap();
        let band = Band::new(1.0, 3.0);
        let a = random_scalar(&g, band, &mut sample_rng(1, 0)).unwrap();
        let b = random_scalar(&g, band, &mut sample_rng(1, 1)).unwrap();
        let c = random_scalar(&g, band, &mut sample_rng(1, 0)).unwrap();
        assert_ne!(a.coefficients(), b.coefficients());
        assert_eq!(a.coefficients(), c.coefficients());
    }

    #[test]
    fn solenoidal_vector() {
        let g = Grid::new(16).unwrap();
        let v = random_vector(&g, Band::new(1.0, 5.0), true, &mut sample_rng(5, 0)).unwrap();
        assert!(v.relative_divergence() < 1e-14);
    }

    #[test]
    fn rejects_unresolved_band() {
        let g = Grid::new(16).unwrap();
        assert!(random_scalar(&g, Band::new(1.0, 6.0), &mut sample_rng(0, 0)).is_err());
        assert!(random_scalar(&g, Band::new(3.0, 2.0), &mut sample_rng(0, 0)).is_err());
    }
}
