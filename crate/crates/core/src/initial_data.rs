//! Divergence-free initial data: stream functions, the oscillating
//! large-data family, and the Elsässer change of variables.
//!
//! The family is built from a stream function `stream` with Fourier support
//! in an annulus and an integer oscillation frequency `m`:
//!
//! ```text
//! u0 = (∂2 stream, -∂1 stream, 0)
//! B0 = (1 - cos(m x3)) u0
//! ```
//!
//! so `u0 - B0 = cos(m x3) u0` is small in negative-regularity Besov norms
//! as `m` grows, while `u0` and `B0` themselves stay of order one.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Axis, SpectralField, VectorField};
use crate::grid::{norm2, Grid};
use crate::littlewood_paley::DyadicPartition;
use crate::random::{random_scalar, sample_rng, Band};
use crate::spaces::{besov_from_blocks, block_lp_norms_multi, Exponent};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamMode {
    /// Unit-modulus coefficients on every lattice point of the annulus with
    /// a fixed odd phase function.
    Deterministic,
    /// Complex Gaussian coefficients from the given seed.
    Seeded(u64),
}

/// Stream function recipe: Fourier support in `rho_min ≤ |k| ≤ rho_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StreamSpec {
    pub rho_min: f64,
    pub rho_max: f64,
    pub amplitude: f64,
    pub mode: StreamMode,
}

impl StreamSpec {
    pub fn deterministic(rho_min: f64, rho_max: f64, amplitude: f64) -> Self {
        Self { rho_min, rho_max, amplitude, mode: StreamMode::Deterministic }
    }

    pub fn seeded(rho_min: f64, rho_max: f64, amplitude: f64, seed: u64) -> Self {
        Self { rho_min, rho_max, amplitude, mode: StreamMode::Seeded(seed) }
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.rho_min > 0.0 && self.rho_min < self.rho_max) {
            return Err(Error::invalid(format!(
                "stream annulus needs 0 < rho_min < rho_max, got [{}, {}]",
                self.rho_min, self.rho_max
            )));
        }
        if !self.amplitude.is_finite() {
            return Err(Error::invalid("stream amplitude must be finite"));
        }
        if self.rho_max > grid.dealias_cutoff() {
            return Err(Error::BandOverflow(format!(
                "stream annulus radius {} exceeds dealias cutoff {:.2} on n={}",
                self.rho_max,
                grid.dealias_cutoff(),
                grid.n()
            )));
        }
        Ok(())
    }
}

fn odd_phase(k: [i64; 3]) -> f64 {
    let [a, b, c] = k.map(|x| x as f64);
    0.9 * (a + 2.0 * b + 3.0 * c) + 0.3 * a * b * c
}

/// Real, mean-free scalar field with the spec's annular support.
pub fn make_stream(spec: &StreamSpec, grid: &Grid) -> Result<SpectralField> {
    spec.validate(grid)?;
    let band = Band::new(spec.rho_min, spec.rho_max).with_amplitude(spec.amplitude);
    match spec.mode {
        StreamMode::Seeded(seed) => random_scalar(grid, band, &mut sample_rng(seed, 0)),
        StreamMode::Deterministic => {
            let mut f = SpectralField::zeros(grid);
            let coeffs = f.coefficients_mut();
            for (i, c) in coeffs.iter_mut().enumerate() {
                let k = grid.wavevector(i);
                if band.contains(norm2(k)) && !grid.is_nyquist(i) {
                    *c = Complex64::from_polar(spec.amplitude, odd_phase(k));
                }
            }
            Ok(f)
        }
    }
}

/// `(∂2 f, -∂1 f, 0)`.
pub fn rotated_gradient(stream: &SpectralField) -> VectorField {
    VectorField([
        stream.derivative(Axis::X2),
        -&stream.derivative(Axis::X1),
        SpectralField::zeros(stream.grid()),
    ])
}

fn max_abs_k3(f: &SpectralField) -> i64 {
    let g = f.grid();
    f.coefficients()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(i, _)| g.wavevector(i)[2].abs())
        .max()
        .unwrap_or(0)
}

/// `cos(m x3) f` by exact coefficient shifts. `f` must leave room for the
/// shift below the dealias cutoff.
pub fn modulate_x3(f: &SpectralField, m: u32) -> Result<SpectralField> {
    let g = f.grid();
    let m = m as i64;
    let reach = max_abs_k3(f) + m;
    if reach as f64 > g.dealias_cutoff() {
        return Err(Error::BandOverflow(format!(
            "x3-frequency {reach} after modulation by m={m} exceeds dealias cutoff {:.2} on n={}",
            g.dealias_cutoff(),
            g.n()
        )));
    }
    let mut out = SpectralField::zeros(g);
    for (i, &c) in f.coefficients().iter().enumerate() {
        if c == Complex64::default() {
            continue;
        }
        let k = g.wavevector(i);
        for shift in [m, -m] {
            let j = g.index_of([k[0], k[1], k[2] + shift]).expect("checked against cutoff");
            out.coefficients_mut()[j] += 0.5 * c;
        }
    }
    Ok(out)
}

/// Member of the oscillating large-data family.
#[derive(Clone, Debug)]
pub struct DataPair {
    pub u0: VectorField,
    pub b0: VectorField,
    /// Oscillation frequency; the small parameter is `1/m`.
    pub m: u32,
}

impl DataPair {
    /// `u0 - B0 = cos(m x3) u0`.
    pub fn difference(&self) -> VectorField {
        &self.u0 - &self.b0
    }

    pub fn elsasser(&self) -> Result<(VectorField, VectorField)> {
        elsasser(&self.u0, &self.b0)
    }
}

pub fn large_data_pair(stream: &SpectralField, m: u32) -> Result<DataPair> {
    if m == 0 {
        return Err(Error::invalid("oscillation frequency m must be positive"));
    }
    let u0 = rotated_gradient(stream);
    let osc = VectorField([
        modulate_x3(&u0.0[0], m)?,
        modulate_x3(&u0.0[1], m)?,
        SpectralField::zeros(stream.grid()),
    ]);
    let b0 = &u0 - &osc;
    Ok(DataPair { u0, b0, m })
}

/// `(W⁺, W⁻) = (u + B, u - B)`.
pub fn elsasser(u: &VectorField, b: &VectorField) -> Result<(VectorField, VectorField)> {
    u.grid().check_same(b.grid())?;
    Ok((u + b, u - b))
}

/// `(u, B) = ((W⁺ + W⁻)/2, (W⁺ - W⁻)/2)`.
pub fn from_elsasser(w_plus: &VectorField, w_minus: &VectorField) -> Result<(VectorField, VectorField)> {
    w_plus.grid().check_same(w_minus.grid())?;
    Ok(((w_plus + w_minus).scale(0.5), (w_plus - w_minus).scale(0.5)))
}

/// Outcome of a log-log regression of `‖u0 - B0‖` against `1/m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingStudy {
    pub p: f64,
    pub r: f64,
    /// Regularity index `3/p - 1`.
    pub s: f64,
    pub ms: Vec<u32>,
    pub difference_norms: Vec<f64>,
    pub u0_norms: Vec<f64>,
    pub b0_norms: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit in log space.
    pub residual: f64,
    /// The predicted exponent `1 - 3/p`.
    pub predicted_slope: f64,
    /// `p = 3`, where the predicted exponent is zero.
    pub borderline: bool,
}

/// Least-squares line through `(x_i, y_i)`: returns slope, intercept and
/// RMS residual.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    (slope, intercept, (rss / n).sqrt())
}

/// Scaling studies for several `(p, r)` pairs sharing the same data; block
/// norms are computed once per field and `p`.
pub fn scaling_studies(stream: &SpectralField, pr: &[(f64, f64)], ms: &[u32], part: &DyadicPartition) -> Result<Vec<ScalingStudy>> {
    if ms.len() < 3 {
        return Err(Error::invalid(format!("scaling study needs at least 3 values of m, got {}", ms.len())));
    }
    if ms.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("m values must be strictly increasing"));
    }
    let mut ps: Vec<Exponent> = Vec::new();
    for &(p, r) in pr {
        if p < 3.0 {
            return Err(Error::invalid(format!("the large-data family needs p >= 3, got {p}")));
        }
        Exponent::new(r)?;
        let e = Exponent::new(p)?;
        if !ps.contains(&e) {
            ps.push(e);
        }
    }
    // blocks[field][m][p] with field 0 = difference, 1 = u0, 2 = B0
    let mut blocks = [Vec::new(), Vec::new(), Vec::new()];
    let u0_blocks = block_lp_norms_multi(&rotated_gradient(stream), part, &ps)?;
    for &m in ms {
        let pair = large_data_pair(stream, m)?;
        blocks[0].push(block_lp_norms_multi(&pair.difference(), part, &ps)?);
        blocks[1].push(u0_blocks.clone());
        blocks[2].push(block_lp_norms_multi(&pair.b0, part, &ps)?);
    }
    let xs: Vec<f64> = ms.iter().map(|&m| (1.0 / m as f64).ln()).collect();
    pr.iter()
        .map(|&(p, r)| {
            let pi = ps.iter().position(|e| e.value() == p).expect("collected above");
            let s = 3.0 / p - 1.0;
            let re = Exponent::new(r)?;
            let norms = |field: usize| -> Vec<f64> {
                blocks[field].iter().map(|b| besov_from_blocks(&b[pi], part.j_min(), s, re)).collect()
            };
            let difference_norms = norms(0);
            if difference_norms.iter().any(|v| !(*v > 0.0)) {
                return Err(Error::invalid("zero stream function: nothing to fit"));
            }
            let ys: Vec<f64> = difference_norms.iter().map(|v| v.ln()).collect();
            let (slope, intercept, residual) = fit_line(&xs, &ys);
            Ok(ScalingStudy {
                p,
                r,
                s,
                ms: ms.to_vec(),
                difference_norms,
                u0_norms: norms(1),
                b0_norms: norms(2),
                slope,
                intercept,
                residual,
                predicted_slope: 1.0 - 3.0 / p,
                borderline: p == 3.0,
            })
        })
        .collect()
}

pub fn scaling_study(stream: &SpectralField, p: f64, r: f64, ms: &[u32], part: &DyadicPartition) -> Result<ScalingStudy> {
    Ok(scaling_studies(stream, &[(p, r)], ms, part)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_vector;

    #[test]
    fn deterministic_stream_support() {
        let g = Grid::new(16).unwrap();
        let spec = StreamSpec::deterministic(1.5, 2.5, 1.0);
        let f = make_stream(&spec, &g).unwrap();
        assert!(f.conjugate_symmetry_defect() < 1e-15);
        assert_eq!(f.mean(), 0.0);
        let mut saw_radius_two = false;
        for (i, c) in f.coefficients().iter().enumerate() {
            let k2 = norm2(g.wavevector(i));
            if c.norm() > 0.0 {
                assert!((2.25..=6.25).contains(&(k2 as f64)));
            }
            if k2 == 4 {
                assert!(c.norm() > 0.0);
                saw_radius_two = true;
            }
        }
        assert!(saw_radius_two);
    }

    #[test]
    fn stream_determinism_and_zero_amplitude() {
        let g = Grid::new(16).unwrap();
        let spec = StreamSpec::seeded(1.0, 3.0, 0.7, 42);
        let a = make_stream(&spec, &g).unwrap();
        let b = make_stream(&spec, &g).unwrap();
        assert_eq!(a.coefficients(), b.coefficients());
        let z = make_stream(&StreamSpec::deterministic(1.0, 3.0, 0.0), &g).unwrap();
        assert_eq!(z.max_abs_coefficient(), 0.0);
    }

    #[test]
    fn stream_validation() {
        let g = Grid::new(16).unwrap();
        assert!(make_stream(&StreamSpec::deterministic(2.0, 1.0, 1.0), &g).is_err());
        assert!(make_stream(&StreamSpec::deterministic(0.0, 1.0, 1.0), &g).is_err());
        assert!(matches!(make_stream(&StreamSpec::deterministic(1.0, 6.0, 1.0), &g), Err(Error::BandOverflow(_))));
    }

    #[test]
    fn pair_structure() {
        let g = Grid::new(32).unwrap();
        let stream = make_stream(&StreamSpec::deterministic(1.5, 2.5, 1.0), &g).unwrap();
        let pair = large_data_pair(&stream, 6).unwrap();
        assert!(pair.u0.divergence().max_abs_coefficient() < 1e-14);
        assert!(pair.b0.relative_divergence() < 1e-14);
        // B0 = (1 - cos(m x3)) u0 pointwise
        let u = pair.u0.to_physical();
        let b = pair.b0.to_physical();
        let mut err: f64 = 0.0;
        for i in 0..g.len() {
            let w = 1.0 - (6.0 * g.point(i)[2]).cos();
            for c in 0..3 {
                err = err.max((b[c][i] - w * u[c][i]).abs());
            }
        }
        assert!(err < 1e-12, "{err}");
        assert!(matches!(large_data_pair(&stream, 9), Err(Error::BandOverflow(_))));
        assert!(large_data_pair(&stream, 0).is_err());
    }

    #[test]
    fn elsasser_examples() {
        let g = Grid::new(16).unwrap();
        let band = Band::new(1.0, 4.0);
        let u = random_vector(&g, band, true, &mut sample_rng(9, 0)).unwrap();
        let b = random_vector(&g, band, true, &mut sample_rng(9, 1)).unwrap();
        let (wp, wm) = elsasser(&u, &VectorField::zeros(&g)).unwrap();
        assert_eq!(wp.0[0].coefficients(), u.0[0].coefficients());
        assert_eq!(wm.0[2].coefficients(), u.0[2].coefficients());
        let (_, wm) = elsasser(&u, &u).unwrap();
        assert_eq!(wm.max_abs_coefficient(), 0.0);
        let (wp, wm) = elsasser(&u, &b).unwrap();
        let (u2, b2) = from_elsasser(&wp, &wm).unwrap();
        assert!((&u2 - &u).max_abs_coefficient() < 1e-14);
        assert!((&b2 - &b).max_abs_coefficient() < 1e-14);
        assert!(elsasser(&u, &VectorField::zeros(&Grid::new(8).unwrap())).is_err());
    }

    #[test]
    fn fit_line_exact() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 0.5 * x - 1.0).collect();
        let (a, b, res) = fit_line(&xs, &ys);
        assert!((a - 0.5).abs() < 1e-15 && (b + 1.0).abs() < 1e-15 && res < 1e-15);
    }

    #[test]
    fn scaling_study_guards() {
        let g = Grid::new(32).unwrap();
        let part = DyadicPartition::for_grid(&g);
        let stream = make_stream(&StreamSpec::deterministic(1.5, 2.5, 1.0), &g).unwrap();
        assert!(scaling_study(&stream, 6.0, 1.0, &[2, 4], &part).is_err());
        assert!(scaling_study(&stream, 2.0, 1.0, &[2, 4, 6], &part).is_err());
        assert!(scaling_study(&stream, 6.0, 1.0, &[4, 2, 6], &part).is_err());
        let st = scaling_study(&stream, 3.0, 1.0, &[2, 4, 6], &part).unwrap();
        assert!(st.borderline);
        assert!(st.u0_norms.windows(2).all(|w| w[0] == w[1]));
    }
}
