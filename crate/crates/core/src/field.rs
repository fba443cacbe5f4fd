//! Fields as Fourier-series coefficients, `f(x) = Σ_k c_k e^{ik·x}`.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{norm2, Grid};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X1,
    X2,
    X3,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X1, Axis::X2, Axis::X3];

    pub fn index(self) -> usize {
        match self {
            Axis::X1 => 0,
            Axis::X2 => 1,
            Axis::X3 => 2,
        }
    }

    pub fn from_number(m: usize) -> Result<Axis> {
        match m {
            1 => Ok(Axis::X1),
            2 => Ok(Axis::X2),
            3 => Ok(Axis::X3),
            _ => Err(Error::invalid(format!("axis must be 1, 2 or 3, got {m}"))),
        }
    }
}

/// Scalar field on a [`Grid`], stored as Fourier coefficients.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: &Grid) -> Self {
        Self { grid: grid.clone(), coeffs: vec![Complex64::default(); grid.len()] }
    }

    /// Wraps raw coefficients; the Nyquist row is cleared.
    pub fn from_coefficients(grid: &Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::SizeMismatch { expected: grid.len(), got: coeffs.len() });
        }
        let mut f = Self { grid: grid.clone(), coeffs };
        f.clear_nyquist();
        Ok(f)
    }

    /// Forward transform of real samples at the collocation points.
    pub fn from_physical(grid: &Grid, samples: &[f64]) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::SizeMismatch { expected: grid.len(), got: samples.len() });
        }
        let mut data: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        grid.fft().forward(&mut data);
        let scale = 1.0 / grid.len() as f64;
        data.par_iter_mut().for_each(|c| *c *= scale);
        let mut f = Self { grid: grid.clone(), coeffs: data };
        f.clear_nyquist();
        Ok(f)
    }

    /// Samples `g` on the grid and transforms.
    pub fn from_fn(grid: &Grid, g: impl Fn([f64; 3]) -> f64 + Sync) -> Self {
        let samples: Vec<f64> = (0..grid.len()).into_par_iter().map(|i| g(grid.point(i))).collect();
        Self::from_physical(grid, &samples).expect("sizes match by construction")
    }

    /// Single real mode `amp · cos(k·x + phase)`.
    pub fn mode(grid: &Grid, k: [i64; 3], amp: f64, phase: f64) -> Result<Self> {
        let mut f = Self::zeros(grid);
        let c = Complex64::from_polar(0.5 * amp, phase);
        let neg = [-k[0], -k[1], -k[2]];
        let (ip, ineg) = match (grid.index_of(k), grid.index_of(neg)) {
            (Some(a), Some(b)) if !grid.is_nyquist(a) => (a, b),
            _ => return Err(Error::BandOverflow(format!("mode {k:?} not resolved on n={}", grid.n()))),
        };
        if ip == ineg {
            f.coeffs[ip] = Complex64::new(amp * phase.cos(), 0.0);
        } else {
            f.coeffs[ip] += c;
            f.coeffs[ineg] += c.conj();
        }
        Ok(f)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coefficients(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn coefficient(&self, k: [i64; 3]) -> Complex64 {
        self.grid.index_of(k).map(|i| self.coeffs[i]).unwrap_or_default()
    }

    /// Complex samples at the collocation points.
    pub fn to_physical_complex(&self) -> Vec<Complex64> {
        let mut data = self.coeffs.clone();
        self.grid.fft().inverse(&mut data);
        data
    }

    /// Real samples at the collocation points (imaginary part discarded).
    pub fn to_physical(&self) -> Vec<f64> {
        let mut data = self.coeffs.clone();
        self.grid.fft().inverse(&mut data);
        data.into_iter().map(|c| c.re).collect()
    }

    /// Multiplies every coefficient by `m(k)`.
    pub fn apply_multiplier(&self, m: impl Fn([i64; 3]) -> Complex64 + Sync) -> Self {
        let grid = &self.grid;
        let coeffs = self
            .coeffs
            .par_iter()
            .enumerate()
            .map(|(i, &c)| if c == Complex64::default() { c } else { c * m(grid.wavevector(i)) })
            .collect();
        Self { grid: self.grid.clone(), coeffs }
    }

    /// Multiplies every coefficient by a real function of `|k|²`.
    pub fn apply_radial(&self, m: impl Fn(i64) -> f64 + Sync) -> Self {
        let coeffs = self
            .coeffs
            .par_iter()
            .zip(self.grid.k2_table().par_iter())
            .map(|(&c, &k2)| if c == Complex64::default() { c } else { c * m(k2 as i64) })
            .collect();
        Self { grid: self.grid.clone(), coeffs }
    }

    /// Wraps coefficients that already respect the storage conventions.
    pub(crate) fn from_raw(grid: &Grid, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.len());
        Self { grid: grid.clone(), coeffs }
    }

    pub fn derivative(&self, axis: Axis) -> Self {
        let a = axis.index();
        self.apply_multiplier(|k| Complex64::new(0.0, k[a] as f64))
    }

    pub fn laplacian(&self) -> Self {
        self.apply_radial(|k2| -(k2 as f64))
    }

    /// 2/3-rule truncation: zero every mode with some `|k_m| > n/3`.
    pub fn dealias(&self) -> Self {
        let mut f = self.clone();
        f.dealias_in_place();
        f
    }

    pub fn dealias_in_place(&mut self) {
        let cut = self.grid.dealias_cutoff();
        let grid = &self.grid;
        self.coeffs.par_iter_mut().enumerate().for_each(|(i, c)| {
            if grid.wavevector(i).iter().any(|&k| (k.abs() as f64) > cut) {
                *c = Complex64::default();
            }
        });
    }

    pub(crate) fn clear_nyquist(&mut self) {
        let grid = &self.grid;
        self.coeffs.par_iter_mut().enumerate().for_each(|(i, c)| {
            if grid.is_nyquist(i) {
                *c = Complex64::default();
            }
        });
    }

    pub fn zero_mean(&mut self) {
        self.coeffs[0] = Complex64::default();
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn scale(&self, a: f64) -> Self {
        Self { grid: self.grid.clone(), coeffs: self.coeffs.iter().map(|c| c * a).collect() }
    }

    /// `Σ_k |c_k|²`, the squared L² norm with normalized measure.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Real L² inner product, `Re Σ_k a_k conj(b_k)`.
    pub fn inner(&self, other: &Self) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a * b.conj()).re).sum()
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest `|c_k - conj(c_{-k})|`; zero for real fields.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let g = &self.grid;
        (0..g.len())
            .filter(|&i| !g.is_nyquist(i))
            .map(|i| {
                let k = g.wavevector(i);
                let j = g.index_of([-k[0], -k[1], -k[2]]).expect("non-Nyquist mirrors are on the lattice");
                (self.coeffs[i] - self.coeffs[j].conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Pointwise product evaluated on the grid, then dealiased.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let [a, b]: [Vec<f64>; 2] = to_physical_many(&[self, other]).try_into().expect("two transforms");
        let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        Ok(Self::from_physical(&self.grid, &prod)?.dealias())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        Self {
            grid: self.grid.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| f(a, b)).collect(),
        }
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: Self) -> SpectralField {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: Self) -> SpectralField {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, rhs: f64) -> SpectralField {
        self.scale(rhs)
    }
}

/// Anything made of spectral components on one grid: scalar fields are a
/// single component, vector fields three. Norms of vector-valued fields use
/// the pointwise (and coefficientwise) Euclidean magnitude.
pub trait Components {
    fn components(&self) -> &[SpectralField];

    fn grid(&self) -> &Grid {
        self.components()[0].grid()
    }
}

impl Components for SpectralField {
    fn components(&self) -> &[SpectralField] {
        std::slice::from_ref(self)
    }
}

impl Components for VectorField {
    fn components(&self) -> &[SpectralField] {
        &self.0
    }
}

/// Three spectral components on a shared grid.
#[derive(Clone, Debug)]
pub struct VectorField(pub [SpectralField; 3]);

impl VectorField {
    pub fn new(c1: SpectralField, c2: SpectralField, c3: SpectralField) -> Result<Self> {
        c1.grid.check_same(&c2.grid)?;
        c1.grid.check_same(&c3.grid)?;
        Ok(Self([c1, c2, c3]))
    }

    pub fn zeros(grid: &Grid) -> Self {
        let z = SpectralField::zeros(grid);
        Self([z.clone(), z.clone(), z])
    }

    pub fn grid(&self) -> &Grid {
        self.0[0].grid()
    }

    pub fn component(&self, axis: Axis) -> &SpectralField {
        &self.0[axis.index()]
    }

    pub fn map(&self, f: impl Fn(&SpectralField) -> SpectralField) -> Self {
        Self([f(&self.0[0]), f(&self.0[1]), f(&self.0[2])])
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(&SpectralField, &SpectralField) -> SpectralField) -> Self {
        Self([f(&self.0[0], &other.0[0]), f(&self.0[1], &other.0[1]), f(&self.0[2], &other.0[2])])
    }

    /// Spectral divergence `Σ_m i k_m û_m`.
    pub fn divergence(&self) -> SpectralField {
        let d: Vec<SpectralField> = Axis::ALL.iter().map(|&a| self.component(a).derivative(a)).collect();
        &(&d[0] + &d[1]) + &d[2]
    }

    /// Largest divergence coefficient modulus relative to the largest
    /// coefficient modulus of the field.
    pub fn relative_divergence(&self) -> f64 {
        let scale = self.0.iter().map(|c| c.max_abs_coefficient()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        self.divergence().max_abs_coefficient() / scale
    }

    /// Projection onto divergence-free fields, `û ↦ û - k (k·û)/|k|²`.
    /// The k = 0 mode is left untouched.
    pub fn leray_project(&self) -> Self {
        let g = self.grid().clone();
        let len = g.len();
        let [a, b, c] = [self.0[0].coefficients(), self.0[1].coefficients(), self.0[2].coefficients()];
        let out: Vec<[Complex64; 3]> = (0..len)
            .into_par_iter()
            .map(|i| {
                let k = g.wavevector(i);
                let k2 = norm2(k);
                let v = [a[i], b[i], c[i]];
                if k2 == 0 {
                    return v;
                }
                let kf = [k[0] as f64, k[1] as f64, k[2] as f64];
                let dot = v[0] * kf[0] + v[1] * kf[1] + v[2] * kf[2];
                let s = dot / k2 as f64;
                [v[0] - s * kf[0], v[1] - s * kf[1], v[2] - s * kf[2]]
            })
            .collect();
        let comp = |m: usize| SpectralField { grid: g.clone(), coeffs: out.iter().map(|v| v[m]).collect() };
        Self([comp(0), comp(1), comp(2)])
    }

    pub fn dealias(&self) -> Self {
        self.map(SpectralField::dealias)
    }

    pub fn zero_mean(&mut self) {
        for c in &mut self.0 {
            c.zero_mean();
        }
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|c| c.scale(a))
    }

    pub fn energy(&self) -> f64 {
        self.0.iter().map(SpectralField::energy).sum()
    }

    pub fn inner(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.inner(b)).sum()
    }

    /// `Σ_k |k|² |û_k|²`, i.e. ‖∇u‖²_{L²}.
    pub fn gradient_energy(&self) -> f64 {
        let g = self.grid();
        self.0
            .iter()
            .map(|c| {
                c.coefficients()
                    .iter()
                    .enumerate()
                    .map(|(i, z)| norm2(g.wavevector(i)) as f64 * z.norm_sqr())
                    .sum::<f64>()
            })
            .sum()
    }

    pub fn to_physical(&self) -> [Vec<f64>; 3] {
        let [a, b, c]: [Vec<f64>; 3] =
            to_physical_many(&[&self.0[0], &self.0[1], &self.0[2]]).try_into().expect("three components");
        [a, b, c]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(SpectralField::is_finite)
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.0.iter().map(SpectralField::max_abs_coefficient).fold(0.0, f64::max)
    }
}

impl Add for &VectorField {
    type Output = VectorField;
    fn add(self, rhs: Self) -> VectorField {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &VectorField {
    type Output = VectorField;
    fn sub(self, rhs: Self) -> VectorField {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &VectorField {
    type Output = VectorField;
    fn mul(self, rhs: f64) -> VectorField {
        self.scale(rhs)
    }
}

/// Index of `-k` for the coefficient stored at `i`.
fn mirror_index(n: usize, i: usize) -> usize {
    let m = |x: usize| (n - x) % n;
    let (a, b, c) = (i / (n * n), (i / n) % n, i % n);
    (m(a) * n + m(b)) * n + m(c)
}

/// Real samples of several fields, two per complex transform: the inverse
/// transform of `â + i b̂` is `a + i b` when both are real.
pub(crate) fn to_physical_many(fields: &[&SpectralField]) -> Vec<Vec<f64>> {
    fields
        .par_chunks(2)
        .flat_map_iter(|pair| match pair {
            [a, b] => {
                let mut data: Vec<Complex64> =
                    a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + Complex64::i() * y).collect();
                a.grid.fft().inverse(&mut data);
                let re = data.iter().map(|z| z.re).collect();
                let im = data.iter().map(|z| z.im).collect();
                vec![re, im]
            }
            [a] => vec![a.to_physical()],
            _ => unreachable!("chunks of at most two"),
        })
        .collect()
}

/// Forward transforms of real samples, two per complex transform, split
/// using the conjugate symmetry of each half.
pub(crate) fn from_physical_many(grid: &Grid, samples: &[Vec<f64>]) -> Vec<SpectralField> {
    let n = grid.n();
    let scale = 1.0 / grid.len() as f64;
    samples
        .par_chunks(2)
        .flat_map_iter(|pair| match pair {
            [x, y] => {
                let mut z: Vec<Complex64> = x.iter().zip(y).map(|(&a, &b)| Complex64::new(a, b)).collect();
                grid.fft().forward(&mut z);
                let (mut a, mut b) = (SpectralField::zeros(grid), SpectralField::zeros(grid));
                for i in 0..z.len() {
                    let (zk, zm) = (z[i], z[mirror_index(n, i)].conj());
                    a.coeffs[i] = 0.5 * scale * (zk + zm);
                    b.coeffs[i] = Complex64::new(0.0, -0.5 * scale) * (zk - zm);
                }
                a.clear_nyquist();
                b.clear_nyquist();
                vec![a, b]
            }
            [x] => vec![SpectralField::from_physical(grid, x).expect("sizes match by construction")],
            _ => unreachable!("chunks of at most two"),
        })
        .collect()
}

/// Physical-space samples of the gradient of a vector field.
pub(crate) struct PhysicalJet {
    /// `gradient[m][i]` holds samples of `∂_m v_i`.
    pub gradient: [[Vec<f64>; 3]; 3],
}

impl PhysicalJet {
    pub(crate) fn new(v: &VectorField) -> Self {
        let derivs: Vec<SpectralField> =
            Axis::ALL.iter().flat_map(|&m| Axis::ALL.map(|i| v.component(i).derivative(m))).collect();
        let refs: Vec<&SpectralField> = derivs.iter().collect();
        let mut samples = to_physical_many(&refs).into_iter();
        let mut take3 = || [0; 3].map(|_| samples.next().expect("nine transforms"));
        Self { gradient: [take3(), take3(), take3()] }
    }
}

/// Samples of `Σ_m a_m ∂_m v_i` for each `i`.
pub(crate) fn advect_physical(a: &[Vec<f64>; 3], v: &PhysicalJet) -> [Vec<f64>; 3] {
    Axis::ALL.map(|i| {
        let i = i.index();
        (0..a[0].len())
            .into_par_iter()
            .map(|x| a[0][x] * v.gradient[0][i][x] + a[1][x] * v.gradient[1][i][x] + a[2][x] * v.gradient[2][i][x])
            .collect()
    })
}

pub(crate) fn vector_from_physical(grid: &Grid, samples: [Vec<f64>; 3]) -> VectorField {
    let [a, b, c]: [SpectralField; 3] = from_physical_many(grid, &samples).try_into().expect("three components");
    VectorField([a, b, c])
}

/// Dealiased pseudo-spectral advection `u·∇v`.
pub fn advect(u: &VectorField, v: &VectorField) -> Result<VectorField> {
    u.grid().check_same(v.grid())?;
    let jet = PhysicalJet::new(v);
    let prod = advect_physical(&u.to_physical(), &jet);
    Ok(vector_from_physical(u.grid(), prod).dealias())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid(n: usize) -> Grid {
        Grid::new(n).unwrap()
    }

    fn max_diff(a: &SpectralField, b: &SpectralField) -> f64 {
        (a - b).max_abs_coefficient()
    }

    #[test]
    fn cosine_has_two_half_coefficients() {
        let g = grid(16);
        let f = SpectralField::from_fn(&g, |x| x[0].cos());
        assert_abs_diff_eq!(f.coefficient([1, 0, 0]).re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(f.coefficient([-1, 0, 0]).re, 0.5, epsilon = 1e-14);
        let rest = (0..g.len())
            .filter(|&i| ![[1, 0, 0], [-1, 0, 0]].contains(&g.wavevector(i)))
            .map(|i| f.coefficients()[i].norm())
            .fold(0.0, f64::max);
        assert!(rest < 1e-15);
    }

    #[test]
    fn zero_samples_give_zero_coefficients() {
        let g = grid(8);
        let f = SpectralField::from_physical(&g, &vec![0.0; 512]).unwrap();
        assert_eq!(f.max_abs_coefficient(), 0.0);
        assert!(matches!(
            SpectralField::from_physical(&g, &[0.0; 10]),
            Err(Error::SizeMismatch { expected: 512, got: 10 })
        ));
    }

    #[test]
    fn derivatives_of_simple_modes() {
        let g = grid(16);
        let c = SpectralField::from_fn(&g, |x| x[0].cos());
        let s = SpectralField::from_fn(&g, |x| -x[0].sin());
        assert!(max_diff(&c.derivative(Axis::X1), &s) < 1e-14);

        let f = SpectralField::from_fn(&g, |x| (2.0 * x[2]).sin());
        let df = SpectralField::from_fn(&g, |x| 2.0 * (2.0 * x[2]).cos());
        assert!(max_diff(&f.derivative(Axis::X3), &df) < 1e-14);

        let k = SpectralField::from_fn(&g, |_| 3.0);
        assert_eq!(k.derivative(Axis::X2).max_abs_coefficient(), 0.0);
    }

    #[test]
    fn nyquist_row_is_zeroed() {
        let g = grid(8);
        let f = SpectralField::from_fn(&g, |x| (4.0 * x[1]).cos());
        assert_eq!(f.max_abs_coefficient(), 0.0);
    }

    #[test]
    fn leray_kills_gradients_and_keeps_solenoidal() {
        let g = grid(16);
        let phi = SpectralField::from_fn(&g, |x| x[0].sin() * x[1].sin());
        let grad = VectorField::new(phi.derivative(Axis::X1), phi.derivative(Axis::X2), phi.derivative(Axis::X3)).unwrap();
        assert!(grad.leray_project().max_abs_coefficient() < 1e-15);

        let v = VectorField::new(SpectralField::from_fn(&g, |x| x[1].sin()), SpectralField::zeros(&g), SpectralField::zeros(&g))
            .unwrap();
        let p = v.leray_project();
        assert!((&p - &v).max_abs_coefficient() < 1e-15);

        let w = VectorField::new(SpectralField::from_fn(&g, |x| x[0].sin()), SpectralField::zeros(&g), SpectralField::zeros(&g))
            .unwrap();
        assert!(w.leray_project().divergence().max_abs_coefficient() < 1e-12);
    }

    #[test]
    fn advection_examples() {
        let g = grid(16);
        let z = SpectralField::zeros(&g);
        let sx2 = VectorField::new(SpectralField::from_fn(&g, |x| x[1].sin()), z.clone(), z.clone()).unwrap();
        let sx1 = VectorField::new(SpectralField::from_fn(&g, |x| x[0].sin()), z.clone(), z.clone()).unwrap();

        assert!(advect(&sx2, &sx2).unwrap().max_abs_coefficient() < 1e-15);

        let expected = SpectralField::from_fn(&g, |x| x[1].sin() * x[0].cos());
        let got = advect(&sx2, &sx1).unwrap();
        assert!(max_diff(&got.0[0], &expected) < 1e-15);
        assert!(got.0[1].max_abs_coefficient() < 1e-15);

        let zero = VectorField::zeros(&g);
        assert_eq!(advect(&zero, &sx1).unwrap().max_abs_coefficient(), 0.0);
        assert!(advect(&zero, &VectorField::zeros(&grid(8))).is_err());
    }

    #[test]
    fn dealias_masks_top_third() {
        let g = grid(32);
        let f = SpectralField::mode(&g, [12, 0, 0], 1.0, 0.0).unwrap();
        assert_eq!(f.dealias().max_abs_coefficient(), 0.0);
        let f = SpectralField::mode(&g, [1, 1, 1], 1.0, 0.3).unwrap();
        assert_eq!(max_diff(&f.dealias(), &f), 0.0);
    }
}
