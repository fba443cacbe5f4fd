//! Dyadic frequency decomposition.
//!
//! The radial cutoff `χ` equals 1 on `|ξ| ≤ 3/4`, vanishes on `|ξ| ≥ 4/3`
//! and interpolates with the smooth transition `θ(t) = e^{-1/t}`. The bump
//! `φ(ξ) = χ(ξ/2) - χ(ξ)` is then non-negative, supported in the annulus
//! `3/4 ≤ |ξ| ≤ 8/3`, and the partition identity
//!
//! ```text
//! Σ_{j=j0}^{j1} φ(2^{-j} ξ) = χ(2^{-j1-1} ξ) - χ(2^{-j0} ξ)
//! ```
//!
//! telescopes, so the sum is exactly 1 on `4/3·2^{j0} ≤ |ξ| ≤ 3/2·2^{j1}`.
//!
//! Blocks act as Fourier multipliers on the lattice. Tables are indexed by
//! `|k|²`, which is all a radial multiplier needs.

use crate::error::{Error, Result};
use crate::field::{SpectralField, VectorField};
use crate::grid::{norm2, Grid};

const INNER: f64 = 3.0 / 4.0;
const OUTER: f64 = 4.0 / 3.0;

fn transition(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth radial cutoff: 1 on `[0, 3/4]`, 0 on `[4/3, ∞)`.
pub fn lowpass_profile(r: f64) -> f64 {
    let lo = transition(r - INNER);
    let hi = transition(OUTER - r);
    if lo == 0.0 {
        1.0
    } else if hi == 0.0 {
        0.0
    } else {
        hi / (lo + hi)
    }
}

/// The annular bump `φ(r) = χ(r/2) - χ(r)`.
pub fn bump_profile(r: f64) -> f64 {
    lowpass_profile(r / 2.0) - lowpass_profile(r)
}

/// Fields that dyadic multipliers act on componentwise.
pub trait Filterable: Sized {
    fn grid(&self) -> &Grid;
    fn filter_radial(&self, table: &[f64]) -> Self;
}

fn filter_scalar(f: &SpectralField, table: &[f64]) -> SpectralField {
    f.apply_radial(|k2| table[k2 as usize])
}

impl Filterable for SpectralField {
    fn grid(&self) -> &Grid {
        SpectralField::grid(self)
    }

    fn filter_radial(&self, table: &[f64]) -> Self {
        filter_scalar(self, table)
    }
}

impl Filterable for VectorField {
    fn grid(&self) -> &Grid {
        VectorField::grid(self)
    }

    fn filter_radial(&self, table: &[f64]) -> Self {
        self.map(|c| filter_scalar(c, table))
    }
}

/// Precomputed multipliers `φ(2^{-j}ξ)` for `j_min ≤ j ≤ j_max` plus the
/// low-frequency tail `χ(2^{-j_min}ξ)`.
#[derive(Clone, Debug)]
pub struct DyadicPartition {
    grid: Grid,
    j_min: i32,
    j_max: i32,
    blocks: Vec<Vec<f64>>,
    tail: Vec<f64>,
}

impl DyadicPartition {
    pub fn new(grid: &Grid, j_min: i32, j_max: i32) -> Result<Self> {
        let bad = |reason: &str| Error::InvalidPartition { j_min, j_max, reason: reason.into() };
        if j_min > 0 || j_max < 0 {
            return Err(bad("need j_min <= 0 <= j_max"));
        }
        if 8.0 / 3.0 * 2f64.powi(j_max) > grid.max_radius() {
            return Err(bad(&format!("outer annulus exceeds the largest lattice radius {:.3}", grid.max_radius())));
        }
        let max_k2 = 3 * (grid.n() / 2) * (grid.n() / 2);
        let radial = |profile: fn(f64) -> f64, j: i32| -> Vec<f64> {
            let scale = 2f64.powi(-j);
            (0..=max_k2).map(|k2| profile((k2 as f64).sqrt() * scale)).collect()
        };
        let blocks = (j_min..=j_max).map(|j| radial(bump_profile, j)).collect();
        let mut tail = radial(lowpass_profile, j_min);
        // homogeneous setting: the zero mode belongs to no block
        tail[0] = 0.0;
        Ok(Self { grid: grid.clone(), j_min, j_max, blocks, tail })
    }

    /// Partition with `j_min = -1` (the lowest block that sees `|k| = 1`)
    /// and the largest admissible `j_max`.
    pub fn for_grid(grid: &Grid) -> Self {
        let mut j_max = 0;
        while 8.0 / 3.0 * 2f64.powi(j_max + 1) <= grid.max_radius() {
            j_max += 1;
        }
        Self::new(grid, -1, j_max).expect("default range is admissible")
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn j_range(&self) -> std::ops::RangeInclusive<i32> {
        self.j_min..=self.j_max
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Radii on which `Σ_j φ(2^{-j}ξ) = 1` without the tail.
    pub fn covered_band(&self) -> (f64, f64) {
        (4.0 / 3.0 * 2f64.powi(self.j_min), 1.5 * 2f64.powi(self.j_max))
    }

    fn check_j(&self, j: i32) -> Result<usize> {
        if self.j_range().contains(&j) {
            Ok((j - self.j_min) as usize)
        } else {
            Err(Error::BlockOutOfRange { j, j_min: self.j_min, j_max: self.j_max })
        }
    }

    pub(crate) fn table(&self, j: i32) -> Result<&[f64]> {
        Ok(&self.blocks[self.check_j(j)?])
    }

    pub fn multiplier(&self, j: i32, k: [i64; 3]) -> Result<f64> {
        let table = self.table(j)?;
        Ok(table.get(norm2(k) as usize).copied().unwrap_or(0.0))
    }

    /// `Σ_j φ(2^{-j}ξ)` over the partition's blocks at lattice radius² `k2`.
    pub fn partition_sum(&self, k2: i64) -> f64 {
        self.blocks.iter().map(|b| b[k2 as usize]).sum()
    }

    /// Tail plus all blocks; equals 1 wherever the partition resolves `f`.
    pub fn total_multiplier(&self, k2: i64) -> f64 {
        self.tail[k2 as usize] + self.partition_sum(k2)
    }

    /// `Δ_j f`.
    pub fn block<F: Filterable>(&self, f: &F, j: i32) -> Result<F> {
        self.grid.check_same(f.grid())?;
        Ok(f.filter_radial(self.table(j)?))
    }

    /// `S_j f = (tail) + Σ_{j_min ≤ k ≤ j-1} Δ_k f`, defined for
    /// `j_min ≤ j ≤ j_max + 1`.
    pub fn lowpass<F: Filterable>(&self, f: &F, j: i32) -> Result<F> {
        self.grid.check_same(f.grid())?;
        if j < self.j_min || j > self.j_max + 1 {
            return Err(Error::BlockOutOfRange { j, j_min: self.j_min, j_max: self.j_max + 1 });
        }
        let mut table = self.tail.clone();
        for k in self.j_min..j {
            for (t, b) in table.iter_mut().zip(self.table(k)?) {
                *t += b;
            }
        }
        Ok(f.filter_radial(&table))
    }

    /// Largest `|1 - (tail + Σφ)|` over the modes where `f` has energy.
    /// Zero means every block-based norm of `f` sees all of `f`.
    pub fn coverage_defect(&self, f: &SpectralField) -> f64 {
        let g = f.grid();
        f.coefficients()
            .iter()
            .enumerate()
            .filter(|(i, c)| *i != 0 && c.norm() > 0.0)
            .map(|(i, _)| (1.0 - self.total_multiplier(norm2(g.wavevector(i)))).abs())
            .fold(0.0, f64::max)
    }

    pub fn covers<C: crate::field::Components>(&self, f: &C) -> bool {
        f.components().iter().all(|c| self.coverage_defect(c) < 1e-12)
    }

    /// Physical samples of the tail followed by each block, in increasing
    /// frequency order. The tail plays the role of block `j_min - 1`.
    fn physical_pieces(&self, f: &SpectralField) -> Vec<Vec<f64>> {
        std::iter::once(&self.tail)
            .chain(self.blocks.iter())
            .map(|t| filter_scalar(f, t).to_physical())
            .collect()
    }

    /// The Bony split of the grid product `uv`.
    pub fn bony(&self, u: &SpectralField, v: &SpectralField) -> Result<BonySplit> {
        self.grid.check_same(u.grid())?;
        self.grid.check_same(v.grid())?;
        let pu = self.physical_pieces(u);
        let pv = self.physical_pieces(v);
        let len = self.grid.len();
        let pieces = pu.len();

        // running low-pass sums S_{j-1} = Σ_{i ≤ j-2} pieces[i]
        let mut t_uv = vec![0.0; len];
        let mut t_vu = vec![0.0; len];
        let mut rem = vec![0.0; len];
        let mut low_u = vec![0.0; len];
        let mut low_v = vec![0.0; len];
        for j in 0..pieces {
            if j >= 2 {
                for x in 0..len {
                    low_u[x] += pu[j - 2][x];
                    low_v[x] += pv[j - 2][x];
                }
            }
            for x in 0..len {
                t_uv[x] += low_u[x] * pv[j][x];
                t_vu[x] += low_v[x] * pu[j][x];
                let mut near = pv[j][x];
                if j > 0 {
                    near += pv[j - 1][x];
                }
                if j + 1 < pieces {
                    near += pv[j + 1][x];
                }
                rem[x] += pu[j][x] * near;
            }
        }
        let tf = |s: Vec<f64>| SpectralField::from_physical(&self.grid, &s).map(|f| f.dealias());
        Ok(BonySplit { t_uv: tf(t_uv)?, t_vu: tf(t_vu)?, remainder: tf(rem)? })
    }

    /// `T_u v = Σ_j S_{j-1}u Δ_j v`.
    pub fn paraproduct(&self, u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
        Ok(self.bony(u, v)?.t_uv)
    }

    /// `R(u, v) = Σ_j Δ_j u (Δ_{j-1} + Δ_j + Δ_{j+1}) v`.
    pub fn remainder(&self, u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
        Ok(self.bony(u, v)?.remainder)
    }
}

/// `uv = T_u v + T_v u + R(u, v)`, every piece dealiased.
#[derive(Clone, Debug)]
pub struct BonySplit {
    pub t_uv: SpectralField,
    pub t_vu: SpectralField,
    pub remainder: SpectralField,
}

impl BonySplit {
    pub fn sum(&self) -> SpectralField {
        &(&self.t_uv + &self.t_vu) + &self.remainder
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(n: usize, j_min: i32, j_max: i32) -> (Grid, DyadicPartition) {
        let g = Grid::new(n).unwrap();
        let p = DyadicPartition::new(&g, j_min, j_max).unwrap();
        (g, p)
    }

    #[test]
    fn profile_supports() {
        assert_eq!(lowpass_profile(0.5), 1.0);
        assert_eq!(lowpass_profile(0.75), 1.0);
        assert_eq!(lowpass_profile(4.0 / 3.0), 0.0);
        assert_eq!(bump_profile(0.75), 0.0);
        assert_eq!(bump_profile(8.0 / 3.0), 0.0);
        assert_eq!(bump_profile(3.0), 0.0);
        for i in 0..=400 {
            let r = i as f64 * 0.01;
            assert!(bump_profile(r) >= 0.0);
        }
    }

    #[test]
    fn six_blocks_and_unity_on_band() {
        let (_, p) = setup(32, -2, 3);
        assert_eq!(p.len(), 6);
        // every lattice radius in [1, 10]
        for k2 in 1..=100 {
            assert!((p.partition_sum(k2) - 1.0).abs() < 1e-12, "k2={k2}");
        }
    }

    #[test]
    fn unit_radius_sees_two_blocks() {
        let (_, p) = setup(32, -2, 3);
        let k = [1, 0, 0];
        let active: Vec<i32> = p.j_range().filter(|&j| p.multiplier(j, k).unwrap() > 0.0).collect();
        assert_eq!(active, vec![-1, 0]);
        let s: f64 = active.iter().map(|&j| p.multiplier(j, k).unwrap()).sum();
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn block_vanishes_outside_annulus() {
        let (g, p) = setup(32, -2, 3);
        for j in p.j_range() {
            for i in 0..g.len() {
                let k = g.wavevector(i);
                let r = (norm2(k) as f64).sqrt();
                if r > 8.0 / 3.0 * 2f64.powi(j) || r < 0.75 * 2f64.powi(j) {
                    assert_eq!(p.multiplier(j, k).unwrap(), 0.0);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_ranges() {
        let g = Grid::new(32).unwrap();
        assert!(DyadicPartition::new(&g, 1, 3).is_err());
        assert!(DyadicPartition::new(&g, -1, 4).is_err());
        let p = DyadicPartition::for_grid(&g);
        assert_eq!((p.j_min(), p.j_max()), (-1, 3));
        let f = SpectralField::zeros(&g);
        assert!(matches!(p.block(&f, 7), Err(Error::BlockOutOfRange { .. })));
        assert!(p.lowpass(&f, 5).is_err());
    }

    #[test]
    fn blocks_of_cosine() {
        let (g, p) = setup(32, -2, 3);
        let f = SpectralField::from_fn(&g, |x| x[0].cos());
        let sum = &p.block(&f, 0).unwrap() + &p.block(&f, -1).unwrap();
        assert!((&sum - &f).max_abs_coefficient() < 1e-15);
        for j in [-2, 1, 2, 3] {
            assert!(p.block(&f, j).unwrap().max_abs_coefficient() < 1e-15);
        }
        let z = SpectralField::zeros(&g);
        assert_eq!(p.block(&z, 0).unwrap().max_abs_coefficient(), 0.0);
    }

    #[test]
    fn almost_orthogonality_is_exact() {
        let (g, p) = setup(32, -2, 3);
        let f = SpectralField::from_fn(&g, |x| {
            (x[0] + 2.0 * x[1]).sin() + (5.0 * x[2]).cos() + (3.0 * x[0] - 7.0 * x[1]).cos()
        });
        for j in p.j_range() {
            for k in p.j_range() {
                if (j - k).abs() >= 2 {
                    let jk = p.block(&p.block(&f, k).unwrap(), j).unwrap();
                    assert_eq!(jk.max_abs_coefficient(), 0.0);
                }
            }
        }
    }

    #[test]
    fn lowpass_examples() {
        let (g, p) = setup(32, -2, 3);
        let low = SpectralField::from_fn(&g, |x| x[0].cos());
        let f = &low + &SpectralField::from_fn(&g, |x| (8.0 * x[0]).cos());
        let s2 = p.lowpass(&f, 2).unwrap();
        assert!((&s2 - &low).max_abs_coefficient() < 1e-10);
        let all = p.lowpass(&f, 4).unwrap();
        assert!((&all - &f).max_abs_coefficient() < 1e-15);
        // S_j f + Σ_{k ≥ j} Δ_k f = f
        for j in p.j_min()..=p.j_max() {
            let mut acc = p.lowpass(&f, j).unwrap();
            for k in j..=p.j_max() {
                acc = &acc + &p.block(&f, k).unwrap();
            }
            assert!((&acc - &f).max_abs_coefficient() < 1e-15);
        }
    }

    #[test]
    fn paraproduct_localization() {
        let (g, p) = setup(32, -2, 3);
        let f = SpectralField::from_fn(&g, |x| (x[0] + x[1]).cos() + x[2].sin());
        let h = SpectralField::from_fn(&g, |x| (3.0 * x[0]).cos() * (2.0 * x[1]).sin() + (5.0 * x[2]).sin());
        for k in p.j_min() + 1..=p.j_max() {
            let prod = p.lowpass(&f, k - 1).unwrap().product(&p.block(&h, k).unwrap()).unwrap();
            for j in p.j_range() {
                if (j - k).abs() >= 5 {
                    assert!(p.block(&prod, j).unwrap().max_abs_coefficient() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn separated_modes_split_cleanly() {
        let (g, p) = setup(32, -2, 3);
        let u = SpectralField::mode(&g, [1, 0, 0], 1.0, 0.2).unwrap();
        let v = SpectralField::mode(&g, [0, 9, 0], 1.0, -0.7).unwrap();
        let split = p.bony(&u, &v).unwrap();
        let uv = u.product(&v).unwrap();
        assert!((&split.t_uv - &uv).max_abs_coefficient() < 1e-15);
        assert!(split.t_vu.max_abs_coefficient() < 1e-15);
        assert!(split.remainder.max_abs_coefficient() < 1e-15);

        let z = SpectralField::zeros(&g);
        assert_eq!(p.paraproduct(&u, &z).unwrap().max_abs_coefficient(), 0.0);
        assert_eq!(p.remainder(&z, &z).unwrap().max_abs_coefficient(), 0.0);
    }

    #[test]
    fn self_product_split() {
        let (g, p) = setup(32, -2, 3);
        let u = SpectralField::mode(&g, [2, 1, 0], 1.0, 0.4).unwrap();
        let split = p.bony(&u, &u).unwrap();
        let uu = u.product(&u).unwrap();
        // |k| = √5 lives in blocks 0 and 1, so the square is all remainder
        assert!(split.remainder.max_abs_coefficient() > 0.1);
        assert!((&split.sum() - &uu).max_abs_coefficient() < 1e-15);
    }
}
