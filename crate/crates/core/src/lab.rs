//! Numerical checks of the harmonic-analysis inequalities behind the
//! existence theory: Bernstein, the dissipation lower bound, product laws in
//! Besov and Lei-Lin spaces, and the `χ^{-1}` equivalence chain.
//!
//! Each check evaluates `LHS / RHS` (with the unknown constant set to one)
//! over seeded random samples and reports min, median and max. Constants are
//! reported rather than asserted, except where a sharp value is known.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{advect, to_physical_many, Axis, Components, SpectralField, VectorField};
use crate::grid::Grid;
use crate::littlewood_paley::DyadicPartition;
use crate::random::{random_scalar, random_vector, sample_rng, Band};
use crate::spaces::{
    b111_norm, besov_from_blocks, besov_norm, block_lp_norms_multi, chemin_lerner, chemin_lerner_weighted, chi_norm,
    lp_norm, BesovParams, BlockNormHistory, Exponent,
};

/// Relative slack for inequalities that hold exactly in exact arithmetic.
pub const ROUNDING_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioStats {
    pub id: String,
    pub n: usize,
    pub samples: usize,
    pub min: f64,
    pub median: f64,
    pub max: f64,
    /// Declared upper bound on every ratio, if any.
    pub bound: Option<f64>,
    /// Declared lower bound on every ratio, if any.
    pub lower: Option<f64>,
    /// Count of failed side conditions (e.g. ordering checks).
    pub violations: usize,
    pub verdict: bool,
    #[serde(skip)]
    pub ratios: Vec<f64>,
}

impl RatioStats {
    pub fn new(id: impl Into<String>, n: usize, ratios: Vec<f64>, lower: Option<f64>, bound: Option<f64>) -> Self {
        let mut sorted = ratios.clone();
        sorted.sort_by(f64::total_cmp);
        let (min, max, median) = match sorted.len() {
            0 => (f64::NAN, f64::NAN, f64::NAN),
            len => {
                let median =
                    if len % 2 == 1 { sorted[len / 2] } else { 0.5 * (sorted[len / 2 - 1] + sorted[len / 2]) };
                (sorted[0], sorted[len - 1], median)
            }
        };
        let verdict = !sorted.is_empty()
            && sorted.iter().all(|r| r.is_finite())
            && bound.is_none_or(|b| max <= b)
            && lower.is_none_or(|l| min >= l);
        Self { id: id.into(), n, samples: ratios.len(), min, median, max, bound, lower, violations: 0, verdict, ratios }
    }

    fn with_violations(mut self, violations: usize) -> Self {
        self.violations = violations;
        self.verdict &= violations == 0;
        self
    }
}

/// Raw ratios as CSV `id,n,index,ratio`.
pub fn write_ratios_csv<W: Write>(mut w: W, stats: &[RatioStats]) -> Result<()> {
    writeln!(w, "id,n,index,ratio")?;
    for s in stats {
        for (i, r) in s.ratios.iter().enumerate() {
            writeln!(w, "{},{},{i},{r}", s.id, s.n)?;
        }
    }
    Ok(())
}

/// `0/0` is skipped; anything else is a ratio.
fn ratio(lhs: f64, rhs: f64) -> Option<f64> {
    if lhs == 0.0 && rhs == 0.0 {
        None
    } else {
        Some(lhs / rhs)
    }
}

fn check_samples(samples: usize) -> Result<()> {
    if samples == 0 {
        Err(Error::invalid("at least one sample is required"))
    } else {
        Ok(())
    }
}

/// Multi-indices of orders 1 and 2.
pub fn multi_indices(order: usize) -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    for a in 0..=order as u32 {
        for b in 0..=(order as u32 - a) {
            out.push([a, b, order as u32 - a - b]);
        }
    }
    out
}

/// `∂^γ f`.
pub fn partial(f: &SpectralField, gamma: [u32; 3]) -> SpectralField {
    let mut g = f.clone();
    for (axis, &count) in Axis::ALL.iter().zip(&gamma) {
        for _ in 0..count {
            g = g.derivative(*axis);
        }
    }
    g
}

/// Ball form: `‖∂^γ f‖_{L^q} / (2^{j|γ| + 3j(1/p - 1/q)} ‖f‖_{L^p})`.
pub fn bernstein_ball_ratio(f: &SpectralField, gamma: [u32; 3], j: i32, p: Exponent, q: Exponent) -> Option<f64> {
    let order = gamma.iter().sum::<u32>() as f64;
    let lhs = lp_norm(&partial(f, gamma), q.value()).ok()?;
    let scale = 2f64.powf(j as f64 * (order + 3.0 * (p.reciprocal() - q.reciprocal())));
    ratio(lhs, scale * lp_norm(f, p.value()).ok()?)
}

/// Annulus form: `‖f‖_{L^p} / (2^{-j|γ|} sup_{|β|=|γ|} ‖∂^β f‖_{L^p})`.
pub fn bernstein_annulus_ratio(f: &SpectralField, order: usize, j: i32, p: Exponent) -> Option<f64> {
    let sup = multi_indices(order)
        .into_iter()
        .map(|b| lp_norm(&partial(f, b), p.value()).unwrap_or(f64::NAN))
        .fold(0.0, f64::max);
    ratio(lp_norm(f, p.value()).ok()?, 2f64.powi(-j * order as i32) * sup)
}

const NORM_EXPONENTS: [f64; 3] = [2.0, 4.0, f64::INFINITY];

fn norm_slot(p: f64) -> usize {
    NORM_EXPONENTS.iter().position(|&e| e == p).expect("exponent in NORM_EXPONENTS")
}

/// `L^p` norms of `f` and of all its derivatives of orders 1 and 2, for
/// each exponent of [`NORM_EXPONENTS`], with one transform per field.
type PartialNorms = Vec<([u32; 3], [f64; 3])>;

fn partial_norms(f: &SpectralField) -> ([f64; 3], PartialNorms) {
    let gammas: Vec<[u32; 3]> = [1, 2].into_iter().flat_map(multi_indices).collect();
    let parts: Vec<SpectralField> = std::iter::once(f.clone()).chain(gammas.iter().map(|&g| partial(f, g))).collect();
    let phys = to_physical_many(&parts.iter().collect::<Vec<_>>());
    let norms: Vec<[f64; 3]> = phys
        .iter()
        .map(|v| {
            let abs: Vec<f64> = v.iter().map(|x| x.abs()).collect();
            NORM_EXPONENTS.map(|p| Exponent::new(p).expect("valid exponent").mean_norm(&abs))
        })
        .collect();
    (norms[0], gammas.into_iter().zip(norms[1..].iter().copied()).collect())
}

const BERNSTEIN_PAIRS: [(f64, f64); 4] = [(2.0, 2.0), (2.0, 4.0), (2.0, f64::INFINITY), (4.0, f64::INFINITY)];

/// Both Bernstein inequalities over random real fields for `j ∈ {1, 2}`,
/// `|γ| ∈ {1, 2}`. Ball fields have support `|k| ≤ 2^j`; annulus fields
/// `3/4 · 2^j ≤ |k| ≤ 2 · 2^j`.
pub fn verify_bernstein(grid: &Grid, samples: usize, seed: u64) -> Result<(RatioStats, RatioStats)> {
    check_samples(samples)?;
    let per_sample: Vec<(Vec<f64>, Vec<f64>)> = (0..samples as u64)
        .into_par_iter()
        .map(|i| -> Result<(Vec<f64>, Vec<f64>)> {
            let mut rng = sample_rng(seed, i);
            let (mut ball, mut ann) = (Vec::new(), Vec::new());
            for j in [1, 2] {
                let lam = 2f64.powi(j);
                let f = random_scalar(grid, Band::new(1.0, lam), &mut rng)?;
                let (fp, dp) = partial_norms(&f);
                for (gamma, dq) in &dp {
                    let order = gamma.iter().sum::<u32>() as f64;
                    for (p, q) in BERNSTEIN_PAIRS {
                        let (pe, qe) = (Exponent::new(p)?, Exponent::new(q)?);
                        let scale = 2f64.powf(j as f64 * (order + 3.0 * (pe.reciprocal() - qe.reciprocal())));
                        ball.extend(ratio(dq[norm_slot(q)], scale * fp[norm_slot(p)]));
                    }
                }
                let g = random_scalar(grid, Band::new(0.75 * lam, 2.0 * lam), &mut rng)?;
                let (gp, dp) = partial_norms(&g);
                for order in [1u32, 2] {
                    for (slot, _) in NORM_EXPONENTS.iter().enumerate() {
                        let sup = dp
                            .iter()
                            .filter(|(b, _)| b.iter().sum::<u32>() == order)
                            .map(|(_, d)| d[slot])
                            .fold(0.0, f64::max);
                        ann.extend(ratio(gp[slot], 2f64.powi(-j * order as i32) * sup));
                    }
                }
            }
            Ok((ball, ann))
        })
        .collect::<Result<_>>()?;
    let (ball, ann): (Vec<Vec<f64>>, Vec<Vec<f64>>) = per_sample.into_iter().unzip();
    Ok((
        RatioStats::new("bernstein-ball", grid.n(), ball.concat(), None, None),
        RatioStats::new("bernstein-annulus", grid.n(), ann.concat(), None, None),
    ))
}

/// `RHS / ((R1²/p²) ∫|u|^p)` with `RHS = -(1/(p-1)) ∫ Δu |u|^{p-2} u`,
/// normalized measure.
pub fn dissipation_ratio(u: &SpectralField, p: u32, r1: f64) -> Option<f64> {
    let pf = p as f64;
    let vals = u.to_physical();
    let lap = u.laplacian().to_physical();
    let len = vals.len() as f64;
    let rhs: f64 = -vals.iter().zip(&lap).map(|(v, l)| l * v.abs().powi(p as i32 - 2) * v).sum::<f64>() / (pf - 1.0) / len;
    let mass: f64 = vals.iter().map(|v| v.abs().powi(p as i32)).sum::<f64>() / len;
    ratio(rhs, r1 * r1 / (pf * pf) * mass)
}

/// Empirical constant of the dissipation lower bound for real fields with
/// spectral support in the annulus `R1 ≤ |k| ≤ R2`.
pub fn verify_dissipation_bound(grid: &Grid, p: u32, r1: f64, r2: f64, samples: usize, seed: u64) -> Result<RatioStats> {
    check_samples(samples)?;
    if p < 2 || p % 2 == 1 {
        return Err(Error::invalid(format!("dissipation bound is checked for even p >= 2, got {p}")));
    }
    let ratios: Vec<Option<f64>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let u = random_scalar(grid, Band::new(r1, r2), &mut sample_rng(seed, i))?;
            Ok(dissipation_ratio(&u, p, r1))
        })
        .collect::<Result<_>>()?;
    let lower = if p == 2 { Some(4.0 * (1.0 - 1e-10)) } else { Some(f64::MIN_POSITIVE) };
    Ok(RatioStats::new(format!("dissipation-p{p}"), grid.n(), ratios.into_iter().flatten().collect(), lower, None))
}

/// `‖u·∇v‖_{s} / (‖u‖_{s} ‖v‖_{s+2} + ‖v‖_{s} ‖u‖_{s+2})` in `Ḃ^{·}_{p,r}`,
/// `s = 3/p - 1`.
pub fn skp1_ratio(u: &VectorField, v: &VectorField, p: f64, r: f64, part: &DyadicPartition) -> Result<Option<f64>> {
    let lo = BesovParams::critical(p, r)?;
    let hi = lo.with_s(lo.s + 2.0);
    let lhs = besov_norm(&advect(u, v)?, lo, part)?;
    let b = |f: &VectorField, q: BesovParams| besov_norm(f, q, part);
    let rhs = b(u, lo)? * b(v, hi)? + b(v, lo)? * b(u, hi)?;
    Ok(ratio(lhs, rhs))
}

/// Instantaneous product law over random solenoidal fields with
/// `1 ≤ |k| ≤ 5`.
pub fn verify_skp1(part: &DyadicPartition, p: f64, r: f64, samples: usize, seed: u64) -> Result<RatioStats> {
    check_samples(samples)?;
    let grid = part.grid();
    let band = Band::new(1.0, 5.0);
    let ratios: Vec<Option<f64>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i);
            let u = random_vector(grid, band, true, &mut rng)?;
            let v = random_vector(grid, band, true, &mut rng)?;
            skp1_ratio(&u, &v, p, r, part)
        })
        .collect::<Result<_>>()?;
    Ok(RatioStats::new(format!("skp1-p{p}-r{r}"), grid.n(), ratios.into_iter().flatten().collect(), None, None))
}

/// Space-time product law with a time weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Skp2Params {
    pub p: f64,
    pub r: f64,
    pub epsilon: f64,
    /// Regularity index of the weight norm `‖u‖_{Ḃ^σ_{p,w}}`.
    pub weight_s: f64,
    /// Summability index of the weight norm.
    pub weight_r: f64,
    /// Power of the weight norm.
    pub weight_power: f64,
}

impl Skp2Params {
    /// Weight `‖u‖^{2/(1-ε)}_{Ḃ^{3/p-ε}_{p,∞}}`.
    pub fn new(p: f64, r: f64, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        Ok(Self { p, r, epsilon, weight_s: 3.0 / p - epsilon, weight_r: f64::INFINITY, weight_power: 2.0 / (1.0 - epsilon) })
    }

    /// The endpoint `(ε, r) = (0, 1)` with weight `‖u‖²_{Ḃ^{3/p}_{p,1}}`.
    pub fn endpoint(p: f64) -> Self {
        Self { p, r: 1.0, epsilon: 0.0, weight_s: 3.0 / p, weight_r: 1.0, weight_power: 2.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Skp2Result {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: Option<f64>,
}

/// `‖u·∇v‖_{L̃^1_t(Ḃ^{3/p-1})} / (‖v‖^{(1+ε)/2}_{L̃^1_t(Ḃ^{3/p+1})}
/// ‖v‖^{(1-ε)/2}_{L̃^1_{t,f}(Ḃ^{3/p-1})})` along sampled trajectories.
pub fn verify_skp2(
    times: &[f64],
    u: &[VectorField],
    v: &[VectorField],
    part: &DyadicPartition,
    params: &Skp2Params,
) -> Result<Skp2Result> {
    if times.len() < 5 {
        return Err(Error::invalid(format!("need at least 5 snapshots, got {}", times.len())));
    }
    if u.len() != times.len() || v.len() != times.len() {
        return Err(Error::SizeMismatch { expected: times.len(), got: u.len().min(v.len()) });
    }
    let pe = Exponent::new(params.p)?;
    let s = 3.0 * pe.reciprocal() - 1.0;
    let mut prod = BlockNormHistory::for_partition(part, pe);
    let mut vh = BlockNormHistory::for_partition(part, pe);
    let mut weight = Vec::with_capacity(times.len());
    let wr = Exponent::new(params.weight_r)?;
    for i in 0..times.len() {
        prod.record(times[i], &advect(&u[i], &v[i])?, part)?;
        vh.record(times[i], &v[i], part)?;
        let ub = block_lp_norms_multi(&u[i], part, &[pe])?.remove(0);
        weight.push(besov_from_blocks(&ub, part.j_min(), params.weight_s, wr).powf(params.weight_power));
    }
    let lhs = chemin_lerner(&prod, 1.0, s, params.r)?;
    let a = chemin_lerner(&vh, 1.0, s + 2.0, params.r)?;
    let b = chemin_lerner_weighted(&vh, &weight, 1.0, s, params.r)?;
    let rhs = a.powf(0.5 * (1.0 + params.epsilon)) * b.powf(0.5 * (1.0 - params.epsilon));
    Ok(Skp2Result { lhs, rhs, ratio: ratio(lhs, rhs) })
}

/// Time-dependent product law on synthetic trajectories
/// `u(t) = cos(t) a + sin(t) b`, `v(t) = e^{-t} c + t d` over `[0, 1]`
/// (nine snapshots), with `a, b, c, d` random solenoidal in `1 ≤ |k| ≤ 5`.
pub fn verify_skp2_random(part: &DyadicPartition, params: &Skp2Params, samples: usize, seed: u64) -> Result<RatioStats> {
    check_samples(samples)?;
    let grid = part.grid();
    let band = Band::new(1.0, 5.0);
    let times: Vec<f64> = (0..9).map(|i| i as f64 / 8.0).collect();
    let ratios: Vec<Option<f64>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i);
            let mut draw = || random_vector(grid, band, true, &mut rng);
            let (a, b, c, d) = (draw()?, draw()?, draw()?, draw()?);
            let lin = |x: &VectorField, y: &VectorField, s: f64, t: f64| &x.scale(s) + &y.scale(t);
            let us: Vec<VectorField> = times.iter().map(|&t| lin(&a, &b, t.cos(), t.sin())).collect();
            let vs: Vec<VectorField> = times.iter().map(|&t| lin(&c, &d, (-t).exp(), t)).collect();
            Ok(verify_skp2(&times, &us, &vs, part, params)?.ratio)
        })
        .collect::<Result<_>>()?;
    let id = format!("skp2-p{}-r{}-eps{}", params.p, params.r, params.epsilon);
    Ok(RatioStats::new(id, grid.n(), ratios.into_iter().flatten().collect(), None, None))
}

/// `‖u·∇v‖_{χ^{-1}} / (‖u‖_{χ^0} ‖v‖_{χ^0})`.
pub fn chi_product_ratio(u: &VectorField, v: &VectorField) -> Result<Option<f64>> {
    Ok(ratio(chi_norm(&advect(u, v)?, -1.0), chi_norm(u, 0.0) * chi_norm(v, 0.0)))
}

/// Lei-Lin product estimate over random solenoidal pairs; the sharp
/// constant is one.
pub fn verify_chi_product(grid: &Grid, band: Band, samples: usize, seed: u64) -> Result<RatioStats> {
    check_samples(samples)?;
    let ratios: Vec<Option<f64>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i);
            let u = random_vector(grid, band, true, &mut rng)?;
            let v = random_vector(grid, band, true, &mut rng)?;
            chi_product_ratio(&u, &v)
        })
        .collect::<Result<_>>()?;
    Ok(RatioStats::new("chi-product", grid.n(), ratios.into_iter().flatten().collect(), None, Some(1.0 + 1e-10)))
}

/// Norms along the `χ^{-1}` equivalence chain for one field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiChain {
    /// `‖f‖_{Ḃ^{-1}_{∞,r}}` for `r = 2` and `r = ∞`.
    pub besov_inf_2: f64,
    pub besov_inf_inf: f64,
    pub besov_inf_1: f64,
    pub b111: f64,
    pub chi_minus_one: f64,
    pub chi_zero: f64,
    pub chi_one: f64,
}

impl ChiChain {
    pub fn compute<C: Components>(f: &C, part: &DyadicPartition) -> Result<Self> {
        let blocks = block_lp_norms_multi(f, part, &[Exponent::Infinity])?.remove(0);
        let b = |r: Exponent| besov_from_blocks(&blocks, part.j_min(), -1.0, r);
        Ok(Self {
            besov_inf_2: b(Exponent::Finite(2.0)),
            besov_inf_inf: b(Exponent::Infinity),
            besov_inf_1: b(Exponent::Finite(1.0)),
            b111: b111_norm(f, part)?,
            chi_minus_one: chi_norm(f, -1.0),
            chi_zero: chi_norm(f, 0.0),
            chi_one: chi_norm(f, 1.0),
        })
    }

    /// Number of broken links in
    /// `Ḃ^{-1}_{∞,r} ≤ Ḃ^{-1}_{∞,1} ≤ 𝔹^{-1}_{1,1}` (`r ∈ {2, ∞}`).
    pub fn ordering_violations(&self) -> usize {
        let le = |a: f64, b: f64| a <= b * (1.0 + ROUNDING_SLACK);
        [
            le(self.besov_inf_inf, self.besov_inf_1),
            le(self.besov_inf_2, self.besov_inf_1),
            le(self.besov_inf_1, self.b111),
        ]
        .iter()
        .filter(|ok| !**ok)
        .count()
    }

    pub fn equivalence_ratio(&self) -> Option<f64> {
        ratio(self.b111, self.chi_minus_one)
    }

    /// `‖f‖_{χ^0} / (‖f‖_{χ^{-1}} ‖f‖_{χ^1})^{1/2}`.
    pub fn interpolation_ratio(&self) -> Option<f64> {
        ratio(self.chi_zero, (self.chi_minus_one * self.chi_one).sqrt())
    }
}

/// Equivalence chain and interpolation over random mean-free real fields
/// inside the partition's covered band.
pub fn verify_chi_chain_and_interp(part: &DyadicPartition, samples: usize, seed: u64) -> Result<(RatioStats, RatioStats)> {
    check_samples(samples)?;
    let grid = part.grid();
    let top = grid.dealias_cutoff().floor().min(part.covered_band().1.floor());
    let band = Band::new(1.0, top);
    let chains: Vec<ChiChain> = (0..samples as u64)
        .into_par_iter()
        .map(|i| ChiChain::compute(&random_scalar(grid, band, &mut sample_rng(seed, i))?, part))
        .collect::<Result<_>>()?;
    let violations = chains.iter().map(ChiChain::ordering_violations).sum();
    let eq: Vec<f64> = chains.iter().filter_map(ChiChain::equivalence_ratio).collect();
    let interp: Vec<f64> = chains.iter().filter_map(ChiChain::interpolation_ratio).collect();
    Ok((
        RatioStats::new("chi-equivalence", grid.n(), eq, Some(0.75), Some(8.0 / 3.0)).with_violations(violations),
        RatioStats::new("chi-interpolation", grid.n(), interp, None, Some(1.0 + ROUNDING_SLACK)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn shear(g: &Grid, axis: usize, along: Axis) -> VectorField {
        let mut v = VectorField::zeros(g);
        v.0[axis] = SpectralField::from_fn(g, move |x| x[along.index()].sin());
        v
    }

    #[test]
    fn multi_index_counts() {
        assert_eq!(multi_indices(1).len(), 3);
        assert_eq!(multi_indices(2).len(), 6);
    }

    #[test]
    fn bernstein_sharp_cases() {
        let g = Grid::new(16).unwrap();
        let f = SpectralField::from_fn(&g, |x| (2.0 * x[0]).cos());
        let two = Exponent::Finite(2.0);
        assert_abs_diff_eq!(bernstein_ball_ratio(&f, [1, 0, 0], 1, two, two).unwrap(), 1.0, epsilon = 1e-13);
        for order in [1, 2] {
            for p in [2.0, 4.0, f64::INFINITY] {
                let r = bernstein_annulus_ratio(&f, order, 1, Exponent::new(p).unwrap()).unwrap();
                assert_abs_diff_eq!(r, 1.0, epsilon = 1e-12);
            }
        }
        assert!(bernstein_ball_ratio(&SpectralField::zeros(&g), [1, 0, 0], 1, two, two).is_none());
    }

    #[test]
    fn dissipation_sharp_case() {
        let g = Grid::new(16).unwrap();
        let u = SpectralField::from_fn(&g, |x| (2.0 * x[0]).cos());
        assert_abs_diff_eq!(dissipation_ratio(&u, 2, 2.0).unwrap(), 4.0, epsilon = 1e-12);
        assert!(dissipation_ratio(&SpectralField::zeros(&g), 4, 2.0).is_none());
        assert!(verify_dissipation_bound(&g, 3, 2.0, 4.0, 2, 0).is_err());
    }

    #[test]
    fn chi_product_example() {
        let g = Grid::new(16).unwrap();
        let u = shear(&g, 0, Axis::X2);
        let v = shear(&g, 0, Axis::X1);
        assert_abs_diff_eq!(chi_product_ratio(&u, &v).unwrap().unwrap(), 0.5f64.sqrt(), epsilon = 1e-13);
        assert!(chi_product_ratio(&u, &VectorField::zeros(&g)).unwrap().is_none());
    }

    #[test]
    fn chi_chain_single_and_double_shell() {
        let g = Grid::new(32).unwrap();
        let part = DyadicPartition::for_grid(&g);
        let f = SpectralField::from_fn(&g, |x| (2.0 * x[0]).cos());
        let c = ChiChain::compute(&f, &part).unwrap();
        assert_abs_diff_eq!(c.interpolation_ratio().unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(c.ordering_violations(), 0);
        let f2 = SpectralField::from_fn(&g, |x| (2.0 * x[0]).cos() + (5.0 * x[1]).sin());
        let c2 = ChiChain::compute(&f2, &part).unwrap();
        assert!(c2.interpolation_ratio().unwrap() < 1.0 - 1e-3);
        let z = ChiChain::compute(&SpectralField::zeros(&g), &part).unwrap();
        assert_eq!(z.ordering_violations(), 0);
        assert!(z.interpolation_ratio().is_none());
    }

    #[test]
    fn skp1_examples() {
        let g = Grid::new(32).unwrap();
        let part = DyadicPartition::for_grid(&g);
        let u = shear(&g, 0, Axis::X2);
        let v = shear(&g, 0, Axis::X1);
        let a = skp1_ratio(&u, &v, 2.0, 1.0, &part).unwrap().unwrap();
        let b = skp1_ratio(&u, &v, 2.0, 1.0, &part).unwrap().unwrap();
        assert_eq!(a, b);
        assert!(a.is_finite() && a > 0.0);
        assert!(skp1_ratio(&u, &VectorField::zeros(&g), 2.0, 1.0, &part).unwrap().is_none());
    }

    #[test]
    fn skp2_frozen_fields() {
        let g = Grid::new(32).unwrap();
        let part = DyadicPartition::for_grid(&g);
        let band = Band::new(1.0, 4.0);
        let u = random_vector(&g, band, true, &mut sample_rng(11, 0)).unwrap();
        let v = random_vector(&g, band, true, &mut sample_rng(11, 1)).unwrap();
        let times: Vec<f64> = (0..6).map(|i| i as f64 / 5.0).collect();
        let us = vec![u.clone(); 6];
        let vs = vec![v.clone(); 6];
        let params = Skp2Params::new(4.0, 2.0, 0.5).unwrap();
        let res = verify_skp2(&times, &us, &vs, &part, &params).unwrap();

        let s = 3.0 / 4.0 - 1.0;
        let bp = |f: &VectorField, s: f64, r: f64| besov_norm(f, BesovParams::new(s, 4.0, r).unwrap(), &part).unwrap();
        let lhs = bp(&advect(&u, &v).unwrap(), s, 2.0);
        let f = bp(&u, 0.75 - 0.5, f64::INFINITY).powf(4.0);
        let rhs = bp(&v, s + 2.0, 2.0).powf(0.75) * (f * bp(&v, s, 2.0)).powf(0.25);
        assert!((res.ratio.unwrap() / (lhs / rhs) - 1.0).abs() < 0.01);
        assert!(verify_skp2(&times[..4], &us[..4], &vs[..4], &part, &params).is_err());
        let zero = vec![VectorField::zeros(&g); 6];
        assert!(verify_skp2(&times, &us, &zero, &part, &params).unwrap().ratio.is_none());
    }

    #[test]
    fn stats_summary() {
        let s = RatioStats::new("x", 8, vec![3.0, 1.0, 2.0, 4.0], None, Some(4.0));
        assert_eq!((s.min, s.median, s.max, s.samples), (1.0, 2.5, 4.0, 4));
        assert!(s.verdict);
        assert!(!RatioStats::new("x", 8, vec![5.0], None, Some(4.0)).verdict);
        assert!(!RatioStats::new("x", 8, vec![], None, None).verdict);
        let mut out = Vec::new();
        write_ratios_csv(&mut out, &[s]).unwrap();
        assert!(String::from_utf8(out).unwrap().starts_with("id,n,index,ratio\nx,8,0,3\n"));
    }
}
