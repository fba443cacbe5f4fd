//! Norms: L^p, homogeneous Besov, Lei-Lin `χ^s`, the frequency-side
//! `𝔹^{-1}_{1,1}` norm, and Chemin-Lerner space-time norms.
//!
//! L^p norms use the normalized measure `(2π)^{-3} dx`, so a single Fourier
//! mode `e^{ik·x}` has unit norm for every `p`. Vector-valued fields are
//! measured through their pointwise Euclidean magnitude (and, on the
//! frequency side, the Euclidean magnitude of each coefficient vector).

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{to_physical_many, Components, SpectralField};
use crate::grid::norm2;
use crate::littlewood_paley::DyadicPartition;

/// A Lebesgue or summability exponent in `[1, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ExponentRepr", into = "ExponentRepr")]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn new(value: f64) -> Result<Self> {
        if value == f64::INFINITY {
            Ok(Exponent::Infinity)
        } else if value.is_finite() && value >= 1.0 {
            Ok(Exponent::Finite(value))
        } else {
            Err(Error::InvalidExponent(value))
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    /// `1/p`, zero at infinity.
    pub fn reciprocal(self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinity => 0.0,
        }
    }

    /// `‖x‖_{l^p}` of a non-negative sequence.
    pub fn sequence_norm(self, xs: impl IntoIterator<Item = f64>) -> f64 {
        match self {
            Exponent::Infinity => xs.into_iter().fold(0.0, f64::max),
            Exponent::Finite(1.0) => xs.into_iter().sum(),
            Exponent::Finite(p) => xs.into_iter().map(|x| x.powf(p)).sum::<f64>().powf(1.0 / p),
        }
    }

    /// Mean-value L^p norm of samples.
    pub fn mean_norm(self, xs: &[f64]) -> f64 {
        if xs.is_empty() {
            return 0.0;
        }
        match self {
            Exponent::Infinity => xs.iter().fold(0.0, |m, x| m.max(x.abs())),
            Exponent::Finite(p) => {
                let sum: f64 = if p == 2.0 {
                    blocked_sum(xs, |x| x * x)
                } else if p.fract() == 0.0 && p <= 16.0 {
                    let k = p as i32;
                    blocked_sum(xs, |x| x.abs().powi(k))
                } else {
                    blocked_sum(xs, |x| x.abs().powf(p))
                };
                (sum / xs.len() as f64).powf(1.0 / p)
            }
        }
    }
}

/// Sum in fixed-size chunks to keep round-off growth near `√N · ε`.
fn blocked_sum(xs: &[f64], g: impl Fn(f64) -> f64) -> f64 {
    xs.chunks(1024).map(|c| c.iter().map(|&x| g(x)).sum::<f64>()).sum()
}

/// Serialized as a number, or the string `"inf"` (JSON has no infinity).
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ExponentRepr {
    Number(f64),
    Text(String),
}

impl TryFrom<ExponentRepr> for Exponent {
    type Error = Error;
    fn try_from(v: ExponentRepr) -> Result<Self> {
        match v {
            ExponentRepr::Number(x) => Exponent::new(x),
            ExponentRepr::Text(t) if matches!(t.as_str(), "inf" | "infinity" | "Infinity") => Ok(Exponent::Infinity),
            ExponentRepr::Text(t) => Err(Error::invalid(format!("expected a number or \"inf\", got {t:?}"))),
        }
    }
}

impl From<Exponent> for ExponentRepr {
    fn from(e: Exponent) -> Self {
        match e {
            Exponent::Finite(p) => ExponentRepr::Number(p),
            Exponent::Infinity => ExponentRepr::Text("inf".into()),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

/// Indices of a homogeneous Besov space `Ḃ^s_{p,r}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovParams {
    pub s: f64,
    pub p: Exponent,
    pub r: Exponent,
}

impl BesovParams {
    /// `p` and `r` are given as plain numbers; `f64::INFINITY` means ∞.
    pub fn new(s: f64, p: f64, r: f64) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::invalid(format!("regularity index must be finite, got {s}")));
        }
        Ok(Self { s, p: Exponent::new(p)?, r: Exponent::new(r)? })
    }

    /// The critical index `s = 3/p - 1` for given `p`, `r`.
    pub fn critical(p: f64, r: f64) -> Result<Self> {
        let pe = Exponent::new(p)?;
        Self::new(3.0 * pe.reciprocal() - 1.0, p, r)
    }

    pub fn with_s(self, s: f64) -> Self {
        Self { s, ..self }
    }
}

/// Pointwise Euclidean magnitude of physical samples.
pub(crate) fn magnitude(components: &[Vec<f64>]) -> Vec<f64> {
    match components {
        [single] => single.clone(),
        _ => (0..components[0].len())
            .map(|x| components.iter().map(|c| c[x] * c[x]).sum::<f64>().sqrt())
            .collect(),
    }
}

fn physical_magnitude<C: Components>(f: &C) -> Vec<f64> {
    let samples: Vec<Vec<f64>> = f.components().iter().map(|c| c.to_physical()).collect();
    magnitude(&samples)
}

/// Grid quadrature of `‖f‖_{L^p}`; `p = f64::INFINITY` gives the max norm.
pub fn lp_norm<C: Components>(f: &C, p: f64) -> Result<f64> {
    let p = Exponent::new(p)?;
    Ok(p.mean_norm(&physical_magnitude(f)))
}

/// `‖Δ_j f‖_{L^p}` for every block of the partition, for several `p` at
/// once (each block is transformed only once). Result is indexed `[p][j]`.
pub fn block_lp_norms_multi<C: Components>(f: &C, part: &DyadicPartition, ps: &[Exponent]) -> Result<Vec<Vec<f64>>> {
    for c in f.components() {
        part.grid().check_same(c.grid())?;
    }
    let mut out = vec![Vec::with_capacity(part.len()); ps.len()];
    for j in part.j_range() {
        let blocks: Vec<SpectralField> = f.components().iter().map(|c| part.block(c, j)).collect::<Result<_>>()?;
        let mag = magnitude(&to_physical_many(&blocks.iter().collect::<Vec<_>>()));
        for (row, p) in out.iter_mut().zip(ps) {
            row.push(p.mean_norm(&mag));
        }
    }
    Ok(out)
}

pub fn block_lp_norms<C: Components>(f: &C, part: &DyadicPartition, p: Exponent) -> Result<Vec<f64>> {
    Ok(block_lp_norms_multi(f, part, &[p])?.remove(0))
}

/// `‖(2^{js} a_j)_j‖_{l^r}` for block norms `a_j`, `j = j_min, j_min+1, …`.
pub fn besov_from_blocks(blocks: &[f64], j_min: i32, s: f64, r: Exponent) -> f64 {
    r.sequence_norm(blocks.iter().enumerate().map(|(i, a)| 2f64.powf(s * (j_min + i as i32) as f64) * a))
}

/// `‖f‖_{Ḃ^s_{p,r}}` over the partition's finite dyadic range.
///
/// Callers that need the whole field measured should check
/// [`DyadicPartition::covers`]; modes outside the covered band are only
/// partially counted.
pub fn besov_norm<C: Components>(f: &C, params: BesovParams, part: &DyadicPartition) -> Result<f64> {
    if part.is_empty() {
        return Err(Error::invalid("empty partition"));
    }
    let blocks = block_lp_norms(f, part, params.p)?;
    Ok(besov_from_blocks(&blocks, part.j_min(), params.s, params.r))
}

fn coefficient_magnitudes<C: Components>(f: &C) -> Vec<f64> {
    let comps = f.components();
    (0..comps[0].grid().len())
        .map(|i| comps.iter().map(|c| c.coefficients()[i].norm_sqr()).sum::<f64>().sqrt())
        .collect()
}

/// `‖f‖_{χ^s} = Σ_{k≠0} |k|^s |f̂_k|`.
pub fn chi_norm<C: Components>(f: &C, s: f64) -> f64 {
    let g = f.grid().clone();
    coefficient_magnitudes(f)
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, m)| **m > 0.0)
        .map(|(i, m)| (norm2(g.wavevector(i)) as f64).powf(0.5 * s) * m)
        .sum()
}

/// `‖f‖_{𝔹^{-1}_{1,1}} = Σ_j 2^{-j} Σ_k φ(2^{-j}k) |f̂_k|`.
pub fn b111_norm<C: Components>(f: &C, part: &DyadicPartition) -> Result<f64> {
    part.grid().check_same(f.grid())?;
    let g = f.grid().clone();
    let mags = coefficient_magnitudes(f);
    let mut total = 0.0;
    for j in part.j_range() {
        let table = part.table(j)?;
        let block: f64 = mags
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, m)| **m > 0.0)
            .map(|(i, m)| table[norm2(g.wavevector(i)) as usize] * m)
            .sum();
        total += 2f64.powi(-j) * block;
    }
    Ok(total)
}

/// Block norms `‖Δ_j f(t_i)‖_{L^p}` of one field over a run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockNormHistory {
    j_min: i32,
    j_max: i32,
    p: Exponent,
    times: Vec<f64>,
    /// `values[j - j_min][i]`.
    values: Vec<Vec<f64>>,
}

impl BlockNormHistory {
    pub fn new(j_min: i32, j_max: i32, p: Exponent) -> Self {
        Self { j_min, j_max, p, times: Vec::new(), values: vec![Vec::new(); (j_max - j_min + 1) as usize] }
    }

    pub fn for_partition(part: &DyadicPartition, p: Exponent) -> Self {
        Self::new(part.j_min(), part.j_max(), p)
    }

    pub fn push(&mut self, t: f64, blocks: &[f64]) -> Result<()> {
        if blocks.len() != self.values.len() {
            return Err(Error::SizeMismatch { expected: self.values.len(), got: blocks.len() });
        }
        if let Some(&last) = self.times.last() {
            if t <= last {
                return Err(Error::invalid(format!("snapshot time {t} not after {last}")));
            }
        }
        if blocks.iter().any(|a| !(*a >= 0.0)) {
            return Err(Error::invalid("block norms must be non-negative"));
        }
        self.times.push(t);
        for (row, &a) in self.values.iter_mut().zip(blocks) {
            row.push(a);
        }
        Ok(())
    }

    /// Measures `f` on `part` and appends the result.
    pub fn record<C: Components>(&mut self, t: f64, f: &C, part: &DyadicPartition) -> Result<()> {
        let blocks = block_lp_norms(f, part, self.p)?;
        self.push(t, &blocks)
    }

    pub fn p(&self) -> Exponent {
        self.p
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn block_series(&self, j: i32) -> &[f64] {
        &self.values[(j - self.j_min) as usize]
    }

    pub fn snapshot(&self, i: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[i]).collect()
    }

    /// Instantaneous `‖f(t_i)‖_{Ḃ^s_{p,r}}`.
    pub fn besov_at(&self, i: usize, s: f64, r: Exponent) -> f64 {
        besov_from_blocks(&self.snapshot(i), self.j_min, s, r)
    }

    /// Keeps the first `len` snapshots.
    pub fn truncate(&mut self, len: usize) {
        self.times.truncate(len);
        for row in &mut self.values {
            row.truncate(len);
        }
    }
}

fn trapezoid(times: &[f64], g: impl Fn(usize) -> f64) -> f64 {
    times.windows(2).enumerate().map(|(i, w)| 0.5 * (w[1] - w[0]) * (g(i) + g(i + 1))).sum()
}

fn weighted_block_time_norms(hist: &BlockNormHistory, weights: Option<&[f64]>, r1: Exponent) -> Result<Vec<f64>> {
    if let Exponent::Finite(_) = r1 {
        if hist.len() < 2 {
            return Err(Error::invalid("finite time exponent needs at least two snapshots"));
        }
    } else if hist.is_empty() {
        return Err(Error::invalid("empty history"));
    }
    let w = |i: usize| weights.map_or(1.0, |w| w[i]);
    Ok(hist
        .values
        .iter()
        .map(|row| match r1 {
            Exponent::Infinity => row.iter().enumerate().map(|(i, a)| w(i) * a).fold(0.0, f64::max),
            Exponent::Finite(q) => trapezoid(&hist.times, |i| (w(i) * row[i]).powf(q)).powf(1.0 / q),
        })
        .collect())
}

/// `‖f‖_{L̃^{r1}_t(Ḃ^s_{p,r})} = ‖2^{js} ‖Δ_j f‖_{L^{r1}_t L^p}‖_{l^r}` with
/// the trapezoid rule in time.
pub fn chemin_lerner(hist: &BlockNormHistory, r1: f64, s: f64, r: f64) -> Result<f64> {
    let blocks = weighted_block_time_norms(hist, None, Exponent::new(r1)?)?;
    Ok(besov_from_blocks(&blocks, hist.j_min, s, Exponent::new(r)?))
}

/// Weighted variant: the block integrand is multiplied by `ω(t)^{r1}`.
pub fn chemin_lerner_weighted(hist: &BlockNormHistory, weights: &[f64], r1: f64, s: f64, r: f64) -> Result<f64> {
    if weights.len() != hist.len() {
        return Err(Error::SizeMismatch { expected: hist.len(), got: weights.len() });
    }
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::invalid("weights must be non-negative"));
    }
    let blocks = weighted_block_time_norms(hist, Some(weights), Exponent::new(r1)?)?;
    Ok(besov_from_blocks(&blocks, hist.j_min, s, Exponent::new(r)?))
}

/// Running Chemin-Lerner norms over the prefixes `[t_0, t_i]`, computed
/// incrementally from per-block running maxima / integrals.
pub fn chemin_lerner_prefix(hist: &BlockNormHistory, r1: f64, s: f64, r: f64) -> Result<Vec<f64>> {
    let r1 = Exponent::new(r1)?;
    let r = Exponent::new(r)?;
    let nb = hist.values.len();
    let mut running = vec![0.0; nb];
    let mut out = Vec::with_capacity(hist.len());
    for i in 0..hist.len() {
        for (acc, row) in running.iter_mut().zip(&hist.values) {
            match r1 {
                Exponent::Infinity => *acc = f64::max(*acc, row[i]),
                Exponent::Finite(q) => {
                    if i > 0 {
                        let dt = hist.times[i] - hist.times[i - 1];
                        *acc += 0.5 * dt * (row[i - 1].powf(q) + row[i].powf(q));
                    }
                }
            }
        }
        let blocks: Vec<f64> = match r1 {
            Exponent::Infinity => running.clone(),
            Exponent::Finite(q) => running.iter().map(|a| a.powf(1.0 / q)).collect(),
        };
        out.push(besov_from_blocks(&blocks, hist.j_min, s, r));
    }
    Ok(out)
}

/// Richardson-style error estimate for a finite-`r1` Chemin-Lerner norm:
/// the difference between the full-cadence value and the value from every
/// other snapshot, scaled by `1/3` (trapezoid rule is second order).
pub fn chemin_lerner_error_estimate(hist: &BlockNormHistory, r1: f64, s: f64, r: f64) -> Result<f64> {
    if hist.len() < 3 || !(hist.len() - 1).is_multiple_of(2) {
        return Err(Error::invalid("need an odd number (>= 3) of snapshots"));
    }
    let fine = chemin_lerner(hist, r1, s, r)?;
    let mut coarse = BlockNormHistory::new(hist.j_min, hist.j_max, hist.p);
    for i in (0..hist.len()).step_by(2) {
        coarse.push(hist.times[i], &hist.snapshot(i))?;
    }
    Ok((fine - chemin_lerner(&coarse, r1, s, r)?).abs() / 3.0)
}

/// `(∫_0^T g(t)^q dt)^{1/q}` (or `max g` for `q = ∞`) by the trapezoid rule.
pub fn time_norm(times: &[f64], values: &[f64], q: f64) -> Result<f64> {
    if times.len() != values.len() {
        return Err(Error::SizeMismatch { expected: times.len(), got: values.len() });
    }
    match Exponent::new(q)? {
        Exponent::Infinity => Ok(values.iter().copied().fold(0.0, f64::max)),
        Exponent::Finite(q) => {
            if times.len() < 2 {
                return Err(Error::invalid("finite time exponent needs at least two snapshots"));
            }
            Ok(trapezoid(times, |i| values[i].powf(q)).powf(1.0 / q))
        }
    }
}

/// One row of the norm-series CSV: `t,name,s,p,r,value`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormRow {
    pub t: f64,
    pub name: String,
    pub s: f64,
    pub p: Exponent,
    pub r: Exponent,
    pub value: f64,
}

pub const NORM_CSV_HEADER: &str = "t,name,s,p,r,value";

pub fn write_norm_csv<W: Write>(mut w: W, rows: &[NormRow]) -> Result<()> {
    writeln!(w, "{NORM_CSV_HEADER}")?;
    for row in rows {
        writeln!(w, "{},{},{},{},{},{}", row.t, row.name, row.s, row.p, row.r, row.value)?;
    }
    Ok(())
}
