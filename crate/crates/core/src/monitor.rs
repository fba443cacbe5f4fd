//! Smallness conditions for global existence, and the bootstrap quantities
//! that the existence arguments control, evaluated on numerical data.
//!
//! Conditions come in mirrored pairs: the `Minus` form asks `W⁻` to be small
//! relative to an exponential of `W⁺`, the `Plus` form swaps the roles.
//! The unspecified constants (`C`, `η`, `ε0`, ...) are explicit inputs and
//! every report keeps its ingredients so the left-hand side can be
//! recomputed offline for other constant choices.
//!
//! Formulas use `|ν₋|`, so they remain meaningful when `μ2 > μ1`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::initial_data::elsasser;
use crate::littlewood_paley::DyadicPartition;
use crate::solver::Viscosities;
use crate::spaces::{besov_norm, chemin_lerner_prefix, chi_norm, BesovParams, BlockNormHistory, Exponent};

/// Admissible `(ε, r)` pairs for the Besov conditions:
/// `r = 1` needs `0 ≤ ε < 1`, `1 < r ≤ 2` needs `0 < ε < 1`, and
/// `2 < r < ∞` needs `1 - 2/r ≤ ε < 1`. `r = ∞` is never admissible.
pub fn check_epsilon_r(epsilon: f64, r: f64) -> Result<bool> {
    if !(r >= 1.0) {
        return Err(Error::InvalidExponent(r));
    }
    let below_one = epsilon < 1.0;
    Ok(if r == 1.0 {
        epsilon >= 0.0 && below_one
    } else if r <= 2.0 {
        epsilon > 0.0 && below_one
    } else if r.is_finite() {
        epsilon >= 1.0 - 2.0 / r && below_one
    } else {
        false
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConditionKind {
    /// Besov form, `W⁻` small.
    BesovMinus,
    /// Besov form, `W⁺` small.
    BesovPlus,
    /// Equal-viscosity Besov form (`ν₋ = 0`), `W⁻` small.
    BesovEqualViscosityMinus,
    /// Equal-viscosity Besov form, `W⁺` small. The published statement of
    /// this mirror repeats the `W⁻`-small inequality verbatim; it is
    /// implemented here as the swap, by analogy with the general pair.
    BesovEqualViscosityPlus,
    /// Lei-Lin `χ^{-1}` form, `W⁻` small.
    ChiMinus,
    /// Lei-Lin `χ^{-1}` form, `W⁺` small.
    ChiPlus,
}

impl ConditionKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::BesovMinus => "besov-minus",
            Self::BesovPlus => "besov-plus",
            Self::BesovEqualViscosityMinus => "besov-equal-viscosity-minus",
            Self::BesovEqualViscosityPlus => "besov-equal-viscosity-plus",
            Self::ChiMinus => "chi-minus",
            Self::ChiPlus => "chi-plus",
        }
    }
}

/// One evaluated smallness condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub kind: ConditionKind,
    /// Norm of the field required to be small (outside the exponential).
    pub small_norm: f64,
    /// Norm of the other field (inside the exponential).
    pub large_norm: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub nu_plus: f64,
    /// `|ν₋|`.
    pub nu_minus: f64,
    /// Besov indices; `None` for the `χ^{-1}` conditions.
    pub besov: Option<BesovParams>,
    pub constant_c: f64,
    /// `None` for the `χ^{-1}` conditions (threshold `2ν₊`).
    pub eta: Option<f64>,
    /// `None` for the `χ^{-1}` conditions.
    pub epsilon: Option<f64>,
    pub prefactor: f64,
    pub exponent: f64,
    pub lhs: f64,
    pub threshold: f64,
    pub holds: bool,
    pub small_ratio: f64,
    pub large_ratio: f64,
    pub nu_ratio: f64,
}

impl ConditionReport {
    #[allow(clippy::too_many_arguments)]
    fn build(
        kind: ConditionKind,
        small: f64,
        large: f64,
        visc: &Viscosities,
        besov: Option<BesovParams>,
        c: f64,
        eta: Option<f64>,
        epsilon: Option<f64>,
    ) -> Self {
        let mut rep = Self {
            kind,
            small_norm: small,
            large_norm: large,
            mu1: visc.mu1,
            mu2: visc.mu2,
            nu_plus: visc.nu_plus(),
            nu_minus: visc.nu_minus().abs(),
            besov,
            constant_c: c,
            eta,
            epsilon,
            prefactor: 0.0,
            exponent: 0.0,
            lhs: 0.0,
            threshold: 0.0,
            holds: false,
            small_ratio: small / visc.nu_plus(),
            large_ratio: large / visc.nu_plus(),
            nu_ratio: visc.nu_minus().abs() / visc.nu_plus(),
        };
        let (prefactor, exponent, lhs, threshold) = rep.evaluate();
        rep.prefactor = prefactor;
        rep.exponent = exponent;
        rep.lhs = lhs;
        rep.threshold = threshold;
        rep.holds = lhs < threshold;
        rep
    }

    /// `(prefactor, exponent, lhs, threshold)` from the stored ingredients.
    pub fn evaluate(&self) -> (f64, f64, f64, f64) {
        let (s, l, np, nm, c) = (self.small_norm, self.large_norm, self.nu_plus, self.nu_minus, self.constant_c);
        match self.kind {
            ConditionKind::ChiMinus | ConditionKind::ChiPlus => {
                let prefactor = s + c * nm / np * (nm + l);
                let exponent = c / (np * np) * (nm + l).powi(2);
                (prefactor, exponent, prefactor * exponent.exp(), 2.0 * np)
            }
            _ => {
                let eps = self.epsilon.unwrap_or(0.0);
                let eta = self.eta.unwrap_or(0.0);
                let q = 2.0 / (1.0 - eps);
                let equal = matches!(
                    self.kind,
                    ConditionKind::BesovEqualViscosityMinus | ConditionKind::BesovEqualViscosityPlus
                );
                let (prefactor, inner) = if equal { (s, l) } else { (s + nm / np * (l + nm), nm + l) };
                let exponent = c * np.powf(-q) * inner.powf(q);
                (prefactor, exponent, prefactor * exponent.exp(), eta * np)
            }
        }
    }

    /// Left-hand side recomputed from the logged ingredients.
    pub fn recompute_lhs(&self) -> f64 {
        self.evaluate().2
    }

    pub fn margin(&self) -> f64 {
        self.lhs / self.threshold
    }
}

/// Constants for the Besov conditions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovConstants {
    pub c: f64,
    pub eta: f64,
    pub epsilon: f64,
}

impl Default for BesovConstants {
    fn default() -> Self {
        Self { c: 1.0, eta: 0.01, epsilon: 0.5 }
    }
}

fn check_besov_inputs(params: &BesovParams, visc: &Viscosities, k: &BesovConstants) -> Result<()> {
    Viscosities::new(visc.mu1, visc.mu2)?;
    let r = params.r.value();
    if !check_epsilon_r(k.epsilon, r)? {
        return Err(Error::InadmissiblePair { epsilon: k.epsilon, r });
    }
    Ok(())
}

/// Both Besov conditions from precomputed norms `‖W0⁻‖`, `‖W0⁺‖`.
/// Returns `[BesovMinus, BesovPlus]`.
pub fn condition_besov_from_norms(
    w_minus: f64,
    w_plus: f64,
    visc: &Viscosities,
    params: BesovParams,
    k: &BesovConstants,
) -> Result<[ConditionReport; 2]> {
    check_besov_inputs(&params, visc, k)?;
    let rep = |kind, s, l| ConditionReport::build(kind, s, l, visc, Some(params), k.c, Some(k.eta), Some(k.epsilon));
    Ok([rep(ConditionKind::BesovMinus, w_minus, w_plus), rep(ConditionKind::BesovPlus, w_plus, w_minus)])
}

/// Equal-viscosity forms. Fails unless `μ1 = μ2`.
pub fn condition_besov_equal_viscosity_from_norms(
    w_minus: f64,
    w_plus: f64,
    visc: &Viscosities,
    params: BesovParams,
    k: &BesovConstants,
) -> Result<[ConditionReport; 2]> {
    check_besov_inputs(&params, visc, k)?;
    if visc.mu1 != visc.mu2 {
        return Err(Error::invalid(format!(
            "equal-viscosity condition needs mu1 = mu2, got {} and {}",
            visc.mu1, visc.mu2
        )));
    }
    let rep = |kind, s, l| ConditionReport::build(kind, s, l, visc, Some(params), k.c, Some(k.eta), Some(k.epsilon));
    Ok([
        rep(ConditionKind::BesovEqualViscosityMinus, w_minus, w_plus),
        rep(ConditionKind::BesovEqualViscosityPlus, w_plus, w_minus),
    ])
}

/// Besov norms of `W0⁻` and `W0⁺` for given data.
pub fn elsasser_besov_norms(
    u0: &VectorField,
    b0: &VectorField,
    params: BesovParams,
    part: &DyadicPartition,
) -> Result<(f64, f64)> {
    let (wp, wm) = elsasser(u0, b0)?;
    Ok((besov_norm(&wm, params, part)?, besov_norm(&wp, params, part)?))
}

pub fn condition_besov(
    u0: &VectorField,
    b0: &VectorField,
    visc: &Viscosities,
    params: BesovParams,
    k: &BesovConstants,
    part: &DyadicPartition,
) -> Result<[ConditionReport; 2]> {
    check_besov_inputs(&params, visc, k)?;
    let (wm, wp) = elsasser_besov_norms(u0, b0, params, part)?;
    condition_besov_from_norms(wm, wp, visc, params, k)
}

pub fn condition_besov_equal_viscosity(
    u0: &VectorField,
    b0: &VectorField,
    visc: &Viscosities,
    params: BesovParams,
    k: &BesovConstants,
    part: &DyadicPartition,
) -> Result<[ConditionReport; 2]> {
    check_besov_inputs(&params, visc, k)?;
    let (wm, wp) = elsasser_besov_norms(u0, b0, params, part)?;
    condition_besov_equal_viscosity_from_norms(wm, wp, visc, params, k)
}

/// `[ChiMinus, ChiPlus]` from `‖W0⁻‖_{χ^{-1}}`, `‖W0⁺‖_{χ^{-1}}`.
pub fn condition_chi_from_norms(w_minus: f64, w_plus: f64, visc: &Viscosities, c: f64) -> Result<[ConditionReport; 2]> {
    Viscosities::new(visc.mu1, visc.mu2)?;
    let rep = |kind, s, l| ConditionReport::build(kind, s, l, visc, None, c, None, None);
    Ok([rep(ConditionKind::ChiMinus, w_minus, w_plus), rep(ConditionKind::ChiPlus, w_plus, w_minus)])
}

pub fn condition_chi(u0: &VectorField, b0: &VectorField, visc: &Viscosities, c: f64) -> Result<[ConditionReport; 2]> {
    let (wp, wm) = elsasser(u0, b0)?;
    condition_chi_from_norms(chi_norm(&wm, -1.0), chi_norm(&wp, -1.0), visc, c)
}

/// Monotone quantity `Q(t)` sampled at snapshot times, with the first time
/// it exceeds the threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapTrace {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub threshold: f64,
    pub first_violation: Option<f64>,
}

impl BootstrapTrace {
    pub fn new(times: Vec<f64>, values: Vec<f64>, threshold: f64) -> Self {
        let first_violation = times.iter().zip(&values).find(|(_, q)| **q > threshold).map(|(t, _)| *t);
        Self { times, values, threshold, first_violation }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,value,threshold")?;
        for (t, q) in self.times.iter().zip(&self.values) {
            writeln!(w, "{t},{q},{}", self.threshold)?;
        }
        Ok(())
    }
}

/// `Q(t) = ‖W⁻‖_{L̃^∞_t(Ḃ^{3/p-1}_{p,r})} + ν₊ ‖W⁻‖_{L̃^1_t(Ḃ^{3/p+1}_{p,r})}`
/// over each prefix `[0, t_i]`, against the threshold `ε0 ν₊`.
pub fn bootstrap_besov(w_minus: &BlockNormHistory, r: f64, nu_plus: f64, epsilon0: f64) -> Result<BootstrapTrace> {
    if w_minus.is_empty() {
        return Err(Error::invalid("missing W- history"));
    }
    let s = 3.0 * w_minus.p().reciprocal() - 1.0;
    let sup = chemin_lerner_prefix(w_minus, f64::INFINITY, s, r)?;
    let int = if w_minus.len() > 1 { chemin_lerner_prefix(w_minus, 1.0, s + 2.0, r)? } else { vec![0.0] };
    let values = sup.iter().zip(&int).map(|(a, b)| a + nu_plus * b).collect();
    Ok(BootstrapTrace::new(w_minus.times().to_vec(), values, epsilon0 * nu_plus))
}

/// Running `max_{[0,t]} g` and `∫_0^t g` by the trapezoid rule.
fn running_sup_and_integral(times: &[f64], sup_of: &[f64], int_of: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut sup = Vec::with_capacity(times.len());
    let mut int = Vec::with_capacity(times.len());
    let (mut m, mut acc) = (0.0f64, 0.0);
    for i in 0..times.len() {
        m = m.max(sup_of[i]);
        if i > 0 {
            acc += 0.5 * (times[i] - times[i - 1]) * (int_of[i - 1] + int_of[i]);
        }
        sup.push(m);
        int.push(acc);
    }
    (sup, int)
}

fn check_series(times: &[f64], a: &[f64], b: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::invalid("empty series"));
    }
    for s in [a, b] {
        if s.len() != times.len() {
            return Err(Error::SizeMismatch { expected: times.len(), got: s.len() });
        }
    }
    Ok(())
}

/// `Q(t) = ‖W⁻‖_{L^∞_t(χ^{-1})} + ν₊ ‖W⁻‖_{L^1_t(χ^1)}` against `b`.
pub fn bootstrap_chi(times: &[f64], chi_minus_one: &[f64], chi_one: &[f64], nu_plus: f64, b: f64) -> Result<BootstrapTrace> {
    check_series(times, chi_minus_one, chi_one)?;
    let (sup, int) = running_sup_and_integral(times, chi_minus_one, chi_one);
    let values = sup.iter().zip(&int).map(|(a, b)| a + nu_plus * b).collect();
    Ok(BootstrapTrace::new(times.to_vec(), values, b))
}

/// Predicted envelope
/// `C (‖W0⁻‖ + |ν₋|/ν₊ (‖W0⁺‖ + |ν₋|)) exp{C ν₊^{-2/(1-ε)} (|ν₋| + ‖W0⁺‖)^{2/(1-ε)}}`
/// for the `W⁻` bootstrap quantity.
pub fn gronwall_envelope_besov(w_minus0: f64, w_plus0: f64, visc: &Viscosities, epsilon: f64, c: f64) -> f64 {
    let (np, nm) = (visc.nu_plus(), visc.nu_minus().abs());
    let q = 2.0 / (1.0 - epsilon);
    c * (w_minus0 + nm / np * (w_plus0 + nm)) * (c * np.powf(-q) * (nm + w_plus0).powf(q)).exp()
}

/// Measured left side and fixed right side of an a-priori bound, per
/// snapshot prefix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundTrace {
    pub times: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: f64,
    pub holds: bool,
}

impl BoundTrace {
    fn new(times: Vec<f64>, lhs: Vec<f64>, rhs: f64) -> Self {
        let holds = lhs.iter().all(|v| *v <= rhs);
        Self { times, lhs, rhs, holds }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,lhs,rhs")?;
        for (t, v) in self.times.iter().zip(&self.lhs) {
            writeln!(w, "{t},{v},{}", self.rhs)?;
        }
        Ok(())
    }
}

/// `‖W⁺‖_{L̃^∞_t(Ḃ^{3/p-1}_{p,r})} + c ν₊ ‖W⁺‖_{L̃^1_t(Ḃ^{3/p+1}_{p,r})}
/// ≤ 4‖W0⁺‖ + 2c|ν₋|`, where `‖W0⁺‖` is read from the first snapshot.
pub fn w_plus_bound_besov(w_plus: &BlockNormHistory, r: f64, visc: &Viscosities, c: f64) -> Result<BoundTrace> {
    if w_plus.is_empty() {
        return Err(Error::invalid("missing W+ history"));
    }
    let s = 3.0 * w_plus.p().reciprocal() - 1.0;
    let sup = chemin_lerner_prefix(w_plus, f64::INFINITY, s, r)?;
    let int = if w_plus.len() > 1 { chemin_lerner_prefix(w_plus, 1.0, s + 2.0, r)? } else { vec![0.0] };
    let lhs = sup.iter().zip(&int).map(|(a, b)| a + c * visc.nu_plus() * b).collect();
    let w0 = w_plus.besov_at(0, s, Exponent::new(r)?);
    Ok(BoundTrace::new(w_plus.times().to_vec(), lhs, 4.0 * w0 + 2.0 * c * visc.nu_minus().abs()))
}

/// Feasibility of the constants in the `χ^{-1}` argument: `b` must lie in
/// `(2(2-ε0)/(2-C1) ν₊, √(2 C2) ν₊)`, which is non-empty iff
/// `2(2-ε0)² < C2 (2-C1)²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiFeasibility {
    pub c1: f64,
    pub c2: f64,
    pub epsilon0: f64,
    /// Interval for `b / ν₊`.
    pub b_lower: f64,
    pub b_upper: f64,
    pub feasible: bool,
}

pub fn chi_feasibility(c1: f64, c2: f64, epsilon0: f64) -> Result<ChiFeasibility> {
    for (name, v) in [("C1", c1), ("C2", c2)] {
        if !(v > 0.0 && v < 2.0) {
            return Err(Error::invalid(format!("{name} must lie in (0, 2), got {v}")));
        }
    }
    if !(epsilon0 > 0.0) {
        return Err(Error::invalid(format!("epsilon0 must be positive, got {epsilon0}")));
    }
    let b_lower = 2.0 * (2.0 - epsilon0) / (2.0 - c1);
    let b_upper = (2.0 * c2).sqrt();
    let feasible = 2.0 * (2.0 - epsilon0).powi(2) < c2 * (2.0 - c1).powi(2);
    Ok(ChiFeasibility { c1, c2, epsilon0, b_lower, b_upper, feasible })
}

/// `(1 - b²/(2aν₊)) ‖W⁺‖_{L^∞_t(χ^{-1})} + (ν₊ - a/2) ‖W⁺‖_{L^1_t(χ^1)}
/// ≤ ‖W0⁺‖_{χ^{-1}} + b|ν₋|/ν₊`.
pub fn w_plus_bound_chi(
    times: &[f64],
    chi_minus_one: &[f64],
    chi_one: &[f64],
    visc: &Viscosities,
    a: f64,
    b: f64,
) -> Result<BoundTrace> {
    check_series(times, chi_minus_one, chi_one)?;
    let np = visc.nu_plus();
    let (sup, int) = running_sup_and_integral(times, chi_minus_one, chi_one);
    let k_sup = 1.0 - b * b / (2.0 * a * np);
    let lhs = sup.iter().zip(&int).map(|(s, i)| k_sup * s + (np - 0.5 * a) * i).collect();
    Ok(BoundTrace::new(times.to_vec(), lhs, chi_minus_one[0] + b * visc.nu_minus().abs() / np))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn visc(m1: f64, m2: f64) -> Viscosities {
        Viscosities::new(m1, m2).unwrap()
    }

    #[test]
    fn epsilon_r_table() {
        assert!(check_epsilon_r(0.0, 1.0).unwrap());
        assert!(!check_epsilon_r(0.0, 2.0).unwrap());
        assert!(check_epsilon_r(0.1, 2.0).unwrap());
        assert!(!check_epsilon_r(0.4, 4.0).unwrap());
        assert!(check_epsilon_r(0.5, 4.0).unwrap());
        assert!(!check_epsilon_r(1.0, 1.0).unwrap());
        assert!(!check_epsilon_r(0.5, f64::INFINITY).unwrap());
        assert!(check_epsilon_r(0.5, 0.5).is_err());
    }

    #[test]
    fn besov_hand_arithmetic() {
        let params = BesovParams::new(-0.5, 6.0, 1.0).unwrap();
        let k = BesovConstants { c: 1.0, eta: 0.5, epsilon: 0.0 };
        let [minus, plus] = condition_besov_from_norms(0.1, 1.0, &visc(1.0, 1.0), params, &k).unwrap();
        assert_abs_diff_eq!(minus.lhs, 0.1 * std::f64::consts::E, epsilon = 1e-15);
        assert_eq!(minus.threshold, 0.5);
        assert!(minus.holds);
        assert_abs_diff_eq!(plus.lhs, (0.01f64).exp(), epsilon = 1e-15);
        assert!(!plus.holds);
        assert_eq!(minus.recompute_lhs(), minus.lhs);
    }

    #[test]
    fn besov_rejects_inadmissible_pair() {
        let params = BesovParams::new(-0.5, 6.0, 2.0).unwrap();
        let k = BesovConstants { epsilon: 0.0, ..Default::default() };
        assert!(matches!(
            condition_besov_from_norms(0.1, 1.0, &visc(1.0, 1.0), params, &k),
            Err(Error::InadmissiblePair { .. })
        ));
    }

    #[test]
    fn equal_viscosity_degenerates_exactly() {
        let params = BesovParams::new(-0.5, 6.0, 1.0).unwrap();
        let k = BesovConstants { epsilon: 0.3, ..Default::default() };
        let v = visc(0.7, 0.7);
        let general = condition_besov_from_norms(0.2, 1.3, &v, params, &k).unwrap();
        let equal = condition_besov_equal_viscosity_from_norms(0.2, 1.3, &v, params, &k).unwrap();
        assert_eq!(general[0].lhs, equal[0].lhs);
        assert_eq!(general[1].lhs, equal[1].lhs);
        assert!(condition_besov_equal_viscosity_from_norms(0.2, 1.3, &visc(1.0, 0.5), params, &k).is_err());
    }

    #[test]
    fn zero_data_satisfies_everything() {
        let params = BesovParams::new(-0.5, 6.0, 1.0).unwrap();
        let [m, _] = condition_besov_from_norms(0.0, 3.0, &visc(1.0, 1.0), params, &BesovConstants::default()).unwrap();
        assert_eq!(m.lhs, 0.0);
        assert!(m.holds);
        let [m, p] = condition_chi_from_norms(0.0, 0.0, &visc(1.0, 2.0), 1.0).unwrap();
        assert!(m.holds && p.holds);
    }

    #[test]
    fn chi_hand_arithmetic() {
        let [m, _] = condition_chi_from_norms(1.0, 1.0, &visc(1.0, 1.0), 1.0).unwrap();
        assert_abs_diff_eq!(m.lhs, std::f64::consts::E, epsilon = 1e-15);
        assert_eq!(m.threshold, 2.0);
        assert!(!m.holds);
    }

    #[test]
    fn signed_nu_minus_uses_magnitude() {
        let params = BesovParams::new(-0.5, 6.0, 1.0).unwrap();
        let k = BesovConstants::default();
        let a = condition_besov_from_norms(0.1, 1.0, &visc(2.0, 1.0), params, &k).unwrap();
        let b = condition_besov_from_norms(0.1, 1.0, &visc(1.0, 2.0), params, &k).unwrap();
        assert_eq!(a[0].lhs, b[0].lhs);
        assert!(a[0].lhs > 0.1);
    }

    #[test]
    fn bootstrap_examples() {
        let mut h = BlockNormHistory::new(0, 1, Exponent::Finite(2.0));
        for i in 0..5 {
            h.push(i as f64, &[0.0, 0.0]).unwrap();
        }
        let tr = bootstrap_besov(&h, 1.0, 1.0, 0.0).unwrap();
        assert!(tr.values.iter().all(|v| *v == 0.0));
        assert_eq!(tr.first_violation, None);

        let mut h = BlockNormHistory::new(0, 1, Exponent::Finite(2.0));
        h.push(0.0, &[0.1, 0.0]).unwrap();
        let tr = bootstrap_besov(&h, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(tr.first_violation, Some(0.0));

        let tr = bootstrap_chi(&[0.0, 1.0], &[1.0, 0.5], &[2.0, 1.0], 2.0, 0.0).unwrap();
        assert_eq!(tr.values, vec![1.0, 1.0 + 2.0 * 1.5]);
        assert_eq!(tr.first_violation, Some(0.0));
        assert!(bootstrap_chi(&[0.0], &[1.0, 2.0], &[0.0], 1.0, 1.0).is_err());
    }

    #[test]
    fn envelope_examples() {
        assert_abs_diff_eq!(gronwall_envelope_besov(0.3, 0.0, &visc(1.0, 1.0), 0.5, 2.0), 0.6);
        let v = visc(1.5, 0.5);
        let expected = 1.0 * (0.1 + 0.5 * 1.5) * (1.0f64 * 1.5f64.powi(2)).exp();
        assert_abs_diff_eq!(gronwall_envelope_besov(0.1, 1.0, &v, 0.0, 1.0), expected, epsilon = 1e-14);
    }

    #[test]
    fn feasibility() {
        let f = chi_feasibility(1.0, 1.0, 0.05).unwrap();
        assert!(!f.feasible);
        assert!(f.b_lower > f.b_upper);
        let f = chi_feasibility(0.1, 1.99, 1.5).unwrap();
        assert!(f.feasible && f.b_lower < f.b_upper);
        assert!(chi_feasibility(2.0, 1.0, 0.1).is_err());
    }
}
