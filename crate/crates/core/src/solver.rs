//! Pseudo-spectral time integration of incompressible, viscous, resistive
//! MHD on the periodic box:
//!
//! ```text
//! ∂t u + u·∇u - μ1 Δu + ∇p = B·∇B
//! ∂t B + u·∇B - μ2 ΔB      = B·∇u
//! div u = div B = 0
//! ```
//!
//! The state is advanced in `(u, B)`, where the linear part is diagonal, with
//! exact integrating factors `e^{-μ|k|² dt}`. The quadratic term is
//! evaluated through the Elsässer variables `W± = u ± B`, which need nine
//! products instead of twelve.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{SpectralField, VectorField};
use crate::grid::Grid;
use crate::initial_data::elsasser;
use crate::littlewood_paley::DyadicPartition;
use crate::spaces::{block_lp_norms_multi, chi_norm, magnitude, BlockNormHistory, Exponent};

/// Blow-up guard: abort once `‖u‖_∞` exceeds this multiple of its initial
/// value.
pub const BLOW_UP_FACTOR: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Viscosities {
    pub mu1: f64,
    pub mu2: f64,
}

impl Viscosities {
    /// Both coefficients must be positive; the non-resistive and inviscid
    /// systems are out of scope.
    pub fn new(mu1: f64, mu2: f64) -> Result<Self> {
        for (name, v) in [("viscosity", mu1), ("diffusivity", mu2)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(Self { mu1, mu2 })
    }

    /// `ν₊ = (μ1 + μ2)/2`.
    pub fn nu_plus(&self) -> f64 {
        0.5 * (self.mu1 + self.mu2)
    }

    /// `ν₋ = (μ1 - μ2)/2`, signed.
    pub fn nu_minus(&self) -> f64 {
        0.5 * (self.mu1 - self.mu2)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    #[default]
    #[serde(rename = "if-rk2")]
    IfRk2,
    #[serde(rename = "if-rk4")]
    IfRk4,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorParams {
    pub dt: f64,
    pub scheme: Scheme,
    pub cfl_safety: f64,
    pub t_end: f64,
    pub snapshot_every: u64,
}

impl IntegratorParams {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self { dt, scheme: Scheme::IfRk2, cfl_safety: 0.5, t_end, snapshot_every: 10 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::invalid(format!("cfl_safety must lie in (0, 1], got {}", self.cfl_safety)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::invalid(format!("t_end must be non-negative, got {}", self.t_end)));
        }
        if self.snapshot_every == 0 {
            return Err(Error::invalid("snapshot_every must be positive"));
        }
        Ok(())
    }

    /// Number of steps to reach `t_end`.
    pub fn step_count(&self) -> u64 {
        ((self.t_end / self.dt) - 1e-9).ceil().max(0.0) as u64
    }
}

#[derive(Clone, Debug)]
pub struct State {
    pub t: f64,
    pub step: u64,
    pub u: VectorField,
    pub b: VectorField,
}

impl State {
    pub fn new(u: VectorField, b: VectorField) -> Result<Self> {
        u.grid().check_same(b.grid())?;
        Ok(Self { t: 0.0, step: 0, u, b })
    }

    pub fn grid(&self) -> &Grid {
        self.u.grid()
    }

    pub fn elsasser(&self) -> (VectorField, VectorField) {
        elsasser(&self.u, &self.b).expect("state fields share a grid")
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.b.is_finite()
    }

    /// `‖u‖_∞` and `‖B‖_∞` on the grid.
    pub fn sup_norms(&self) -> (f64, f64) {
        let sup = |v: &VectorField| magnitude(&v.to_physical()).into_iter().fold(0.0, f64::max);
        (sup(&self.u), sup(&self.b))
    }

    fn restore_invariants(&mut self) {
        self.u = self.u.leray_project();
        self.b = self.b.leray_project();
        self.u.zero_mean();
        self.b.zero_mean();
    }
}

struct Tendency {
    du: VectorField,
    db: VectorField,
    sup_u: f64,
    sup_b: f64,
}

/// Nonlinear tendencies in divergence form. With `W± = u ± B` solenoidal,
/// `W∓·∇W± = ∇·(W∓ ⊗ W±)`, and the nine products `M_ij = W⁺_i W⁻_j` serve
/// both fields:
///
/// ```text
/// ∂t W⁺_i = -P Σ_j ∂_j M_ij      ∂t W⁻_i = -P Σ_j ∂_j M_ji
/// ```
///
/// Real fields travel two per complex FFT (`a + i b`), so one evaluation
/// costs three inverse and five forward transforms.
fn nonlinear(u: &VectorField, b: &VectorField) -> Tendency {
    let g = u.grid();
    let (n, len) = (g.n(), g.len());
    let uc = [0, 1, 2].map(|i| u.0[i].coefficients());
    let bc = [0, 1, 2].map(|i| b.0[i].coefficients());
    let w = |sign: f64, c: usize, k: usize| uc[c][k] + bc[c][k] * sign;
    let im = Complex64::i();
    // (W⁺1, W⁺2), (W⁺3, W⁻1), (W⁻1, W⁻2) packed as re + i·im
    let pack = [(1.0, 0, 1.0, 1), (1.0, 2, -1.0, 0), (-1.0, 1, -1.0, 2)];
    let mut z: Vec<Vec<Complex64>> = pack
        .par_iter()
        .map(|&(s1, c1, s2, c2)| {
            let mut v: Vec<Complex64> = (0..len).map(|k| w(s1, c1, k) + im * w(s2, c2, k)).collect();
            g.fft().inverse(&mut v);
            v
        })
        .collect();
    let (z0, z1, z2) = (&z[0], &z[1], &z[2]);
    let (mut sup_u2, mut sup_b2) = (0.0f64, 0.0f64);
    let mut q: Vec<Vec<Complex64>> = (0..5).map(|_| Vec::with_capacity(len)).collect();
    for x in 0..len {
        let wp = [z0[x].re, z0[x].im, z1[x].re];
        let wm = [z1[x].im, z2[x].re, z2[x].im];
        let m = |i: usize, j: usize| wp[i] * wm[j];
        q[0].push(Complex64::new(m(0, 0), m(0, 1)));
        q[1].push(Complex64::new(m(0, 2), m(1, 0)));
        q[2].push(Complex64::new(m(1, 1), m(1, 2)));
        q[3].push(Complex64::new(m(2, 0), m(2, 1)));
        q[4].push(Complex64::new(m(2, 2), 0.0));
        let (mut su, mut sb) = (0.0, 0.0);
        for c in 0..3 {
            su += 0.25 * (wp[c] + wm[c]).powi(2);
            sb += 0.25 * (wp[c] - wm[c]).powi(2);
        }
        sup_u2 = sup_u2.max(su);
        sup_b2 = sup_b2.max(sb);
    }
    z.clear();
    q.par_iter_mut().for_each(|v| g.fft().forward(v));

    let cut = g.dealias_cutoff();
    let scale = 0.5 / len as f64;
    let wn = |i: usize| if i < n / 2 { i as f64 } else { i as f64 - n as f64 };
    let mirror = |i: usize| (n - i) % n;
    let mut out: Vec<Vec<Complex64>> = (0..6).map(|_| vec![Complex64::default(); len]).collect();
    let [o0, o1, o2, o3, o4, o5] = &mut out[..] else { unreachable!("six outputs") };
    (
        o0.par_chunks_mut(n * n),
        o1.par_chunks_mut(n * n),
        o2.par_chunks_mut(n * n),
        o3.par_chunks_mut(n * n),
        o4.par_chunks_mut(n * n),
        o5.par_chunks_mut(n * n),
    )
        .into_par_iter()
        .enumerate()
        .for_each(|(a, (p0, p1, p2, p3, p4, p5))| {
            let k1 = wn(a);
            if k1.abs() > cut {
                return;
            }
            for bb in 0..n {
                let k2 = wn(bb);
                if k2.abs() > cut {
                    continue;
                }
                for c in 0..n {
                    let k3 = wn(c);
                    let kk = k1 * k1 + k2 * k2 + k3 * k3;
                    if k3.abs() > cut || kk == 0.0 {
                        continue;
                    }
                    let idx = (a * n + bb) * n + c;
                    let mi = (mirror(a) * n + mirror(bb)) * n + mirror(c);
                    // split each packed pair: re part (Q_k + conj Q_-k)/2, im part (Q_k - conj Q_-k)/2i
                    let mut mh = [Complex64::default(); 9];
                    for (slot, v) in q.iter().enumerate() {
                        let (zk, zm) = (v[idx], v[mi].conj());
                        mh[2 * slot] = (zk + zm) * scale;
                        if slot < 4 {
                            mh[2 * slot + 1] = Complex64::new((zk - zm).im, -(zk - zm).re) * scale;
                        }
                    }
                    let k = [k1, k2, k3];
                    let mut dp = [Complex64::default(); 3];
                    let mut dm = [Complex64::default(); 3];
                    for i in 0..3 {
                        let (mut sp, mut sm) = (Complex64::default(), Complex64::default());
                        for j in 0..3 {
                            sp += mh[3 * i + j] * k[j];
                            sm += mh[3 * j + i] * k[j];
                        }
                        // -i·s
                        dp[i] = Complex64::new(sp.im, -sp.re);
                        dm[i] = Complex64::new(sm.im, -sm.re);
                    }
                    for d in [&mut dp, &mut dm] {
                        let dot = (d[0] * k[0] + d[1] * k[1] + d[2] * k[2]) / kk;
                        for i in 0..3 {
                            d[i] -= dot * k[i];
                        }
                    }
                    let off = bb * n + c;
                    p0[off] = 0.5 * (dp[0] + dm[0]);
                    p1[off] = 0.5 * (dp[1] + dm[1]);
                    p2[off] = 0.5 * (dp[2] + dm[2]);
                    p3[off] = 0.5 * (dp[0] - dm[0]);
                    p4[off] = 0.5 * (dp[1] - dm[1]);
                    p5[off] = 0.5 * (dp[2] - dm[2]);
                }
            }
        });
    let mut fields = out.into_iter().map(|v| SpectralField::from_raw(g, v));
    let mut next = || fields.next().expect("six outputs");
    let du = VectorField([next(), next(), next()]);
    let db = VectorField([next(), next(), next()]);
    Tendency { du, db, sup_u: sup_u2.sqrt(), sup_b: sup_b2.sqrt() }
}

/// Dealiased, projected nonlinear tendencies
/// `(P(-u·∇u + B·∇B), P(-u·∇B + B·∇u))`.
pub fn rhs_nonlinear(u: &VectorField, b: &VectorField) -> Result<(VectorField, VectorField)> {
    u.grid().check_same(b.grid())?;
    let t = nonlinear(u, b);
    Ok((t.du, t.db))
}

/// Full right-hand side including the viscous terms.
pub fn rhs(state: &State, visc: &Viscosities) -> (VectorField, VectorField) {
    let t = nonlinear(&state.u, &state.b);
    let lu = state.u.map(|c| c.laplacian()).scale(visc.mu1);
    let lb = state.b.map(|c| c.laplacian()).scale(visc.mu2);
    (&t.du + &lu, &t.db + &lb)
}

/// Largest step allowed by the advective CFL condition.
pub fn cfl_limit(grid: &Grid, sup_u: f64, sup_b: f64, cfl_safety: f64) -> f64 {
    let speed = sup_u + sup_b;
    if speed > 0.0 {
        cfl_safety * grid.spacing() / speed
    } else {
        f64::INFINITY
    }
}

/// Integrating-factor tables `e^{-μ|k|² h}` indexed by `|k|²`.
struct Factors {
    u: Vec<f64>,
    b: Vec<f64>,
}

impl Factors {
    fn new(grid: &Grid, visc: &Viscosities, h: f64) -> Self {
        let half = (grid.n() / 2) as i64;
        let len = (3 * half * half + 1) as usize;
        let table = |mu: f64| (0..len).map(|k2| (-mu * k2 as f64 * h).exp()).collect();
        Self { u: table(visc.mu1), b: table(visc.mu2) }
    }

    fn apply(&self, u: &VectorField, b: &VectorField) -> (VectorField, VectorField) {
        let f = |v: &VectorField, t: &[f64]| v.map(|c| c.apply_radial(|k2| t[k2 as usize]));
        (f(u, &self.u), f(b, &self.b))
    }
}

/// `a + h·b` componentwise on both fields.
fn axpy(a: &(VectorField, VectorField), h: f64, b: &(VectorField, VectorField)) -> (VectorField, VectorField) {
    (&a.0 + &b.0.scale(h), &a.1 + &b.1.scale(h))
}

/// Diagnostic returned with every step: sup norms of the input state.
#[derive(Clone, Copy, Debug)]
pub struct StepInfo {
    pub sup_u: f64,
    pub sup_b: f64,
}

/// Advances one step. Fails with [`Error::Cfl`] (carrying the admissible
/// step) when `dt` violates the CFL bound, and with [`Error::NonFinite`]
/// when the result contains NaN or infinity.
pub fn step(state: &State, visc: &Viscosities, params: &IntegratorParams) -> Result<State> {
    step_with_info(state, visc, params).map(|(s, _)| s)
}

pub fn step_with_info(state: &State, visc: &Viscosities, params: &IntegratorParams) -> Result<(State, StepInfo)> {
    let dt = params.dt;
    let grid = state.grid();
    let k1 = nonlinear(&state.u, &state.b);
    let info = StepInfo { sup_u: k1.sup_u, sup_b: k1.sup_b };
    let admissible = cfl_limit(grid, k1.sup_u, k1.sup_b, params.cfl_safety);
    if dt > admissible {
        return Err(Error::Cfl { t: state.t, dt, admissible });
    }
    let y = (state.u.clone(), state.b.clone());
    let a = (k1.du, k1.db);
    let n = |v: &(VectorField, VectorField)| {
        let t = nonlinear(&v.0, &v.1);
        (t.du, t.db)
    };
    let full = Factors::new(grid, visc, dt);
    let (u, b) = match params.scheme {
        Scheme::IfRk2 => {
            let ea = full.apply(&a.0, &a.1);
            let ey = full.apply(&y.0, &y.1);
            let pred = axpy(&ey, dt, &ea);
            let bb = n(&pred);
            let sum = axpy(&ea, 1.0, &bb);
            axpy(&ey, 0.5 * dt, &sum)
        }
        Scheme::IfRk4 => {
            let half = Factors::new(grid, visc, 0.5 * dt);
            let eh = |v: &(VectorField, VectorField)| half.apply(&v.0, &v.1);
            let ef = |v: &(VectorField, VectorField)| full.apply(&v.0, &v.1);
            let k2 = n(&eh(&axpy(&y, 0.5 * dt, &a)));
            let eh_y = eh(&y);
            let k3 = n(&axpy(&eh_y, 0.5 * dt, &k2));
            let ey = ef(&y);
            let k4 = n(&axpy(&ey, dt, &eh(&k3)));
            let mid = eh(&axpy(&k2, 1.0, &k3));
            let mut acc = ef(&a);
            acc = axpy(&acc, 2.0, &mid);
            acc = axpy(&acc, 1.0, &k4);
            axpy(&ey, dt / 6.0, &acc)
        }
    };
    let mut next = State { t: 0.0, step: state.step + 1, u, b };
    next.t = next.step as f64 * dt;
    next.restore_invariants();
    if !next.is_finite() {
        return Err(Error::NonFinite { t: next.t });
    }
    Ok((next, info))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    /// `½‖u‖²`.
    pub kinetic: f64,
    /// `½‖B‖²`.
    pub magnetic: f64,
    /// `μ1‖∇u‖²`.
    pub dissipation_u: f64,
    /// `μ2‖∇B‖²`.
    pub dissipation_b: f64,
}

impl EnergyReport {
    pub fn total(&self) -> f64 {
        self.kinetic + self.magnetic
    }

    pub fn dissipation(&self) -> f64 {
        self.dissipation_u + self.dissipation_b
    }
}

pub fn energy_report(state: &State, visc: &Viscosities) -> EnergyReport {
    EnergyReport {
        kinetic: 0.5 * state.u.energy(),
        magnetic: 0.5 * state.b.energy(),
        dissipation_u: visc.mu1 * state.u.gradient_energy(),
        dissipation_b: visc.mu2 * state.b.gradient_energy(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MonitoredField {
    #[serde(rename = "u")]
    U,
    #[serde(rename = "B")]
    B,
    #[serde(rename = "W+")]
    WPlus,
    #[serde(rename = "W-")]
    WMinus,
}

impl MonitoredField {
    pub const ALL: [MonitoredField; 4] = [Self::U, Self::B, Self::WPlus, Self::WMinus];

    pub fn name(self) -> &'static str {
        match self {
            Self::U => "u",
            Self::B => "B",
            Self::WPlus => "W+",
            Self::WMinus => "W-",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown field {s:?}; expected one of u, B, W+, W-")))
    }

    pub fn of(self, state: &State) -> VectorField {
        match self {
            Self::U => state.u.clone(),
            Self::B => state.b.clone(),
            Self::WPlus => &state.u + &state.b,
            Self::WMinus => &state.u - &state.b,
        }
    }
}

/// Why a run stopped before `t_end`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Abort {
    /// `"cfl"`, `"non-finite"` or `"blow-up"`.
    pub reason: String,
    pub t: f64,
    pub message: String,
}

impl Abort {
    fn from_error(e: &Error) -> Option<Self> {
        let (reason, t) = match e {
            Error::Cfl { t, .. } => ("cfl", *t),
            Error::NonFinite { t } => ("non-finite", *t),
            Error::BlowUp { t, .. } => ("blow-up", *t),
            _ => return None,
        };
        Some(Self { reason: reason.into(), t, message: e.to_string() })
    }
}

/// Block-norm histories for one field at one Lebesgue exponent.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FieldHistory {
    pub field: MonitoredField,
    pub history: BlockNormHistory,
}

/// Scalar series recorded at every snapshot.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ScalarSeries {
    pub times: Vec<f64>,
    pub energy: Vec<EnergyReport>,
    /// `[field][snapshot]` for `χ^{-1}`, `χ^0` and `χ^1`, fields in
    /// [`MonitoredField::ALL`] order.
    pub chi_minus_one: [Vec<f64>; 4],
    pub chi_zero: [Vec<f64>; 4],
    pub chi_one: [Vec<f64>; 4],
    pub max_relative_divergence: Vec<f64>,
}

/// Snapshots, norm histories and the outcome of a run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub partition: DyadicPartition,
    pub exponents: Vec<Exponent>,
    pub histories: Vec<FieldHistory>,
    pub scalars: ScalarSeries,
    pub final_state: Option<State>,
    pub abort: Option<Abort>,
}

impl Trajectory {
    /// Records block norms of u, B, W± at every exponent in `exponents`.
    pub fn new(partition: &DyadicPartition, exponents: &[Exponent]) -> Self {
        let mut exps: Vec<Exponent> = Vec::new();
        for e in exponents {
            if !exps.contains(e) {
                exps.push(*e);
            }
        }
        let histories = MonitoredField::ALL
            .iter()
            .flat_map(|&field| exps.iter().map(move |&p| (field, p)))
            .map(|(field, p)| FieldHistory { field, history: BlockNormHistory::for_partition(partition, p) })
            .collect();
        Self {
            partition: partition.clone(),
            exponents: exps,
            histories,
            scalars: ScalarSeries::default(),
            final_state: None,
            abort: None,
        }
    }

    pub fn history(&self, field: MonitoredField, p: Exponent) -> Option<&BlockNormHistory> {
        self.histories.iter().find(|h| h.field == field && h.history.p() == p).map(|h| &h.history)
    }

    pub fn times(&self) -> &[f64] {
        &self.scalars.times
    }

    pub fn record(&mut self, state: &State, visc: &Viscosities) -> Result<()> {
        let fields: Vec<VectorField> = MonitoredField::ALL.iter().map(|f| f.of(state)).collect();
        for (fi, field) in MonitoredField::ALL.iter().enumerate() {
            let blocks = block_lp_norms_multi(&fields[fi], &self.partition, &self.exponents)?;
            for (pi, p) in self.exponents.iter().enumerate() {
                let h = self
                    .histories
                    .iter_mut()
                    .find(|h| h.field == *field && h.history.p() == *p)
                    .expect("history created for every field and exponent");
                h.history.push(state.t, &blocks[pi])?;
            }
            self.scalars.chi_minus_one[fi].push(chi_norm(&fields[fi], -1.0));
            self.scalars.chi_zero[fi].push(chi_norm(&fields[fi], 0.0));
            self.scalars.chi_one[fi].push(chi_norm(&fields[fi], 1.0));
        }
        self.scalars.times.push(state.t);
        self.scalars.energy.push(energy_report(state, visc));
        self.scalars
            .max_relative_divergence
            .push(state.u.relative_divergence().max(state.b.relative_divergence()));
        Ok(())
    }
}

/// Integrates from `state` to `params.t_end`, recording a snapshot every
/// `snapshot_every` steps and at the final step. `observer` sees each
/// snapshot state together with the snapshots recorded so far, before the
/// new one is added (e.g. to write a checkpoint).
///
/// Numerical failures (CFL violation, NaN/Inf, blow-up) end the run early:
/// they are stored in [`Trajectory::abort`] and the last healthy state is
/// kept as the final state.
pub fn run(
    state: State,
    visc: &Viscosities,
    params: &IntegratorParams,
    partition: &DyadicPartition,
    exponents: &[Exponent],
    observer: impl FnMut(&State, &Trajectory) -> Result<()>,
) -> Result<Trajectory> {
    let traj = Trajectory::new(partition, exponents);
    resume(traj, state, visc, params, None, observer)
}

/// Continues a trajectory whose snapshots up to `state` are already
/// recorded. `sup_u0` is the reference `‖u(0)‖_∞` for the blow-up guard;
/// `None` takes it from `state`.
pub fn resume(
    mut traj: Trajectory,
    mut state: State,
    visc: &Viscosities,
    params: &IntegratorParams,
    sup_u0: Option<f64>,
    mut observer: impl FnMut(&State, &Trajectory) -> Result<()>,
) -> Result<Trajectory> {
    params.validate()?;
    state.u.grid().check_same(traj.partition.grid())?;
    let n_steps = params.step_count();
    let reference = sup_u0.unwrap_or_else(|| state.sup_norms().0);
    let already_recorded = traj.times().last().is_some_and(|&t| t == state.t);
    let mut first = true;
    loop {
        let snap = state.step.is_multiple_of(params.snapshot_every) || state.step == n_steps;
        let record_now = snap && !(first && already_recorded);
        if record_now {
            observer(&state, &traj)?;
        }
        first = false;
        if state.step >= n_steps {
            if record_now {
                traj.record(&state, visc)?;
            }
            break;
        }
        let stepped = if record_now {
            let (rec, next) = rayon::join(|| traj.record(&state, visc), || step_with_info(&state, visc, params));
            rec?;
            next
        } else {
            step_with_info(&state, visc, params)
        };
        let stepped = stepped.and_then(|(next, info)| {
            if reference > 0.0 && info.sup_u > BLOW_UP_FACTOR * reference {
                Err(Error::BlowUp { t: state.t, growth: info.sup_u / reference })
            } else {
                Ok(next)
            }
        });
        match stepped {
            Ok(next) => state = next,
            Err(e) => match Abort::from_error(&e) {
                Some(abort) => {
                    traj.abort = Some(abort);
                    break;
                }
                None => return Err(e),
            },
        }
    }
    traj.final_state = Some(state);
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::SpectralField;
    use approx::assert_abs_diff_eq;

    fn shear(g: &Grid, amp: f64) -> VectorField {
        VectorField::new(
            SpectralField::from_fn(g, |x| amp * x[1].sin()),
            SpectralField::zeros(g),
            SpectralField::zeros(g),
        )
        .unwrap()
    }

    #[test]
    fn viscosity_validation() {
        assert!(Viscosities::new(1.0, 0.0).is_err());
        assert!(Viscosities::new(-1.0, 1.0).is_err());
        let v = Viscosities::new(1.5, 0.5).unwrap();
        assert_eq!((v.nu_plus(), v.nu_minus()), (1.0, 0.5));
    }

    #[test]
    fn shear_has_no_nonlinearity() {
        let g = Grid::new(16).unwrap();
        let z = VectorField::zeros(&g);
        let (du, db) = rhs_nonlinear(&shear(&g, 1.0), &z).unwrap();
        assert!(du.max_abs_coefficient() < 1e-15 && db.max_abs_coefficient() < 1e-15);
        let (du, db) = rhs_nonlinear(&z, &shear(&g, 1.0)).unwrap();
        assert!(du.max_abs_coefficient() < 1e-15 && db.max_abs_coefficient() < 1e-15);
    }

    #[test]
    fn decaying_shear_single_step() {
        let g = Grid::new(16).unwrap();
        let visc = Viscosities::new(1.0, 2.0).unwrap();
        let params = IntegratorParams::new(0.01, 0.01);
        let s0 = State::new(shear(&g, 1.0), shear(&g, 0.0)).unwrap();
        let s1 = step(&s0, &visc, &params).unwrap();
        let exact = shear(&g, (-0.01f64).exp());
        assert!((&s1.u - &exact).max_abs_coefficient() < 1e-15);
        assert_eq!(s1.step, 1);
        assert_abs_diff_eq!(s1.t, 0.01);

        let s0 = State::new(shear(&g, 0.0), shear(&g, 1.0)).unwrap();
        for scheme in [Scheme::IfRk2, Scheme::IfRk4] {
            let p = IntegratorParams { scheme, ..params };
            let s1 = step(&s0, &visc, &p).unwrap();
            assert!((&s1.b - &shear(&g, (-0.02f64).exp())).max_abs_coefficient() < 1e-15);
            assert!(s1.u.max_abs_coefficient() < 1e-15);
        }
    }

    #[test]
    fn zero_state_stays_zero() {
        let g = Grid::new(8).unwrap();
        let s0 = State::new(VectorField::zeros(&g), VectorField::zeros(&g)).unwrap();
        let s1 = step(&s0, &Viscosities::new(1.0, 1.0).unwrap(), &IntegratorParams::new(0.1, 1.0)).unwrap();
        assert_eq!(s1.u.max_abs_coefficient(), 0.0);
        assert_eq!(s1.b.max_abs_coefficient(), 0.0);
    }

    #[test]
    fn cfl_violation_reports_admissible_step() {
        let g = Grid::new(16).unwrap();
        let s0 = State::new(shear(&g, 10.0), shear(&g, 0.0)).unwrap();
        let params = IntegratorParams::new(1.0, 1.0);
        match step(&s0, &Viscosities::new(1.0, 1.0).unwrap(), &params) {
            Err(Error::Cfl { admissible, .. }) => {
                assert!(admissible < 1.0);
                assert_abs_diff_eq!(admissible, 0.5 * g.spacing() / 10.0, epsilon = 1e-12);
            }
            other => panic!("expected CFL error, got {other:?}"),
        }
    }

    #[test]
    fn energy_report_examples() {
        let g = Grid::new(16).unwrap();
        let visc = Viscosities::new(0.3, 0.7).unwrap();
        let zero = State::new(VectorField::zeros(&g), VectorField::zeros(&g)).unwrap();
        assert_eq!(energy_report(&zero, &visc), EnergyReport::default());
        let u = VectorField::new(
            SpectralField::zeros(&g),
            SpectralField::mode(&g, [3, 0, 0], 1.0, 0.2).unwrap(),
            SpectralField::zeros(&g),
        )
        .unwrap();
        let s = State::new(u.clone(), VectorField::zeros(&g)).unwrap();
        let e = energy_report(&s, &visc);
        assert_abs_diff_eq!(e.dissipation_u, 0.3 * 9.0 * u.energy(), epsilon = 1e-14);
        assert_abs_diff_eq!(e.kinetic, 0.25, epsilon = 1e-15);
        assert_eq!(e.magnetic, 0.0);
    }

    #[test]
    fn run_with_zero_end_time() {
        let g = Grid::new(16).unwrap();
        let part = DyadicPartition::for_grid(&g);
        let s0 = State::new(shear(&g, 1.0), VectorField::zeros(&g)).unwrap();
        let mut seen = 0;
        let traj = run(
            s0,
            &Viscosities::new(1.0, 1.0).unwrap(),
            &IntegratorParams::new(0.01, 0.0),
            &part,
            &[Exponent::Finite(2.0)],
            |_, _| {
                seen += 1;
                Ok(())
            },
        )
        .unwrap();
        assert_eq!(seen, 1);
        assert_eq!(traj.times(), &[0.0]);
        assert!(traj.abort.is_none());
    }

    #[test]
    fn run_records_cadence_and_aborts_on_cfl() {
        let g = Grid::new(16).unwrap();
        let part = DyadicPartition::for_grid(&g);
        let visc = Viscosities::new(1.0, 1.0).unwrap();
        let s0 = State::new(shear(&g, 1.0), VectorField::zeros(&g)).unwrap();
        let params = IntegratorParams { snapshot_every: 4, ..IntegratorParams::new(0.01, 0.1) };
        let traj = run(s0.clone(), &visc, &params, &part, &[Exponent::Finite(2.0)], |_, _| Ok(())).unwrap();
        let steps: Vec<u64> = traj.times().iter().map(|t| (t / 0.01).round() as u64).collect();
        assert_eq!(steps, vec![0, 4, 8, 10]);
        let h = traj.history(MonitoredField::U, Exponent::Finite(2.0)).unwrap();
        assert_eq!(h.len(), 4);

        let bad = IntegratorParams::new(10.0, 100.0);
        let traj = run(s0, &visc, &bad, &part, &[Exponent::Finite(2.0)], |_, _| Ok(())).unwrap();
        assert_eq!(traj.abort.as_ref().unwrap().reason, "cfl");
        assert_eq!(traj.final_state.unwrap().step, 0);
    }
}
