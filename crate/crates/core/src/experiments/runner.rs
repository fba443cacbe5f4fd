use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{parse_config, DataConfig, RunConfig};
use super::manifest::{unix_now, RunManifest, RunStatus, SnapshotEntry, MANIFEST_FILE};
use crate::checkpoint;
use crate::error::{Error, Result};
use crate::experiments::config::ConditionConfig;
use crate::field::VectorField;
use crate::initial_data::{large_data_pair, make_stream};
use crate::littlewood_paley::DyadicPartition;
use crate::monitor::{
    bootstrap_besov, bootstrap_chi, chi_feasibility, condition_besov_equal_viscosity_from_norms,
    condition_besov_from_norms, condition_chi, elsasser_besov_norms, gronwall_envelope_besov, w_plus_bound_besov,
    w_plus_bound_chi, BootstrapTrace, BoundTrace, ChiFeasibility, ConditionReport,
};
use crate::solver::{self, FieldHistory, MonitoredField, ScalarSeries, State, Trajectory, Viscosities};
use crate::spaces::{write_norm_csv, Exponent, NormRow};

pub const CONFIG_FILE: &str = "config.toml";
pub const CONDITIONS_FILE: &str = "conditions.json";
pub const TRAJECTORY_FILE: &str = "trajectory.json";
pub const MONITOR_FILE: &str = "monitor.json";
pub const CHECKPOINT_DIR: &str = "checkpoints";

/// Initial-data smallness conditions, all evaluated from the same data.
#[derive(Clone, Debug, Serialize)]
pub struct ConditionsReport {
    pub mu1: f64,
    pub mu2: f64,
    pub nu_plus: f64,
    pub nu_minus: f64,
    /// `[W⁻ small, W⁺ small]` in the critical Besov space.
    pub besov: [ConditionReport; 2],
    /// Present when `μ1 = μ2`.
    pub besov_equal_viscosity: Option<[ConditionReport; 2]>,
    pub chi: [ConditionReport; 2],
    pub chi_feasibility: ChiFeasibility,
    /// Predicted envelope of the Besov bootstrap quantity.
    pub gronwall_envelope: f64,
}

impl ConditionsReport {
    pub fn all(&self) -> Vec<&ConditionReport> {
        let mut out: Vec<&ConditionReport> = self.besov.iter().collect();
        if let Some(eq) = &self.besov_equal_viscosity {
            out.extend(eq.iter());
        }
        out.extend(self.chi.iter());
        out
    }

    /// Human-readable table of every condition.
    pub fn table(&self) -> String {
        let mut s = format!(
            "mu1 = {}  mu2 = {}  nu+ = {}  |nu-| = {}\n{:<30}{:>13}{:>13}{:>13}{:>13}  holds\n",
            self.mu1, self.mu2, self.nu_plus, self.nu_minus, "condition", "small", "large", "lhs", "threshold"
        );
        for c in self.all() {
            s.push_str(&format!(
                "{:<30}{:>13.5e}{:>13.5e}{:>13.5e}{:>13.5e}  {}\n",
                c.kind.name(),
                c.small_norm,
                c.large_norm,
                c.lhs,
                c.threshold,
                if c.holds { "yes" } else { "no" }
            ));
        }
        let f = &self.chi_feasibility;
        s.push_str(&format!(
            "chi constants: b/nu+ in ({:.4}, {:.4}) {}\n",
            f.b_lower,
            f.b_upper,
            if f.feasible { "feasible" } else { "empty" }
        ));
        s
    }
}

pub fn evaluate_conditions(
    u0: &VectorField,
    b0: &VectorField,
    visc: &Viscosities,
    cfg: &ConditionConfig,
    part: &DyadicPartition,
) -> Result<ConditionsReport> {
    let params = cfg.besov_params()?;
    let k = cfg.besov_constants();
    let (wm, wp) = elsasser_besov_norms(u0, b0, params, part)?;
    let besov_equal_viscosity = if visc.mu1 == visc.mu2 {
        Some(condition_besov_equal_viscosity_from_norms(wm, wp, visc, params, &k)?)
    } else {
        None
    };
    Ok(ConditionsReport {
        mu1: visc.mu1,
        mu2: visc.mu2,
        nu_plus: visc.nu_plus(),
        nu_minus: visc.nu_minus().abs(),
        besov: condition_besov_from_norms(wm, wp, visc, params, &k)?,
        besov_equal_viscosity,
        chi: condition_chi(u0, b0, visc, cfg.big_c)?,
        chi_feasibility: chi_feasibility(cfg.c1, cfg.c2, cfg.epsilon0)?,
        gronwall_envelope: gronwall_envelope_besov(wm, wp, visc, cfg.epsilon, cfg.c),
    })
}

/// Writes `u` then `B` as a six-component checkpoint.
pub fn save_pair(path: &Path, u: &VectorField, b: &VectorField) -> Result<()> {
    checkpoint::save(path, &[&u.0[0], &u.0[1], &u.0[2], &b.0[0], &b.0[1], &b.0[2]])
}

pub fn load_pair(path: &Path) -> Result<(VectorField, VectorField)> {
    let comps = checkpoint::load(path)?;
    if comps.len() != 6 {
        return Err(Error::Checkpoint(format!(
            "{}: expected 6 components (u then B), found {}",
            path.display(),
            comps.len()
        )));
    }
    let mut it = comps.into_iter();
    let mut next = || it.next().expect("six components");
    let u = VectorField::new(next(), next(), next())?;
    let b = VectorField::new(next(), next(), next())?;
    Ok((u, b))
}

pub fn initial_state(config: &RunConfig) -> Result<State> {
    let grid = config.grid()?;
    let (u, b) = match &config.data {
        DataConfig::LargeData { m, .. } => {
            let spec = config.stream_spec().expect("large-data recipe");
            let pair = large_data_pair(&make_stream(&spec, &grid)?, *m)?;
            (pair.u0, pair.b0)
        }
        DataConfig::Checkpoint { path } => {
            let (u, b) = load_pair(Path::new(path))?;
            if u.grid().n() != grid.n() {
                return Err(Error::Config {
                    line: None,
                    message: format!("checkpoint {path} has n = {}, config says n = {}", u.grid().n(), grid.n()),
                });
            }
            (u, b)
        }
    };
    State::new(u, b)
}

#[derive(Serialize, Deserialize)]
struct SavedTrajectory {
    histories: Vec<FieldHistory>,
    scalars: ScalarSeries,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, serde_json::to_string_pretty(value)?)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn save_trajectory(dir: &Path, traj: &Trajectory) -> Result<()> {
    let saved = SavedTrajectory { histories: traj.histories.clone(), scalars: traj.scalars.clone() };
    write_json(&dir.join(TRAJECTORY_FILE), &saved)
}

/// Rebuilds the recorded part of a trajectory from `trajectory.json`,
/// keeping only snapshots strictly before `before`.
fn load_trajectory(dir: &Path, part: &DyadicPartition, exps: &[Exponent], before: f64) -> Result<Trajectory> {
    let mut traj = Trajectory::new(part, exps);
    let path = dir.join(TRAJECTORY_FILE);
    if !path.exists() {
        return Ok(traj);
    }
    let saved: SavedTrajectory = serde_json::from_str(&fs::read_to_string(path)?)?;
    let keep = saved.scalars.times.iter().take_while(|&&t| t < before).count();
    for h in &mut traj.histories {
        let found = saved
            .histories
            .iter()
            .find(|s| s.field == h.field && s.history.p() == h.history.p())
            .ok_or_else(|| Error::InvalidInput(format!("{TRAJECTORY_FILE} lacks {} at p = {}", h.field.name(), h.history.p())))?;
        h.history = found.history.clone();
        h.history.truncate(keep);
    }
    let mut s = saved.scalars;
    s.times.truncate(keep);
    s.energy.truncate(keep);
    s.max_relative_divergence.truncate(keep);
    for v in s.chi_minus_one.iter_mut().chain(s.chi_zero.iter_mut()).chain(s.chi_one.iter_mut()) {
        v.truncate(keep);
    }
    traj.scalars = s;
    Ok(traj)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Continue an existing run directory from its last checkpoint.
    pub resume: bool,
    /// Stop (leaving the run incomplete) after this many new snapshots.
    pub stop_after: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub manifest: RunManifest,
    pub conditions: ConditionsReport,
    pub summary: Option<MonitorSummary>,
}

impl RunOutcome {
    /// 0 when complete or stopped on request, 3 after a numerical abort.
    pub fn exit_code(&self) -> i32 {
        match self.manifest.status {
            RunStatus::Aborted => 3,
            _ => 0,
        }
    }
}

fn finish(dir: &Path, manifest: &mut RunManifest, status: RunStatus) -> Result<()> {
    manifest.status = status;
    manifest.finished = Some(unix_now());
    manifest.refresh_files(dir)?;
    manifest.save(dir)
}

/// Runs (or resumes) the experiment described by `config` in its output
/// directory.
pub fn run_experiment(config: &RunConfig, opts: &RunOptions) -> Result<RunOutcome> {
    let config = config.clone().validated()?;
    let dir = PathBuf::from(&config.output);
    let grid = config.grid()?;
    let visc = config.viscosities()?;
    let params = config.integrator.params();
    let part = DyadicPartition::for_grid(&grid);
    let exps = config.exponents();
    let hash = config.hash();

    let (mut manifest, state, traj, initial, resume_step) = if opts.resume {
        let mut manifest = RunManifest::load(&dir)?;
        if manifest.config_hash != hash {
            return Err(Error::Config {
                line: None,
                message: format!("configuration differs from the one that started {}", dir.display()),
            });
        }
        let initial = match manifest.snapshots.first() {
            Some(first) => {
                let (u, b) = load_pair(&dir.join(&first.file))?;
                State::new(u, b)?
            }
            None => initial_state(&config)?,
        };
        if manifest.status == RunStatus::Complete {
            let conditions = evaluate_conditions(&initial.u, &initial.b, &visc, &config.conditions, &part)?;
            return Ok(RunOutcome { dir, manifest, conditions, summary: None });
        }
        let (state, traj, resume_step) = match manifest.snapshots.last() {
            Some(last) => {
                let (u, b) = load_pair(&dir.join(&last.file))?;
                let mut state = State::new(u, b)?;
                state.step = last.step;
                state.t = last.step as f64 * params.dt;
                let traj = load_trajectory(&dir, &part, &exps, state.t)?;
                (state, traj, Some(last.step))
            }
            None => (initial.clone(), Trajectory::new(&part, &exps), None),
        };
        manifest.status = RunStatus::Incomplete;
        manifest.finished = None;
        manifest.abort = None;
        (manifest, state, traj, initial, resume_step)
    } else {
        if dir.join(MANIFEST_FILE).exists() {
            return Err(Error::Config {
                line: None,
                message: format!("{} already holds a run; pass --resume or choose another output", dir.display()),
            });
        }
        let state = initial_state(&config)?;
        if !part.covers(&state.u) || !part.covers(&state.b) {
            return Err(Error::InvalidInput(
                "initial data has modes outside the band covered by the dyadic partition".into(),
            ));
        }
        fs::create_dir_all(&dir)?;
        fs::write(dir.join(CONFIG_FILE), config.to_toml())?;
        let manifest = RunManifest {
            config_hash: hash,
            n: grid.n(),
            mu1: visc.mu1,
            mu2: visc.mu2,
            started: unix_now(),
            finished: None,
            status: RunStatus::Incomplete,
            reference_sup_u: state.sup_norms().0,
            snapshots: Vec::new(),
            files: Vec::new(),
            abort: None,
        };
        (manifest, state.clone(), Trajectory::new(&part, &exps), state, None)
    };

    let conditions = evaluate_conditions(&initial.u, &initial.b, &visc, &config.conditions, &part)?;
    write_json(&dir.join(CONDITIONS_FILE), &conditions)?;
    if params.t_end == 0.0 {
        finish(&dir, &mut manifest, RunStatus::Complete)?;
        return Ok(RunOutcome { dir, manifest, conditions, summary: None });
    }
    fs::create_dir_all(dir.join(CHECKPOINT_DIR))?;
    manifest.refresh_files(&dir)?;
    manifest.save(&dir)?;

    let mut written = 0u64;
    let reference = manifest.reference_sup_u;
    let result = {
        let manifest = &mut manifest;
        let dir = &dir;
        let observer = |s: &State, t: &Trajectory| -> Result<()> {
            let file = format!("{CHECKPOINT_DIR}/step_{:08}.elsf", s.step);
            save_pair(&dir.join(&file), &s.u, &s.b)?;
            save_trajectory(dir, t)?;
            manifest.snapshots.retain(|e| e.step < s.step);
            manifest.snapshots.push(SnapshotEntry { step: s.step, t: s.t, file });
            manifest.refresh_files(dir)?;
            manifest.save(dir)?;
            if resume_step != Some(s.step) {
                written += 1;
                if opts.stop_after == Some(written) {
                    return Err(Error::Interrupted(written));
                }
            }
            Ok(())
        };
        solver::resume(traj, state, &visc, &params, Some(reference), observer)
    };
    let traj = match result {
        Ok(traj) => traj,
        Err(Error::Interrupted(_)) => return Ok(RunOutcome { dir, manifest, conditions, summary: None }),
        Err(e) => return Err(e),
    };
    save_trajectory(&dir, &traj)?;
    let summary = write_outputs(&dir, &config, &traj, &visc)?;
    manifest.abort = traj.abort.clone();
    let status = if traj.abort.is_some() { RunStatus::Aborted } else { RunStatus::Complete };
    finish(&dir, &mut manifest, status)?;
    Ok(RunOutcome { dir, manifest, conditions, summary: Some(summary) })
}

fn csv_writer(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// `norms.csv`, `energy.csv`, `chi.csv` and the monitor outputs.
fn write_outputs(dir: &Path, config: &RunConfig, traj: &Trajectory, visc: &Viscosities) -> Result<MonitorSummary> {
    let mut rows = Vec::new();
    for (i, &t) in traj.times().iter().enumerate() {
        for m in &config.monitor {
            let (p, r) = (Exponent::new(m.p)?, Exponent::new(m.r)?);
            let h = traj.history(m.field, p).expect("monitored exponent recorded");
            rows.push(NormRow { t, name: m.name(), s: m.s, p, r, value: h.besov_at(i, m.s, r) });
        }
    }
    let mut w = csv_writer(&dir.join("norms.csv"))?;
    write_norm_csv(&mut w, &rows)?;
    w.flush()?;

    let sc = &traj.scalars;
    let mut w = csv_writer(&dir.join("energy.csv"))?;
    writeln!(w, "t,kinetic,magnetic,total,dissipation_u,dissipation_b,max_relative_divergence")?;
    for (i, e) in sc.energy.iter().enumerate() {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            sc.times[i],
            e.kinetic,
            e.magnetic,
            e.total(),
            e.dissipation_u,
            e.dissipation_b,
            sc.max_relative_divergence[i]
        )?;
    }
    w.flush()?;

    let mut w = csv_writer(&dir.join("chi.csv"))?;
    writeln!(w, "t,field,chi_minus_one,chi_zero,chi_one")?;
    for (i, t) in sc.times.iter().enumerate() {
        for (f, field) in MonitoredField::ALL.iter().enumerate() {
            writeln!(w, "{t},{},{},{},{}", field.name(), sc.chi_minus_one[f][i], sc.chi_zero[f][i], sc.chi_one[f][i])?;
        }
    }
    w.flush()?;
    write_monitor_outputs(dir, config, traj, visc)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub initial: f64,
    pub max: f64,
    pub threshold: f64,
    pub first_violation: Option<f64>,
}

impl From<&BootstrapTrace> for TraceSummary {
    fn from(b: &BootstrapTrace) -> Self {
        Self { initial: b.values[0], max: b.max(), threshold: b.threshold, first_violation: b.first_violation }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundSummary {
    pub max_lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl From<&BoundTrace> for BoundSummary {
    fn from(b: &BoundTrace) -> Self {
        Self { max_lhs: b.lhs.iter().copied().fold(f64::NEG_INFINITY, f64::max), rhs: b.rhs, holds: b.holds }
    }
}

/// Headline numbers of a finished run (`monitor.json`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorSummary {
    pub snapshots: usize,
    pub t_final: f64,
    pub besov_bootstrap: TraceSummary,
    pub chi_bootstrap: TraceSummary,
    pub w_plus_bound_besov: BoundSummary,
    pub w_plus_bound_chi: BoundSummary,
    /// `‖W⁻‖` in the critical Besov space at the first and last snapshot.
    pub w_minus_initial: f64,
    pub w_minus_final: f64,
    pub energy_initial: f64,
    pub energy_final: f64,
    pub max_relative_divergence: f64,
}

/// `χ^{-1}` bootstrap threshold: the middle of the admissible interval when
/// it is non-empty, `2ν₊` otherwise, unless set explicitly.
pub fn chi_threshold(cfg: &ConditionConfig, nu_plus: f64) -> Result<f64> {
    if let Some(b) = cfg.b {
        return Ok(b);
    }
    let f = chi_feasibility(cfg.c1, cfg.c2, cfg.epsilon0)?;
    Ok(if f.feasible { 0.5 * (f.b_lower + f.b_upper) * nu_plus } else { 2.0 * nu_plus })
}

/// Bootstrap traces and a-priori `W⁺` bounds as CSV, plus `monitor.json`.
pub fn write_monitor_outputs(
    dir: &Path,
    config: &RunConfig,
    traj: &Trajectory,
    visc: &Viscosities,
) -> Result<MonitorSummary> {
    let cfg = &config.conditions;
    let p = Exponent::new(cfg.p)?;
    let np = visc.nu_plus();
    let wm = traj.history(MonitoredField::WMinus, p).expect("condition exponent recorded");
    let wp = traj.history(MonitoredField::WPlus, p).expect("condition exponent recorded");
    let sc = &traj.scalars;
    let (iwp, iwm) = (2, 3);
    let b = chi_threshold(cfg, np)?;

    let besov = bootstrap_besov(wm, cfg.r, np, cfg.epsilon0)?;
    let chi = bootstrap_chi(&sc.times, &sc.chi_minus_one[iwm], &sc.chi_one[iwm], np, b)?;
    let bound = w_plus_bound_besov(wp, cfg.r, visc, cfg.c)?;
    let bound_chi = w_plus_bound_chi(&sc.times, &sc.chi_minus_one[iwp], &sc.chi_one[iwp], visc, cfg.c2 * np, b)?;
    for (name, trace) in [("bootstrap_besov.csv", &besov), ("bootstrap_chi.csv", &chi)] {
        let mut w = csv_writer(&dir.join(name))?;
        trace.write_csv(&mut w)?;
        w.flush()?;
    }
    for (name, trace) in [("w_plus_bound.csv", &bound), ("w_plus_bound_chi.csv", &bound_chi)] {
        let mut w = csv_writer(&dir.join(name))?;
        trace.write_csv(&mut w)?;
        w.flush()?;
    }
    let s = 3.0 * p.reciprocal() - 1.0;
    let r = Exponent::new(cfg.r)?;
    let last = sc.times.len() - 1;
    let summary = MonitorSummary {
        snapshots: sc.times.len(),
        t_final: sc.times[last],
        besov_bootstrap: (&besov).into(),
        chi_bootstrap: (&chi).into(),
        w_plus_bound_besov: (&bound).into(),
        w_plus_bound_chi: (&bound_chi).into(),
        w_minus_initial: wm.besov_at(0, s, r),
        w_minus_final: wm.besov_at(last, s, r),
        energy_initial: sc.energy[0].total(),
        energy_final: sc.energy[last].total(),
        max_relative_divergence: sc.max_relative_divergence.iter().copied().fold(0.0, f64::max),
    };
    write_json(&dir.join(MONITOR_FILE), &summary)?;
    Ok(summary)
}

/// Re-derives the bootstrap and bound outputs of an existing run directory
/// and refreshes its manifest file list.
pub fn annotate_run(dir: &Path) -> Result<MonitorSummary> {
    let mut manifest = RunManifest::load(dir)?;
    let config = parse_config(&fs::read_to_string(dir.join(CONFIG_FILE))?)?;
    let part = DyadicPartition::for_grid(&config.grid()?);
    let traj = load_trajectory(dir, &part, &config.exponents(), f64::INFINITY)?;
    if traj.times().is_empty() {
        return Err(Error::InvalidInput(format!("{} has no recorded snapshots", dir.display())));
    }
    let summary = write_monitor_outputs(dir, &config, &traj, &config.viscosities()?)?;
    manifest.refresh_files(dir)?;
    manifest.save(dir)?;
    Ok(summary)
}
