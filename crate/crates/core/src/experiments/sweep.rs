use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::config::{suggest, RunConfig, SWEEP_AXES};
use super::manifest::RunStatus;
use super::runner::{run_experiment, RunOptions, RunOutcome};
use crate::error::{Error, Result};

pub const SWEEP_FILE: &str = "sweep.csv";

/// One line of the sweep summary.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub dir: PathBuf,
    /// `complete`, `aborted`, `incomplete` or `error`.
    pub status: String,
    pub detail: Option<String>,
    pub t_final: Option<f64>,
    pub besov_minus_lhs: Option<f64>,
    pub besov_minus_threshold: Option<f64>,
    pub besov_minus_holds: Option<bool>,
    pub chi_minus_lhs: Option<f64>,
    pub chi_minus_holds: Option<bool>,
    pub bootstrap_max: Option<f64>,
    pub bootstrap_violation: Option<f64>,
    pub chi_bootstrap_violation: Option<f64>,
    pub w_plus_bound_holds: Option<bool>,
    pub w_minus_final: Option<f64>,
    pub energy_final: Option<f64>,
}

impl SweepRow {
    fn empty(value: f64, dir: PathBuf) -> Self {
        Self {
            value,
            dir,
            status: String::new(),
            detail: None,
            t_final: None,
            besov_minus_lhs: None,
            besov_minus_threshold: None,
            besov_minus_holds: None,
            chi_minus_lhs: None,
            chi_minus_holds: None,
            bootstrap_max: None,
            bootstrap_violation: None,
            chi_bootstrap_violation: None,
            w_plus_bound_holds: None,
            w_minus_final: None,
            energy_final: None,
        }
    }

    fn from_outcome(value: f64, out: RunOutcome) -> Self {
        let mut row = Self::empty(value, out.dir);
        row.status = match out.manifest.status {
            RunStatus::Complete => "complete",
            RunStatus::Aborted => "aborted",
            RunStatus::Incomplete => "incomplete",
        }
        .into();
        row.detail = out.manifest.abort.map(|a| a.reason);
        let [minus, _] = &out.conditions.besov;
        row.besov_minus_lhs = Some(minus.lhs);
        row.besov_minus_threshold = Some(minus.threshold);
        row.besov_minus_holds = Some(minus.holds);
        row.chi_minus_lhs = Some(out.conditions.chi[0].lhs);
        row.chi_minus_holds = Some(out.conditions.chi[0].holds);
        if let Some(s) = out.summary {
            row.t_final = Some(s.t_final);
            row.bootstrap_max = Some(s.besov_bootstrap.max);
            row.bootstrap_violation = s.besov_bootstrap.first_violation;
            row.chi_bootstrap_violation = s.chi_bootstrap.first_violation;
            row.w_plus_bound_holds = Some(s.w_plus_bound_besov.holds);
            row.w_minus_final = Some(s.w_minus_final);
            row.energy_final = Some(s.energy_final);
        }
        row
    }
}

fn cell<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

pub fn write_sweep_csv<W: Write>(mut w: W, axis: &str, rows: &[SweepRow]) -> Result<()> {
    writeln!(
        w,
        "{axis},dir,status,detail,t_final,besov_minus_lhs,besov_minus_threshold,besov_minus_holds,chi_minus_lhs,\
         chi_minus_holds,bootstrap_max,bootstrap_violation,chi_bootstrap_violation,w_plus_bound_holds,w_minus_final,\
         energy_final"
    )?;
    for r in rows {
        let detail = r.detail.as_deref().unwrap_or("").replace([',', '\n'], " ");
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.value,
            r.dir.display(),
            r.status,
            detail,
            cell(&r.t_final),
            cell(&r.besov_minus_lhs),
            cell(&r.besov_minus_threshold),
            cell(&r.besov_minus_holds),
            cell(&r.chi_minus_lhs),
            cell(&r.chi_minus_holds),
            cell(&r.bootstrap_max),
            cell(&r.bootstrap_violation),
            cell(&r.chi_bootstrap_violation),
            cell(&r.w_plus_bound_holds),
            cell(&r.w_minus_final),
            cell(&r.energy_final),
        )?;
    }
    Ok(())
}

/// Runs one copy of `base` per value of `axis`, in parallel, each in
/// `<output>/<axis>=<value>`, and writes `<output>/sweep.csv`. A member that
/// fails validation or errors is reported in its row; an unknown axis or an
/// empty value list fails the whole sweep.
pub fn run_sweep(base: &RunConfig, axis: &str, values: &[f64]) -> Result<Vec<SweepRow>> {
    if !SWEEP_AXES.contains(&axis) {
        let hint = suggest(axis, SWEEP_AXES).map(|k| format!("; did you mean `{k}`?")).unwrap_or_default();
        return Err(Error::Config { line: None, message: format!("invalid sweep axis `{axis}`{hint}") });
    }
    if values.is_empty() {
        return Err(Error::Config { line: None, message: "sweep needs at least one value".into() });
    }
    let root = Path::new(&base.output);
    fs::create_dir_all(root)?;
    let rows: Vec<SweepRow> = values
        .par_iter()
        .map(|&value| {
            let dir = root.join(format!("{axis}={value}"));
            let mut cfg = base.clone();
            cfg.output = dir.to_string_lossy().into_owned();
            let result = cfg.set_axis(axis, value).and_then(|_| run_experiment(&cfg, &RunOptions::default()));
            match result {
                Ok(out) => SweepRow::from_outcome(value, out),
                Err(e) => {
                    let mut row = SweepRow::empty(value, dir);
                    row.status = "error".into();
                    row.detail = Some(e.to_string());
                    row
                }
            }
        })
        .collect();
    let mut f = std::io::BufWriter::new(fs::File::create(root.join(SWEEP_FILE))?);
    write_sweep_csv(&mut f, axis, &rows)?;
    f.flush()?;
    Ok(rows)
}
