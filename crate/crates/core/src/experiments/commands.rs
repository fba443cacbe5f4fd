use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ConditionConfig, MonitorSpec};
use super::runner::{evaluate_conditions, load_pair, save_pair, ConditionsReport};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::initial_data::{large_data_pair, make_stream, StreamSpec};
use crate::lab::{
    verify_bernstein, verify_chi_chain_and_interp, verify_chi_product, verify_dissipation_bound, verify_skp1,
    verify_skp2_random, write_ratios_csv, RatioStats, Skp2Params,
};
use crate::littlewood_paley::DyadicPartition;
use crate::random::Band;
use crate::solver::{MonitoredField, State, Viscosities};
use crate::spaces::{besov_norm, chi_norm, BesovParams, Exponent, NormRow};

/// Norms of a generated large-data pair at the critical index `3/p - 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataSidecar {
    pub n: usize,
    pub stream: StreamSpec,
    pub m: u32,
    pub p: f64,
    pub r: f64,
    pub s: f64,
    pub u0: f64,
    pub b0: f64,
    pub difference: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    pub w_plus_chi_minus_one: f64,
    pub w_minus_chi_minus_one: f64,
    /// Whether the data lies inside the band covered by the partition.
    pub covered: bool,
}

/// Builds a large-data pair, writes it as a six-component checkpoint at
/// `out` and the sidecar next to it (`.json`).
pub fn gen_data(n: usize, stream: StreamSpec, m: u32, p: f64, r: f64, out: &Path) -> Result<DataSidecar> {
    let grid = Grid::new(n)?;
    let part = DyadicPartition::for_grid(&grid);
    let pair = large_data_pair(&make_stream(&stream, &grid)?, m)?;
    let params = BesovParams::critical(p, r)?;
    let (wp, wm) = pair.elsasser()?;
    let b = |f| besov_norm(f, params, &part);
    let sidecar = DataSidecar {
        n,
        stream,
        m,
        p,
        r,
        s: params.s,
        u0: b(&pair.u0)?,
        b0: b(&pair.b0)?,
        difference: b(&pair.difference())?,
        w_plus: b(&wp)?,
        w_minus: b(&wm)?,
        w_plus_chi_minus_one: chi_norm(&wp, -1.0),
        w_minus_chi_minus_one: chi_norm(&wm, -1.0),
        covered: part.covers(&pair.u0) && part.covers(&pair.b0),
    };
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    save_pair(out, &pair.u0, &pair.b0)?;
    fs::write(out.with_extension("json"), serde_json::to_string_pretty(&sidecar)?)?;
    Ok(sidecar)
}

/// Every smallness condition for the `(u0, B0)` pair stored at `path`.
pub fn check_conditions(path: &Path, visc: &Viscosities, cfg: &ConditionConfig) -> Result<ConditionsReport> {
    let (u, b) = load_pair(path)?;
    let part = DyadicPartition::for_grid(u.grid());
    evaluate_conditions(&u, &b, visc, cfg, &part)
}

/// One-shot Besov norms of the fields in a checkpoint.
pub fn evaluate_norms(path: &Path, specs: &[MonitorSpec]) -> Result<Vec<NormRow>> {
    let (u, b) = load_pair(path)?;
    let part = DyadicPartition::for_grid(u.grid());
    let state = State::new(u, b)?;
    specs
        .iter()
        .map(|m: &MonitorSpec| {
            let params = BesovParams::new(m.s, m.p, m.r)?;
            let value = besov_norm(&m.field.of(&state), params, &part)?;
            Ok(NormRow { t: 0.0, name: m.name(), s: m.s, p: params.p, r: params.r, value })
        })
        .collect()
}

/// Parses `field:s:p:r` (e.g. `W-:-0.5:6:1`, `u:0:inf:2`).
pub fn parse_norm_spec(text: &str) -> Result<MonitorSpec> {
    let bad = || Error::InvalidInput(format!("norm spec {text:?} is not of the form field:s:p:r"));
    let parts: Vec<&str> = text.split(':').collect();
    let [field, s, p, r] = parts[..] else { return Err(bad()) };
    let num = |x: &str| -> Result<f64> {
        match x {
            "inf" => Ok(f64::INFINITY),
            _ => x.parse().map_err(|_| bad()),
        }
    };
    let spec = MonitorSpec { field: MonitoredField::parse(field)?, s: num(s)?, p: num(p)?, r: num(r)? };
    Exponent::new(spec.p)?;
    Exponent::new(spec.r)?;
    Ok(spec)
}

/// The full inequality battery on an `n³` grid, `n ≥ 32` so that every
/// test band is dealias-safe.
pub fn inequality_suite(n: usize, samples: usize, seed: u64) -> Result<Vec<RatioStats>> {
    if n < 32 {
        return Err(Error::InvalidInput(format!("the inequality suite needs n >= 32, got {n}")));
    }
    let grid = Grid::new(n)?;
    let part = DyadicPartition::for_grid(&grid);
    let mut out = Vec::new();
    let (ball, annulus) = verify_bernstein(&grid, samples, seed)?;
    out.extend([ball, annulus]);
    for p in [2, 4, 6] {
        out.push(verify_dissipation_bound(&grid, p, 2.0, 4.0, samples, seed)?);
    }
    for p in [2.0, 4.0, 6.0] {
        for r in [1.0, 2.0] {
            out.push(verify_skp1(&part, p, r, samples, seed)?);
        }
    }
    let skp2_samples = samples.min(16);
    out.push(verify_skp2_random(&part, &Skp2Params::new(4.0, 2.0, 0.5)?, skp2_samples, seed)?);
    out.push(verify_skp2_random(&part, &Skp2Params::endpoint(4.0), skp2_samples, seed)?);
    let product_band = Band::new(1.0, (grid.dealias_cutoff() / 2.0).floor());
    out.push(verify_chi_product(&grid, product_band, samples, seed)?);
    let (eq, interp) = verify_chi_chain_and_interp(&part, samples, seed)?;
    out.extend([eq, interp]);
    Ok(out)
}

/// `results.json` and `ratios.csv` in `dir`.
pub fn write_suite(dir: &Path, stats: &[RatioStats]) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("results.json"), serde_json::to_string_pretty(stats)?)?;
    let mut w = BufWriter::new(fs::File::create(dir.join("ratios.csv"))?);
    write_ratios_csv(&mut w, stats)?;
    w.flush()?;
    Ok(())
}
