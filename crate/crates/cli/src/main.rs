use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use elsasser::experiments::{
    annotate_run, check_conditions, evaluate_norms, gen_data, inequality_suite, parse_config, parse_norm_spec,
    run_experiment, run_sweep, write_suite, ConditionConfig, MonitorSpec, RunOptions, RunStatus,
};
use elsasser::initial_data::StreamSpec;
use elsasser::solver::{MonitoredField, Viscosities};
use elsasser::spaces::write_norm_csv;
use elsasser::Error;

/// Pseudo-spectral MHD in Elsässer variables, Besov and Lei-Lin norms,
/// smallness conditions and inequality checks.
///
/// Exit codes: 0 ok, 1 other failure, 2 configuration or input error,
/// 3 numerical abort (CFL violation, non-finite values, blow-up).
#[derive(Parser)]
#[command(name = "elsasser", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a large-data pair (u0, B0) and write it as a checkpoint plus
    /// a JSON sidecar of its norms.
    GenData(GenData),
    /// Evaluate every smallness condition for a (u0, B0) checkpoint.
    CheckConditions(CheckConditions),
    /// Run the solver from a TOML configuration.
    Run(Run),
    /// Run one copy of a configuration per value of a numeric parameter.
    Sweep(Sweep),
    /// Recompute bootstrap traces and a-priori bounds for a run directory.
    Monitor(Monitor),
    /// Numerically check the harmonic-analysis inequalities.
    InequalitySuite(Suite),
    /// Evaluate Besov norms of the fields in a checkpoint.
    Norms(Norms),
}

#[derive(Args)]
struct GenData {
    /// Grid points per direction (power of two).
    #[arg(long, default_value_t = 32)]
    n: usize,
    /// Inner radius of the stream-function shell.
    #[arg(long)]
    rho_min: f64,
    /// Outer radius of the stream-function shell.
    #[arg(long)]
    rho_max: f64,
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
    /// Oscillation frequency of the magnetic modulation (ε = 1/m).
    #[arg(long)]
    m: u32,
    /// Use seeded random phases instead of the deterministic pattern.
    #[arg(long)]
    seed: Option<u64>,
    /// Lebesgue exponent of the reported critical Besov norms.
    #[arg(long, default_value_t = 6.0)]
    p: f64,
    /// Summability exponent of the reported norms.
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    /// Checkpoint path; the sidecar goes next to it with extension .json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ConditionArgs {
    /// Lebesgue exponent p of the critical Besov space.
    #[arg(long, default_value_t = 6.0)]
    p: f64,
    /// Summability exponent r.
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    /// Constant C in the exponential factor.
    #[arg(long = "C", default_value_t = 1.0)]
    big_c: f64,
    #[arg(long, default_value_t = 0.01)]
    eta: f64,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.05)]
    epsilon0: f64,
    #[arg(long = "C1", default_value_t = 1.0)]
    c1: f64,
    #[arg(long = "C2", default_value_t = 1.0)]
    c2: f64,
    /// Constant c of the dissipation lemma.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
}

impl ConditionArgs {
    fn config(&self) -> ConditionConfig {
        ConditionConfig {
            p: self.p,
            r: self.r,
            big_c: self.big_c,
            eta: self.eta,
            epsilon: self.epsilon,
            epsilon0: self.epsilon0,
            c1: self.c1,
            c2: self.c2,
            c: self.c,
            b: None,
        }
    }
}

#[derive(Args)]
struct CheckConditions {
    /// Six-component checkpoint holding u then B.
    data: PathBuf,
    /// Kinematic viscosity μ1 (> 0).
    #[arg(long)]
    viscosity: f64,
    /// Magnetic diffusivity μ2 (> 0).
    #[arg(long)]
    diffusivity: f64,
    #[command(flatten)]
    constants: ConditionArgs,
    /// Also write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print JSON instead of the table.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct Run {
    /// TOML configuration.
    config: PathBuf,
    /// Continue the run directory from its last checkpoint.
    #[arg(long)]
    resume: bool,
    /// Stop after this many new snapshots, leaving the run incomplete.
    #[arg(long)]
    stop_after: Option<u64>,
    /// Override the output directory of the configuration.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct Sweep {
    /// TOML configuration used as the base of every member.
    config: PathBuf,
    /// Parameter to vary, e.g. m, nu_minus, dt, viscosity.
    #[arg(long)]
    axis: String,
    /// Comma-separated values.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    values: Vec<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct Monitor {
    /// Run directory written by `run`.
    dir: PathBuf,
}

#[derive(Args)]
struct Suite {
    #[arg(long, default_value_t = 32)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for results.json and ratios.csv.
    #[arg(long, default_value = "inequality-suite")]
    out: PathBuf,
}

#[derive(Args)]
struct Norms {
    /// Six-component checkpoint holding u then B.
    data: PathBuf,
    /// Norm as field:s:p:r, e.g. W-:-0.5:6:1 (repeatable; p and r accept
    /// inf). Defaults to u, B, W+ and W- in the critical space with p = 6,
    /// r = 1.
    #[arg(long = "norm")]
    norms: Vec<String>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        _ if e.is_numerical() => 3,
        Error::Config { .. }
        | Error::InvalidGridSize(_)
        | Error::InvalidPartition { .. }
        | Error::InvalidExponent(_)
        | Error::InadmissiblePair { .. }
        | Error::BandOverflow(_)
        | Error::InvalidInput(_) => 2,
        _ => 1,
    }
}

fn execute(cli: Cli) -> Result<u8, Error> {
    let mut out = io::stdout().lock();
    match cli.command {
        Command::GenData(a) => {
            let stream = match a.seed {
                Some(seed) => StreamSpec::seeded(a.rho_min, a.rho_max, a.amplitude, seed),
                None => StreamSpec::deterministic(a.rho_min, a.rho_max, a.amplitude),
            };
            let side = gen_data(a.n, stream, a.m, a.p, a.r, &a.out)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&side)?)?;
        }
        Command::CheckConditions(a) => {
            let visc = Viscosities::new(a.viscosity, a.diffusivity)
                .map_err(|e| Error::Config { line: None, message: e.to_string() })?;
            let report = check_conditions(&a.data, &visc, &a.constants.config())?;
            let json = serde_json::to_string_pretty(&report)?;
            if let Some(path) = &a.out {
                fs::write(path, &json)?;
            }
            if a.json {
                writeln!(out, "{json}")?;
            } else {
                write!(out, "{}", report.table())?;
            }
        }
        Command::Run(a) => {
            let mut config = parse_config(&fs::read_to_string(&a.config)?)?;
            if let Some(dir) = a.output {
                config.output = dir.to_string_lossy().into_owned();
            }
            let outcome = run_experiment(&config, &RunOptions { resume: a.resume, stop_after: a.stop_after })?;
            let m = &outcome.manifest;
            let status = match m.status {
                RunStatus::Complete => "complete",
                RunStatus::Aborted => "aborted",
                RunStatus::Incomplete => "incomplete",
            };
            writeln!(out, "{}: {status}, {} snapshots", outcome.dir.display(), m.snapshots.len())?;
            if let Some(abort) = &m.abort {
                writeln!(out, "abort ({}): {}", abort.reason, abort.message)?;
            }
            write!(out, "{}", outcome.conditions.table())?;
            return Ok(outcome.exit_code() as u8);
        }
        Command::Sweep(a) => {
            let mut config = parse_config(&fs::read_to_string(&a.config)?)?;
            if let Some(dir) = a.output {
                config.output = dir.to_string_lossy().into_owned();
            }
            let rows = run_sweep(&config, &a.axis, &a.values)?;
            for r in &rows {
                writeln!(out, "{}={}: {} {}", a.axis, r.value, r.status, r.detail.as_deref().unwrap_or(""))?;
            }
            writeln!(out, "summary: {}", PathBuf::from(&config.output).join("sweep.csv").display())?;
        }
        Command::Monitor(a) => {
            let summary = annotate_run(&a.dir)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&summary)?)?;
        }
        Command::InequalitySuite(a) => {
            let stats = inequality_suite(a.n, a.samples, a.seed)?;
            write_suite(&a.out, &stats)?;
            for s in &stats {
                writeln!(
                    out,
                    "{:<24} n={:<4} samples={:<4} min={:.6e} median={:.6e} max={:.6e} {}",
                    s.id,
                    s.n,
                    s.samples,
                    s.min,
                    s.median,
                    s.max,
                    if s.verdict { "PASS" } else { "FAIL" }
                )?;
            }
            if stats.iter().any(|s| !s.verdict) {
                return Ok(1);
            }
        }
        Command::Norms(a) => {
            let specs: Vec<MonitorSpec> = if a.norms.is_empty() {
                MonitoredField::ALL.iter().map(|&field| MonitorSpec { field, s: -0.5, p: 6.0, r: 1.0 }).collect()
            } else {
                a.norms.iter().map(|s| parse_norm_spec(s)).collect::<Result<_, _>>()?
            };
            write_norm_csv(&mut out, &evaluate_norms(&a.data, &specs)?)?;
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
