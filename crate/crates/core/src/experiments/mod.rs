//! Configuration, orchestration and persistence.
//!
//! A run directory holds:
//!
//! | file | content |
//! |---|---|
//! | `config.toml` | validated configuration with defaults filled |
//! | `manifest.json` | config hash, wall times, status, snapshots, file sizes, abort reason |
//! | `conditions.json` | smallness conditions of the initial data |
//! | `checkpoints/step_XXXXXXXX.elsf` | `u` and `B` at every snapshot |
//! | `trajectory.json` | recorded block norms and scalar series |
//! | `norms.csv`, `energy.csv`, `chi.csv` | time series |
//! | `bootstrap_besov.csv`, `bootstrap_chi.csv` | bootstrap quantities against their thresholds |
//! | `w_plus_bound.csv`, `w_plus_bound_chi.csv` | a-priori `W⁺` bounds |
//! | `monitor.json` | headline numbers |

mod commands;
pub mod config;
mod manifest;
mod runner;
mod sweep;

pub use commands::{
    check_conditions, evaluate_norms, gen_data, inequality_suite, parse_norm_spec, write_suite, DataSidecar,
};
pub use config::{parse_config, ConditionConfig, DataConfig, IntegratorConfig, MonitorSpec, RunConfig, StreamKind};
pub use manifest::{FileEntry, RunManifest, RunStatus, SnapshotEntry, MANIFEST_FILE};
pub use runner::{
    annotate_run, chi_threshold, evaluate_conditions, initial_state, load_pair, run_experiment, save_pair,
    write_monitor_outputs, BoundSummary, ConditionsReport, MonitorSummary, RunOptions, RunOutcome, TraceSummary,
    CHECKPOINT_DIR, CONDITIONS_FILE, CONFIG_FILE, MONITOR_FILE, TRAJECTORY_FILE,
};
pub use sweep::{run_sweep, write_sweep_csv, SweepRow, SWEEP_FILE};
