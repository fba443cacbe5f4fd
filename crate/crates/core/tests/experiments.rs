use std::fs;
use std::path::Path;

use elsasser::experiments::*;
use elsasser::initial_data::StreamSpec;
use elsasser::solver::Viscosities;

fn config(dir: &Path, t_end: f64) -> RunConfig {
    let text = format!(
        r#"
n = 16
viscosity = 1.0
diffusivity = 0.6
output = "{}"

[data]
kind = "large-data"
rho_min = 1.0
rho_max = 2.0
amplitude = 0.1
m = 2

[integrator]
dt = 0.01
t_end = {t_end}
snapshot_every = 3
"#,
        dir.display()
    );
    parse_config(&text).unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn zero_horizon_writes_condition_report_only() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let out = run_experiment(&config(&dir, 0.0), &RunOptions::default()).unwrap();
    assert_eq!(out.manifest.status, RunStatus::Complete);
    let mut names: Vec<String> = fs::read_dir(&dir).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, [CONDITIONS_FILE, CONFIG_FILE, MANIFEST_FILE]);
    out.manifest.verify(&dir).unwrap();
    let json: serde_json::Value = serde_json::from_str(&read(&dir, CONDITIONS_FILE)).unwrap();
    assert_eq!(json["besov"].as_array().unwrap().len(), 2);
    assert!(json["besov_equal_viscosity"].is_null());
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_experiment(&config(&a, 0.1), &RunOptions::default()).unwrap();
    run_experiment(&config(&b, 0.1), &RunOptions::default()).unwrap();
    for f in ["norms.csv", "energy.csv", "chi.csv", "bootstrap_besov.csv", "bootstrap_chi.csv", "w_plus_bound.csv"] {
        assert_eq!(read(&a, f), read(&b, f), "{f}");
    }
    let m = RunManifest::load(&a).unwrap();
    m.verify(&a).unwrap();
    assert_eq!(m.status, RunStatus::Complete);
    // steps 0, 3, 6, 9 and the final step 10
    assert_eq!(m.snapshots.iter().map(|s| s.step).collect::<Vec<_>>(), [0, 3, 6, 9, 10]);
    assert!(m.files.iter().any(|f| f.path == "checkpoints/step_00000010.elsf"));
    let norms = read(&a, "norms.csv");
    assert!(norms.starts_with("t,name,s,p,r,value\n"));
    assert_eq!(norms.lines().count(), 1 + 5 * 4);
}

#[test]
fn existing_directory_needs_resume() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    run_experiment(&config(&dir, 0.0), &RunOptions::default()).unwrap();
    assert!(matches!(run_experiment(&config(&dir, 0.0), &RunOptions::default()), Err(elsasser::Error::Config { .. })));
}

#[test]
fn huge_dt_aborts_with_cfl() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let mut cfg = config(&dir, 100.0);
    cfg.integrator.dt = 50.0;
    let out = run_experiment(&cfg, &RunOptions::default()).unwrap();
    assert_eq!(out.exit_code(), 3);
    let m = RunManifest::load(&dir).unwrap();
    assert_eq!(m.status, RunStatus::Aborted);
    assert_eq!(m.abort.as_ref().unwrap().reason, "cfl");
    m.verify(&dir).unwrap();
}

#[test]
fn interrupted_run_resumes_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let (full, cut) = (tmp.path().join("full"), tmp.path().join("cut"));
    run_experiment(&config(&full, 0.2), &RunOptions::default()).unwrap();

    let cfg = config(&cut, 0.2);
    let out = run_experiment(&cfg, &RunOptions { resume: false, stop_after: Some(3) }).unwrap();
    assert_eq!(out.manifest.status, RunStatus::Incomplete);
    let m = RunManifest::load(&cut).unwrap();
    assert_eq!(m.status, RunStatus::Incomplete);
    assert_eq!(m.snapshots.len(), 3);
    assert!(!cut.join("norms.csv").exists());

    let out = run_experiment(&cfg, &RunOptions { resume: true, stop_after: Some(2) }).unwrap();
    assert_eq!(out.manifest.status, RunStatus::Incomplete);
    let out = run_experiment(&cfg, &RunOptions { resume: true, stop_after: None }).unwrap();
    assert_eq!(out.manifest.status, RunStatus::Complete);
    for f in ["norms.csv", "energy.csv", "chi.csv", "bootstrap_besov.csv", "w_plus_bound_chi.csv"] {
        assert_eq!(read(&full, f), read(&cut, f), "{f}");
    }
    // resuming a finished run is a no-op
    let again = run_experiment(&cfg, &RunOptions { resume: true, stop_after: None }).unwrap();
    assert_eq!(again.manifest.status, RunStatus::Complete);
    assert_eq!(read(&full, "norms.csv"), read(&cut, "norms.csv"));
}

#[test]
fn resume_rejects_changed_config() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let cfg = config(&dir, 0.2);
    run_experiment(&cfg, &RunOptions { resume: false, stop_after: Some(1) }).unwrap();
    let mut other = cfg.clone();
    other.viscosity = 2.0;
    assert!(run_experiment(&other, &RunOptions { resume: true, stop_after: None }).is_err());
}

#[test]
fn annotate_rewrites_traces() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let out = run_experiment(&config(&dir, 0.1), &RunOptions::default()).unwrap();
    let before = read(&dir, "bootstrap_besov.csv");
    fs::remove_file(dir.join("bootstrap_besov.csv")).unwrap();
    let summary = annotate_run(&dir).unwrap();
    assert_eq!(Some(summary), out.summary);
    assert_eq!(read(&dir, "bootstrap_besov.csv"), before);
    RunManifest::load(&dir).unwrap().verify(&dir).unwrap();
}

#[test]
fn sweep_over_m() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().join("sweep");
    let rows = run_sweep(&config(&root, 0.05), "m", &[1.0, 2.0, 3.0]).unwrap();
    assert_eq!(rows.len(), 3);
    for (r, m) in rows.iter().zip(["1", "2", "3"]) {
        assert_eq!(r.status, "complete");
        assert!(root.join(format!("m={m}")).join(MANIFEST_FILE).exists());
    }
    let csv = read(&root, SWEEP_FILE);
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.starts_with("m,dir,status"));
}

#[test]
fn sweep_nu_minus_towards_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().join("sweep");
    let values = [0.4, 0.3, 0.2, 0.1, 0.0];
    let rows = run_sweep(&config(&root, 0.0), "nu_minus", &values).unwrap();
    let lhs: Vec<f64> = rows.iter().map(|r| r.besov_minus_lhs.unwrap()).collect();
    assert!(lhs.windows(2).all(|w| w[1] <= w[0]), "{lhs:?}");
}

#[test]
fn sweep_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(&tmp.path().join("s"), 0.0);
    assert!(run_sweep(&cfg, "m", &[]).is_err());
    let e = run_sweep(&cfg, "viscocity", &[1.0]).unwrap_err().to_string();
    assert!(e.contains("viscosity"), "{e}");
    // a member that fails validation is reported, not fatal
    let rows = run_sweep(&cfg, "diffusivity", &[0.0, 1.0]).unwrap();
    assert_eq!(rows[0].status, "error");
    assert_eq!(rows[1].status, "complete");
}

#[test]
fn gen_data_and_one_shot_commands() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("data/pair.elsf");
    let side = gen_data(16, StreamSpec::deterministic(1.0, 2.0, 1.0), 2, 6.0, 1.0, &path).unwrap();
    assert!(side.covered);
    assert!(side.b0 > 0.0 && side.difference > 0.0);
    let json: DataSidecar = serde_json::from_str(&fs::read_to_string(path.with_extension("json")).unwrap()).unwrap();
    assert_eq!(json, side);

    let visc = Viscosities::new(1.0, 1.0).unwrap();
    let rep = check_conditions(&path, &visc, &ConditionConfig::default()).unwrap();
    assert!((rep.besov[0].small_norm - side.w_minus).abs() <= 1e-12 * side.w_minus);
    assert!(rep.besov_equal_viscosity.is_some());
    assert!(rep.table().contains("besov-minus"));

    let specs = [parse_norm_spec("W-:-0.5:6:1").unwrap(), parse_norm_spec("u:-0.5:6:1").unwrap()];
    let rows = evaluate_norms(&path, &specs).unwrap();
    assert_eq!(rows[0].value, side.w_minus);
    assert_eq!(rows[1].value, side.u0);
    assert!(parse_norm_spec("W-:-0.5:6").is_err());
    assert!(parse_norm_spec("Q:0:2:2").is_err());
    assert!(parse_norm_spec("u:0:inf:inf").is_ok());

    // the checkpoint feeds a run directly
    let text = format!(
        "n = 16\nviscosity = 1.0\ndiffusivity = 1.0\noutput = \"{}\"\n[data]\nkind = \"checkpoint\"\npath = \"{}\"\n\
         [integrator]\ndt = 0.01\nt_end = 0.0\n",
        tmp.path().join("run").display(),
        path.display()
    );
    let out = run_experiment(&parse_config(&text).unwrap(), &RunOptions::default()).unwrap();
    assert_eq!(out.conditions.besov[0].small_norm, rep.besov[0].small_norm);
}

#[test]
fn inequality_suite_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(inequality_suite(16, 4, 3).is_err());
    let stats = inequality_suite(32, 3, 3).unwrap();
    assert!(stats.len() >= 14);
    write_suite(tmp.path(), &stats).unwrap();
    let json: serde_json::Value = serde_json::from_str(&read(tmp.path(), "results.json")).unwrap();
    let first = &json.as_array().unwrap()[0];
    for key in ["id", "n", "samples", "min", "median", "max", "bound", "verdict"] {
        assert!(first.get(key).is_some(), "{key}");
    }
    assert!(read(tmp.path(), "ratios.csv").starts_with("id,n,index,ratio\n"));
    assert_eq!(stats, inequality_suite(32, 3, 3).unwrap());
}
