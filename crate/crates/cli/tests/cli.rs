use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pulse-cns"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pulse-cns-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn toy_prints_closed_form() {
    // delta^alpha = 1, so f(1) = 1 / (1 + 1)
    let o = bin().args(["toy", "--delta", "1", "--alpha", "1", "--t", "1"]).output().unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "t = 1: f = 0.5");
}

#[test]
fn envelope_prints_schedule() {
    let o = bin().args(["envelope", "--delta", "3.0517578125e-5", "--alpha", "1"]).output().unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("N0 = 15, in regime: false"), "{text}");
    assert!(text.contains("T0 = 2.670288e-5"), "{text}");
}

#[test]
fn verify_identities_suite() {
    let o = bin().args(["verify", "--suite", "identities"]).output().unwrap();
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("checks passed"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = scratch("usage");
    std::fs::write(dir.join("bad.cfg"), "grid.n = 16\nfoo.bar = 1\n").unwrap();
    let o = run_in(&dir, &["run", "--config", "bad.cfg"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    let o = run_in(&dir, &["run", "--config", "missing.cfg"]);
    assert_eq!(o.status.code(), Some(2));

    std::fs::write(dir.join("ok.cfg"), "grid.n = 16\n").unwrap();
    let o = run_in(&dir, &["diagnose", "--config", "ok.cfg", "nothing.pcns"]);
    assert_eq!(o.status.code(), Some(2));

    let o = run_in(&dir, &["verify", "--suite", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));

    let o = run_in(&dir, &["report", "--config", "ok.cfg"]);
    assert_eq!(o.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn init_run_diagnose_report() {
    let dir = scratch("flow");
    let cfg = "grid.n = 16\n\
               solver.t_end = 0.002\n\
               solver.checkpoint_every = 4\n\
               solver.diagnostics_every = 2\n\
               lagrangian.seeds = 0.5,0.5,0.625; 0.5,0.625,0.5\n\
               output.dir = out\n";
    std::fs::write(dir.join("pulse.cfg"), cfg).unwrap();

    let o = run_in(&dir, &["init"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.join("out/checkpoint_00000000.pcns").exists());

    let o = run_in(&dir, &["run"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("8 steps"), "{text}");
    assert!(text.contains("2 trajectories"), "{text}");
    let csv = std::fs::read_to_string(dir.join("out/diagnostics.csv")).unwrap();
    let rows = pulse_cns::csv::parse_diagnostics(&csv).unwrap();
    assert_eq!(rows.len(), 5);
    assert!(dir.join("out/checkpoint_00000008.pcns").exists());
    let traj = std::fs::read_to_string(dir.join("out/trajectory_001.csv")).unwrap();
    assert_eq!(pulse_cns::lagrangian::parse_trajectory_csv(&traj).unwrap().len(), 5);

    let o = run_in(
        &dir,
        &["diagnose", "--out", "again.csv", "out/checkpoint_00000004.pcns", "out/checkpoint_00000000.pcns"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let again = pulse_cns::csv::parse_diagnostics(&std::fs::read_to_string(dir.join("again.csv")).unwrap()).unwrap();
    assert_eq!(again.len(), 2);
    assert_eq!(again[0].t, 0.0);
    assert!((again[1].e - rows[2].e).abs() <= 1e-9 * rows[2].e);

    let o = run_in(&dir, &["report"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = std::fs::read_to_string(dir.join("out/report.txt")).unwrap();
    assert!(report.contains("5 records"), "{report}");
    assert!(report.contains("inequality violations: none"), "{report}");
    assert!(dir.join("out/envelope.csv").exists());

    let o = run_in(&dir, &["run", "--from", "out/checkpoint_00000008.pcns"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let resumed = pulse_cns::csv::parse_diagnostics(&std::fs::read_to_string(dir.join("out/diagnostics.csv")).unwrap()).unwrap();
    assert!((resumed[0].t - 0.002).abs() < 1e-12);
    std::fs::remove_dir_all(&dir).unwrap();
}
