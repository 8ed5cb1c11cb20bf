use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn paramils(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_paramils"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn saps() -> String {
    scenarios().join("saps/surrogate.scn").display().to_string()
}

#[test]
fn validate_example_scenarios() {
    let tmp = tempfile::tempdir().unwrap();
    let toy = scenarios().join("toy-wrapper/toy.scn");
    let o = paramils(tmp.path(), &["validate", &saps(), toy.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("4 parameters, 2401 assignments, 100 training / 100 test instances"), "{text}");
    assert!(text.contains("3 parameters"), "{text}");
}

#[test]
fn invalid_input_exits_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let o = paramils(tmp.path(), &["--set", "cutoff_time=0", "validate", &saps()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cutoff_time"), "{}", stderr(&o));

    let o = paramils(tmp.path(), &["validate", "/nonexistent/x.scn"]);
    assert_eq!(o.status.code(), Some(1));

    let o = paramils(tmp.path(), &["configure"]);
    assert_eq!(o.status.code(), Some(1));

    let o = paramils(tmp.path(), &["--set", "no_such_key=1", "validate", &saps()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn configure_evaluate_compare_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let args = ["--seed", "5", "--set", "budget_target_s=600", "configure", &saps(), "--runs", "5"];
    let o = paramils(&a, &args);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("best run: "));
    for f in ["summary.json", "best.cfg", "run-4/trajectory.csv", "run-0/evaluation.csv"] {
        assert!(a.join(f).is_file(), "missing {f}");
    }
    let trajectory = fs::read_to_string(a.join("run-0/trajectory.csv")).unwrap();
    assert!(trajectory.starts_with("# master_seed=5\nwall_s,target_s,iteration,incumbent_id,n_runs,train_estimate\n"));

    // existing outputs are protected
    let o = paramils(&a, &args);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("exists"), "{}", stderr(&o));
    let mut forced = vec!["--force"];
    forced.extend(args);
    assert!(paramils(&a, &forced).status.success());

    // evaluating the best incumbent reproduces the test PAR from the summary
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(a.join("summary.json")).unwrap()).unwrap();
    let best = summary["best_run"].as_u64().unwrap() as usize;
    let test_par = summary["runs"][best]["test_par"].as_f64().unwrap();
    let e = tmp.path().join("e");
    let best_cfg = a.join("best.cfg");
    let o = paramils(&e, &["--seed", "5", "evaluate", &saps(), best_cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with(&format!("test PAR {test_par} over 100 runs")), "{}", stdout(&o));

    // a run set compared with itself has no differences
    let o = paramils(tmp.path(), &["compare", a.to_str().unwrap(), a.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "p = 1\nno difference\n");

    // fewer than five paired runs cannot be tested
    let b = tmp.path().join("b");
    let o = paramils(&b, &["--seed", "5", "--set", "budget_target_s=300", "configure", &saps(), "--runs", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = paramils(tmp.path(), &["compare", b.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn evaluate_rejects_unknown_values() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    fs::write(&cfg, "alpha = 99\n").unwrap();
    let o = paramils(&tmp.path().join("o"), &["evaluate", &saps(), cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let o = paramils(&tmp.path().join("o"), &["evaluate", &saps(), "/nonexistent.cfg"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn toy_wrapper_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let toy = scenarios().join("toy-wrapper/toy.scn");
    let o = paramils(tmp.path(), &["configure", toy.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("heuristic = tabu"), "{text}");
    let eval = fs::read_to_string(tmp.path().join("run-0/evaluation.csv")).unwrap();
    assert_eq!(eval.lines().next(), Some("instance,cost,status"));
    assert_eq!(eval.lines().count(), 3);
}
