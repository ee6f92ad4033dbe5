use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const HAWKES: &str = r#"
task = "lln"

[model.kernel]
shape = "exponential"
amplitude = 1.0
decay = 2.0

[model.rate]
shape = "linear"
base = 1.0

[sim]
seed = 42
horizon = 500.0
replicas = 20

[rate_fn]
start = 0.0
stop = 5.0
step = 0.1

[rare_event]
threshold = 3.0
"#;

fn run(dir: &Path, config: &str, args: &[&str]) -> Output {
    let path = dir.join("run.toml");
    fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_hawkes-ldp"))
        .args(args)
        .arg("--config")
        .arg(&path)
        .output()
        .unwrap()
}

fn records(stdout: &[u8]) -> Vec<Value> {
    std::str::from_utf8(stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn lln_reports_the_stationary_rate() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), HAWKES, &["lln"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let recs = records(&out.stdout);
    assert_eq!(recs.len(), 1);
    let v = &recs[0]["values"];
    let (mean, se) = (v["mean_rate"].as_f64().unwrap(), v["std_err"].as_f64().unwrap());
    assert!((mean - 2.0).abs() <= 4.0 * se, "{mean} ± {se}");
    assert_eq!(v["mu"].as_f64(), Some(2.0));
    assert_eq!(recs[0]["task"], "lln");
    assert_eq!(recs[0]["config_hash"].as_str().unwrap().len(), 16);
}

#[test]
fn rate_fn_grid_has_51_points_and_vanishes_at_the_mean() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), HAWKES, &["rate-fn"]);
    assert!(out.status.success());
    let recs = records(&out.stdout);
    assert_eq!(recs.len(), 51);
    let at_two = recs.iter().find(|r| r["values"]["x"].as_f64() == Some(2.0)).unwrap();
    assert!(at_two["values"]["I"].as_f64().unwrap().abs() <= 1e-12);
    assert_eq!(recs[0]["values"]["I"].as_f64(), Some(1.0));
}

#[test]
fn reruns_are_identical_up_to_wall_time() {
    let dir = tempfile::tempdir().unwrap();
    let strip = |out: Output| {
        let mut recs = records(&out.stdout);
        for r in &mut recs {
            r.as_object_mut().unwrap().remove("wall_time_ms");
        }
        recs
    };
    let args = ["rare-event", "--horizon", "30", "--replicas", "500"];
    let a = strip(run(dir.path(), HAWKES, &args));
    let b = strip(run(dir.path(), HAWKES, &args));
    assert_eq!(a, b);
    assert!(a[0]["values"]["p_hat"].as_f64().unwrap() > 0.0);
}

#[test]
fn output_directory_gets_results_config_and_events() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let config = format!("{HAWKES}\n[output]\nbinary = true\n");
    let out = run(
        dir.path(),
        &config,
        &["simulate", "--replicas", "2", "--horizon", "10", "--out", out_dir.to_str().unwrap()],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let results = fs::read_to_string(out_dir.join("results.jsonl")).unwrap();
    assert_eq!(results.lines().count(), 2);
    let resolved = fs::read_to_string(out_dir.join("config.resolved")).unwrap();
    assert!(resolved.contains("simulate"));
    for r in 0..2 {
        let csv = fs::read_to_string(out_dir.join(format!("events_{r}.csv"))).unwrap();
        assert_eq!(csv.lines().next(), Some("time"));
        assert!(out_dir.join(format!("events_{r}.bin")).exists());
    }
}

#[test]
fn loglik_reads_an_event_file() {
    let dir = tempfile::tempdir().unwrap();
    let events = dir.path().join("events.csv");
    fs::write(&events, "time\n0.5\n1.25\n").unwrap();
    let config = HAWKES.replace("task = \"lln\"", "task = \"loglik\"")
        + &format!(
            "\n[loglik]\nevents = {:?}\n[loglik.target.kernel]\nshape = \"exponential\"\namplitude = 1.0\ndecay = 2.0\n[loglik.target.rate]\nshape = \"linear\"\nbase = 2.0\n",
            events.to_str().unwrap()
        );
    let out = run(dir.path(), &config, &["loglik", "--horizon", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let recs = records(&out.stdout);
    assert_eq!(recs.len(), 1);
    let v = &recs[0]["values"];
    let sum = v["compensator_diff"].as_f64().unwrap() + v["jump_term"].as_f64().unwrap();
    assert!((sum - v["log_ratio"].as_f64().unwrap()).abs() < 1e-12);
    // constant shift ν → 2ν with equal excitation: compensator difference is −ν·t
    assert!((v["compensator_diff"].as_f64().unwrap() + 2.0).abs() < 1e-12);
}

fn assert_error(out: &Output, code: i32, tag: &str) {
    assert_eq!(out.status.code(), Some(code));
    let stderr = String::from_utf8(out.stderr.clone()).unwrap();
    assert_eq!(stderr.lines().count(), 1, "{stderr}");
    assert!(stderr.starts_with(&format!("error code={tag} exit={code}:")), "{stderr}");
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_error(&run(dir.path(), &HAWKES.replace("amplitude = 1.0", "amplitude = 2.5"), &["lln"]), 2, "config");
    assert_error(&run(dir.path(), &format!("{HAWKES}\nbogus = 1\n"), &["lln"]), 2, "config");
    let no_threshold = HAWKES.replace("threshold = 3.0", "");
    let out = run(dir.path(), &no_threshold, &["rare-event"]);
    assert_error(&out, 2, "config");
    assert!(String::from_utf8_lossy(&out.stderr).contains("rare_event.threshold"));
}

#[test]
fn runtime_errors_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = HAWKES.replace("task = \"lln\"", "task = \"loglik\"")
        + "\n[loglik]\nevents = \"/nonexistent/events.csv\"\n[loglik.target.kernel]\nshape = \"exponential\"\namplitude = 1.0\ndecay = 2.0\n[loglik.target.rate]\nshape = \"linear\"\nbase = 2.0\n";
    assert_error(&run(dir.path(), &config, &["loglik"]), 3, "io");
}

#[test]
fn explosion_guard_exits_with_4() {
    let dir = tempfile::tempdir().unwrap();
    let config = HAWKES.replace("replicas = 20", "replicas = 1\nmax_events = 50");
    assert_error(&run(dir.path(), &config, &["simulate"]), 4, "explosion");
}
