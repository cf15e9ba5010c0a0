//! The command-line binary: outputs, files and exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_merit-dynamics"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn simulate_writes_trajectory_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig1.csv");
    let args = [
        "simulate", "--model", "ea", "--alpha", "0.3", "--p", "0.9", "--q", "0.4", "--n", "2000", "--t", "400",
        "--runs", "1", "--init", "0.1,0.7", "--seed", "3", "--out",
    ];
    let mut full = args.to_vec();
    full.push(path.to_str().unwrap());
    assert!(run(&full).status.success());
    let first = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = first.lines().collect();
    assert_eq!(lines[0], "t,x_a,x_b,delta,regime,admits_a,admits_b");
    assert_eq!(lines.len(), 402);
    assert!(lines[1].starts_with("0,0.1,0.7,"));
    assert!(lines[1].ends_with(",over,150,1050"));

    assert!(run(&full).status.success());
    assert_eq!(first, std::fs::read_to_string(&path).unwrap());
}

#[test]
fn simulate_ensemble_to_directory_and_thread_independence() {
    let dir = tempfile::tempdir().unwrap();
    let base = [
        "simulate", "--alpha", "0.3", "--p", "0.9", "--n", "500", "--t", "50", "--runs", "6", "--seed", "9",
    ];
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(format!("t{threads}"));
        let mut args = base.to_vec();
        args.extend(["--threads", threads, "--out", out.to_str().unwrap()]);
        let res = run(&args);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
        let files: Vec<String> = (0..6)
            .map(|i| std::fs::read_to_string(out.join(format!("run_{i:04}.csv"))).unwrap())
            .collect();
        outputs.push(files);
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_ne!(outputs[0][0], outputs[0][1]);
}

#[test]
fn invalid_input_exits_2() {
    let res = run(&["simulate", "--alpha", "0.6", "--p", "0.9", "--n", "10", "--t", "5"]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("alpha"));
    assert_eq!(run(&["simulate", "--frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["experiment", "no-such-preset"]).status.code(), Some(2));
    let several = run(&["simulate", "--alpha", "0.3", "--p", "0.9", "--n", "10", "--t", "5", "--runs", "2"]);
    assert_eq!(several.status.code(), Some(2));
}

#[test]
fn io_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let target = blocker.join("out.csv");
    let res = run(&[
        "simulate", "--alpha", "0.3", "--p", "0.9", "--n", "10", "--t", "5", "--out", target.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(3));
    let missing = dir.path().join("missing.toml");
    let res = run(&["experiment", "fig1", "--config", missing.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(3));
}

#[test]
fn fixedpoint_lines() {
    let ea = run(&["fixedpoint", "--model", "ea", "--alpha", "0.3", "--p", "0.9", "--q", "0.4"]);
    assert_eq!(stdout(&ea), "0.27 0.27 under 0\n");
    let aa = run(&["fixedpoint", "--model", "aa", "--alpha", "0.3", "--p", "0.9", "--eps", "0.2"]);
    assert_eq!(stdout(&aa), "0.62 0 over 0 0.15 0.62\n");
    let json = run(&["fixedpoint", "--model", "aa", "--alpha", "0.3", "--p", "0.9", "--eps", "0.05", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["regime"], "under");
    assert!(v["x_a"].as_f64().unwrap() > v["x_b"].as_f64().unwrap());
    let qpos = run(&["fixedpoint", "--model", "aa", "--alpha", "0.3", "--p", "0.9", "--q", "0.4", "--eps", "0.2"]);
    let fields: Vec<f64> = stdout(&qpos)
        .split_whitespace()
        .filter_map(|f| f.parse().ok())
        .collect();
    assert!((fields[0] - fields[1] - (0.6 * (0.9 - 0.4 - 0.2) + 0.2) / 0.6).abs() < 1e-8);
    let stuck = run(&[
        "fixedpoint", "--model", "aa", "--alpha", "0.3", "--p", "0.9", "--eps", "0.1", "--max-iter", "2",
    ]);
    assert_eq!(stuck.status.code(), Some(4));
}

#[test]
fn bounds_subcommands() {
    let ok = run(&[
        "bounds", "t-eta", "--alpha", "0.3", "--p", "0.9", "--q", "0.4", "--n", "65000", "--delta0", "0.8", "--eta",
        "0.05", "--omega", "0.05",
    ]);
    assert!(ok.status.success());
    assert!(stdout(&ok).trim().parse::<u64>().unwrap() > 0);
    let bad = run(&[
        "bounds", "t-eta", "--alpha", "0.3", "--p", "0.9", "--q", "0.4", "--n", "50", "--delta0", "0.8", "--eta",
        "0.05", "--omega", "0.05",
    ]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("N below validity threshold"));
    let vacuous = run(&[
        "bounds", "t-delta", "--alpha", "0.3", "--p", "0.9", "--q", "0.4", "--n", "1000", "--delta", "0.1",
        "--omega", "0.05",
    ]);
    assert_eq!(stdout(&vacuous), "inf\n");
}

#[test]
fn experiment_writes_reproducible_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("small.toml");
    std::fs::write(
        &config,
        "n_runs = 4\nhorizon = 30\n[[grid]]\nalpha = [0.1]\npopulation = [10, 100]\n",
    )
    .unwrap();
    let out = dir.path().join("results");
    let args = [
        "experiment",
        "fig2",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "5",
    ];
    let res = run(&args);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let file = Path::new(&out).join("fig2.csv");
    let first = std::fs::read(&file).unwrap();
    assert!(run(&args).status.success());
    assert_eq!(first, std::fs::read(&file).unwrap());
    let text = String::from_utf8(first).unwrap();
    assert!(text.contains("# master_seed=5"));
    assert!(text.contains("experiment,alpha,population,stat_name,mean,stderr,n_runs"));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "n_runs = 4\nbogus = 1\n").unwrap();
    let res = run(&["experiment", "fig2", "--config", bad.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));

    let custom = dir.path().join("nested/custom.csv");
    let with_output = dir.path().join("with_output.toml");
    std::fs::write(
        &with_output,
        format!(
            "n_runs = 2\nhorizon = 10\noutput = {:?}\n[[grid]]\nalpha = [0.1]\npopulation = [10]\n",
            custom.to_str().unwrap()
        ),
    )
    .unwrap();
    let res = run(&["experiment", "fig2", "--config", with_output.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(custom.exists());

    let list = run(&["experiment", "--list"]);
    assert!(stdout(&list).lines().any(|l| l.starts_with("desk-fig9")));
}
