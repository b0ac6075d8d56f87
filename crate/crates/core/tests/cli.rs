use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use css_papr::svsets::read_sv_file;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_css-papr"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_svsets_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let poor = dir.path().join("poor.sv");
    fs::write(&poor, "n=128,v=4\n0,0,0,0\n0,4,8,12\n0,16,20,24\n0,28,32,36\n").unwrap();
    let good = dir.path().join("good.sv");
    fs::write(&good, "n=128,v=4\n0,0,0,0\n0,8,16,24\n0,16,32,48\n0,24,48,72\n").unwrap();

    let out = run(&["check-svsets", "--file", path_str(&poor), "--n", "128", "--v", "4"]);
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("criterion 1: fail"));
    assert!(stdout.contains("sets (2, 3)"));

    let out = run(&["check-svsets", "--file", path_str(&good), "--criterion", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["check-svsets", "--file", path_str(&good), "--criterion", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["check-svsets", "--file", path_str(&good), "--criterion", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("min_circular_gap="));

    // Header disagreement and bad criterion are configuration errors.
    assert_eq!(run(&["check-svsets", "--file", path_str(&good), "--n", "64"]).status.code(), Some(2));
    assert_eq!(
        run(&["check-svsets", "--file", path_str(&good), "--criterion", "4"]).status.code(),
        Some(2)
    );
    let missing = dir.path().join("missing.sv");
    assert_eq!(run(&["check-svsets", "--file", path_str(&missing)]).status.code(), Some(2));
}

#[test]
fn search_writes_checkable_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("found.sv");
    let out = run(&[
        "search-svsets", "--n", "128", "--v", "4", "--u", "4", "--partition", "adjacent", "--seed", "7",
        "--iterations", "500", "--out", path_str(&out_path),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let c = read_sv_file(fs::read_to_string(&out_path).unwrap().as_bytes()).unwrap();
    assert_eq!((c.n(), c.v_count(), c.u_count()), (128, 4, 4));

    let check = run(&["check-svsets", "--file", path_str(&out_path), "--criterion", "3"]);
    assert_eq!(check.status.code(), Some(0));

    let bad = run(&["search-svsets", "--n", "100", "--v", "4", "--u", "4", "--partition", "random"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn acf_csv() {
    let out = run(&["acf", "--n", "32", "--v", "2", "--partition", "adjacent"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "m,numeric,closed_form,deviation");
    assert_eq!(lines.len(), 33);
    for line in &lines[1..] {
        let fields: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
        assert!(fields[3] < 1e-9);
    }

    let out = run(&["acf", "--n", "32", "--v", "2", "--partition", "mseq"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().ends_with(",,"));

    assert_eq!(run(&["acf", "--n", "30", "--v", "2", "--partition", "adjacent"]).status.code(), Some(2));
    assert_eq!(run(&["acf", "--n", "32", "--v", "2", "--partition", "diagonal"]).status.code(), Some(2));
}

#[test]
fn simulate_with_config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.conf");
    fs::write(
        &config,
        "n = 64\nv_count = 4\npartition_kind = random\npartition_seed = 3\n\
         sv_collection = 0,0,0,0;0,1,2,3;0,5,20,33\ntrials = 400\nmaster_seed = 1\n",
    )
    .unwrap();
    let csv = dir.path().join("out.csv");
    let part = dir.path().join("partition.csv");
    let out = run(&[
        "simulate", "--config", path_str(&config), "--trials", "300", "--out", path_str(&csv),
        "--partition_out", path_str(&part),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.contains("# trials=300"));
    assert!(text.contains("# u_count=3"));
    assert!(text.contains("# warning:"), "300 trials cannot resolve 1e-3");
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "threshold_db,ccdf_original,ccdf_selected,trials");
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 92);
    assert_eq!(fs::read_to_string(&part).unwrap().lines().count(), 64);

    // Replaying the saved partition gives the same table.
    let replay = dir.path().join("replay.csv");
    let out = run(&[
        "simulate", "--config", path_str(&config), "--trials", "300", "--out", path_str(&replay),
        "--partition_file", path_str(&part),
    ]);
    assert!(out.status.success());
    let strip = |s: String| -> Vec<String> {
        s.lines().filter(|l| !l.starts_with("# partition_file")).map(str::to_string).collect()
    };
    assert_eq!(strip(text), strip(fs::read_to_string(&replay).unwrap()));

    // Inconsistent u_count is a configuration error.
    let out = run(&["simulate", "--config", path_str(&config), "--u_count", "4", "--out", path_str(&csv)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_schemes() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("none.csv");
    let out = run(&["simulate", "--scheme", "none", "--trials", "200", "--n", "32", "--out", path_str(&csv)]);
    assert!(out.status.success());
    for line in fs::read_to_string(&csv).unwrap().lines().filter(|l| !l.starts_with('#')).skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[1], f[2]);
    }

    let out = run(&["simulate", "--scheme", "pts", "--trials", "200", "--n", "32", "--out", path_str(&csv)]);
    assert!(out.status.success());

    let out = run(&["simulate", "--trials", "10", "--out", path_str(&csv)]);
    assert_eq!(out.status.code(), Some(2), "css without SV collection");
}
