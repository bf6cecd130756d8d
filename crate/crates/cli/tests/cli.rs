use std::path::Path;
use std::process::Command;

use banditshare_cli::csv::{emit_csv, read_csv, CURVE_HEADER, SUMMARY_HEADER};
use banditshare_cli::run::{check_condition12, ratefit_file, run_config};
use banditshare_cli::{parse_config, parse_config_file, run_preset, PresetOptions};
use banditshare::ratefit::Thresholds;

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const JOINT: &str = r#"
experiment_id = "greedy-ucb"
seed = 11
mode = "joint"
replications = 400
metrics = ["regret", "dm", "gte", "verdict", "prob_correct", "curve", "condition12"]
[spec1]
kind = "greedy"
[spec2]
kind = "ucb"
alpha = 0.0
"#;

#[test]
fn run_writes_summary_and_curves() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config_file(&write(dir.path(), "c.toml", JOINT)).unwrap();
    let report = run_config(&cfg, dir.path()).unwrap();
    assert_eq!(report.files.len(), 2);

    let (header, rows) = read_csv(&report.files[0]).unwrap();
    assert_eq!(header, SUMMARY_HEADER);
    let metrics: Vec<&str> = rows.iter().map(|r| r[2].as_str()).collect();
    for m in ["regret", "pseudo_regret", "dm", "gte", "sign_verdict", "prob_slot1_lower", "optimal_pull_tail"] {
        assert!(metrics.contains(&m), "missing {m}");
    }
    let verdict = rows.iter().find(|r| r[2] == "sign_verdict").unwrap();
    assert!(["preserved", "violated", "inconclusive"].contains(&verdict[7].as_str()));

    let (header, rows) = read_csv(&report.files[1]).unwrap();
    assert_eq!(header, CURVE_HEADER);
    assert_eq!(rows.len(), 2 * 100);

    let text = std::fs::read_to_string(&report.files[0]).unwrap();
    for key in ["# instance=", "# spec1=greedy", "# spec2=ucb(alpha=0)", "# seed=11", "# reps=400"] {
        assert!(text.contains(key), "metadata lacks {key}");
    }
}

#[test]
fn run_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(JOINT).unwrap();
    let a = run_config(&cfg, &dir.path().join("a")).unwrap();
    let b = run_config(&cfg, &dir.path().join("b")).unwrap();
    for (x, y) in a.files.iter().zip(&b.files) {
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
    }
}

#[test]
fn sweep_then_ratefit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(
        r#"
        experiment_id = "ucb-sweep"
        mode = "individual"
        horizons = [50, 100, 200, 400]
        replications = 100
        [spec1]
        kind = "ucb"
        alpha = 1.0
        "#,
    )
    .unwrap();
    let report = run_config(&cfg, dir.path()).unwrap();
    let (_, rows) = read_csv(&report.files[0]).unwrap();
    assert_eq!(rows.len(), 4);

    let out = dir.path().join("fit.csv");
    let fit = ratefit_file(&report.files[0], Some(&out), &Thresholds::default()).unwrap();
    let (header, rows) = read_csv(&fit.files[0]).unwrap();
    assert_eq!(header, ["pair", "mode", "slope", "slope_se", "r2_log", "label"]);
    assert_eq!(rows.len(), 1);
    let slope: f64 = rows[0][2].parse().unwrap();
    assert!(slope > 0.8, "slope {slope}");
}

#[test]
fn ratefit_needs_four_horizons() {
    let dir = tempfile::tempdir().unwrap();
    let rows: Vec<Vec<String>> = [10, 20, 40]
        .iter()
        .map(|t| {
            ["x", "individual", "1", "greedy", "", "", "", "", &t.to_string(), "1.5", "0.1", "10"]
                .iter()
                .map(|s| s.to_string())
                .collect()
        })
        .collect();
    let path = dir.path().join("short.csv");
    emit_csv(&path, &[] as &[(&str, &str)], &CURVE_HEADER, &rows).unwrap();
    assert!(ratefit_file(&path, None, &Thresholds::default()).is_err());
}

#[test]
fn empty_rows_give_header_only_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested/empty.csv");
    emit_csv(&path, &[("seed", "1")], &CURVE_HEADER, &[]).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, format!("# seed=1\n{}\n", CURVE_HEADER.join(",")));
}

#[test]
fn condition12_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(
        "seed = 2\nmode = \"individual\"\nreplications = 500\n[spec1]\nkind = \"ucb\"\nalpha = 0.0\n",
    )
    .unwrap();
    let report = check_condition12(&cfg, dir.path()).unwrap();
    let (_, rows) = read_csv(&report.files[0]).unwrap();
    let tail: f64 = rows[0][3].parse().unwrap();
    assert!((0.0..0.1).contains(&tail));
}

#[test]
fn presets_write_expected_files() {
    let dir = tempfile::tempdir().unwrap();
    let opts = PresetOptions {
        seed: 3,
        reps: Some(50),
        out_dir: dir.path().to_path_buf(),
    };
    let files = run_preset("fig5", &opts).unwrap();
    let names: Vec<String> = files
        .iter()
        .map(|f| f.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names, ["fig5_individual.csv", "fig5_individual_pairs.csv", "fig5_joint.csv"]);
    let (header, rows) = read_csv(&files[2]).unwrap();
    assert_eq!(header[0], "gamma1");
    assert_eq!(rows.len(), 25);

    let files = run_preset("fig3_ucb", &opts).unwrap();
    let (header, rows) = read_csv(&files[0]).unwrap();
    assert_eq!(header, ["alpha1", "alpha2", "mean_diff", "se", "prob_correct", "prob_se", "reps"]);
    // swapping the two algorithms negates the difference up to noise
    let cell = |a: &str, b: &str| rows.iter().find(|r| r[0] == a && r[1] == b).unwrap().clone();
    let (x, y) = (cell("0", "1"), cell("1", "0"));
    let (dx, dy): (f64, f64) = (x[2].parse().unwrap(), y[2].parse().unwrap());
    let se: f64 = x[3].parse::<f64>().unwrap().hypot(y[3].parse().unwrap());
    assert!((dx + dy).abs() <= 3.0 * se);

    assert!(run_preset("fig9", &opts).is_err());
}

#[test]
fn fig2b_curves_favour_joint_greedy() {
    let dir = tempfile::tempdir().unwrap();
    let opts = PresetOptions {
        seed: 7,
        reps: Some(2_000),
        out_dir: dir.path().to_path_buf(),
    };
    let files = run_preset("fig2b", &opts).unwrap();
    let (_, rows) = read_csv(&files[0]).unwrap();
    let finals: Vec<(String, String, f64)> = rows
        .iter()
        .filter(|r| r[8] == "100")
        .map(|r| (r[1].clone(), r[2].clone(), r[9].parse().unwrap()))
        .collect();
    assert_eq!(finals.len(), 4);
    let lowest = finals.iter().min_by(|a, b| a.2.total_cmp(&b.2)).unwrap();
    assert_eq!((lowest.0.as_str(), lowest.1.as_str()), ("joint", "1"));
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_banditshare"))
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.toml",
        "mode = \"individual\"\n[spec1]\nkind = \"ucb\"\nalpha = 1.5\n",
    );
    let out = bin().arg("run").arg(&bad).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("spec1.alpha"));

    let out = bin().args(["preset", "nope"]).output().unwrap();
    assert!(!out.status.success());

    let good = write(
        dir.path(),
        "good.toml",
        "seed = 1\nmode = \"individual\"\nreplications = 20\n[spec1]\nkind = \"greedy\"\n",
    );
    let out = bin()
        .arg("run")
        .arg(&good)
        .env("BANDITSHARE_OUT", dir.path().join("env"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("env/individual-greedy.csv").exists());
}
