//! End-to-end tests against the built `gabor` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn gabor(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gabor"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn temp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gabor-cli-{name}"));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn bad_subcommand_yields_json_error_and_exit_2() {
    let dir = temp_dir("badcmd");
    let out = gabor(&["frobnicate"], &dir);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).expect("stderr is JSON");
    assert_eq!(err["kind"], "config");
    assert!(err["error"].as_str().unwrap().contains("frobnicate"));
}

#[test]
fn bad_config_value_yields_json_error() {
    let dir = temp_dir("badcfg");
    let out = gabor(&["bounds", "--set", "L=notanumber"], &dir);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["kind"], "config");
}

#[test]
fn bounds_flags_undersampled_systems_without_failing() {
    let dir = temp_dir("bounds");
    let out = gabor(
        &["bounds", "--set", "L=16", "--set", "a=4", "--set", "b=8", "--out", "r"],
        &dir,
    );
    assert_eq!(out.status.code(), Some(0), "bounds itself is a measurement");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("r/bounds-42.json")).unwrap())
            .unwrap();
    assert_eq!(report["data"]["frame"], false);
    assert_eq!(report["passed"], true);

    // frame-requiring experiments on the same lattice exit nonzero
    let out = gabor(
        &["norm", "--set", "L=16", "--set", "a=4", "--set", "b=8", "--out", "r"],
        &dir,
    );
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"].as_str().unwrap().contains("not a frame"));
}

#[test]
fn sigma_collapses_on_planted_four_atoms() {
    let dir = temp_dir("sigma");
    let args = [
        "sigma",
        "--seed",
        "7",
        "--out",
        "r",
        "--set",
        "L=64",
        "--set",
        "a=8",
        "--set",
        "b=4",
        "--set",
        "width=11.313708498984760",
        "--set",
        "signal=power-law:atoms=4,tau=0.2,sep=3",
        "--set",
        "ns=1,2,4,8",
    ];
    let out = gabor(&args, &dir);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.join("r/sigma-7.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "N,sigma_raw,sigma_monotone,method,p,q,weight"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    let sigma0: f64 = rows[0][2].parse().unwrap();
    let sigma4: f64 = rows[2][2].parse().unwrap();
    assert_eq!(rows[2][0], "4");
    assert!(sigma4 <= 1e-8 * sigma0, "sigma_4 = {sigma4}");
}

#[test]
fn identical_seeds_produce_byte_identical_outputs() {
    let dir = temp_dir("determinism");
    let args = |out: &'static str| {
        vec![
            "bernstein".to_string(),
            "--seed".to_string(),
            "11".to_string(),
            "--out".to_string(),
            out.to_string(),
            "--set".to_string(),
            "ns=1,2,4,8".to_string(),
            "--set".to_string(),
            "trials=20".to_string(),
        ]
    };
    for out in ["r1", "r2"] {
        let argv: Vec<String> = args(out);
        let refs: Vec<&str> = argv.iter().map(|s| s.as_str()).collect();
        let output = gabor(&refs, &dir);
        assert_eq!(output.status.code(), Some(0), "{output:?}");
    }
    let a = std::fs::read(dir.join("r1/bernstein-11.csv")).unwrap();
    let b = std::fs::read(dir.join("r2/bernstein-11.csv")).unwrap();
    assert_eq!(a, b, "CSV outputs must be byte-identical");
    // the JSON embeds the resolved config, which differs in `out`; the
    // measured data must match exactly
    let ja: serde_json::Value = serde_json::from_slice(
        &std::fs::read(dir.join("r1/bernstein-11.json")).unwrap(),
    )
    .unwrap();
    let jb: serde_json::Value = serde_json::from_slice(
        &std::fs::read(dir.join("r2/bernstein-11.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(ja["data"], jb["data"]);
}

#[test]
fn config_file_applies_and_set_overrides() {
    let dir = temp_dir("cfgfile");
    std::fs::write(
        dir.join("exp.cfg"),
        "# comment\nL=64\na=8\nb=4\nseed=5\nout=fromfile\n",
    )
    .unwrap();
    let out = gabor(
        &["bounds", "--config", "exp.cfg", "--set", "out=fromset"],
        &dir,
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.join("fromset/bounds-5.json").exists());
    assert!(!dir.join("fromfile").exists());
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.join("fromset/bounds-5.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["params"]["L"], "64");
    assert_eq!(report["params"]["out"], "fromset");
    assert!(report["input_hash"].as_str().unwrap().len() == 16);
}

#[test]
fn analyze_then_dual_synthesize_reconstructs() {
    let dir = temp_dir("pipeline");
    let sys_args = [
        "--set", "L=64", "--set", "a=8", "--set", "b=4", "--set", "width=8",
    ];
    let mut argv = vec!["analyze", "--seed", "3", "--out", "r", "--set", "signal=noise"];
    argv.extend_from_slice(&sys_args);
    let out = gabor(&argv, &dir);
    assert_eq!(out.status.code(), Some(0));

    let mut argv = vec![
        "synthesize",
        "--seed",
        "3",
        "--out",
        "r",
        "--set",
        "which=dual",
        "--set",
        "grid_file=r/analyze-grid-3.json",
    ];
    argv.extend_from_slice(&sys_args);
    let out = gabor(&argv, &dir);
    assert_eq!(out.status.code(), Some(0), "{out:?}");

    // D_gamma C_g f must give back the generated noise signal
    let rec: gaborlab::Signal = serde_json::from_str(
        &std::fs::read_to_string(dir.join("r/synthesize-signal-3.json")).unwrap(),
    )
    .unwrap();
    let (f, _) =
        gaborlab::generate_test_signal(&gaborlab::TestSignal::Noise, None, 64, 3).unwrap();
    let rel = rec.sub(&f).unwrap().norm_l2() / f.norm_l2();
    assert!(rel <= 1e-8, "reconstruction residual {rel}");
}

#[test]
fn norm_reports_each_requested_norm() {
    let dir = temp_dir("norms");
    let out = gabor(
        &[
            "norm",
            "--out",
            "r",
            "--set",
            "L=64",
            "--set",
            "a=8",
            "--set",
            "b=4",
            "--set",
            "norm=p=1,q=2,weight=flat;p=2,q=2,weight=poly:s=1",
        ],
        &dir,
    );
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("r/norm-42.json")).unwrap())
            .unwrap();
    let values = report["data"]["values"].as_array().unwrap();
    assert_eq!(values.len(), 2);
    assert_eq!(values[0]["norm"], "p=1,q=2,weight=flat");
    assert!(values[1]["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn exhaustive_sigma_runs_and_requires_l2_units() {
    let dir = temp_dir("exhaustive");
    let base = [
        "--out", "r", "--set", "L=16", "--set", "a=4", "--set", "b=2", "--set", "width=4",
        "--set", "method=exhaustive", "--set", "ns=0,1,2",
    ];
    let mut argv = vec!["sigma", "--seed", "9"];
    argv.extend_from_slice(&base);
    let out = gabor(&argv, &dir);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let csv = std::fs::read_to_string(dir.join("r/sigma-9.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().ends_with("exhaustive,2,2,flat"));

    // the exhaustive oracle is pinned to the plain l2 error
    let mut argv = vec!["sigma", "--seed", "9", "--set", "norm=p=1,q=2,weight=flat"];
    argv.extend_from_slice(&base);
    let out = gabor(&argv, &dir);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dual_reports_bounds_and_concentration() {
    let dir = temp_dir("dual");
    let out = gabor(
        &["dual", "--out", "r", "--set", "L=64", "--set", "a=8", "--set", "b=4"],
        &dir,
    );
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("r/dual-42.json")).unwrap())
            .unwrap();
    let data = &report["data"];
    assert!(data["A"].as_f64().unwrap() > 0.0);
    assert!(data["reconstruction_residual"].as_f64().unwrap() <= 1e-8);
    assert!(data["window_concentration"].as_f64().unwrap() > 0.0);
    assert!(data["gamma"].as_array().unwrap().len() == 64);
}

#[test]
fn help_exits_cleanly() {
    let dir = temp_dir("help");
    let out = gabor(&["--help"], &dir);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("usage"));
}
