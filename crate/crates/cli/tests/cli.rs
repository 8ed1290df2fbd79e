//! End-to-end checks of the bandlab binary: exit codes, output schemas,
//! file handling, reproducibility.

use std::fs;
use std::process::{Command, Output};

fn bandlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bandlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr_of(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn help_and_version_exit_zero() {
    for args in [
        &["--help"][..],
        &["--version"][..],
        &["lyapunov", "--help"][..],
    ] {
        let out = bandlab(args);
        assert_eq!(out.status.code(), Some(0), "args {args:?}");
    }
    assert!(stdout_of(&bandlab(&["--help"])).contains("decay-scan"));
}

#[test]
fn bad_arguments_exit_one() {
    for args in [
        &["no-such-command"][..],
        &["lyapunov", "--no-such-flag"][..],
        &["green", "--z", "one,two"][..],
        // Odd chiral chain at zero energy is singular by symmetry.
        &[
            "green", "--model", "chiral", "-n", "5", "-W", "2", "--z", "0,0",
        ][..],
        // Corner scans only make sense for even lengths.
        &[
            "decay-scan",
            "--widths",
            "1",
            "--blocks",
            "3,5,7",
            "--samples",
            "30",
        ][..],
        // Fractional order must stay below 1.
        &["fmc-scan", "--s", "1.5", "--samples", "30"][..],
        &["lyapunov", "--kind", "pair", "--odd-scale", "0"][..],
        &["--threads", "0", "lyapunov", "-W", "1"][..],
    ] {
        let out = bandlab(args);
        assert_eq!(
            out.status.code(),
            Some(1),
            "args {args:?}: {}",
            stderr_of(&out)
        );
    }
}

#[test]
fn numerical_failures_exit_two() {
    // Forcing the elimination route onto a chiral chain at z = 0 hits the
    // zero pivot block in the first step: a numerical, not usage, failure.
    let out = bandlab(&[
        "green",
        "--model",
        "chiral",
        "-n",
        "4",
        "-W",
        "1",
        "--x",
        "2",
        "--z",
        "0,0",
        "--dense-cap",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr_of(&out));
    assert!(stderr_of(&out).contains("numerical"));
}

#[test]
fn lyapunov_json_schema() {
    let out = bandlab(&[
        "lyapunov",
        "-W",
        "3",
        "--steps",
        "500",
        "--burn-in",
        "10",
        "--seed",
        "4",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(v["meta"]["subcommand"], "lyapunov");
    assert_eq!(v["meta"]["width"], 3);
    assert_eq!(v["meta"]["field"], "complex");
    assert!(v["meta"]["reference_formula"]
        .as_str()
        .unwrap()
        .contains("digamma"));
    let cols: Vec<&str> = v["spectrum"]["columns"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_str().unwrap())
        .collect();
    assert_eq!(
        cols,
        [
            "width",
            "k",
            "gamma_hat",
            "std_error",
            "newman_value",
            "z_score"
        ]
    );
    assert_eq!(v["spectrum"]["gamma_hat"].as_array().unwrap().len(), 3);
    // Spectrum is reported in descending order.
    let g: Vec<f64> = v["spectrum"]["gamma_hat"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert!(g[0] >= g[1] && g[1] >= g[2]);
}

#[test]
fn decay_scan_csv_has_cell_and_fit_sections() {
    let out = bandlab(&[
        "decay-scan",
        "--widths",
        "1",
        "--blocks",
        "4,8,12",
        "--samples",
        "30",
        "--seed",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("# table: cells"));
    assert!(text.contains("# table: fits"));
    assert!(text.contains("width,n,samples_ok,failed,failure_fraction,mean_log_norm,std_error"));
    assert!(text.contains("width,mu_hat,mu_std_error,intercept,rss,cells_used,newman_mu,z_score"));
}

#[test]
fn multi_table_csv_writes_sibling_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.csv");
    let out = bandlab(&[
        "decay-scan",
        "--widths",
        "1",
        "--blocks",
        "4,8,12",
        "--samples",
        "30",
        "--raw",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let cells = fs::read_to_string(&path).unwrap();
    assert!(cells.starts_with("width,n,samples_ok"));
    let fits = fs::read_to_string(dir.path().join("scan.fits.csv")).unwrap();
    assert!(fits.starts_with("width,mu_hat"));
    let raw = fs::read_to_string(dir.path().join("scan.raw.csv")).unwrap();
    assert!(raw.starts_with("width,n,sample_index,log_norm,failed"));
    // 3 cells x 30 samples plus the header line.
    assert_eq!(raw.lines().count(), 1 + 3 * 30);
}

#[test]
fn json_report_is_a_single_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.json");
    let out = bandlab(&[
        "decay-scan",
        "--widths",
        "1",
        "--blocks",
        "4,8,12",
        "--samples",
        "30",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert!(v.get("cells").is_some());
    assert!(v.get("fits").is_some());
    assert_eq!(v["meta"]["samples"], 30);
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn sampled_model_file_reloads_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    let out = bandlab(&[
        "sample",
        "-n",
        "6",
        "-W",
        "3",
        "--model",
        "full",
        "--seed",
        "11",
        "--stream",
        "2",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let text = fs::read_to_string(&path).unwrap();
    let reloaded = bandlab_cli::model_io::from_json(&text).unwrap();
    // The file must reproduce the in-process draw exactly.
    let direct = bandlab_core::model::build_model(
        bandlab_core::model::ModelKind::Full,
        bandlab_core::sampling::EntryField::Complex,
        6,
        3,
        &bandlab_core::RngStream::with_index(11, 2),
    )
    .unwrap();
    assert_eq!(reloaded, direct);
}

#[test]
fn same_invocation_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = bandlab(&[
            "lyapunov",
            "-W",
            "2",
            "--steps",
            "400",
            "--seed",
            "6",
            "--format",
            "json",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn file_and_stdout_output_agree() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    let piped = bandlab(&[
        "green", "-n", "4", "-W", "2", "--seed", "3", "--format", "json",
    ]);
    let out = bandlab(&[
        "green",
        "-n",
        "4",
        "-W",
        "2",
        "--seed",
        "3",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    assert_eq!(piped.stdout, fs::read(&path).unwrap());
}

#[test]
fn stamp_flag_adds_wall_clock_metadata() {
    let plain = bandlab(&["green", "-n", "2", "-W", "1", "--format", "json"]);
    let stamped = bandlab(&["green", "-n", "2", "-W", "1", "--format", "json", "--stamp"]);
    let plain: serde_json::Value = serde_json::from_str(&stdout_of(&plain)).unwrap();
    let stamped: serde_json::Value = serde_json::from_str(&stdout_of(&stamped)).unwrap();
    assert!(plain["meta"].get("timestamp_unix_seconds").is_none());
    assert!(stamped["meta"]["timestamp_unix_seconds"].as_u64().unwrap() > 0);
}

#[test]
fn green_corner_route_is_reported() {
    let out = bandlab(&[
        "green", "--model", "chiral", "-n", "6", "-W", "2", "--z", "0,0", "--format", "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(v["meta"]["route"], "corner-product");
    // Off-corner element of the same operator goes through a solver.
    let out = bandlab(&[
        "green", "--model", "chiral", "-n", "6", "-W", "2", "--z", "0,0", "--x", "2", "--y", "4",
        "--format", "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(v["meta"]["route"], "dense-solve");
}
