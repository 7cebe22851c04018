use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn weakcalc(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weakcalc"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Path, args: &[&str]) {
    let o = weakcalc(out, args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
}

/// Parses a CSV written by the tool into its header and numeric rows.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|c| c.parse::<f64>().unwrap_or(f64::NAN)).collect())
        .collect();
    (header, rows)
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let (header, rows) = read_csv(path);
    let i = header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[i]).collect()
}

#[test]
fn moments_default_cauchy() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["moments"]);
    let m = column(&dir.path().join("moments.csv"), "m_n");
    assert_eq!(m.len(), 11);
    // e^{1/2} erfc(1/sqrt 2)
    assert!((m[0] - 0.523_156_583_730_246_8).abs() < 1e-8, "{}", m[0]);
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn moments_atom_closed_form() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &[
            "moments",
            "--set",
            "distribution.family=\"atom\"",
            "--set",
            "distribution.location=1.5",
            "--set",
            "distribution.weight=2",
        ],
    );
    let m = column(&dir.path().join("moments.csv"), "m_n");
    for (n, v) in m.iter().enumerate() {
        let want = 2.0 * 1.5f64.powi(n as i32) * (-1.125f64).exp();
        assert!((v - want).abs() <= 1e-15 * want, "n={n}: {v} vs {want}");
    }
}

#[test]
fn moments_student_t3_match_oracle() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("t3.toml");
    std::fs::write(
        &cfg,
        "[distribution]\nfamily = \"student_t\"\nnu = 3\n\n[experiment]\nn_max = 12\n",
    )
    .unwrap();
    ok(dir.path(), &["--config", cfg.to_str().unwrap(), "moments"]);
    let got = column(&dir.path().join("moments.csv"), "m_n");
    let oracle = column(
        &Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/student_t3_moments.csv"),
        "m_n",
    );
    assert_eq!(got.len(), oracle.len());
    for (n, (g, o)) in got.iter().zip(&oracle).enumerate() {
        assert!((g - o).abs() <= 1e-10 + 1e-7 * o.abs(), "n={n}: {g} vs {o}");
    }
}

#[test]
fn clt_skewed_base_has_root_n_rate() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &[
            "clt",
            "--set",
            "distribution.family=\"nig\"",
            "--set",
            "distribution.alpha=2",
            "--set",
            "distribution.beta=0.5",
        ],
    );
    let slope = column(&dir.path().join("clt.csv"), "fitted_slope")[0];
    assert!((-0.65..=-0.35).contains(&slope), "{slope}");
    let summary = std::fs::read_to_string(dir.path().join("clt_summary.csv")).unwrap();
    assert!(summary.trim_end().ends_with("true"), "{summary}");
}

#[test]
fn clt_default_cauchy_reports_symmetric_rate() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["clt"]);
    let slope = column(&dir.path().join("clt.csv"), "fitted_slope")[0];
    assert!((slope + 1.0).abs() < 0.02, "{slope}");
}

#[test]
fn tikhonov_noiseless_bound_is_bias_only() {
    let dir = TempDir::new().unwrap();
    ok(
        dir.path(),
        &[
            "tikhonov",
            "--set",
            "distribution.family=\"gaussian\"",
            "--set",
            "experiment.deltas=[0.0]",
        ],
    );
    let path = dir.path().join("tikhonov.csv");
    let noise = column(&path, "noise_term");
    assert_eq!(noise.len(), 4);
    assert!(noise.iter().all(|v| *v == 0.0));
    assert_eq!(column(&path, "bound"), column(&path, "bias_term"));
}

#[test]
fn estimate_default_study() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["estimate"]);
    let path = dir.path().join("estimate.csv");
    assert_eq!(column(&path, "n"), vec![100.0, 1000.0, 10_000.0]);
    assert!(column(&path, "failures").iter().all(|f| *f == 0.0));
    for r in column(&path, "sd_sqrt_n").windows(2).map(|w| w[1] / w[0]) {
        assert!((0.7..=1.4).contains(&r), "{r}");
    }
}

#[test]
fn same_seed_same_bytes() {
    let (a, b, c) = (
        TempDir::new().unwrap(),
        TempDir::new().unwrap(),
        TempDir::new().unwrap(),
    );
    let args = [
        "distclt",
        "--set",
        "experiment.reps=2000",
        "--set",
        "experiment.n_list=[10, 50]",
    ];
    ok(a.path(), &args);
    ok(b.path(), &[&args[..], &["--threads", "1"]].concat());
    ok(c.path(), &[&args[..], &["--seed", "8"]].concat());
    let read = |d: &TempDir| std::fs::read(d.path().join("distclt.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
}

#[test]
fn manifest_replays_byte_for_byte() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    ok(
        a.path(),
        &[
            "cdf",
            "--seed",
            "11",
            "--set",
            "distribution.mu=0.3",
            "--set",
            "experiment.a=0.25",
        ],
    );
    let manifest: weakcalc_cli::RunManifest =
        serde_json::from_slice(&std::fs::read(a.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.subcommand, "cdf");
    assert_eq!(manifest.outputs, vec!["cdf.csv", "cdf_grid.csv"]);
    let cfg = b.path().join("replay.toml");
    std::fs::write(&cfg, manifest.config_toml()).unwrap();
    let seed = manifest.seed.to_string();
    ok(
        b.path(),
        &["--config", cfg.to_str().unwrap(), "--seed", &seed, &manifest.subcommand],
    );
    for f in &manifest.outputs {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn json_output() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["carleman", "--format", "json"]);
    let rows: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("carleman.json")).unwrap()).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 30);
    let fit: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("carleman_fit.json")).unwrap()).unwrap();
    let e = fit[0]["fitted_exponent"].as_f64().unwrap();
    assert!((e + 0.448).abs() < 0.01, "{e}");
}

#[test]
fn every_subcommand_runs() {
    for cmd in ["cf", "cumulants", "recover", "gevrey"] {
        let dir = TempDir::new().unwrap();
        ok(dir.path(), &[cmd]);
        let manifest = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
        assert!(manifest.contains(&format!("\"subcommand\": \"{cmd}\"")));
    }
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let code = |args: &[&str]| weakcalc(dir.path(), args).status.code();
    assert_eq!(code(&["moments", "--set", "experiment.bogus=1"]), Some(2));
    assert_eq!(code(&["moments", "--set", "distribution.gamma=-1"]), Some(2));
    assert_eq!(code(&["moments", "--config", "/nonexistent.toml"]), Some(2));
    assert_eq!(
        code(&[
            "moments",
            "--set",
            "quadrature.max_subdivisions=1",
            "--set",
            "quadrature.rel_tol=1e-14",
            "--set",
            "quadrature.abs_tol=1e-16",
        ]),
        Some(3)
    );
    assert_eq!(code(&["recover", "--set", "kernel.family=\"zero_at_origin\""]), Some(4));
    let o = weakcalc(dir.path(), &["moments", "--set", "experiment.bogus=1"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));
}
