use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qzeno::model::parse_config;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qzeno"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

/// Rows of a CSV file as string fields, header first.
fn rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let mut out = vec![r.headers().unwrap().iter().map(String::from).collect()];
    for rec in r.records() {
        out.push(rec.unwrap().iter().map(String::from).collect());
    }
    out
}

fn column(rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let k = rows[0].iter().position(|h| h == name).unwrap();
    rows[1..].iter().map(|r| r[k].parse().unwrap()).collect()
}

const LORENTZIAN: &str = "[system]\nJ = 1.0\nepsilon = 0.0\n\n[bath]\ntype = \"lorentzian\"\ng = 1.0\ngamma = 0.5\ndelta_c = 0.0\n\n[run]\ntmax = 20.0\npoints = 201\n";

#[test]
fn help_and_version_succeed() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
    assert_eq!(code(&run(&["simulate", "--help"])), 0);
}

#[test]
fn usage_errors_exit_one() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().to_str().unwrap();
    let lor = write_config(tmp.path(), "lor.toml", LORENTZIAN);
    let cases: Vec<Vec<&str>> = vec![
        vec!["frobnicate"],
        vec!["simulate", "-o", out],
        vec!["simulate", "-c", &lor, "--figure", "4a", "-o", out],
        vec!["simulate", "-c", &lor, "--points", "0", "-o", out],
        vec!["simulate", "-c", &lor, "--engine", "closed-form", "-o", out],
        vec!["simulate", "-c", "/nonexistent/x.toml", "-o", out],
        vec!["simulate", "--figure", "99z", "-o", out],
        vec!["sweep", "--figure", "3a", "-o", out],
        vec!["sweep", "-c", &lor, "--range", "2:2", "-o", out],
        vec!["sweep", "-c", &lor, "--range", "3:1", "-o", out],
        vec!["sweep", "-c", &lor, "--param", "gtilde", "-o", out],
        vec!["ep-locus", "-c", &lor, "--over", "gamma", "-o", out],
        vec!["ep-locus", "-c", &lor, "--over", "gamma", "--range", "1:0", "-o", out],
        vec!["eigen", "--grid", "0:1,0:1:2", "-o", out],
    ];
    for args in cases {
        let o = run(&args);
        assert_eq!(code(&o), 1, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn talbot_rejects_tabulated_with_a_hint() {
    let tmp = TempDir::new().unwrap();
    let cfg = configs().join("tabulated.toml");
    let o = run(&["simulate", "-c", cfg.to_str().unwrap(), "--engine", "talbot", "-o", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--engine fourier"));
}

#[test]
fn markovian_ep_trace_matches_closed_form() {
    let tmp = TempDir::new().unwrap();
    let cfg = configs().join("markovian_ep.toml");
    for engine in ["closed-form", "talbot", "fourier"] {
        let o = run(&["simulate", "-c", cfg.to_str().unwrap(), "--engine", engine, "-o", tmp.path().to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let r = rows(&tmp.path().join("markovian_ep.trace.csv"));
        assert_eq!(r[0], ["t", "re_c1", "im_c1", "p1", "gamma_eff"]);
        let t = column(&r, "t");
        let p1 = column(&r, "p1");
        for (t, p) in t.iter().zip(&p1) {
            let want = (-2.0 * t).exp() * (1.0 + t) * (1.0 + t);
            assert!((p - want).abs() < 1e-8, "{engine} t={t}: {p} vs {want}");
        }
    }
}

#[test]
fn volterra_and_talbot_agree_on_lorentzian() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "lor.toml", LORENTZIAN);
    let mut traces = Vec::new();
    for engine in ["talbot", "volterra"] {
        let dir = tmp.path().join(engine);
        let o = run(&["simulate", "-c", &cfg, "--engine", engine, "-o", dir.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
        traces.push(column(&rows(&dir.join("lor.trace.csv")), "p1"));
    }
    let sup = traces[0].iter().zip(&traces[1]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(sup < 1e-5, "{sup}");
}

#[test]
fn output_is_deterministic_and_echo_reproduces_it() {
    let tmp = TempDir::new().unwrap();
    let cfg = configs().join("ohmic.toml");
    let mut csvs = Vec::new();
    for k in 0..2 {
        let dir = tmp.path().join(format!("r{k}"));
        let o = run(&["simulate", "-c", cfg.to_str().unwrap(), "--tmax", "8", "-o", dir.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
        csvs.push(fs::read(dir.join("ohmic.trace.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    assert!(csvs[0].ends_with(b"\n"));

    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(tmp.path().join("r0/ohmic.simulate.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["outputs"], serde_json::json!(["ohmic.trace.csv", "ohmic.report.json"]));
    for key in ["version", "tolerances", "wall_clock_seconds", "warnings"] {
        assert!(manifest.get(key).is_some(), "{key}");
    }
    let echo = manifest["runs"][0]["config"].as_str().unwrap();
    let original = fs::read_to_string(&cfg).unwrap();
    let mut want = parse_config(&original).unwrap();
    want.run.tmax = 8.0;
    assert_eq!(parse_config(echo).unwrap(), want);

    // The echo alone reproduces the trace.
    let again = write_config(tmp.path(), "ohmic.toml", echo);
    let dir = tmp.path().join("echo");
    assert_eq!(code(&run(&["simulate", "-c", &again, "-o", dir.to_str().unwrap()])), 0);
    assert_eq!(fs::read(dir.join("ohmic.trace.csv")).unwrap(), csvs[0]);
}

#[test]
fn single_point_locus_is_one_row() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "lor.toml", LORENTZIAN);
    let o = run(&["ep-locus", "-c", &cfg, "--over", "gamma", "--range", "0.5:0.5", "-o", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&tmp.path().join("lor.locus.csv"));
    assert_eq!(r[0], ["param", "g_ep", "err"]);
    assert_eq!(r.len(), 2);
    let g: f64 = r[1][1].parse().unwrap();
    assert!((g - 1.414).abs() < 0.02, "{g}");
}

#[test]
fn eigen_surface_slices() {
    let tmp = TempDir::new().unwrap();
    let o = run(&["eigen", "--grid", "0:8:81,-2:0:3", "-o", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let r = rows(&tmp.path().join("eigen.surface.csv"));
    assert_eq!(
        r[0],
        ["gamma_tilde", "epsilon", "re_lambda3", "im_lambda3", "re_lambda4", "im_lambda4", "coalesced"]
    );
    assert_eq!(r.len(), 1 + 81 * 3);
    for row in &r[1..] {
        let gt: f64 = row[0].parse().unwrap();
        let eps: f64 = row[1].parse().unwrap();
        let (i3, i4): (f64, f64) = (row[3].parse().unwrap(), row[5].parse().unwrap());
        let coalesced = row[6] == "true";
        if gt == 0.0 {
            assert!(i3.abs() < 1e-12 && i4.abs() < 1e-12);
        } else if eps == -2.0 {
            assert!(!coalesced, "ε = −2 split at γ̃ = {gt}");
        } else if eps == 0.0 {
            assert_eq!(coalesced, gt <= 4.0, "γ̃ = {gt}");
        }
    }
}

#[test]
fn markovian_sweep_reports_the_ep() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "m.toml",
        "[system]\nJ = 1.0\nepsilon = 0.0\n\n[bath]\ntype = \"markovian\"\ngamma_tilde = 1.0\n",
    );
    let o = run(&["sweep", "-c", &cfg, "--param", "gtilde", "--range", "1:8", "-o", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(tmp.path().join("m.report.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["classification"], "SharpPeak");
    let g = report["report"]["peak_coupling"].as_f64().unwrap();
    let res = report["report"]["grid_resolution"].as_f64().unwrap();
    assert!((g - 4.0).abs() <= res, "{g} ± {res}");
    let r = rows(&tmp.path().join("m.curve.csv"));
    assert_eq!(r[0], ["coupling", "gamma_eff_tau", "derivative"]);
    // Derivative is blank at both ends.
    assert_eq!(r[1][2], "");
    assert_eq!(r[r.len() - 1][2], "");
}

#[test]
fn coarse_bath_fails_the_oracle_with_a_recurrence_note() {
    let tmp = TempDir::new().unwrap();
    let cfg = configs().join("coarse_bath.toml");
    let o = run(&["oracle-check", "-c", cfg.to_str().unwrap(), "-o", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let r = rows(&tmp.path().join("coarse_bath.oracle.csv"));
    let bath = r.iter().find(|row| row[0] == "bath").unwrap();
    assert_eq!(bath[5], "false");
    assert!(bath[6].contains("recurrence"), "{bath:?}");
    let norm = r.iter().find(|row| row[0] == "norm").unwrap();
    assert_eq!(norm[5], "true");
}

#[test]
fn oracle_passes_on_markovian_and_lorentzian() {
    let tmp = TempDir::new().unwrap();
    for name in ["markovian_ep.toml", "lorentzian.toml"] {
        let cfg = configs().join(name);
        let o = run(&["oracle-check", "-c", cfg.to_str().unwrap(), "-o", tmp.path().to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{name}: {}", String::from_utf8_lossy(&o.stdout));
    }
}

#[test]
fn figures_are_listed() {
    let o = run(&["figures"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    for id in qzeno_cli::presets::IDS {
        assert!(text.lines().any(|l| l.starts_with(id)), "{id}");
    }
}
