use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use homlab_core::coefficients::{effective_lambda_field, CellQuad};
use homlab_core::LocallyPeriodicCoefficient;
use serde_json::{json, Value};
use tempfile::TempDir;

fn base_config() -> Value {
    json!({
        "schema_version": 1,
        "kernel": { "name": "pareto", "params": { "alpha": 1.0 } },
        "coefficient": { "name": "difference" },
        "m": 1.0,
        "grid": { "half_width": 4.0, "cells_per_axis": 128 },
        "eps": [0.25, 0.125],
        "source": { "profile": "gaussian", "sigma": 0.25 }
    })
}

struct Run {
    dir: TempDir,
}

impl Run {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn out(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn exec(&self, args: &[&str], cfg: &Value, out: &str) -> Output {
        let path = self.dir.path().join(format!("{out}.json"));
        std::fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
        Command::new(env!("CARGO_BIN_EXE_homlab"))
            .args(args)
            .arg("--config")
            .arg(&path)
            .arg("--out")
            .arg(self.out(out))
            .output()
            .unwrap()
    }
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn check_kernel_pareto_passes() {
    let r = Run::new();
    let o = r.exec(&["check-kernel"], &base_config(), "pareto");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rep = read_json(&r.out("pareto").join("hypotheses.json"));
    for h in ["h1", "h2_lower", "h2_upper", "h3", "h4"] {
        assert_eq!(rep["verdicts"][h]["pass"], json!(true), "{h}");
    }
    assert!(r.out("pareto").join("config.json").exists());
}

#[test]
fn check_kernel_truncated_fails_with_exit_two() {
    let r = Run::new();
    let mut cfg = base_config();
    cfg["kernel"] = json!({ "name": "truncated", "params": { "alpha": 1.0, "cutoff": 10.0 } });
    let o = r.exec(&["check-kernel"], &cfg, "truncated");
    assert_eq!(o.status.code(), Some(2));
    let rep = read_json(&r.out("truncated").join("hypotheses.json"));
    assert_eq!(rep["verdicts"]["h2_lower"]["pass"], json!(false));
}

#[test]
fn config_errors_exit_one_and_name_the_key() {
    let r = Run::new();
    let mut cfg = base_config();
    cfg["kernel"]["params"]["alpha"] = json!(2.5);
    let o = r.exec(&["check-kernel"], &cfg, "alpha");
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("alpha"), "{}", stderr(&o));

    let mut cfg = base_config();
    cfg["grid"]["cell_count"] = json!(4);
    let o = r.exec(&["converge"], &cfg, "typo");
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cell_count"), "{}", stderr(&o));

    let mut cfg = base_config();
    cfg["coefficient"]["params"] = json!({ "bsae": 2.0 });
    let o = r.exec(&["effective"], &cfg, "coeff");
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bsae"), "{}", stderr(&o));

    let mut cfg = base_config();
    cfg["schema_version"] = json!(7);
    let o = r.exec(&["effective"], &cfg, "schema");
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("schema_version"));

    let mut cfg = base_config();
    cfg["coefficient"]["mode"] = json!("locally_periodic");
    let o = r.exec(&["effective"], &cfg, "mode");
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("mode"));
}

#[test]
fn effective_examples() {
    let r = Run::new();
    let mut cfg = base_config();
    cfg["coefficient"] = json!({ "name": "constant", "params": { "value": 1.0 } });
    assert_eq!(r.exec(&["effective"], &cfg, "one").status.code(), Some(0));
    assert_eq!(read_json(&r.out("one").join("effective.json"))["lambda_bar"], json!(1.0));

    cfg["coefficient"] = json!({ "name": "product", "params": {} });
    assert_eq!(r.exec(&["effective"], &cfg, "product").status.code(), Some(0));
    let lb = read_json(&r.out("product").join("effective.json"))["lambda_bar"].as_f64().unwrap();
    assert!((lb - 2.0).abs() < 1e-6);
    let k_table = std::fs::read_to_string(r.out("product").join("k_table.csv")).unwrap();
    assert!(k_table.starts_with("direction,n,k\n"));

    cfg["coefficient"] = json!({ "name": "modulated" });
    cfg["effective"] = json!({ "points": [[0.0, 1.0]], "lattice": 0 });
    let o = r.exec(&["effective"], &cfg, "field");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rep = read_json(&r.out("field").join("effective.json"));
    let got = rep["field"][0]["lambda_bar"].as_f64().unwrap();
    let c = LocallyPeriodicCoefficient::modulated(1).unwrap();
    let want = effective_lambda_field(&c, &[0.0], &[1.0], &CellQuad::for_dimension(1)).unwrap();
    assert_eq!(got, want);
}

#[test]
fn solve_examples_and_determinism() {
    let r = Run::new();
    let mut cfg = base_config();
    cfg["source"] = json!({ "profile": "zero" });
    assert_eq!(r.exec(&["solve", "--eps", "0.125"], &cfg, "zero").status.code(), Some(0));
    let text = std::fs::read_to_string(r.out("zero").join("solution.csv")).unwrap();
    let u = homlab_core::GridFunction::read_csv(text.as_bytes()).unwrap();
    assert!(u.values().iter().all(|&v| v == 0.0));

    let cfg = base_config();
    assert_eq!(r.exec(&["solve", "--eps", "0.125"], &cfg, "a").status.code(), Some(0));
    assert_eq!(r.exec(&["solve", "--eps", "0.125"], &cfg, "b").status.code(), Some(0));
    let rep = read_json(&r.out("a").join("solve_report.json"));
    let norm = rep["report"]["l2_norm"].as_f64().unwrap();
    let bound = rep["report"]["resolvent_bound"].as_f64().unwrap();
    assert!(norm <= bound * (1.0 + 1e-10));
    for f in ["solve_report.json", "solution.csv", "solution.dat"] {
        assert_eq!(
            std::fs::read(r.out("a").join(f)).unwrap(),
            std::fs::read(r.out("b").join(f)).unwrap(),
            "{f}"
        );
    }
    let o = r.exec(&["solve", "--effective", "--threads", "1"], &cfg, "eff");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let plot = std::fs::read_to_string(r.out("eff").join("solution.dat")).unwrap();
    assert!(plot.starts_with("# x u\n"));
    assert_eq!(plot.lines().nth(1).unwrap().split_whitespace().count(), 2);
}

#[test]
fn converge_examples() {
    let r = Run::new();
    let o = r.exec(&["converge"], &base_config(), "study");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rep = read_json(&r.out("study").join("convergence.json"));
    let errs: Vec<f64> = rep["rows"].as_array().unwrap().iter().map(|r| r["l2_error"].as_f64().unwrap()).collect();
    assert_eq!(errs.len(), 2);
    assert!(errs[1] < errs[0]);
    let table = std::fs::read_to_string(r.out("study").join("convergence.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
    let plot = std::fs::read_to_string(r.out("study").join("convergence_loglog.dat")).unwrap();
    assert!(plot.starts_with("# eps l2_error\n"));

    let mut cfg = base_config();
    cfg["eps"] = json!([0.125]);
    assert_eq!(r.exec(&["converge"], &cfg, "single").status.code(), Some(0));
    let rep = read_json(&r.out("single").join("convergence.json"));
    assert_eq!(rep["rows"].as_array().unwrap().len(), 1);

    let mut cfg = base_config();
    cfg["grid"]["cells_per_axis"] = json!(16);
    let o = r.exec(&["converge"], &cfg, "coarse");
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("resolution"), "{}", stderr(&o));

    let mut cfg = base_config();
    cfg["eps"] = json!([0.125, 0.25]);
    let o = r.exec(&["converge"], &cfg, "order");
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("eps"));
}

#[test]
fn diagnose_examples() {
    let r = Run::new();
    let mut cfg = base_config();
    cfg["coefficient"] = json!({ "name": "constant", "params": { "value": 2.0 } });
    cfg["diagnostics"] = json!({
        "regions": [0.5, 0.25],
        "cubes": [{ "eps": 0.0625, "delta": 1.0, "outer": 2.0 }],
        "translation_shifts": [0, 16, 32],
        "exterior_n": [1.0, 2.0],
        "random_checks": 3
    });
    let o = r.exec(&["diagnose", "--seed", "7"], &cfg, "d");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rep = read_json(&r.out("d").join("diagnostics.json"));
    for s in rep["regions"].as_array().unwrap() {
        let parts = s["g1"].as_f64().unwrap() + s["g2"].as_f64().unwrap() + s["g3"].as_f64().unwrap();
        let ext = if s["exterior_in_g3"].as_bool().unwrap() { 0.0 } else { s["exterior"].as_f64().unwrap() };
        let total = s["total"].as_f64().unwrap();
        assert!((parts + ext - total).abs() <= 1e-12 * total.abs());
    }
    assert_eq!(rep["cubes"][0]["gap"], json!(0.0));
    assert_eq!(rep["translation"]["rows"][0]["energy"], json!(0.0));
    assert_eq!(rep["forms"]["seed"], json!(7));
    assert!(rep["forms"]["max_form_defect"].as_f64().unwrap() < 1e-10);

    // the seed only moves the random-vector diagnostics
    let o = r.exec(&["diagnose", "--seed", "8"], &cfg, "e");
    assert_eq!(o.status.code(), Some(0));
    for f in ["regions.csv", "cubes.csv", "translation.csv", "exterior.csv"] {
        assert_eq!(
            std::fs::read(r.out("d").join(f)).unwrap(),
            std::fs::read(r.out("e").join(f)).unwrap(),
            "{f}"
        );
    }

    cfg["coefficient"] = json!({ "name": "slow_exp" });
    cfg["diagnostics"] = json!({ "cubes": [{ "eps": 0.0625, "delta": 1.0 }] });
    let o = r.exec(&["diagnose"], &cfg, "lp");
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cubes"));
}
