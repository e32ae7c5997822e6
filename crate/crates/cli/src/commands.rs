use homlab_core::diagnostics::{effective_operator, study_angular_density, ShiftRegime};
use homlab_core::kernels::{DirectionSet, KSequence};
use homlab_core::{
    assemble_eps, check_hypotheses, cube_decomposition_check, effective_lambda, exterior_decay_check,
    region_split_energy, resolvent_solve, run_convergence_study, translation_energy_check, Coefficient,
    FieldEvaluator, Grid, GridFunction, NonlocalOperator,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::config::{ExperimentConfig, Mode};
use crate::output::RunDir;
use crate::{CliError, Status};

pub fn check_kernel(cfg: &ExperimentConfig, run: &RunDir) -> Result<Status, CliError> {
    let kernel = cfg.kernel()?;
    let report = check_hypotheses(&kernel, &cfg.hypotheses)?;
    run.write_json("hypotheses.json", &report)?;
    let v = &report.verdicts;
    for (name, verdict) in [
        ("H1", &v.h1),
        ("H2-lower", &v.h2_lower),
        ("H2-upper", &v.h2_upper),
        ("H3", &v.h3),
        ("H4", &v.h4),
    ] {
        println!("{name:<9} {}  {}", if verdict.pass { "pass" } else { "FAIL" }, verdict.detail);
    }
    Ok(if report.all_pass() {
        Status::Ok
    } else {
        Status::HypothesisFailed
    })
}

fn direction_label(d: &DirectionSet) -> String {
    match d {
        DirectionSet::Positive => "positive".into(),
        DirectionSet::Negative => "negative".into(),
        DirectionSet::Full => "full".into(),
        DirectionSet::Sector { start, end } => format!("sector[{start},{end})"),
    }
}

fn k_rows(seqs: &[KSequence]) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for s in seqs {
        for (n, v) in s.n_list.iter().zip(&s.values) {
            rows.push(vec![direction_label(&s.direction), n.to_string(), v.to_string()]);
        }
    }
    rows
}

#[derive(Serialize)]
struct FieldSample {
    x: Vec<f64>,
    y: Vec<f64>,
    lambda_bar: f64,
}

pub fn effective(cfg: &ExperimentConfig, run: &RunDir) -> Result<Status, CliError> {
    let study = cfg.study()?;
    let d = cfg.dimension;
    let cell = cfg.assembly.cell_quad(d);
    let (k, k_estimates) = study_angular_density(&study)?;
    let mut samples = Vec::new();
    let lambda_bar = match &study.coefficient {
        Coefficient::Periodic(c) => {
            let lb = effective_lambda(c, &cell)?;
            println!("lambda_bar = {lb}");
            Some(lb)
        }
        Coefficient::LocallyPeriodic(c) => {
            let field = FieldEvaluator::new(c, &cell)?;
            let mut pairs: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
            if d == 1 && cfg.effective.lattice >= 2 {
                let r = cfg.grid.half_width;
                let n = cfg.effective.lattice;
                let at = |i: usize| -r + 2.0 * r * i as f64 / (n - 1) as f64;
                for i in 0..n {
                    for j in 0..n {
                        pairs.push((vec![at(i)], vec![at(j)]));
                    }
                }
            }
            for (idx, p) in cfg.effective.points.iter().enumerate() {
                if p.len() != 2 * d {
                    return Err(CliError::Config(format!(
                        "effective.points[{idx}]: expected {} numbers, got {}",
                        2 * d,
                        p.len()
                    )));
                }
                pairs.push((p[..d].to_vec(), p[d..].to_vec()));
            }
            for (x, y) in pairs {
                let lambda_bar = field.eval(&x, &y)?;
                samples.push(FieldSample { x, y, lambda_bar });
            }
            for s in samples.iter().rev().take(cfg.effective.points.len()).rev() {
                println!("lambda_bar({:?}, {:?}) = {}", s.x, s.y, s.lambda_bar);
            }
            None
        }
    };
    let mode = if study.coefficient.is_locally_periodic() {
        Mode::LocallyPeriodic
    } else {
        Mode::Periodic
    };
    run.write_json(
        "effective.json",
        &json!({
            "coefficient": study.coefficient.name(),
            "mode": mode,
            "lambda_bar": lambda_bar,
            "field": samples,
            "angular_density": k,
            "k_estimates": k_estimates,
        }),
    )?;
    run.write_table("k_table.csv", &["direction", "n", "k"], &k_rows(&k_estimates))?;
    if !samples.is_empty() {
        let rows: Vec<Vec<String>> = samples
            .iter()
            .map(|s| {
                let mut r: Vec<String> = s.x.iter().chain(&s.y).map(|v| v.to_string()).collect();
                r.push(s.lambda_bar.to_string());
                r
            })
            .collect();
        let header: &[&str] = if d == 1 {
            &["x", "y", "lambda_bar"]
        } else {
            &["x0", "x1", "y0", "y1", "lambda_bar"]
        };
        run.write_table("effective_field.csv", header, &rows)?;
    }
    Ok(Status::Ok)
}

pub enum SolveTarget {
    Eps(f64),
    Effective,
}

fn operator_for(cfg: &ExperimentConfig, target: &SolveTarget) -> Result<NonlocalOperator, CliError> {
    match target {
        SolveTarget::Eps(eps) => Ok(assemble_eps(
            &cfg.kernel()?,
            &cfg.coefficient()?,
            *eps,
            &cfg.grid()?,
            &cfg.assembly,
        )?),
        SolveTarget::Effective => {
            let study = cfg.study()?;
            let (k, _) = study_angular_density(&study)?;
            Ok(effective_operator(&study, &k)?.0)
        }
    }
}

fn profile_plot(u: &GridFunction) -> Vec<(f64, f64)> {
    let g = u.grid();
    u.values().iter().enumerate().map(|(i, v)| (g.center(i)[0], *v)).collect()
}

pub fn solve(cfg: &ExperimentConfig, run: &RunDir, target: SolveTarget) -> Result<Status, CliError> {
    let op = operator_for(cfg, &target)?;
    let f = cfg.source.sample(op.grid())?;
    let rep = resolvent_solve(&op, &f, &cfg.solve())?;
    let label = match target {
        SolveTarget::Eps(e) => json!({ "eps": e }),
        SolveTarget::Effective => json!("effective"),
    };
    run.write_json(
        "solve_report.json",
        &json!({ "target": label, "operator": op.meta(), "report": &rep }),
    )?;
    run.write_grid_function("solution.csv", rep.solution())?;
    if cfg.dimension == 1 {
        run.write_plot("solution.dat", ("x", "u"), &profile_plot(rep.solution()))?;
    }
    println!(
        "iterations {}  rel_residual {:e}  |u| {:e}  |f|/m {:e}",
        rep.iterations, rep.rel_residual, rep.l2_norm, rep.resolvent_bound
    );
    Ok(Status::Ok)
}

pub fn converge(cfg: &ExperimentConfig, run: &RunDir) -> Result<Status, CliError> {
    let study = cfg.study()?;
    let out = run_convergence_study(&study)?;
    let report = &out.report;
    run.write_json("convergence.json", report)?;
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.eps.to_string(),
                r.l2_error.to_string(),
                r.energy.to_string(),
                r.solve.iterations.to_string(),
                r.solve.rel_residual.to_string(),
                r.solve.l2_norm.to_string(),
                r.solve.resolvent_bound.to_string(),
            ]
        })
        .collect();
    run.write_table(
        "convergence.csv",
        &["eps", "l2_error", "energy", "iterations", "rel_residual", "l2_norm", "resolvent_bound"],
        &rows,
    )?;
    let pts: Vec<(f64, f64)> = report.rows.iter().map(|r| (r.eps, r.l2_error)).collect();
    run.write_plot("convergence_loglog.dat", ("eps", "l2_error"), &pts)?;
    run.write_table("k_table.csv", &["direction", "n", "k"], &k_rows(&report.meta.k_estimates))?;
    run.write_grid_function("source.csv", &out.source)?;
    run.write_grid_function("u0.csv", &out.u0)?;
    for (r, u) in report.rows.iter().zip(&out.solutions) {
        run.write_grid_function(&format!("u_eps_{}.csv", r.eps), u)?;
    }
    println!("{:>12} {:>14} {:>6}", "eps", "l2_error", "iter");
    for r in &report.rows {
        println!("{:>12} {:>14.6e} {:>6}", r.eps, r.l2_error, r.solve.iterations);
    }
    println!(
        "errors strictly decreasing: {}",
        if report.errors_strictly_decreasing() { "yes" } else { "no" }
    );
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct FormCheck {
    seed: u64,
    vectors: usize,
    max_symmetry_defect: f64,
    max_form_defect: f64,
}

fn random_form_checks(op: &NonlocalOperator, count: usize, seed: u64) -> Result<FormCheck, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = *op.grid();
    let mut draw = || -> Result<GridFunction, CliError> {
        Ok(GridFunction::new(g, (0..g.len()).map(|_| rng.random_range(-1.0..1.0)).collect())?)
    };
    let (mut sym, mut form) = (0.0f64, 0.0f64);
    for _ in 0..count {
        let u = draw()?;
        let v = draw()?;
        let lu = op.apply(&u)?;
        let luv = lu.inner(&v)?;
        let ulv = u.inner(&op.apply(&v)?)?;
        sym = sym.max((luv - ulv).abs() / luv.abs().max(ulv.abs()).max(f64::MIN_POSITIVE));
        let e = op.energy(&u, &u)?;
        form = form.max((e + lu.inner(&u)?).abs() / e.abs().max(f64::MIN_POSITIVE));
    }
    Ok(FormCheck {
        seed,
        vectors: count,
        max_symmetry_defect: sym,
        max_form_defect: form,
    })
}

fn fmt_rows<const N: usize>(rows: impl Iterator<Item = [f64; N]>) -> Vec<Vec<String>> {
    rows.map(|r| r.iter().map(|v| v.to_string()).collect()).collect()
}

pub fn diagnose(cfg: &ExperimentConfig, run: &RunDir, seed: u64) -> Result<Status, CliError> {
    let dg = &cfg.diagnostics;
    let eps_list = cfg.checked_eps()?;
    let eps = dg.eps.unwrap_or(*eps_list.last().expect("checked eps list is nonempty"));
    let kernel = cfg.kernel()?;
    let coeff = cfg.coefficient()?;
    let grid = cfg.grid()?;
    let mut summary = serde_json::Map::new();
    summary.insert("eps".into(), json!(eps));

    let needs_op = !dg.regions.is_empty()
        || !dg.translation_shifts.is_empty()
        || !dg.exterior_n.is_empty()
        || dg.random_checks > 0;
    let op = if needs_op {
        Some(assemble_eps(&kernel, &coeff, eps, &grid, &cfg.assembly)?)
    } else {
        None
    };

    if !dg.regions.is_empty() {
        let op = op.as_ref().expect("operator assembled above");
        let u = dg.u.sample(&grid)?;
        let phi = dg.phi.sample(&grid)?;
        let mut splits = Vec::new();
        for &delta in &dg.regions {
            splits.push(region_split_energy(op, &u, &phi, delta)?);
        }
        let rows = fmt_rows(splits.iter().map(|s| {
            [s.delta, s.g1, s.g2, s.g3, s.exterior, s.total, s.partition_defect()]
        }));
        run.write_table(
            "regions.csv",
            &["delta", "g1", "g2", "g3", "exterior", "total", "partition_defect"],
            &rows,
        )?;
        for s in &splits {
            println!(
                "region delta {:<8} g1 {:e} g2 {:e} g3 {:e} defect {:e}",
                s.delta,
                s.g1,
                s.g2,
                s.g3,
                s.partition_defect()
            );
        }
        summary.insert("regions".into(), serde_json::to_value(&splits).map_err(io)?);
    }

    if !dg.cubes.is_empty() {
        let periodic = match &coeff {
            Coefficient::Periodic(c) => c,
            Coefficient::LocallyPeriodic(_) => {
                return Err(CliError::Config(
                    "diagnostics.cubes: the cube check needs a periodic coefficient".into(),
                ))
            }
        };
        let mut reports = Vec::new();
        for c in &dg.cubes {
            let g = match &c.grid {
                Some(e) => Grid::new(cfg.dimension, e.half_width, e.cells_per_axis)?,
                None => grid,
            };
            let u = dg.u.sample(&g)?;
            let phi = dg.phi.sample(&g)?;
            let r = cube_decomposition_check(&kernel, periodic, c.eps, c.delta, c.outer, &u, &phi)?;
            println!("cube eps {:<10} delta {:<6} gap {:e} boundary mass {:e}", r.eps, r.delta, r.gap, r.boundary_mass);
            reports.push(r);
        }
        let rows = fmt_rows(reports.iter().map(|r| {
            [r.eps, r.delta, r.outer, r.lambda_bar, r.lhs, r.rhs, r.gap, r.cube_count as f64, r.boundary_mass]
        }));
        run.write_table(
            "cubes.csv",
            &["eps", "delta", "outer", "lambda_bar", "lhs", "rhs", "gap", "cube_count", "boundary_mass"],
            &rows,
        )?;
        summary.insert("cubes".into(), serde_json::to_value(&reports).map_err(io)?);
    }

    if !dg.translation_shifts.is_empty() || !dg.exterior_n.is_empty() {
        let op = op.as_ref().expect("operator assembled above");
        let f = cfg.source.sample(&grid)?;
        let rep = resolvent_solve(op, &f, &cfg.solve())?;
        let u = rep.solution();
        summary.insert("solve".into(), serde_json::to_value(&rep).map_err(io)?);
        if !dg.translation_shifts.is_empty() {
            let t = translation_energy_check(u, eps, kernel.m_radius(), kernel.alpha(), &dg.translation_shifts)?;
            let rows: Vec<Vec<String>> = t
                .rows
                .iter()
                .map(|r| {
                    let regime = match r.regime {
                        ShiftRegime::Far => "far",
                        ShiftRegime::Near => "near",
                    };
                    vec![r.shift.to_string(), r.energy.to_string(), regime.into(), r.ratio.to_string()]
                })
                .collect();
            run.write_table("translation.csv", &["shift", "energy", "regime", "ratio"], &rows)?;
            if let Some(s) = t.far_spread {
                println!("translation far-regime spread {s:e}");
            }
            summary.insert("translation".into(), serde_json::to_value(&t).map_err(io)?);
        }
        if !dg.exterior_n.is_empty() {
            let tail = exterior_decay_check(u, &dg.exterior_n)?;
            let reference = rep.f_norm * rep.f_norm / (cfg.m * cfg.m);
            let rows = fmt_rows(tail.iter().map(|&(n, m)| [n, m, m / reference]));
            run.write_table("exterior.csv", &["n", "tail_mass", "relative_to_f_over_m_squared"], &rows)?;
            let pts: Vec<(f64, f64)> = tail.clone();
            run.write_plot("exterior.dat", ("n", "tail_mass"), &pts)?;
            for (n, m) in &tail {
                println!("exterior n {n:<8} tail {m:e}");
            }
            summary.insert(
                "exterior".into(),
                json!({ "reference": reference, "tail": tail }),
            );
        }
    }

    if dg.random_checks > 0 {
        let op = op.as_ref().expect("operator assembled above");
        let fc = random_form_checks(op, dg.random_checks, seed)?;
        println!(
            "forms: {} random vectors, symmetry defect {:e}, form defect {:e}",
            fc.vectors, fc.max_symmetry_defect, fc.max_form_defect
        );
        summary.insert("forms".into(), serde_json::to_value(&fc).map_err(io)?);
    }

    run.write_json("diagnostics.json", &summary)?;
    Ok(Status::Ok)
}

fn io(e: serde_json::Error) -> CliError {
    CliError::Io(e.to_string())
}
