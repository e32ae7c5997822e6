use std::f64::consts::PI;

use homlab_core::assembly::{assemble_eps, AssemblyConfig};
use homlab_core::coefficients::{Coefficient, PeriodicCoefficient};
use homlab_core::diagnostics::{
    cube_decomposition_check, exterior_cutoff, exterior_decay_check, region_split_energy, run_convergence_study,
    translation_energy_check, ShiftRegime, StudyConfig,
};
use homlab_core::grid::{Grid, SourceProfile};
use homlab_core::kernels::make_pareto_kernel;
use homlab_core::Error;
use proptest::prelude::*;

#[test]
fn region_split_matches_brute_force_partition() {
    let k = make_pareto_kernel(1, 1.0, 1.0).unwrap();
    let c: Coefficient = PeriodicCoefficient::product(1, 2.0, 1.0).unwrap().into();
    let g = Grid::new(1, 4.0, 256).unwrap();
    let op = assemble_eps(&k, &c, 0.0625, &g, &AssemblyConfig::default()).unwrap();
    let u = g.sample(|x| (-x[0] * x[0]).exp());
    let phi = g.sample(|x| (-(x[0] - 0.5).powi(2)).exp());
    let hd = g.spacing();
    for delta in [0.75, 0.5, 0.25] {
        let s = region_split_energy(&op, &u, &phi, delta).unwrap();
        assert!(s.partition_defect() < 1e-12);
        // own classification, strict inequalities spelled out
        let outer = 1.0 / delta;
        let (mut g1, mut g2, mut g3) = (0.0, 0.0, 0.0);
        for i in 0..g.len() {
            for j in (i + 1)..g.len() {
                let (x, y) = (g.center(i)[0], g.center(j)[0]);
                let t = op.weight(i, j) * (u.values()[j] - u.values()[i]) * (phi.values()[j] - phi.values()[i]);
                if !(x.abs() + y.abs() < outer) {
                    g3 += t;
                } else if (x - y).abs() > delta {
                    g1 += t;
                } else {
                    g2 += t;
                }
            }
        }
        assert!((s.g1 - g1 * hd).abs() <= 1e-12 * s.total.abs());
        assert!((s.g2 - g2 * hd).abs() <= 1e-12 * s.total.abs());
        let ext = if s.exterior_in_g3 { s.exterior } else { 0.0 };
        assert!((s.g3 - g3 * hd - ext).abs() <= 1e-12 * s.total.abs());
        // with u = phi every pair term is nonnegative
        let same = region_split_energy(&op, &u, &u, delta).unwrap();
        assert!(same.g1 >= 0.0 && same.g2 >= 0.0 && same.g3 >= 0.0);
    }
}

#[test]
fn region_split_rejects_delta_out_of_range() {
    let k = make_pareto_kernel(1, 1.0, 1.0).unwrap();
    let c: Coefficient = PeriodicCoefficient::constant(1, 1.0).unwrap().into();
    let g = Grid::new(1, 4.0, 64).unwrap();
    let op = assemble_eps(&k, &c, 0.125, &g, &AssemblyConfig::default()).unwrap();
    let u = g.sample(|x| (-x[0] * x[0]).exp());
    for delta in [0.1, 1.0, 2.0] {
        assert!(matches!(
            region_split_energy(&op, &u, &u, delta),
            Err(Error::DeltaOutOfRange { .. })
        ));
    }
}

#[test]
fn cube_check_examples() {
    let k = make_pareto_kernel(1, 1.0, 1.0).unwrap();
    let g = Grid::new(1, 2.0, 1024).unwrap();
    let u = g.sample(|x| (-x[0] * x[0]).exp());
    let phi = g.sample(|x| (-2.0 * (x[0] - 0.3).powi(2)).exp());

    let constant = PeriodicCoefficient::constant(1, 2.0).unwrap();
    let r = cube_decomposition_check(&k, &constant, 0.0625, 1.0, Some(2.0), &u, &phi).unwrap();
    assert_eq!(r.gap, 0.0);
    assert!(r.lhs > 0.0 && r.cube_count > 0);

    let p = PeriodicCoefficient::product(1, 2.0, 1.0).unwrap();
    let masses: Vec<f64> = [0.0625, 0.03125, 0.015625]
        .iter()
        .map(|&e| cube_decomposition_check(&k, &p, e, 1.0, Some(2.0), &u, &phi).unwrap().boundary_mass)
        .collect();
    assert!(masses[0] > masses[1] && masses[1] > masses[2], "{masses:?}");

    assert!(matches!(
        cube_decomposition_check(&k, &p, 0.25, 1.0, Some(2.0), &u, &phi),
        Err(Error::ScaleSeparation { .. })
    ));
    let coarse = Grid::new(1, 2.0, 64).unwrap();
    let uc = coarse.sample(|x| (-x[0] * x[0]).exp());
    assert!(matches!(
        cube_decomposition_check(&k, &p, 0.03125, 1.0, Some(2.0), &uc, &uc),
        Err(Error::Resolution { .. })
    ));
}

#[test]
fn translation_energy_against_gaussian_closed_form() {
    // u = exp(-x^2): int (u(x+s) - u(x))^2 dx = 2 sqrt(pi/2) (1 - exp(-s^2/2))
    let g = Grid::new(1, 8.0, 2048).unwrap();
    let u = g.sample(|x| (-x[0] * x[0]).exp());
    let shifts = [0, 4, 32, 64, 256];
    let r = translation_energy_check(&u, 0.0625, 1.0, 1.0, &shifts).unwrap();
    assert_eq!(r.rows[0].energy, 0.0);
    for row in &r.rows[1..] {
        let s = row.shift;
        let exact = 2.0 * (PI / 2.0).sqrt() * (1.0 - (-s * s / 2.0).exp());
        assert!((row.energy - exact).abs() <= 1e-10 * exact, "shift {s}");
    }
    // 3 M eps = 0.1875 separates the regimes
    assert_eq!(r.rows[1].regime, ShiftRegime::Near);
    assert_eq!(r.rows[2].regime, ShiftRegime::Far);
    assert!(r.far_spread.unwrap() >= 1.0);
}

#[test]
fn exterior_decay_examples() {
    let g = Grid::new(1, 8.0, 512).unwrap();
    let u = g.sample(|x| (-x[0] * x[0]).exp());
    let tail = exterior_decay_check(&u, &[0.5, 1.0, 2.0, 4.0]).unwrap();
    for w in tail.windows(2) {
        assert!(w[1].1 <= w[0].1);
    }
    let bump = SourceProfile::Bump {
        center: vec![],
        radius: 1.0,
        amplitude: 1.0,
    }
    .sample(&g)
    .unwrap();
    for (_, m) in exterior_decay_check(&bump, &[1.0, 2.0, 3.0]).unwrap() {
        assert_eq!(m, 0.0);
    }
    assert!(matches!(
        exterior_decay_check(&u, &[8.0]),
        Err(Error::CutoffOutsideBox { .. })
    ));
}

fn small_study(source: SourceProfile, cells: usize, eps: Vec<f64>) -> StudyConfig {
    StudyConfig::new(
        make_pareto_kernel(1, 1.0, 1.0).unwrap(),
        PeriodicCoefficient::product(1, 2.0, 1.0).unwrap().into(),
        Grid::new(1, 4.0, cells).unwrap(),
        eps,
        source,
        1.0,
    )
}

#[test]
fn zero_source_study_has_zero_errors() {
    let out = run_convergence_study(&small_study(SourceProfile::Zero, 128, vec![0.25, 0.125])).unwrap();
    assert_eq!(out.report.errors(), vec![0.0, 0.0]);
    assert!(out.u0.values().iter().all(|&v| v == 0.0));
}

#[test]
fn single_eps_study_and_eps_ordering() {
    let src = SourceProfile::Gaussian {
        center: vec![],
        sigma: 0.25,
        amplitude: 1.0,
    };
    let out = run_convergence_study(&small_study(src.clone(), 128, vec![0.125])).unwrap();
    assert_eq!(out.report.rows.len(), 1);
    assert!(out.report.rows[0].l2_error > 0.0);
    assert!(out.report.errors_strictly_decreasing());
    // unsorted input with duplicates is normalized to decreasing order
    let out = run_convergence_study(&small_study(src.clone(), 128, vec![0.125, 0.25, 0.125])).unwrap();
    let eps: Vec<f64> = out.report.rows.iter().map(|r| r.eps).collect();
    assert_eq!(eps, vec![0.25, 0.125]);

    assert!(matches!(
        run_convergence_study(&small_study(src, 32, vec![0.125])),
        Err(Error::Resolution { .. })
    ));
    let wide = SourceProfile::Gaussian {
        center: vec![],
        sigma: 0.5,
        amplitude: 1.0,
    };
    assert!(matches!(
        run_convergence_study(&small_study(wide, 128, vec![0.125])),
        Err(Error::SourceSupport { .. })
    ));
}

proptest! {
    #[test]
    fn cutoff_is_monotone_and_bounded(a in 0.0f64..3.0, b in 0.0f64..3.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (pl, ph) = (exterior_cutoff(lo), exterior_cutoff(hi));
        prop_assert!((0.0..=1.0).contains(&pl) && (0.0..=1.0).contains(&ph));
        prop_assert!(pl <= ph);
    }

    #[test]
    fn cutoff_is_antisymmetric_about_midpoint(s in 0.0f64..0.5) {
        let t = 1.5 + s;
        prop_assert!((exterior_cutoff(t) + exterior_cutoff(3.0 - t) - 1.0).abs() < 1e-14);
    }
}
