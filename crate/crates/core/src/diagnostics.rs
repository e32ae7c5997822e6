//! Homogenization studies and numerical re-enactments of the estimates
//! behind the convergence proof: the near/far/outer region split of the
//! bilinear form, replacement of the oscillating coefficient by its cell
//! average on eps-cubes, the translation-energy bound and the decay of the
//! solutions outside large balls.

use rayon::prelude::*;
use serde::Serialize;

use crate::assembly::{assemble_effective, assemble_eps, AssemblyConfig, LambdaBar};
use crate::coefficients::{effective_lambda, eval_oscillating, Coefficient, FieldEvaluator, PeriodicCoefficient};
use crate::error::{invalid, Error, Result};
use crate::grid::{Grid, GridFunction, SourceProfile};
use crate::kernels::{estimate_k, AngularDensity, DirectionSet, HypothesisPlan, KSequence, KernelSpec};
use crate::operator::NonlocalOperator;
use crate::solver::{resolvent_solve, SolveConfig, SolveReport};

/// Everything a convergence study needs.
#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub kernel: KernelSpec,
    pub coefficient: Coefficient,
    pub grid: Grid,
    pub eps_list: Vec<f64>,
    pub source: SourceProfile,
    pub solve: SolveConfig,
    pub assembly: AssemblyConfig,
    /// Angular density of the limit operator; estimated from the kernel
    /// when absent.
    pub angular: Option<AngularDensity>,
    pub hypotheses: HypothesisPlan,
}

impl StudyConfig {
    pub fn new(kernel: KernelSpec, coefficient: Coefficient, grid: Grid, eps_list: Vec<f64>, source: SourceProfile, m: f64) -> Self {
        Self {
            kernel,
            coefficient,
            grid,
            eps_list,
            source,
            solve: SolveConfig::new(m),
            assembly: AssemblyConfig::default(),
            angular: None,
            hypotheses: HypothesisPlan::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub m: f64,
    pub iterations: usize,
    pub rel_residual: f64,
    pub l2_norm: f64,
    pub f_norm: f64,
    pub resolvent_bound: f64,
    pub functional: f64,
}

impl From<&SolveReport> for SolveSummary {
    fn from(r: &SolveReport) -> Self {
        Self {
            m: r.m,
            iterations: r.iterations,
            rel_residual: r.rel_residual,
            l2_norm: r.l2_norm,
            f_norm: r.f_norm,
            resolvent_bound: r.resolvent_bound,
            functional: r.energy,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyRow {
    pub eps: f64,
    /// `|u^eps - u_0|` in the discrete L2 norm.
    pub l2_error: f64,
    /// `(-L^eps u^eps, u^eps)`.
    pub energy: f64,
    pub solve: SolveSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyMeta {
    pub kernel: String,
    pub coefficient: String,
    pub mode: &'static str,
    pub dimension: usize,
    pub alpha: f64,
    pub m: f64,
    pub half_width: f64,
    pub cells_per_axis: usize,
    pub source: SourceProfile,
    pub lambda_bar: Option<f64>,
    pub angular_density: AngularDensity,
    pub k_estimates: Vec<KSequence>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub meta: StudyMeta,
    pub effective: SolveSummary,
    pub effective_energy: f64,
    /// Sorted by decreasing eps.
    pub rows: Vec<StudyRow>,
}

impl ConvergenceReport {
    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.l2_error).collect()
    }

    pub fn errors_strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].l2_error < w[0].l2_error)
    }
}

/// A finished study with the solutions it produced.
#[derive(Debug, Clone)]
pub struct StudyOutcome {
    pub report: ConvergenceReport,
    pub source: GridFunction,
    pub u0: GridFunction,
    /// Same order as `report.rows`.
    pub solutions: Vec<GridFunction>,
}

pub fn validate_study(cfg: &StudyConfig) -> Result<Vec<f64>> {
    if cfg.eps_list.is_empty() {
        return Err(Error::EmptySamples("eps list"));
    }
    let mut eps = cfg.eps_list.clone();
    if eps.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(invalid("eps", "all values must be positive"));
    }
    eps.sort_by(|a, b| b.total_cmp(a));
    eps.dedup();
    let h = cfg.grid.spacing();
    let min = *eps.last().unwrap();
    if h > min {
        return Err(Error::Resolution { h, eps: min });
    }
    cfg.source.validate(cfg.grid.dimension())?;
    let support = cfg.source.support_radius(cfg.grid.dimension());
    let limit = cfg.grid.half_width() / 4.0;
    if support > limit {
        return Err(Error::SourceSupport { support, limit });
    }
    cfg.solve.validate()?;
    Ok(eps)
}

/// Estimated angular density with the study's hypothesis plan.
pub fn study_angular_density(cfg: &StudyConfig) -> Result<(AngularDensity, Vec<KSequence>)> {
    if let Some(k) = &cfg.angular {
        return Ok((k.clone(), Vec::new()));
    }
    let m = cfg.kernel.m_radius();
    let n_list: Vec<f64> = cfg.hypotheses.k_multiples.iter().map(|k| k * m).collect();
    let est = estimate_k(
        &cfg.kernel,
        &n_list,
        &DirectionSet::default_partition(cfg.kernel.dimension()),
        &cfg.hypotheses.quad,
        &cfg.hypotheses.tolerances,
    )?;
    Ok((est.angular_density()?, est.sequences))
}

/// Assembles the discrete limit operator of a study.
pub fn effective_operator(cfg: &StudyConfig, k: &AngularDensity) -> Result<(NonlocalOperator, Option<f64>)> {
    let cell = cfg.assembly.cell_quad(cfg.grid.dimension());
    match &cfg.coefficient {
        Coefficient::Periodic(c) => {
            let lb = effective_lambda(c, &cell)?;
            let op = assemble_effective(k, &LambdaBar::Constant(lb), cfg.kernel.alpha(), &cfg.grid, &cfg.assembly)?;
            Ok((op, Some(lb)))
        }
        Coefficient::LocallyPeriodic(c) => {
            let field = FieldEvaluator::new(c, &cell)?;
            let op = assemble_effective(
                k,
                &LambdaBar::Field { field, cache: None },
                cfg.kernel.alpha(),
                &cfg.grid,
                &cfg.assembly,
            )?;
            Ok((op, None))
        }
    }
}

/// Solves the limit problem once and the oscillating problem for every eps
/// (largest first), reporting `|u^eps - u_0|`.
pub fn run_convergence_study(cfg: &StudyConfig) -> Result<StudyOutcome> {
    let eps_list = validate_study(cfg)?;
    let (k, k_estimates) = study_angular_density(cfg)?;
    let f = cfg.source.sample(&cfg.grid)?;

    let (op0, lambda_bar) = effective_operator(cfg, &k)?;
    let rep0 = resolvent_solve(&op0, &f, &cfg.solve)?;
    let effective = SolveSummary::from(&rep0);
    let u0 = rep0.into_solution();
    let effective_energy = op0.energy(&u0, &u0)?;
    drop(op0);

    let mut rows = Vec::with_capacity(eps_list.len());
    let mut solutions = Vec::with_capacity(eps_list.len());
    for &eps in &eps_list {
        let op = assemble_eps(&cfg.kernel, &cfg.coefficient, eps, &cfg.grid, &cfg.assembly)?;
        let rep = resolvent_solve(&op, &f, &cfg.solve)?;
        let summary = SolveSummary::from(&rep);
        let u = rep.into_solution();
        rows.push(StudyRow {
            eps,
            l2_error: u.l2_distance(&u0)?,
            energy: op.energy(&u, &u)?,
            solve: summary,
        });
        solutions.push(u);
    }

    let meta = StudyMeta {
        kernel: cfg.kernel.name().to_string(),
        coefficient: cfg.coefficient.name().to_string(),
        mode: if cfg.coefficient.is_locally_periodic() {
            "locally_periodic"
        } else {
            "periodic"
        },
        dimension: cfg.grid.dimension(),
        alpha: cfg.kernel.alpha(),
        m: cfg.solve.m,
        half_width: cfg.grid.half_width(),
        cells_per_axis: cfg.grid.n_per_axis(),
        source: cfg.source.clone(),
        lambda_bar,
        angular_density: k,
        k_estimates,
    };
    Ok(StudyOutcome {
        report: ConvergenceReport {
            meta,
            effective,
            effective_energy,
            rows,
        },
        source: f,
        u0,
        solutions,
    })
}

fn require_1d(grid: &Grid, what: &'static str) -> Result<()> {
    if grid.dimension() == 1 {
        Ok(())
    } else {
        Err(invalid(what, "this diagnostic is implemented in one dimension only"))
    }
}

/// Which part of `R^d x R^d` a pair belongs to. Ties: `|x - y| = delta`
/// goes to the near region, `|x| + |y| = outer` to the outer region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// `|x - y| > delta`, `|x| + |y| < outer`
    Far,
    /// `|x - y| <= delta`, `|x| + |y| < outer`
    Near,
    /// `|x| + |y| >= outer`
    Outer,
}

#[inline]
pub fn classify(x: f64, y: f64, delta: f64, outer: f64) -> Region {
    if x.abs() + y.abs() >= outer {
        Region::Outer
    } else if (x - y).abs() <= delta {
        Region::Near
    } else {
        Region::Far
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RegionSplit {
    pub delta: f64,
    /// Contribution of pairs in G1 (far from the diagonal, inside the ball).
    pub g1: f64,
    /// Contribution of pairs in G2 (near the diagonal, inside the ball).
    pub g2: f64,
    /// Contribution of pairs in G3 (outside the ball), including the
    /// exterior term when the whole exterior lies in G3.
    pub g3: f64,
    /// `sum kappa_i u_i phi_i h^d`, interactions with the box exterior.
    pub exterior: f64,
    pub exterior_in_g3: bool,
    /// The unsplit form `E(u, phi)`.
    pub total: f64,
}

impl RegionSplit {
    /// `|g1 + g2 + g3 (+ exterior) - total| / |total|`.
    pub fn partition_defect(&self) -> f64 {
        let ext = if self.exterior_in_g3 { 0.0 } else { self.exterior };
        let s = self.g1 + self.g2 + self.g3 + ext;
        (s - self.total).abs() / self.total.abs().max(f64::MIN_POSITIVE)
    }
}

/// Splits `E(u, phi) = 1/2 sum w_ij (u_j - u_i)(phi_j - phi_i) h^d + exterior`
/// by pair membership in G1, G2, G3 with outer radius `1/delta`.
pub fn region_split_energy(op: &NonlocalOperator, u: &GridFunction, phi: &GridFunction, delta: f64) -> Result<RegionSplit> {
    let grid = *op.grid();
    require_1d(&grid, "grid")?;
    grid.ensure_same(u.grid())?;
    grid.ensure_same(phi.grid())?;
    let (lo, hi) = (2.0 * grid.spacing(), grid.half_width() / 4.0);
    if !(delta > lo && delta < hi) {
        return Err(Error::DeltaOutOfRange { delta, lo, hi });
    }
    let outer = 1.0 / delta;
    let (uv, pv) = (u.values(), phi.values());
    let n = op.len();
    let parts: Vec<[f64; 3]> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = grid.center(i)[0];
            let mut acc = [0.0; 3];
            let row = op.row(i);
            for j in (i + 1)..n {
                let w = row[j];
                if w == 0.0 {
                    continue;
                }
                let t = w * (uv[j] - uv[i]) * (pv[j] - pv[i]);
                let slot = match classify(xi, grid.center(j)[0], delta, outer) {
                    Region::Far => 0,
                    Region::Near => 1,
                    Region::Outer => 2,
                };
                acc[slot] += t;
            }
            acc
        })
        .collect();
    let hd = grid.cell_volume();
    let mut sums = [0.0; 3];
    for p in &parts {
        for k in 0..3 {
            sums[k] += p[k];
        }
    }
    let exterior: f64 = op
        .killing()
        .iter()
        .zip(uv.iter().zip(pv))
        .map(|(k, (a, b))| k * a * b)
        .sum::<f64>()
        * hd;
    // every exterior point has |y| >= R, so the exterior lies in G3 when
    // the outer radius does not exceed R
    let exterior_in_g3 = outer <= grid.half_width();
    let g3 = sums[2] * hd + if exterior_in_g3 { exterior } else { 0.0 };
    Ok(RegionSplit {
        delta,
        g1: sums[0] * hd,
        g2: sums[1] * hd,
        g3,
        exterior,
        exterior_in_g3,
        total: op.energy(u, phi)?,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CubeCheckReport {
    pub eps: f64,
    pub delta: f64,
    pub outer: f64,
    pub lambda_bar: f64,
    /// Sum over G1 with the oscillating coefficient.
    pub lhs: f64,
    /// Same sum with the coefficient replaced by its cell average.
    pub rhs: f64,
    /// `|lhs - rhs| / |rhs|` (zero when both vanish).
    pub gap: f64,
    /// eps-cubes meeting G1.
    pub cube_count: usize,
    /// Rescaled kernel mass of the non-G1 parts of cubes that straddle the
    /// boundary of G1.
    pub boundary_mass: f64,
}

/// Compares `eps^{-d-alpha} sum_{G1} p((x-y)/eps) Lambda^eps(x,y) u(x) phi(y)`
/// with the same sum using the cell average of the coefficient. G1 is
/// `{|x - y| > delta, |x| + |y| < outer}`; `outer` defaults to `1/delta`.
pub fn cube_decomposition_check(
    kernel: &KernelSpec,
    coeff: &PeriodicCoefficient,
    eps: f64,
    delta: f64,
    outer: Option<f64>,
    u: &GridFunction,
    phi: &GridFunction,
) -> Result<CubeCheckReport> {
    let grid = *u.grid();
    require_1d(&grid, "grid")?;
    grid.ensure_same(phi.grid())?;
    if kernel.dimension() != 1 || coeff.dimension() != 1 {
        return Err(Error::GridMismatch("kernel and coefficient must be one-dimensional".into()));
    }
    if !(eps > 0.0 && delta > 0.0) {
        return Err(invalid("eps", "eps and delta must be positive"));
    }
    if eps > delta / 8.0 {
        return Err(Error::ScaleSeparation { eps, limit: delta / 8.0 });
    }
    let h = grid.spacing();
    if h > eps {
        return Err(Error::Resolution { h, eps });
    }
    let outer = outer.unwrap_or(1.0 / delta);
    let lambda_bar = effective_lambda(coeff, &crate::coefficients::CellQuad::for_dimension(1))?;
    let wrapped: Coefficient = coeff.clone().into();
    let scale = eps.powf(-1.0 - kernel.alpha());
    let n = grid.len();
    let (uv, pv) = (u.values(), phi.values());

    let cube_of = |x: f64| -> i64 { (x / eps + 0.5).floor() as i64 };
    let kmin = cube_of(grid.center(0)[0]);
    let kmax = cube_of(grid.center(n - 1)[0]);
    let span = (kmax - kmin + 1) as usize;

    // per cube: bit 0 = holds a G1 pair, bit 1 = holds a non-G1 pair
    let mut flags = vec![0u8; span * span];
    for i in 0..n {
        let xi = grid.center(i)[0];
        let ci = (cube_of(xi) - kmin) as usize;
        for j in 0..n {
            if i == j {
                continue;
            }
            let xj = grid.center(j)[0];
            let cj = (cube_of(xj) - kmin) as usize;
            let bit = if classify(xi, xj, delta, outer) == Region::Far { 1 } else { 2 };
            flags[ci * span + cj] |= bit;
        }
    }

    let rows: Vec<[f64; 3]> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = grid.center(i)[0];
            let ci = (cube_of(xi) - kmin) as usize;
            let mut acc = [0.0; 3];
            for j in 0..n {
                if i == j {
                    continue;
                }
                let xj = grid.center(j)[0];
                let off = (i as f64 - j as f64) * h;
                let p = kernel.density(&[off / eps]);
                if p == 0.0 {
                    continue;
                }
                let cj = (cube_of(xj) - kmin) as usize;
                if classify(xi, xj, delta, outer) == Region::Far {
                    let lam = eval_oscillating(&wrapped, eps, &[xi], &[xj]);
                    acc[0] += p * lam * uv[i] * pv[j];
                    acc[1] += p * lambda_bar * uv[i] * pv[j];
                } else if flags[ci * span + cj] == 3 {
                    acc[2] += p;
                }
            }
            acc
        })
        .collect();
    let w = scale * h * h;
    let (mut lhs, mut rhs, mut bmass) = (0.0, 0.0, 0.0);
    for r in &rows {
        lhs += r[0];
        rhs += r[1];
        bmass += r[2];
    }
    let (lhs, rhs) = (lhs * w, rhs * w);
    let gap = if lhs == rhs { 0.0 } else { (lhs - rhs).abs() / rhs.abs() };
    Ok(CubeCheckReport {
        eps,
        delta,
        outer,
        lambda_bar,
        lhs,
        rhs,
        gap,
        cube_count: flags.iter().filter(|&&f| f & 1 == 1).count(),
        boundary_mass: bmass * w,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftRegime {
    /// `|h| >= 3 M eps`: bound `C |h|^alpha`.
    Far,
    /// `|h| < 3 M eps`: bound `C eps^alpha`.
    Near,
}

#[derive(Debug, Clone, Serialize)]
pub struct TranslationRow {
    pub shift: f64,
    pub energy: f64,
    pub regime: ShiftRegime,
    /// `energy / |h|^alpha` (far) or `energy / eps^alpha` (near).
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TranslationReport {
    pub eps: f64,
    pub m_radius: f64,
    pub alpha: f64,
    pub rows: Vec<TranslationRow>,
    pub max_far_ratio: Option<f64>,
    pub min_far_ratio: Option<f64>,
    /// `max / min` of the far-regime ratios.
    pub far_spread: Option<f64>,
    pub max_near_ratio: Option<f64>,
}

/// `int (u(x + h) - u(x))^2 dx` for shifts of whole grid cells along the
/// first axis, with `u` extended by zero outside the box.
pub fn translation_energy_check(u: &GridFunction, eps: f64, m_radius: f64, alpha: f64, shifts: &[usize]) -> Result<TranslationReport> {
    let grid = u.grid();
    if !(eps > 0.0) {
        return Err(invalid("eps", format!("must be positive, got {eps}")));
    }
    let n = grid.n_per_axis();
    let d = grid.dimension();
    let h = grid.spacing();
    let v = u.values();
    let mut rows = Vec::with_capacity(shifts.len());
    for &s in shifts {
        let mut total = 0.0;
        for (i, &ui) in v.iter().enumerate() {
            let idx = grid.multi_index(i);
            let shifted = if idx[0] + s < n {
                let j = match d {
                    1 => i + s,
                    _ => i + s * n,
                };
                v[j]
            } else {
                0.0
            };
            total += (shifted - ui) * (shifted - ui);
        }
        // cells that shift in from beyond the lower boundary contribute u^2
        // only once, which the loop above already covers since u is zero
        // outside the box
        let energy = total * grid.cell_volume();
        let shift = s as f64 * h;
        let (regime, ratio) = if shift >= 3.0 * m_radius * eps {
            (ShiftRegime::Far, energy / shift.powf(alpha))
        } else {
            (ShiftRegime::Near, energy / eps.powf(alpha))
        };
        rows.push(TranslationRow {
            shift,
            energy,
            regime,
            ratio,
        });
    }
    let far: Vec<f64> = rows.iter().filter(|r| r.regime == ShiftRegime::Far && r.shift > 0.0).map(|r| r.ratio).collect();
    let near: Vec<f64> = rows.iter().filter(|r| r.regime == ShiftRegime::Near).map(|r| r.ratio).collect();
    let max_far = far.iter().copied().reduce(f64::max);
    let min_far = far.iter().copied().reduce(f64::min);
    Ok(TranslationReport {
        eps,
        m_radius,
        alpha,
        rows,
        max_far_ratio: max_far,
        min_far_ratio: min_far,
        far_spread: match (max_far, min_far) {
            (Some(a), Some(b)) if b > 0.0 => Some(a / b),
            _ => None,
        },
        max_near_ratio: near.into_iter().reduce(f64::max),
    })
}

/// Smooth step: 0 for `t <= 1`, 1 for `t >= 2`.
pub fn exterior_cutoff(t: f64) -> f64 {
    if t <= 1.0 {
        return 0.0;
    }
    if t >= 2.0 {
        return 1.0;
    }
    let s = t - 1.0;
    let a = (-1.0 / s).exp();
    let b = (-1.0 / (1.0 - s)).exp();
    a / (a + b)
}

/// `int psi(|x| / n) u(x)^2 dx` for each `n`.
pub fn exterior_decay_check(u: &GridFunction, n_list: &[f64]) -> Result<Vec<(f64, f64)>> {
    let grid = u.grid();
    let d = grid.dimension();
    let r = grid.half_width();
    let mut out = Vec::with_capacity(n_list.len());
    for &n in n_list {
        if !(n > 0.0) {
            return Err(invalid("n", format!("cutoff radius must be positive, got {n}")));
        }
        if n >= r {
            return Err(Error::CutoffOutsideBox { n, half_width: r });
        }
        let mass: f64 = u
            .values()
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let c = grid.center(i);
                let norm = c[..d].iter().map(|a| a * a).sum::<f64>().sqrt();
                exterior_cutoff(norm / n) * v * v
            })
            .sum();
        out.push((n, mass * grid.cell_volume()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classify_ties() {
        assert_eq!(classify(0.0, 0.5, 0.5, 2.0), Region::Near);
        assert_eq!(classify(1.0, 1.0, 0.5, 2.0), Region::Outer);
        assert_eq!(classify(-0.5, 0.6, 0.5, 2.0), Region::Far);
    }

    #[test]
    fn cutoff_profile() {
        assert_eq!(exterior_cutoff(0.5), 0.0);
        assert_eq!(exterior_cutoff(2.5), 1.0);
        assert!((exterior_cutoff(1.5) - 0.5).abs() < 1e-15);
        let mut prev = 0.0;
        for k in 0..=100 {
            let v = exterior_cutoff(1.0 + k as f64 / 100.0);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn exterior_decay_errors_outside_box() {
        let g = Grid::new(1, 4.0, 16).unwrap();
        let u = g.sample(|_| 1.0);
        assert!(matches!(exterior_decay_check(&u, &[4.0]), Err(Error::CutoffOutsideBox { .. })));
        let vals = exterior_decay_check(&u, &[1.0, 2.0, 3.0]).unwrap();
        assert!(vals.windows(2).all(|w| w[1].1 <= w[0].1));
    }

    #[test]
    fn zero_shift_has_zero_energy() {
        let g = Grid::new(1, 4.0, 64).unwrap();
        let u = g.sample(|x| (-x[0] * x[0]).exp());
        let rep = translation_energy_check(&u, 0.25, 1.0, 1.0, &[0, 4]).unwrap();
        assert_eq!(rep.rows[0].energy, 0.0);
        assert!(rep.rows[1].energy > 0.0);
    }
}
