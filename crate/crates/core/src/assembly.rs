//! Assembly of the oscillating operator `L^eps` and the effective operator
//! `L^0` on a truncated box, including the exterior killing terms.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::{
    effective_lambda, eval_oscillating, row_average_periodic, CellQuad, Coefficient, FieldEvaluator, PeriodicCoefficient,
};
use crate::error::{invalid, Error, Result};
use crate::grid::Grid;
use crate::kernels::{AngularDensity, KernelSpec};
use crate::operator::{NonlocalOperator, OperatorKind, OperatorMeta};
use crate::quadrature::{split_interval, GaussRule, ShellSum};

/// Quadrature plan for the exterior killing term.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExteriorQuad {
    /// Gauss order per panel.
    pub order: usize,
    /// Distances below `resolved_radius * eps` use the exact oscillating
    /// coefficient on panels of width at most `max_panel * eps`; beyond,
    /// the coefficient is replaced by its average over the fast variable
    /// of the exterior point.
    pub resolved_radius: f64,
    pub resolved_radius_2d: f64,
    pub max_panel: f64,
    /// Angular Gauss panels per arc between box corners (d = 2).
    pub arc_panels: usize,
    /// Midpoints per axis for averages over the fast variable.
    pub row_points: usize,
    pub tol: f64,
    pub max_shells: usize,
}

impl Default for ExteriorQuad {
    fn default() -> Self {
        Self {
            order: 8,
            resolved_radius: 64.0,
            resolved_radius_2d: 16.0,
            max_panel: 0.5,
            arc_panels: 4,
            row_points: 16,
            tol: 1e-13,
            max_shells: 400,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AssemblyConfig {
    /// `Some(s)`: average the kernel over `s^d` sub-points of the partner
    /// cell for pairs closer than `subsample_band * eps`. `None`: midpoint.
    pub subsample: Option<usize>,
    pub subsample_band: f64,
    pub exterior: ExteriorQuad,
    /// Cell quadrature for effective coefficients.
    pub cell: Option<CellQuad>,
}

impl Default for AssemblyConfig {
    fn default() -> Self {
        Self {
            subsample: None,
            subsample_band: 4.0,
            exterior: ExteriorQuad::default(),
            cell: None,
        }
    }
}

impl AssemblyConfig {
    pub fn cell_quad(&self, dimension: usize) -> CellQuad {
        self.cell.unwrap_or_else(|| CellQuad::for_dimension(dimension))
    }
}

/// Fills a dense symmetric matrix from its strict upper triangle.
fn build_dense<F>(n: usize, weight: F) -> Result<Vec<f64>>
where
    F: Fn(usize, usize) -> Result<f64> + Sync,
{
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| ((i + 1)..n).map(|j| weight(i, j)).collect::<Result<Vec<f64>>>())
        .collect::<Result<_>>()?;
    let mut w = vec![0.0; n * n];
    w.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = match j.cmp(&i) {
                std::cmp::Ordering::Greater => upper[i][j - i - 1],
                std::cmp::Ordering::Less => upper[j][i - j - 1],
                std::cmp::Ordering::Equal => 0.0,
            };
        }
    });
    Ok(w)
}

/// Index offset `x_i - x_j`, computed from integer differences so that it
/// depends only on `i - j` per axis.
#[inline]
fn offset(grid: &Grid, i: usize, j: usize) -> [f64; 2] {
    let h = grid.spacing();
    let (a, b) = (grid.multi_index(i), grid.multi_index(j));
    [
        (a[0] as f64 - b[0] as f64) * h,
        (a[1] as f64 - b[1] as f64) * h,
    ]
}

fn describe(cfg: &AssemblyConfig) -> String {
    match cfg.subsample {
        Some(s) => format!("subsample s={s} within {} eps", cfg.subsample_band),
        None => "midpoint".into(),
    }
}

/// How the exterior coefficient is evaluated along a ray.
#[derive(Clone, Copy)]
enum Reach {
    Resolved,
    Far,
}

struct Exterior<'a> {
    grid: &'a Grid,
    quad: &'a ExteriorQuad,
    rule: GaussRule,
    /// Length scale for panel widths and the resolved region.
    scale: f64,
    resolved: f64,
}

impl<'a> Exterior<'a> {
    fn new(grid: &'a Grid, quad: &'a ExteriorQuad, scale: f64, oscillating: bool) -> Self {
        let r = if grid.dimension() == 1 {
            quad.resolved_radius
        } else {
            quad.resolved_radius_2d
        };
        Self {
            grid,
            quad,
            rule: GaussRule::new(quad.order),
            scale,
            resolved: if oscillating { r * scale } else { 0.0 },
        }
    }

    /// `int_{t0}^inf f(s) ds` on dyadic shells with geometric stopping.
    fn ray(&self, t0: f64, breaks: &[f64], mut f: impl FnMut(f64, Reach) -> f64) -> Result<f64> {
        let last_break = breaks.iter().copied().fold(0.0, f64::max);
        let mut sum = ShellSum::new();
        let mut lo = t0;
        loop {
            let hi = 2.0 * lo;
            let mut shell = 0.0;
            for (a, b) in split_interval(lo, hi, breaks) {
                if a < self.resolved {
                    let panels = ((b - a) / (self.quad.max_panel * self.scale)).ceil().max(1.0) as usize;
                    shell += self.rule.integrate_composite(a, b, panels, |s| f(s, Reach::Resolved));
                } else {
                    shell += self.rule.integrate(a, b, |s| f(s, Reach::Far));
                }
            }
            sum.push(shell, self.quad.tol);
            lo = hi;
            if lo > last_break && lo >= self.resolved && sum.total() > 0.0 && sum.done() {
                return Ok(sum.finish());
            }
            if sum.total() == 0.0 && lo > last_break && lo >= self.resolved && sum.shells > 8 {
                return Ok(0.0);
            }
            if sum.shells >= self.quad.max_shells {
                return Err(Error::QuadratureStall {
                    shells: sum.shells,
                    ratio: sum.ratio().unwrap_or(f64::NAN),
                });
            }
        }
    }

    /// Sum over exterior directions from `x` of `g(direction, T)` where `T`
    /// is the distance to the box boundary. In d = 1 the directions are
    /// `+1` and `-1`; in d = 2 an angular Gauss rule split at the box
    /// corners and at the given extra angles.
    fn directions(
        &self,
        x: &[f64],
        extra_angles: &[f64],
        g: impl Fn(&[f64], f64) -> Result<f64>,
    ) -> Result<f64> {
        let r = self.grid.half_width();
        match self.grid.dimension() {
            1 => Ok(g(&[1.0], r - x[0])? + g(&[-1.0], r + x[0])?),
            _ => {
                let base = (r - x[1]).atan2(r - x[0]);
                let norm = |t: f64| base + (t - base).rem_euclid(2.0 * PI);
                let mut cuts: Vec<f64> = [(r, r), (-r, r), (-r, -r), (r, -r)]
                    .iter()
                    .map(|&(cx, cy)| norm((cy - x[1]).atan2(cx - x[0])))
                    .chain(extra_angles.iter().map(|&t| norm(t)))
                    .filter(|&t| t > base)
                    .collect();
                cuts.push(base + 2.0 * PI);
                cuts.sort_by(|a, b| a.total_cmp(b));
                cuts.dedup();
                let mut total = 0.0;
                let mut lo = base;
                for hi in cuts {
                    if hi - lo < 1e-14 {
                        continue;
                    }
                    let w = (hi - lo) / self.quad.arc_panels as f64;
                    for p in 0..self.quad.arc_panels {
                        let a = lo + w * p as f64;
                        for (t, wt) in self.rule.mapped(a, a + w) {
                            let dir = [t.cos(), t.sin()];
                            let mut dist = f64::INFINITY;
                            for k in 0..2 {
                                if dir[k] > 0.0 {
                                    dist = dist.min((r - x[k]) / dir[k]);
                                } else if dir[k] < 0.0 {
                                    dist = dist.min((-r - x[k]) / dir[k]);
                                }
                            }
                            total += wt * g(&dir, dist)?;
                        }
                    }
                    lo = hi;
                }
                Ok(total)
            }
        }
    }
}

fn check_dims(kernel: &KernelSpec, coeff: &Coefficient, grid: &Grid) -> Result<()> {
    if kernel.dimension() != grid.dimension() || coeff.dimension() != grid.dimension() {
        return Err(Error::GridMismatch(format!(
            "kernel dimension {}, coefficient dimension {}, grid dimension {}",
            kernel.dimension(),
            coeff.dimension(),
            grid.dimension()
        )));
    }
    Ok(())
}

/// Discrete `L^eps`:
/// `w_ij = eps^{-d-alpha} p((x_i - x_j)/eps) Lambda^eps(x_i, x_j) h^d` and
/// `kappa_i = eps^{-d-alpha} int_{outside} p((x_i - y)/eps) Lambda^eps(x_i, y) dy`.
pub fn assemble_eps(
    kernel: &KernelSpec,
    coeff: &Coefficient,
    eps: f64,
    grid: &Grid,
    cfg: &AssemblyConfig,
) -> Result<NonlocalOperator> {
    check_dims(kernel, coeff, grid)?;
    if !(eps.is_finite() && eps > 0.0) {
        return Err(invalid("eps", format!("must be positive, got {eps}")));
    }
    let h = grid.spacing();
    if h > eps {
        return Err(Error::Resolution { h, eps });
    }
    if !kernel.near_origin_bounded() {
        return Err(invalid(
            "kernel",
            "midpoint assembly needs a density bounded near the origin",
        ));
    }
    if let Some(s) = cfg.subsample {
        if s == 0 {
            return Err(invalid("subsample", "needs at least one sub-point"));
        }
    }
    let d = grid.dimension();
    let hd = grid.cell_volume();
    let scale = eps.powf(-(d as f64) - kernel.alpha());
    let band = cfg.subsample_band * eps;

    let kernel_at = |off: &[f64; 2]| -> f64 {
        let z = [off[0] / eps, off[1] / eps];
        let mid = kernel.density(&z[..d]);
        match cfg.subsample {
            Some(s) if (off[0] * off[0] + off[1] * off[1]).sqrt() <= band => {
                let sub: Vec<f64> = (0..s).map(|q| ((q as f64 + 0.5) / s as f64 - 0.5) * h).collect();
                let mut total = 0.0;
                match d {
                    1 => {
                        for a in &sub {
                            total += kernel.density(&[(off[0] - a) / eps]);
                        }
                    }
                    _ => {
                        for a in &sub {
                            for b in &sub {
                                total += kernel.density(&[(off[0] - a) / eps, (off[1] - b) / eps]);
                            }
                        }
                    }
                }
                total / sub.len().pow(d as u32) as f64
            }
            _ => mid,
        }
    };

    let weights = build_dense(grid.len(), |i, j| {
        let off = offset(grid, i, j);
        let p = kernel_at(&off);
        if p == 0.0 {
            return Ok(0.0);
        }
        let xi = grid.center(i);
        let xj = grid.center(j);
        let lam = eval_oscillating(coeff, eps, &xi[..d], &xj[..d]);
        Ok(scale * p * lam * hd)
    })?;

    let killing = killing_eps(kernel, coeff, eps, grid, cfg)?;
    let meta = OperatorMeta {
        kind: OperatorKind::Oscillating { eps },
        kernel: kernel.name().to_string(),
        coefficient: coeff.name().to_string(),
        alpha: Some(kernel.alpha()),
        translation_invariant: coeff.constant_value().is_some(),
        plan: describe(cfg),
    };
    Ok(NonlocalOperator::from_trusted(*grid, weights, killing, meta))
}

/// Killing terms of `L^eps` by ray quadrature from each cell center.
pub fn killing_eps(
    kernel: &KernelSpec,
    coeff: &Coefficient,
    eps: f64,
    grid: &Grid,
    cfg: &AssemblyConfig,
) -> Result<Vec<f64>> {
    let d = grid.dimension();
    let scale = eps.powf(-(d as f64) - kernel.alpha());
    let cell = cfg.cell_quad(d);
    let oscillating = coeff.constant_value().is_none();
    let ext = Exterior::new(grid, &cfg.exterior, eps, oscillating);
    let breaks: Vec<f64> = kernel.breakpoints().iter().map(|b| b * eps).collect();

    enum Far<'a> {
        Mean(f64),
        /// Average over the fast variable of the exterior point, which
        /// depends on `x / eps` since periodicity is only diagonal.
        RowMean(&'a PeriodicCoefficient),
        Field(FieldEvaluator<'a>),
    }
    let far = match coeff {
        Coefficient::Periodic(c) => match c.constant_value() {
            Some(v) => Far::Mean(v),
            None => {
                effective_lambda(c, &cell)?;
                Far::RowMean(c)
            }
        },
        Coefficient::LocallyPeriodic(c) => Far::Field(FieldEvaluator::new(
            c,
            &CellQuad {
                s: cfg.exterior.row_points,
                tol: cell.tol,
            },
        )?),
    };

    (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.center(i);
            let x = &x[..d];
            let row_mean = match &far {
                Far::Mean(v) => *v,
                Far::RowMean(c) => {
                    let xi = [x[0] / eps, x.get(1).copied().unwrap_or(0.0) / eps];
                    row_average_periodic(c, &xi[..d], cfg.exterior.row_points)
                }
                Far::Field(_) => f64::NAN,
            };
            ext.directions(x, &[], |dir, t| {
                ext.ray(t, &breaks, |s, reach| {
                    let mut z = [0.0; 2];
                    let mut y = [0.0; 2];
                    for k in 0..d {
                        z[k] = -s * dir[k] / eps;
                        y[k] = x[k] + s * dir[k];
                    }
                    let p = kernel.density(&z[..d]);
                    if p == 0.0 {
                        return 0.0;
                    }
                    let lam = match (reach, &far) {
                        (Reach::Resolved, _) => eval_oscillating(coeff, eps, x, &y[..d]),
                        (Reach::Far, Far::Mean(_) | Far::RowMean(_)) => row_mean,
                        (Reach::Far, Far::Field(f)) => f.row_average(eps, x, &y[..d]),
                    };
                    scale * p * lam * s.powi(d as i32 - 1)
                })
            })
        })
        .collect()
}

/// Effective coefficient used by the limit operator.
pub enum LambdaBar<'a> {
    Constant(f64),
    Field {
        field: FieldEvaluator<'a>,
        cache: Option<&'a EffectiveFieldCache>,
    },
}

impl LambdaBar<'_> {
    fn describe(&self) -> String {
        match self {
            Self::Constant(v) => format!("lambda_bar={v}"),
            Self::Field { .. } => "lambda_bar(x,y) field".into(),
        }
    }
}

/// `Lambda_bar(x_i, x_j)` per grid pair, filled lazily. Concurrent inserts
/// of the same pair are idempotent: the value is a pure function of the pair.
pub struct EffectiveFieldCache {
    grid: Grid,
    slots: Vec<AtomicU64>,
}

impl EffectiveFieldCache {
    pub fn new(grid: &Grid) -> Self {
        let n = grid.len();
        let empty = f64::NAN.to_bits();
        Self {
            grid: *grid,
            slots: (0..n * (n + 1) / 2).map(|_| AtomicU64::new(empty)).collect(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        let n = self.grid.len();
        a * n - a * (a + 1) / 2 + b
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let v = f64::from_bits(self.slots[self.slot(i, j)].load(Ordering::Relaxed));
        (!v.is_nan()).then_some(v)
    }

    pub fn get_or_compute(&self, i: usize, j: usize, f: impl FnOnce() -> Result<f64>) -> Result<f64> {
        if let Some(v) = self.get(i, j) {
            return Ok(v);
        }
        let v = f()?;
        self.slots[self.slot(i, j)].store(v.to_bits(), Ordering::Relaxed);
        Ok(v)
    }

    pub fn filled(&self) -> usize {
        self.slots
            .iter()
            .filter(|s| !f64::from_bits(s.load(Ordering::Relaxed)).is_nan())
            .count()
    }
}

/// `k` symmetrized under `z -> -z`, so that weights are exactly symmetric.
#[inline]
fn k_sym(k: &AngularDensity, z: &[f64]) -> f64 {
    let neg = [-z[0], -z.get(1).copied().unwrap_or(0.0)];
    0.5 * (k.at(z) + k.at(&neg[..z.len()]))
}

/// Discrete `L^0`: `w_ij = Lambda_eff(x_i, x_j) h^d / |x_i - x_j|^{d+alpha}`
/// and the exterior integral of the same kernel as killing term.
pub fn assemble_effective(
    k: &AngularDensity,
    lambda: &LambdaBar<'_>,
    alpha: f64,
    grid: &Grid,
    cfg: &AssemblyConfig,
) -> Result<NonlocalOperator> {
    if !(alpha.is_finite() && alpha > 0.0 && alpha < 2.0) {
        return Err(invalid("alpha", format!("must lie in (0, 2), got {alpha}")));
    }
    let d = grid.dimension();
    match (k, d) {
        (AngularDensity::OneDim { .. }, 1) | (AngularDensity::Sectors { .. }, 2) => {}
        _ => return Err(Error::GridMismatch("angular density does not match the grid dimension".into())),
    }
    if let LambdaBar::Field { cache: Some(c), .. } = lambda {
        grid.ensure_same(c.grid())?;
    }
    let hd = grid.cell_volume();
    let power = d as f64 + alpha;
    let weights = build_dense(grid.len(), |i, j| {
        let off = offset(grid, i, j);
        let r = (off[0] * off[0] + off[1] * off[1]).sqrt();
        let lam = match lambda {
            LambdaBar::Constant(v) => *v,
            LambdaBar::Field { field, cache } => {
                let xi = grid.center(i);
                let xj = grid.center(j);
                let eval = || field.eval(&xi[..d], &xj[..d]);
                match cache {
                    Some(c) if !field.is_closed_form() => c.get_or_compute(i, j, eval)?,
                    _ => eval()?,
                }
            }
        };
        Ok(lam * k_sym(k, &off[..d]) * hd / r.powf(power))
    })?;
    let killing = killing_effective(k, lambda, alpha, grid, cfg)?;
    let meta = OperatorMeta {
        kind: OperatorKind::Effective,
        kernel: format!("effective(k={k:?})"),
        coefficient: lambda.describe(),
        alpha: Some(alpha),
        translation_invariant: matches!(lambda, LambdaBar::Constant(_)),
        plan: "midpoint, self-cell excluded".into(),
    };
    Ok(NonlocalOperator::from_trusted(*grid, weights, killing, meta))
}

/// Killing terms of `L^0`: closed form for a constant `Lambda_bar`
/// (`Lambda_bar k T^{-alpha} / alpha` per exterior direction), ray
/// quadrature for a field.
pub fn killing_effective(
    k: &AngularDensity,
    lambda: &LambdaBar<'_>,
    alpha: f64,
    grid: &Grid,
    cfg: &AssemblyConfig,
) -> Result<Vec<f64>> {
    let d = grid.dimension();
    let ext = Exterior::new(grid, &cfg.exterior, grid.spacing(), false);
    let extra: Vec<f64> = k.angular_breakpoints().iter().flat_map(|&t| [t, t + PI]).collect();
    (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.center(i);
            let x = &x[..d];
            ext.directions(x, &extra, |dir, t| {
                // y - x = s dir, so the kernel direction is x - y = -dir
                let neg = [-dir[0], -dir.get(1).copied().unwrap_or(0.0)];
                let kv = k_sym(k, &neg[..d]);
                match lambda {
                    LambdaBar::Constant(v) => Ok(v * kv * t.powf(-alpha) / alpha),
                    LambdaBar::Field { field, .. } => {
                        let mut err = None;
                        let v = ext.ray(t, &[], |s, _| {
                            let mut y = [0.0; 2];
                            for q in 0..d {
                                y[q] = x[q] + s * dir[q];
                            }
                            match field.eval(x, &y[..d]) {
                                Ok(l) => l * kv * s.powf(-1.0 - alpha),
                                Err(e) => {
                                    err.get_or_insert(e);
                                    0.0
                                }
                            }
                        })?;
                        match err {
                            Some(e) => Err(e),
                            None => Ok(v),
                        }
                    }
                }
            })
        })
        .collect()
}
