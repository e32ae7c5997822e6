//! Jump kernel densities and numerical checks of the structural hypotheses
//! they must satisfy: normalization and symmetry, the pointwise lower bound
//! and averaged annular upper bound beyond radius `M`, stable attraction
//! (through the angular density `k`) and decay of the local L1 oscillation.
//!
//! All radial integrals use dyadic shells with a fixed Gauss-Legendre rule
//! per shell. When a kernel carries a [`PowerTail`] descriptor the part of an
//! integral beyond the tail radius is completed in closed form, which makes
//! the canonical kernels exact to round-off.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{split_interval, GaussRule, ShellSum};

pub type DensityFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Exact power-law tail: `p(z) = c_tail |z|^{-d-alpha}` for `|z| >= r0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerTail {
    pub c_tail: f64,
    pub r0: f64,
}

#[derive(Clone)]
enum Profile {
    Pareto { c: f64, r0: f64 },
    CoreTail { core: f64, tail_c: f64 },
    Truncated { c: f64, r0: f64, cutoff: f64 },
    Custom(DensityFn),
}

/// A jump kernel density on R^d together with its tail metadata.
#[derive(Clone)]
pub struct KernelSpec {
    name: String,
    dimension: usize,
    alpha: f64,
    profile: Profile,
    near_origin_bounded: bool,
    m_radius: f64,
    tail: Option<PowerTail>,
    breakpoints: Vec<f64>,
}

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelSpec")
            .field("name", &self.name)
            .field("dimension", &self.dimension)
            .field("alpha", &self.alpha)
            .field("near_origin_bounded", &self.near_origin_bounded)
            .field("m_radius", &self.m_radius)
            .field("tail", &self.tail)
            .finish()
    }
}

/// Surface measure of the unit sphere `S^{d-1}` (counting measure for d = 1).
pub fn sphere_measure(dimension: usize) -> f64 {
    match dimension {
        1 => 2.0,
        _ => 2.0 * PI,
    }
}

/// Volume of the unit ball in R^d.
pub fn ball_volume(dimension: usize) -> f64 {
    match dimension {
        1 => 2.0,
        _ => PI,
    }
}

fn check_dimension(d: usize) -> Result<()> {
    if d == 1 || d == 2 {
        Ok(())
    } else {
        Err(invalid("dimension", format!("must be 1 or 2, got {d}")))
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(invalid("alpha", format!("must lie in (0, 2), got {alpha}")))
    }
}

/// Pure power-law kernel `c |z|^{-d-alpha}` on `|z| >= r0`, normalized to
/// unit mass.
pub fn make_pareto_kernel(dimension: usize, alpha: f64, r0: f64) -> Result<KernelSpec> {
    check_dimension(dimension)?;
    check_alpha(alpha)?;
    if !(r0.is_finite() && r0 > 0.0) {
        return Err(invalid("r0", format!("must be positive, got {r0}")));
    }
    let c = alpha * r0.powf(alpha) / sphere_measure(dimension);
    Ok(KernelSpec {
        name: format!("pareto(d={dimension}, alpha={alpha}, r0={r0})"),
        dimension,
        alpha,
        profile: Profile::Pareto { c, r0 },
        near_origin_bounded: true,
        m_radius: r0.max(1.0),
        tail: Some(PowerTail { c_tail: c, r0 }),
        breakpoints: vec![r0],
    })
}

/// Uniform core of mass `core_mass` on the unit ball plus a power-law tail
/// carrying the remaining mass on `|z| >= 1`.
pub fn make_core_tail_kernel(dimension: usize, alpha: f64, core_mass: f64) -> Result<KernelSpec> {
    check_dimension(dimension)?;
    check_alpha(alpha)?;
    if !(0.0..1.0).contains(&core_mass) {
        return Err(invalid(
            "core_mass",
            format!("must lie in [0, 1), got {core_mass}"),
        ));
    }
    let core = core_mass / ball_volume(dimension);
    let tail_c = (1.0 - core_mass) * (alpha / sphere_measure(dimension));
    Ok(KernelSpec {
        name: format!("core_tail(d={dimension}, alpha={alpha}, core_mass={core_mass})"),
        dimension,
        alpha,
        profile: Profile::CoreTail { core, tail_c },
        near_origin_bounded: true,
        m_radius: 1.0,
        tail: Some(PowerTail {
            c_tail: tail_c,
            r0: 1.0,
        }),
        breakpoints: vec![1.0],
    })
}

/// Power law restricted to `r0 <= |z| <= cutoff` and renormalized. It keeps
/// unit mass and symmetry but has no stable tail, so it fails the lower
/// bound: used as a negative control.
pub fn make_truncated_kernel(
    dimension: usize,
    alpha: f64,
    r0: f64,
    cutoff: f64,
) -> Result<KernelSpec> {
    check_dimension(dimension)?;
    check_alpha(alpha)?;
    if !(r0.is_finite() && r0 > 0.0) {
        return Err(invalid("r0", format!("must be positive, got {r0}")));
    }
    if !(cutoff.is_finite() && cutoff > r0) {
        return Err(invalid("cutoff", format!("must exceed r0 = {r0}, got {cutoff}")));
    }
    let shell = (r0.powf(-alpha) - cutoff.powf(-alpha)) / alpha;
    let c = 1.0 / (sphere_measure(dimension) * shell);
    Ok(KernelSpec {
        name: format!("truncated(d={dimension}, alpha={alpha}, r0={r0}, cutoff={cutoff})"),
        dimension,
        alpha,
        profile: Profile::Truncated { c, r0, cutoff },
        near_origin_bounded: true,
        m_radius: r0.max(1.0),
        tail: None,
        breakpoints: vec![r0, cutoff],
    })
}

/// Parameters for a user-supplied density.
pub struct CustomKernel {
    pub name: String,
    pub dimension: usize,
    pub alpha: f64,
    pub density: DensityFn,
    pub near_origin_bounded: bool,
    pub m_radius: f64,
    pub tail: Option<PowerTail>,
    /// Radii where the density is not smooth; quadrature panels split there.
    pub breakpoints: Vec<f64>,
}

impl KernelSpec {
    pub fn custom(spec: CustomKernel) -> Result<Self> {
        check_dimension(spec.dimension)?;
        check_alpha(spec.alpha)?;
        if !(spec.m_radius.is_finite() && spec.m_radius >= 1.0) {
            return Err(invalid("M", format!("must be >= 1, got {}", spec.m_radius)));
        }
        if let Some(t) = spec.tail {
            if !(t.r0 > 0.0 && t.c_tail >= 0.0) {
                return Err(invalid("tail", "needs r0 > 0 and c_tail >= 0"));
            }
        }
        let mut breakpoints = spec.breakpoints;
        if let Some(t) = spec.tail {
            breakpoints.push(t.r0);
        }
        breakpoints.retain(|b| b.is_finite() && *b > 0.0);
        breakpoints.sort_by(|a, b| a.total_cmp(b));
        breakpoints.dedup();
        Ok(Self {
            name: spec.name,
            dimension: spec.dimension,
            alpha: spec.alpha,
            profile: Profile::Custom(spec.density),
            near_origin_bounded: spec.near_origin_bounded,
            m_radius: spec.m_radius,
            tail: spec.tail,
            breakpoints,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn near_origin_bounded(&self) -> bool {
        self.near_origin_bounded
    }

    /// Radius `M` beyond which the two-sided bounds are claimed.
    pub fn m_radius(&self) -> f64 {
        self.m_radius
    }

    pub fn tail(&self) -> Option<PowerTail> {
        self.tail
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    #[inline]
    pub fn density(&self, z: &[f64]) -> f64 {
        let r = || match self.dimension {
            1 => z[0].abs(),
            _ => (z[0] * z[0] + z[1] * z[1]).sqrt(),
        };
        let exponent = -(self.dimension as f64) - self.alpha;
        match &self.profile {
            Profile::Pareto { c, r0 } => {
                let r = r();
                if r >= *r0 {
                    c * r.powf(exponent)
                } else {
                    0.0
                }
            }
            Profile::CoreTail { core, tail_c } => {
                let r = r();
                if r < 1.0 {
                    *core
                } else {
                    tail_c * r.powf(exponent)
                }
            }
            Profile::Truncated { c, r0, cutoff } => {
                let r = r();
                if r >= *r0 && r <= *cutoff {
                    c * r.powf(exponent)
                } else {
                    0.0
                }
            }
            Profile::Custom(f) => f(z),
        }
    }

    /// Closed-form `int_{|z| > rho, z/|z| in D} p` when the tail descriptor
    /// covers `[rho, inf)`.
    fn analytic_tail(&self, rho: f64, dirs: &DirectionSet) -> Option<f64> {
        let t = self.tail?;
        (rho >= t.r0).then(|| {
            t.c_tail * dirs.measure(self.dimension) * rho.powf(-self.alpha) / self.alpha
        })
    }
}

/// Quadrature plan for radial kernel integrals.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadConfig {
    pub radial_order: usize,
    pub angular_order: usize,
    /// Angular Gauss panels per full turn (d = 2 only).
    pub angular_panels: usize,
    /// Outer radius of the first shell `[0, near_radius]`.
    pub near_radius: f64,
    pub shell_tol: f64,
    pub max_shells: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            radial_order: 16,
            angular_order: 16,
            angular_panels: 8,
            near_radius: 1.0 / 64.0,
            shell_tol: 1e-15,
            max_shells: 2000,
        }
    }
}

/// Measurable set of directions on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DirectionSet {
    /// `{+1}` in one dimension.
    Positive,
    /// `{-1}` in one dimension.
    Negative,
    /// The whole sphere.
    Full,
    /// Angular sector `[start, end)` in radians (d = 2).
    Sector { start: f64, end: f64 },
}

impl DirectionSet {
    /// Surface measure `|D|`; counting measure in one dimension.
    pub fn measure(&self, dimension: usize) -> f64 {
        match self {
            Self::Positive | Self::Negative => 1.0,
            Self::Full => sphere_measure(dimension),
            Self::Sector { start, end } => end - start,
        }
    }

    pub fn negated(&self) -> Self {
        match *self {
            Self::Positive => Self::Negative,
            Self::Negative => Self::Positive,
            Self::Full => Self::Full,
            Self::Sector { start, end } => {
                let shift = if start + PI < 2.0 * PI { PI } else { -PI };
                Self::Sector {
                    start: start + shift,
                    end: end + shift,
                }
            }
        }
    }

    fn validate(&self, dimension: usize) -> Result<()> {
        match (self, dimension) {
            (Self::Positive | Self::Negative | Self::Full, 1) => Ok(()),
            (Self::Full, 2) => Ok(()),
            (Self::Sector { start, end }, 2) if end > start && end - start <= 2.0 * PI => Ok(()),
            _ => Err(invalid(
                "directions",
                format!("{self:?} is not a direction set in dimension {dimension}"),
            )),
        }
    }

    /// `k` sectors of equal width covering the circle, starting at angle 0.
    pub fn uniform_sectors(count: usize) -> Vec<Self> {
        let width = 2.0 * PI / count as f64;
        (0..count)
            .map(|i| Self::Sector {
                start: width * i as f64,
                end: width * (i + 1) as f64,
            })
            .collect()
    }

    pub fn default_partition(dimension: usize) -> Vec<Self> {
        match dimension {
            1 => vec![Self::Positive, Self::Negative],
            _ => Self::uniform_sectors(8),
        }
    }
}

struct Integrator<'a> {
    kernel: &'a KernelSpec,
    quad: &'a QuadConfig,
    radial: GaussRule,
    angular: GaussRule,
}

impl<'a> Integrator<'a> {
    fn new(kernel: &'a KernelSpec, quad: &'a QuadConfig) -> Self {
        Self {
            kernel,
            quad,
            radial: GaussRule::new(quad.radial_order),
            angular: GaussRule::new(quad.angular_order),
        }
    }

    /// `int_D p(r s) dS(s)`.
    fn angular(&self, r: f64, dirs: &DirectionSet) -> f64 {
        let k = self.kernel;
        match (k.dimension, dirs) {
            (1, DirectionSet::Positive) => k.density(&[r]),
            (1, DirectionSet::Negative) => k.density(&[-r]),
            (1, _) => k.density(&[r]) + k.density(&[-r]),
            (_, d) => {
                let (a, b) = match d {
                    DirectionSet::Sector { start, end } => (*start, *end),
                    _ => (0.0, 2.0 * PI),
                };
                let panels =
                    (((b - a) / (2.0 * PI)) * self.quad.angular_panels as f64).ceil() as usize;
                self.angular.integrate_composite(a, b, panels, |t| {
                    k.density(&[r * t.cos(), r * t.sin()])
                })
            }
        }
    }

    /// Gauss quadrature of `int_{a<|z|<b, D} p` split at kernel breakpoints.
    fn piece(&self, a: f64, b: f64, dirs: &DirectionSet) -> f64 {
        let d = self.kernel.dimension as i32;
        split_interval(a, b, &self.kernel.breakpoints)
            .into_iter()
            .map(|(lo, hi)| {
                self.radial
                    .integrate(lo, hi, |r| r.powi(d - 1) * self.angular(r, dirs))
            })
            .sum()
    }

    /// Numerical integral over `a < |z| < b` on dyadic sub-shells.
    fn bounded(&self, a: f64, b: f64, dirs: &DirectionSet) -> f64 {
        if b <= a {
            return 0.0;
        }
        let mut total = 0.0;
        let mut lo = a;
        if lo < self.quad.near_radius {
            let hi = self.quad.near_radius.min(b);
            total += self.piece(lo, hi, dirs);
            lo = hi;
        }
        while lo < b {
            let hi = (2.0 * lo).min(b);
            total += self.piece(lo, hi, dirs);
            lo = hi;
        }
        total
    }

    /// `int_{|z| > from, D} p`, analytic beyond the tail radius when known.
    fn unbounded(&self, from: f64, dirs: &DirectionSet) -> Result<f64> {
        let k = self.kernel;
        if let Some(t) = k.tail {
            let split = from.max(t.r0);
            let near = self.bounded(from, split, dirs);
            let far = k.analytic_tail(split, dirs).unwrap_or(0.0);
            return Ok(near + far);
        }
        let last_break = k.breakpoints.last().copied().unwrap_or(0.0);
        let mut sum = ShellSum::new();
        let mut lo = from;
        if lo < self.quad.near_radius {
            sum.push(self.piece(lo, self.quad.near_radius, dirs), 0.0);
            lo = self.quad.near_radius;
        }
        loop {
            let hi = 2.0 * lo;
            sum.push(self.piece(lo, hi, dirs), self.quad.shell_tol);
            lo = hi;
            if lo > last_break && sum.done() {
                return Ok(sum.finish());
            }
            if sum.shells >= self.quad.max_shells {
                return Err(Error::Quadrature(format!(
                    "radial integral from {from} did not settle after {} shells",
                    sum.shells
                )));
            }
        }
    }
}

/// Integral of `p` over `{|z| > from, z/|z| in D}`.
pub fn region_mass(
    kernel: &KernelSpec,
    from: f64,
    dirs: &DirectionSet,
    quad: &QuadConfig,
) -> Result<f64> {
    dirs.validate(kernel.dimension)?;
    Integrator::new(kernel, quad).unbounded(from.max(0.0), dirs)
}

/// Integral of `p` over the annulus `a < |z| < b`.
pub fn shell_mass(kernel: &KernelSpec, a: f64, b: f64, quad: &QuadConfig) -> f64 {
    let full = DirectionSet::Full;
    if let Some(t) = kernel.tail {
        if a >= t.r0 {
            let c = t.c_tail * full.measure(kernel.dimension) / kernel.alpha;
            return c * (a.powf(-kernel.alpha) - b.powf(-kernel.alpha));
        }
    }
    Integrator::new(kernel, quad).bounded(a, b, &full)
}

/// `int_{|z| > R} p`.
pub fn tail_mass(kernel: &KernelSpec, radius: f64, quad: &QuadConfig) -> Result<f64> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(invalid("R", format!("must be positive, got {radius}")));
    }
    region_mass(kernel, radius, &DirectionSet::Full, quad)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HypothesisTolerances {
    pub mass: f64,
    pub symmetry: f64,
    /// Relative agreement of the last two `k` estimates, and of `k(D)` with
    /// `k(-D)`.
    pub k_agreement: f64,
}

impl Default for HypothesisTolerances {
    fn default() -> Self {
        Self {
            mass: 1e-6,
            symmetry: 1e-12,
            k_agreement: 0.01,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct H1Check {
    pub mass: f64,
    pub symmetry_defect: f64,
    pub min_sampled_density: f64,
    pub pass: bool,
}

/// Deterministic sample points on geometric radii in every direction used by
/// the symmetry and lower-bound checks.
pub fn radial_samples(dimension: usize, r_min: f64, r_max: f64, per_octave: usize) -> Vec<Vec<f64>> {
    let mut radii = Vec::new();
    let step = 2f64.powf(1.0 / per_octave.max(1) as f64);
    let mut r = r_min;
    while r <= r_max * (1.0 + 1e-12) {
        radii.push(r);
        r *= step;
    }
    let mut out = Vec::new();
    for r in radii {
        match dimension {
            1 => {
                out.push(vec![r]);
                out.push(vec![-r]);
            }
            _ => {
                for j in 0..24 {
                    // offset keeps samples off the axes and sector edges
                    let t = 2.0 * PI * (j as f64 + 0.37) / 24.0;
                    let mut p = [r * t.cos(), r * t.sin()];
                    // rounding may put the point just inside radius r
                    while (p[0] * p[0] + p[1] * p[1]).sqrt() < r {
                        p = [p[0] * (1.0 + f64::EPSILON), p[1] * (1.0 + f64::EPSILON)];
                    }
                    out.push(p.to_vec());
                }
            }
        }
    }
    out
}

/// Mass, symmetry defect and sampled non-negativity.
pub fn check_h1(kernel: &KernelSpec, quad: &QuadConfig, tol: &HypothesisTolerances) -> Result<H1Check> {
    let mass = region_mass(kernel, 0.0, &DirectionSet::Full, quad)?;
    let mut defect: f64 = 0.0;
    let mut min_density = f64::INFINITY;
    for z in radial_samples(kernel.dimension, 1.0 / 4096.0, 1e9, 2) {
        let neg: Vec<f64> = z.iter().map(|v| -v).collect();
        let a = kernel.density(&z);
        let b = kernel.density(&neg);
        defect = defect.max((a - b).abs());
        min_density = min_density.min(a).min(b);
    }
    let pass = (mass - 1.0).abs() <= tol.mass && defect <= tol.symmetry && min_density >= 0.0;
    Ok(H1Check {
        mass,
        symmetry_defect: defect,
        min_sampled_density: min_density,
        pass,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AnnularBound {
    /// `(r, r^alpha int_{B_2r \ B_r} p)` pairs.
    pub values: Vec<(f64, f64)>,
    pub c2_estimate: f64,
}

pub fn check_annular_bound(kernel: &KernelSpec, radii: &[f64], quad: &QuadConfig) -> Result<AnnularBound> {
    if radii.is_empty() {
        return Err(Error::EmptySamples("annular bound radii"));
    }
    let mut values = Vec::with_capacity(radii.len());
    for &r in radii {
        if !(r >= kernel.m_radius) {
            return Err(invalid(
                "radii",
                format!("annular radius {r} is below M = {}", kernel.m_radius),
            ));
        }
        values.push((r, r.powf(kernel.alpha) * shell_mass(kernel, r, 2.0 * r, quad)));
    }
    let c2 = values.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(AnnularBound {
        values,
        c2_estimate: c2,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LowerBound {
    pub c1_estimate: f64,
    pub samples: usize,
    pub pass: bool,
}

/// `min p(z) |z|^{d+alpha}` over samples with `|z| >= M`.
pub fn check_lower_bound(kernel: &KernelSpec, samples: &[Vec<f64>]) -> Result<LowerBound> {
    if samples.is_empty() {
        return Err(Error::EmptySamples("lower bound"));
    }
    let exponent = kernel.dimension as f64 + kernel.alpha;
    let mut c1 = f64::INFINITY;
    for z in samples {
        if z.len() != kernel.dimension {
            return Err(invalid("samples", "sample dimension does not match the kernel"));
        }
        let r = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r < kernel.m_radius * (1.0 - 1e-12) {
            return Err(invalid(
                "samples",
                format!("sample radius {r} is below M = {}", kernel.m_radius),
            ));
        }
        c1 = c1.min(kernel.density(z) * r.powf(exponent));
    }
    Ok(LowerBound {
        c1_estimate: c1,
        samples: samples.len(),
        pass: c1 > 0.0,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct KSequence {
    pub direction: DirectionSet,
    pub n_list: Vec<f64>,
    pub values: Vec<f64>,
    /// Last estimate in the sequence.
    pub limit: f64,
    /// `|k_last - k_prev| / |k_last|`.
    pub agreement: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct KEstimate {
    pub dimension: usize,
    pub sequences: Vec<KSequence>,
}

impl KEstimate {
    /// Largest relative disagreement between `k(D)` and `k(-D)` over the
    /// estimated sets whose negation was also estimated.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for s in &self.sequences {
            let neg = s.direction.negated();
            if let Some(o) = self.sequences.iter().find(|o| same_set(&o.direction, &neg)) {
                let scale = s.limit.abs().max(o.limit.abs());
                if scale > 0.0 {
                    worst = worst.max((s.limit - o.limit).abs() / scale);
                }
            }
        }
        worst
    }

    pub fn angular_density(&self) -> Result<AngularDensity> {
        AngularDensity::from_estimate(self)
    }
}

fn same_set(a: &DirectionSet, b: &DirectionSet) -> bool {
    match (a, b) {
        (DirectionSet::Sector { start: s1, end: e1 }, DirectionSet::Sector { start: s2, end: e2 }) => {
            let wrap = |x: f64| x.rem_euclid(2.0 * PI);
            let close = |x: f64, y: f64| {
                let d = (wrap(x) - wrap(y)).abs();
                d < 1e-9 || (2.0 * PI - d) < 1e-9
            };
            close(*s1, *s2) && close(*e1, *e2)
        }
        _ => a == b,
    }
}

/// `k_hat(D, n) = alpha n^alpha int_{|z|>n, z/|z| in D} p / |D|`, the
/// normalization under which the stable attraction limit reads
/// `int_D k dS / (alpha n^alpha)`.
pub fn estimate_k(
    kernel: &KernelSpec,
    n_list: &[f64],
    directions: &[DirectionSet],
    quad: &QuadConfig,
    tol: &HypothesisTolerances,
) -> Result<KEstimate> {
    if n_list.is_empty() || directions.is_empty() {
        return Err(Error::EmptySamples("k estimation"));
    }
    for w in n_list.windows(2) {
        if w[1] <= w[0] {
            return Err(invalid("n_list", "radii must be strictly increasing"));
        }
    }
    if n_list[0] < kernel.m_radius {
        return Err(invalid(
            "n_list",
            format!("radius {} is below M = {}", n_list[0], kernel.m_radius),
        ));
    }
    let alpha = kernel.alpha;
    let mut sequences = Vec::with_capacity(directions.len());
    for dirs in directions {
        dirs.validate(kernel.dimension)?;
        let measure = dirs.measure(kernel.dimension);
        let mut values = Vec::with_capacity(n_list.len());
        for &n in n_list {
            let mass = region_mass(kernel, n, dirs, quad)?;
            values.push(alpha * n.powf(alpha) * mass / measure);
        }
        let limit = *values.last().unwrap();
        let agreement = match values.len() {
            1 => 0.0,
            len => {
                let prev = values[len - 2];
                if limit == 0.0 && prev == 0.0 {
                    0.0
                } else {
                    (limit - prev).abs() / limit.abs().max(prev.abs())
                }
            }
        };
        sequences.push(KSequence {
            direction: *dirs,
            n_list: n_list.to_vec(),
            values,
            limit,
            agreement,
            converged: agreement <= tol.k_agreement,
        });
    }
    Ok(KEstimate {
        dimension: kernel.dimension,
        sequences,
    })
}

/// Piecewise-constant angular density built from estimated `k` limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum AngularDensity {
    OneDim { plus: f64, minus: f64 },
    Sectors { sectors: Vec<(f64, f64, f64)> },
}

impl AngularDensity {
    pub fn constant(dimension: usize, k: f64) -> Self {
        match dimension {
            1 => Self::OneDim { plus: k, minus: k },
            _ => Self::Sectors {
                sectors: vec![(0.0, 2.0 * PI, k)],
            },
        }
    }

    pub fn from_estimate(est: &KEstimate) -> Result<Self> {
        match est.dimension {
            1 => {
                let mut plus = None;
                let mut minus = None;
                for s in &est.sequences {
                    match s.direction {
                        DirectionSet::Positive => plus = Some(s.limit),
                        DirectionSet::Negative => minus = Some(s.limit),
                        DirectionSet::Full => {
                            plus.get_or_insert(s.limit);
                            minus.get_or_insert(s.limit);
                        }
                        DirectionSet::Sector { .. } => {}
                    }
                }
                match (plus, minus) {
                    (Some(plus), Some(minus)) => Ok(Self::OneDim { plus, minus }),
                    _ => Err(invalid("k_values", "need estimates for both +1 and -1")),
                }
            }
            _ => {
                let mut sectors = Vec::new();
                for s in &est.sequences {
                    match s.direction {
                        DirectionSet::Sector { start, end } => sectors.push((start, end, s.limit)),
                        DirectionSet::Full => sectors.push((0.0, 2.0 * PI, s.limit)),
                        _ => {}
                    }
                }
                if sectors.is_empty() {
                    return Err(invalid("k_values", "no angular sectors estimated"));
                }
                Ok(Self::Sectors { sectors })
            }
        }
    }

    /// `k(s)` for a (not necessarily unit) nonzero direction vector.
    pub fn at(&self, direction: &[f64]) -> f64 {
        match self {
            Self::OneDim { plus, minus } => {
                if direction[0] >= 0.0 {
                    *plus
                } else {
                    *minus
                }
            }
            Self::Sectors { sectors } => self.at_angle(direction[1].atan2(direction[0]), sectors),
        }
    }

    fn at_angle(&self, theta: f64, sectors: &[(f64, f64, f64)]) -> f64 {
        let theta = theta.rem_euclid(2.0 * PI);
        let mut best = (f64::INFINITY, sectors[0].2);
        for &(a, b, k) in sectors {
            for shift in [-2.0 * PI, 0.0, 2.0 * PI] {
                let t = theta + shift;
                if t >= a && t < b {
                    return k;
                }
            }
            let mid = 0.5 * (a + b);
            let d = (theta - mid.rem_euclid(2.0 * PI)).abs();
            let d = d.min(2.0 * PI - d);
            if d < best.0 {
                best = (d, k);
            }
        }
        best.1
    }

    /// Angular breakpoints (d = 2) for quadratures that integrate `k`.
    pub fn angular_breakpoints(&self) -> Vec<f64> {
        match self {
            Self::OneDim { .. } => Vec::new(),
            Self::Sectors { sectors } => sectors
                .iter()
                .flat_map(|&(a, b, _)| [a.rem_euclid(2.0 * PI), b.rem_euclid(2.0 * PI)])
                .collect(),
        }
    }
}

/// Sampling plan for the oscillation functional.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhiPlan {
    /// Directions per shell in two dimensions.
    pub directions: usize,
    /// Gauss order per panel for cube averages.
    pub cube_order: usize,
    /// Panels per axis for cube averages.
    pub cube_panels: usize,
}

impl Default for PhiPlan {
    fn default() -> Self {
        Self {
            directions: 16,
            cube_order: 8,
            cube_panels: 4,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PhiEstimate {
    /// `(r, phi_hat(r))`; `None` when every sampled cube was degenerate.
    pub values: Vec<(f64, Option<f64>)>,
    /// Centers of cubes with zero average mass, skipped per radius.
    pub degenerate_cubes: Vec<(f64, Vec<Vec<f64>>)>,
    pub plan: PhiPlan,
}

struct CubeQuad<'a> {
    kernel: &'a KernelSpec,
    nodes: Vec<(f64, f64)>,
}

impl<'a> CubeQuad<'a> {
    fn new(kernel: &'a KernelSpec, plan: &PhiPlan) -> Self {
        let rule = GaussRule::new(plan.cube_order);
        let panels = plan.cube_panels.max(1);
        let width = 1.0 / panels as f64;
        let mut nodes = Vec::new();
        for k in 0..panels {
            let lo = -0.5 + width * k as f64;
            nodes.extend(rule.mapped(lo, lo + width));
        }
        Self { kernel, nodes }
    }

    /// Average of `g(p(x))` over the unit cube centered at `center`.
    fn average(&self, center: &[f64], g: impl Fn(f64) -> f64) -> f64 {
        match center.len() {
            1 => self
                .nodes
                .iter()
                .map(|&(x, w)| w * g(self.kernel.density(&[center[0] + x])))
                .sum(),
            _ => {
                let mut total = 0.0;
                for &(x, wx) in &self.nodes {
                    for &(y, wy) in &self.nodes {
                        total += wx * wy * g(self.kernel.density(&[center[0] + x, center[1] + y]));
                    }
                }
                total
            }
        }
    }
}

/// Sampled estimate of the relative local L1 oscillation at distance `r`.
/// Cube centers are sampled on the shells `|z| in {r, 2r}`; neighbors are the
/// lattice offsets of size at most `sqrt(d)`.
pub fn oscillation_phi(kernel: &KernelSpec, r_list: &[f64], plan: &PhiPlan) -> Result<PhiEstimate> {
    if r_list.is_empty() {
        return Err(Error::EmptySamples("oscillation radii"));
    }
    let cube = CubeQuad::new(kernel, plan);
    let d = kernel.dimension;
    let offsets: Vec<Vec<f64>> = match d {
        1 => vec![vec![-1.0], vec![0.0], vec![1.0]],
        _ => {
            let mut v = Vec::new();
            for a in -1..=1 {
                for b in -1..=1 {
                    v.push(vec![a as f64, b as f64]);
                }
            }
            v
        }
    };
    let mut values = Vec::with_capacity(r_list.len());
    let mut degenerate_cubes = Vec::new();
    for &r in r_list {
        if !(r > 0.0 && r.is_finite()) {
            return Err(invalid("r_list", format!("radius {r} must be positive")));
        }
        let mut centers = Vec::new();
        for rho in [r, 2.0 * r] {
            match d {
                1 => {
                    centers.push(vec![rho]);
                    centers.push(vec![-rho]);
                }
                _ => {
                    for j in 0..plan.directions {
                        let t = 2.0 * PI * j as f64 / plan.directions as f64;
                        centers.push(vec![rho * t.cos(), rho * t.sin()]);
                    }
                }
            }
        }
        let mut best: Option<f64> = None;
        let mut skipped = Vec::new();
        for z in &centers {
            let own = cube.average(z, |p| p);
            if own <= 0.0 {
                skipped.push(z.clone());
                continue;
            }
            for o in &offsets {
                let zp: Vec<f64> = z.iter().zip(o).map(|(a, b)| a + b).collect();
                let level = cube.average(&zp, |p| p);
                let dev = cube.average(z, |p| (p - level).abs());
                let ratio = dev / own;
                best = Some(best.map_or(ratio, |b: f64| b.max(ratio)));
            }
        }
        if !skipped.is_empty() {
            degenerate_cubes.push((r, skipped));
        }
        values.push((r, best));
    }
    Ok(PhiEstimate {
        values,
        degenerate_cubes,
        plan: plan.clone(),
    })
}

/// Everything needed to run the four hypothesis checks on one kernel.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HypothesisPlan {
    pub quad: QuadConfig,
    pub tolerances: HypothesisTolerances,
    /// Annular-bound radii as multiples of `M`.
    pub annular_multiples: Vec<f64>,
    /// Lower-bound samples span `[M, M * lower_span]`.
    pub lower_span: f64,
    /// `k` estimation radii as multiples of `M`.
    pub k_multiples: Vec<f64>,
    /// Oscillation radii as multiples of `M`.
    pub phi_multiples: Vec<f64>,
    pub phi: PhiPlan,
}

impl Default for HypothesisPlan {
    fn default() -> Self {
        Self {
            quad: QuadConfig::default(),
            tolerances: HypothesisTolerances::default(),
            annular_multiples: (0..11).map(|k| 2f64.powi(k)).collect(),
            lower_span: 1024.0,
            k_multiples: vec![256.0, 512.0, 1024.0],
            phi_multiples: vec![16.0, 32.0, 64.0],
            phi: PhiPlan::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdicts {
    pub h1: Verdict,
    pub h2_lower: Verdict,
    pub h2_upper: Verdict,
    pub h3: Verdict,
    pub h4: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub kernel: String,
    pub dimension: usize,
    pub alpha: f64,
    pub m_radius: f64,
    pub tail: Option<PowerTail>,
    pub mass: f64,
    pub symmetry_defect: f64,
    pub min_sampled_density: f64,
    pub c1_estimate: f64,
    pub c2_estimate: f64,
    pub annular: Vec<(f64, f64)>,
    pub k_values: Vec<KSequence>,
    pub k_symmetry_defect: f64,
    pub phi_values: Vec<(f64, Option<f64>)>,
    pub phi_degenerate_cubes: Vec<(f64, Vec<Vec<f64>>)>,
    pub verdicts: Verdicts,
    pub plan: HypothesisPlan,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        let v = &self.verdicts;
        v.h1.pass && v.h2_lower.pass && v.h2_upper.pass && v.h3.pass && v.h4.pass
    }
}

pub fn check_hypotheses(kernel: &KernelSpec, plan: &HypothesisPlan) -> Result<HypothesisReport> {
    let m = kernel.m_radius;
    let tol = &plan.tolerances;

    let h1 = check_h1(kernel, &plan.quad, tol)?;
    let h1_verdict = Verdict {
        pass: h1.pass,
        detail: format!(
            "|mass - 1| = {:.3e} (tol {:.1e}), symmetry defect {:.3e} (tol {:.1e}), min sampled p = {:.3e}",
            (h1.mass - 1.0).abs(),
            tol.mass,
            h1.symmetry_defect,
            tol.symmetry,
            h1.min_sampled_density
        ),
    };

    let lower_samples = radial_samples(kernel.dimension, m, m * plan.lower_span, 4);
    let lower = check_lower_bound(kernel, &lower_samples)?;
    let h2_lower = Verdict {
        pass: lower.pass,
        detail: format!(
            "c1 estimate {:.6e} over {} samples with M <= |z| <= {}",
            lower.c1_estimate,
            lower.samples,
            m * plan.lower_span
        ),
    };

    let radii: Vec<f64> = plan.annular_multiples.iter().map(|k| k * m).collect();
    let annular = check_annular_bound(kernel, &radii, &plan.quad)?;
    let h2_upper = Verdict {
        pass: annular.c2_estimate.is_finite(),
        detail: format!("c2 estimate {:.6e} over {} radii", annular.c2_estimate, radii.len()),
    };

    let n_list: Vec<f64> = plan.k_multiples.iter().map(|k| k * m).collect();
    let dirs = DirectionSet::default_partition(kernel.dimension);
    let k = estimate_k(kernel, &n_list, &dirs, &plan.quad, tol)?;
    let k_sym = k.symmetry_defect();
    let k_ok = k.sequences.iter().all(|s| s.converged && s.limit > 0.0);
    let h3 = Verdict {
        pass: k_ok && k_sym <= tol.k_agreement,
        detail: format!(
            "k limits {:?}, worst last-two agreement {:.3e}, symmetry defect {:.3e} (tol {:.1e})",
            k.sequences.iter().map(|s| s.limit).collect::<Vec<_>>(),
            k.sequences.iter().map(|s| s.agreement).fold(0.0, f64::max),
            k_sym,
            tol.k_agreement
        ),
    };

    let r_list: Vec<f64> = plan.phi_multiples.iter().map(|k| k * m).collect();
    let phi = oscillation_phi(kernel, &r_list, &plan.phi)?;
    let h4 = phi_verdict(&phi);

    Ok(HypothesisReport {
        kernel: kernel.name.clone(),
        dimension: kernel.dimension,
        alpha: kernel.alpha,
        m_radius: m,
        tail: kernel.tail,
        mass: h1.mass,
        symmetry_defect: h1.symmetry_defect,
        min_sampled_density: h1.min_sampled_density,
        c1_estimate: lower.c1_estimate,
        c2_estimate: annular.c2_estimate,
        annular: annular.values,
        k_values: k.sequences,
        k_symmetry_defect: k_sym,
        phi_values: phi.values,
        phi_degenerate_cubes: phi.degenerate_cubes,
        verdicts: Verdicts {
            h1: h1_verdict,
            h2_lower,
            h2_upper,
            h3,
            h4,
        },
        plan: plan.clone(),
    })
}

/// Decay verdict: every radius yields a value, the sequence is nonincreasing
/// and it ends strictly below where it started (or is identically zero).
fn phi_verdict(phi: &PhiEstimate) -> Verdict {
    let vals: Option<Vec<f64>> = phi.values.iter().map(|v| v.1).collect();
    let Some(vals) = vals else {
        return Verdict {
            pass: false,
            detail: "some radii had only degenerate cubes".into(),
        };
    };
    let monotone = vals.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    let decays = vals.len() < 2 || vals.last() < vals.first() || vals.iter().all(|&v| v == 0.0);
    Verdict {
        pass: monotone && decays,
        detail: format!("phi_hat {vals:?}, nonincreasing: {monotone}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad() -> QuadConfig {
        QuadConfig::default()
    }

    #[test]
    fn pareto_normalization_constant() {
        let k = make_pareto_kernel(1, 1.0, 1.0).unwrap();
        assert_eq!(k.tail().unwrap().c_tail, 0.5);
        let k = make_pareto_kernel(1, 0.5, 1.0).unwrap();
        assert_eq!(k.tail().unwrap().c_tail, 0.25);
        let k = make_pareto_kernel(1, 1.0, 1.0).unwrap();
        assert_eq!(k.density(&[2.0]), 0.125);
        assert_eq!(k.density(&[-2.0]), 0.125);
        assert_eq!(k.density(&[0.5]), 0.0);
        assert!(k.near_origin_bounded());
        assert_eq!(k.m_radius(), 1.0);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(matches!(
            make_pareto_kernel(1, 2.0, 1.0),
            Err(Error::InvalidParameter { name: "alpha", .. })
        ));
        assert!(make_pareto_kernel(1, 0.0, 1.0).is_err());
        assert!(make_pareto_kernel(1, 1.0, 0.0).is_err());
        assert!(make_pareto_kernel(3, 1.0, 1.0).is_err());
        assert!(make_core_tail_kernel(1, 1.0, 1.0).is_err());
        assert!(make_core_tail_kernel(1, 1.0, -0.1).is_err());
        assert!(make_truncated_kernel(1, 1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn core_tail_pieces() {
        let k = make_core_tail_kernel(1, 1.0, 0.5).unwrap();
        assert_eq!(k.density(&[0.5]), 0.25);
        assert_eq!(k.density(&[2.0]), 0.0625);
        let h1 = check_h1(&k, &quad(), &HypothesisTolerances::default()).unwrap();
        assert!((h1.mass - 1.0).abs() < 1e-10, "mass {}", h1.mass);
    }

    #[test]
    fn core_tail_without_core_is_pareto() {
        let a = make_core_tail_kernel(1, 0.7, 0.0).unwrap();
        let b = make_pareto_kernel(1, 0.7, 1.0).unwrap();
        for z in [-5.0, -1.0, -0.3, 0.0, 0.99, 1.0, 3.3, 1e4] {
            assert_eq!(a.density(&[z]), b.density(&[z]));
        }
        assert_eq!(a.tail(), b.tail());
    }

    #[test]
    fn zero_density_fails_h1() {
        let k = KernelSpec::custom(CustomKernel {
            name: "zero".into(),
            dimension: 1,
            alpha: 1.0,
            density: Arc::new(|_| 0.0),
            near_origin_bounded: true,
            m_radius: 1.0,
            tail: None,
            breakpoints: vec![],
        })
        .unwrap();
        let h1 = check_h1(&k, &quad(), &HypothesisTolerances::default()).unwrap();
        assert_eq!(h1.mass, 0.0);
        assert!(!h1.pass);
    }

    #[test]
    fn annular_values_for_pareto() {
        let k = make_pareto_kernel(1, 1.0, 1.0).unwrap();
        let b = check_annular_bound(&k, &[1.0, 3.0, 100.0], &quad()).unwrap();
        for (_, v) in &b.values {
            assert!((v - 0.5).abs() < 1e-14);
        }
        let k = make_pareto_kernel(1, 0.5, 1.0).unwrap();
        let b = check_annular_bound(&k, &[4.0], &quad()).unwrap();
        assert!((b.values[0].1 - 0.292_893_218_813_452_5).abs() < 1e-12);
        assert!(check_annular_bound(&k, &[0.5], &quad()).is_err());
    }

    #[test]
    fn annular_beyond_compact_support_vanishes() {
        let k = make_truncated_kernel(1, 1.0, 1.0, 10.0).unwrap();
        let b = check_annular_bound(&k, &[20.0], &quad()).unwrap();
        assert_eq!(b.values[0].1, 0.0);
    }

    #[test]
    fn lower_bound_examples() {
        let k = make_pareto_kernel(1, 1.0, 1.0).unwrap();
        let lb = check_lower_bound(&k, &[vec![1.0], vec![-3.0], vec![17.5]]).unwrap();
        assert!((lb.c1_estimate - 0.5).abs() < 1e-15);
        assert!(lb.pass);

        let t = make_truncated_kernel(1, 1.0, 1.0, 10.0).unwrap();
        let lb = check_lower_bound(&t, &[vec![20.0]]).unwrap();
        assert_eq!(lb.c1_estimate, 0.0);
        assert!(!lb.pass);

        let c = make_core_tail_kernel(1, 1.0, 0.5).unwrap();
        let lb = check_lower_bound(&c, &[vec![1.0], vec![-2.0], vec![64.0]]).unwrap();
        assert!((lb.c1_estimate - 0.25).abs() < 1e-15);

        assert!(matches!(check_lower_bound(&k, &[]), Err(Error::EmptySamples(_))));
    }

    #[test]
    fn k_estimates_match_closed_form() {
        let tol = HypothesisTolerances::default();
        let k = make_pareto_kernel(1, 0.5, 1.0).unwrap();
        let est = estimate_k(&k, &[1024.0], &[DirectionSet::Positive], &quad(), &tol).unwrap();
        assert!((est.sequences[0].limit - 0.25).abs() < 1e-6);
        let k = make_pareto_kernel(1, 1.0, 1.0).unwrap();
        let est = estimate_k(&k, &[512.0, 1024.0], &[DirectionSet::Negative], &quad(), &tol).unwrap();
        assert!((est.sequences[0].limit - 0.5).abs() < 1e-12);
        assert!(est.sequences[0].converged);
    }

    #[test]
    fn k_estimation_without_tail_descriptor() {
        // Same density as pareto(1, 1, 1) but with the tail hidden, forcing
        // the shell quadrature with geometric completion.
        let p = make_pareto_kernel(1, 1.0, 1.0).unwrap();
        let hidden = KernelSpec::custom(CustomKernel {
            name: "hidden".into(),
            dimension: 1,
            alpha: 1.0,
            density: Arc::new(move |z| p.density(z)),
            near_origin_bounded: true,
            m_radius: 1.0,
            tail: None,
            breakpoints: vec![1.0],
        })
        .unwrap();
        let tol = HypothesisTolerances::default();
        let est = estimate_k(
            &hidden,
            &[256.0, 1024.0],
            &DirectionSet::default_partition(1),
            &quad(),
            &tol,
        )
        .unwrap();
        for s in &est.sequences {
            assert!((s.limit - 0.5).abs() < 1e-9, "{}", s.limit);
        }
        let h1 = check_h1(&hidden, &quad(), &tol).unwrap();
        assert!((h1.mass - 1.0).abs() < 1e-9, "{}", h1.mass);
    }

    #[test]
    fn tail_mass_examples() {
        let k = make_pareto_kernel(1, 1.0, 1.0).unwrap();
        assert!((tail_mass(&k, 2.0, &quad()).unwrap() - 0.5).abs() < 1e-15);
        assert!((tail_mass(&k, 0.5, &quad()).unwrap() - 1.0).abs() < 1e-15);
        assert!(tail_mass(&k, 0.0, &quad()).is_err());
    }

    #[test]
    fn two_dimensional_pareto() {
        let k = make_pareto_kernel(2, 1.0, 1.0).unwrap();
        let tol = HypothesisTolerances::default();
        let h1 = check_h1(&k, &quad(), &tol).unwrap();
        assert!((h1.mass - 1.0).abs() < 1e-12);
        let est = estimate_k(
            &k,
            &[64.0, 128.0],
            &DirectionSet::uniform_sectors(4),
            &quad(),
            &tol,
        )
        .unwrap();
        let expect = 1.0 / (2.0 * PI);
        for s in &est.sequences {
            assert!((s.limit - expect).abs() < 1e-12);
        }
        assert!(est.symmetry_defect() < 1e-12);
        let dens = est.angular_density().unwrap();
        assert!((dens.at(&[0.3, -0.2]) - expect).abs() < 1e-12);
    }

    #[test]
    fn phi_decays_for_pareto() {
        let k = make_pareto_kernel(1, 1.0, 1.0).unwrap();
        let phi = oscillation_phi(&k, &[16.0, 32.0, 64.0], &PhiPlan::default()).unwrap();
        let v: Vec<f64> = phi.values.iter().map(|x| x.1.unwrap()).collect();
        assert!(v[0] > v[1] && v[1] > v[2], "{v:?}");
    }

    #[test]
    fn phi_vanishes_for_locally_constant_density() {
        let k = KernelSpec::custom(CustomKernel {
            name: "flat".into(),
            dimension: 1,
            alpha: 1.0,
            density: Arc::new(|_| 0.25),
            near_origin_bounded: true,
            m_radius: 1.0,
            tail: None,
            breakpoints: vec![],
        })
        .unwrap();
        let phi = oscillation_phi(&k, &[4.0], &PhiPlan::default()).unwrap();
        assert!(phi.values[0].1.unwrap() <= 1e-14);
    }

    #[test]
    fn phi_reports_degenerate_cubes() {
        let k = make_truncated_kernel(1, 1.0, 1.0, 10.0).unwrap();
        let phi = oscillation_phi(&k, &[32.0], &PhiPlan::default()).unwrap();
        assert_eq!(phi.values[0].1, None);
        assert_eq!(phi.degenerate_cubes[0].1.len(), 4);
    }

    #[test]
    fn hypothesis_verdicts() {
        let plan = HypothesisPlan::default();
        for k in [
            make_pareto_kernel(1, 1.0, 1.0).unwrap(),
            make_pareto_kernel(1, 1.5, 2.0).unwrap(),
            make_core_tail_kernel(1, 0.5, 0.3).unwrap(),
        ] {
            let r = check_hypotheses(&k, &plan).unwrap();
            assert!(r.all_pass(), "{}: {:?}", k.name(), r.verdicts);
        }
        let t = make_truncated_kernel(1, 1.0, 1.0, 10.0).unwrap();
        let r = check_hypotheses(&t, &plan).unwrap();
        assert!(r.verdicts.h1.pass);
        assert!(!r.verdicts.h2_lower.pass);
    }

    #[test]
    fn sector_negation_wraps() {
        let s = DirectionSet::Sector { start: 1.5 * PI, end: 1.75 * PI };
        assert_eq!(
            s.negated(),
            DirectionSet::Sector { start: 0.5 * PI, end: 0.75 * PI }
        );
    }
}
