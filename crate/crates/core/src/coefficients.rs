//! Oscillating coefficients and their cell averages.
//!
//! A periodic coefficient is a function `Lambda(xi, eta)` that is symmetric,
//! invariant under joint integer shifts and bounded between `1/gamma` and
//! `gamma`. A locally periodic coefficient additionally depends on the slow
//! variables `(x, y)`, continuously with a declared modulus.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernels::AngularDensity;

pub type PeriodicFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
pub type LocalFn = Arc<dyn Fn(&[f64], &[f64], &[f64], &[f64]) -> f64 + Send + Sync>;
pub type ModulusFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum PeriodicKind {
    Constant(f64),
    /// `base + amp * prod sin(2 pi xi_i) * prod sin(2 pi eta_i)`
    Product { base: f64, amp: f64 },
    /// `base + amp * cos(2 pi sum (xi_i - eta_i))`
    Difference { base: f64, amp: f64 },
    Custom(PeriodicFn),
}

#[derive(Clone)]
pub struct PeriodicCoefficient {
    name: String,
    dimension: usize,
    kind: PeriodicKind,
    gamma: f64,
}

impl fmt::Debug for PeriodicCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicCoefficient")
            .field("name", &self.name)
            .field("dimension", &self.dimension)
            .field("gamma", &self.gamma)
            .finish()
    }
}

fn check_dimension(d: usize) -> Result<()> {
    if d == 1 || d == 2 {
        Ok(())
    } else {
        Err(invalid("dimension", format!("must be 1 or 2, got {d}")))
    }
}

fn ellipticity(lo: f64, hi: f64) -> Result<f64> {
    if !(lo > 0.0 && hi.is_finite()) {
        return Err(invalid(
            "coefficient",
            format!("range [{lo}, {hi}] is not uniformly positive and bounded"),
        ));
    }
    Ok(hi.max(1.0 / lo).max(1.0))
}

#[inline]
fn sin_prod(v: &[f64]) -> f64 {
    v.iter().map(|t| (2.0 * PI * t).sin()).product()
}

impl PeriodicCoefficient {
    pub fn constant(dimension: usize, value: f64) -> Result<Self> {
        check_dimension(dimension)?;
        Ok(Self {
            name: format!("constant({value})"),
            dimension,
            kind: PeriodicKind::Constant(value),
            gamma: ellipticity(value, value)?,
        })
    }

    pub fn product(dimension: usize, base: f64, amp: f64) -> Result<Self> {
        check_dimension(dimension)?;
        Ok(Self {
            name: format!("product(base={base}, amp={amp})"),
            dimension,
            kind: PeriodicKind::Product { base, amp },
            gamma: ellipticity(base - amp.abs(), base + amp.abs())?,
        })
    }

    pub fn difference(dimension: usize, base: f64, amp: f64) -> Result<Self> {
        check_dimension(dimension)?;
        Ok(Self {
            name: format!("difference(base={base}, amp={amp})"),
            dimension,
            kind: PeriodicKind::Difference { base, amp },
            gamma: ellipticity(base - amp.abs(), base + amp.abs())?,
        })
    }

    /// User coefficient. The caller asserts symmetry, diagonal periodicity
    /// and the bounds `1/gamma <= Lambda <= gamma`; the `sampled_*` checks
    /// can verify them.
    pub fn custom(name: impl Into<String>, dimension: usize, gamma: f64, f: PeriodicFn) -> Result<Self> {
        check_dimension(dimension)?;
        if !(gamma >= 1.0 && gamma.is_finite()) {
            return Err(invalid("gamma", format!("must be >= 1, got {gamma}")));
        }
        Ok(Self {
            name: name.into(),
            dimension,
            kind: PeriodicKind::Custom(f),
            gamma,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// The value when the coefficient does not oscillate.
    pub fn constant_value(&self) -> Option<f64> {
        match self.kind {
            PeriodicKind::Constant(c) => Some(c),
            _ => None,
        }
    }

    /// Closed-form cell average of the built-in families.
    pub fn exact_mean(&self) -> Option<f64> {
        match self.kind {
            PeriodicKind::Constant(c) => Some(c),
            PeriodicKind::Product { base, .. } | PeriodicKind::Difference { base, .. } => Some(base),
            PeriodicKind::Custom(_) => None,
        }
    }

    #[inline]
    pub fn eval(&self, xi: &[f64], eta: &[f64]) -> f64 {
        match &self.kind {
            PeriodicKind::Constant(c) => *c,
            PeriodicKind::Product { base, amp } => base + amp * sin_prod(xi) * sin_prod(eta),
            PeriodicKind::Difference { base, amp } => {
                let s: f64 = xi.iter().zip(eta).map(|(a, b)| a - b).sum();
                base + amp * (2.0 * PI * s).cos()
            }
            PeriodicKind::Custom(f) => f(xi, eta),
        }
    }
}

/// Continuity modulus `omega` of a locally periodic coefficient in `(x, y)`.
#[derive(Clone)]
pub enum Modulus {
    Lipschitz(f64),
    Custom(ModulusFn),
}

impl Modulus {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Self::Lipschitz(l) => l * t,
            Self::Custom(f) => f(t),
        }
    }
}

impl fmt::Debug for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Lipschitz(l) => write!(f, "Lipschitz({l})"),
            Self::Custom(_) => write!(f, "Custom"),
        }
    }
}

#[derive(Clone)]
enum LocalKind {
    /// `periodic(xi, eta) * (1 + weight / (1 + |x|^2 + |y|^2))`
    Modulated { periodic: PeriodicCoefficient, weight: f64 },
    /// `1 + exp(-|x - y|)`, no fast variable.
    SlowExp,
    Custom(LocalFn),
}

#[derive(Clone)]
pub struct LocallyPeriodicCoefficient {
    name: String,
    dimension: usize,
    kind: LocalKind,
    gamma: f64,
    modulus: Modulus,
}

impl fmt::Debug for LocallyPeriodicCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LocallyPeriodicCoefficient")
            .field("name", &self.name)
            .field("dimension", &self.dimension)
            .field("gamma", &self.gamma)
            .field("modulus", &self.modulus)
            .finish()
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum()
}

fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

impl LocallyPeriodicCoefficient {
    /// `(2 + sin sin) * (1 + 1/2 (1 + |x|^2 + |y|^2)^{-1})`, the built-in
    /// slowly modulated coefficient. Values lie in `[1, 4.5]`; the slow
    /// factor is Lipschitz with constant below 1 in `|dx| + |dy|`.
    pub fn modulated(dimension: usize) -> Result<Self> {
        Self::modulated_with(PeriodicCoefficient::product(dimension, 2.0, 1.0)?, 0.5)
    }

    pub fn modulated_with(periodic: PeriodicCoefficient, weight: f64) -> Result<Self> {
        if !(weight >= 0.0 && weight.is_finite()) {
            return Err(invalid("weight", format!("must be nonnegative, got {weight}")));
        }
        let g = periodic.gamma;
        // sup |grad_x (1 + |x|^2 + |y|^2)^{-1}| = 3 sqrt(3) / 8
        let lip = g * weight * 3.0 * 3f64.sqrt() / 8.0;
        Ok(Self {
            name: format!("modulated({}, weight={weight})", periodic.name),
            dimension: periodic.dimension,
            gamma: g * (1.0 + weight),
            kind: LocalKind::Modulated { periodic, weight },
            modulus: Modulus::Lipschitz(lip),
        })
    }

    pub fn slow_exp(dimension: usize) -> Result<Self> {
        check_dimension(dimension)?;
        Ok(Self {
            name: "slow_exp".into(),
            dimension,
            kind: LocalKind::SlowExp,
            gamma: 2.0,
            modulus: Modulus::Lipschitz(1.0),
        })
    }

    pub fn custom(
        name: impl Into<String>,
        dimension: usize,
        gamma: f64,
        modulus: Modulus,
        f: LocalFn,
    ) -> Result<Self> {
        check_dimension(dimension)?;
        if !(gamma >= 1.0 && gamma.is_finite()) {
            return Err(invalid("gamma", format!("must be >= 1, got {gamma}")));
        }
        Ok(Self {
            name: name.into(),
            dimension,
            kind: LocalKind::Custom(f),
            gamma,
            modulus,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    #[inline]
    pub fn eval(&self, x: &[f64], y: &[f64], xi: &[f64], eta: &[f64]) -> f64 {
        match &self.kind {
            LocalKind::Modulated { periodic, weight } => {
                periodic.eval(xi, eta) * (1.0 + weight / (1.0 + (norm2(x) + norm2(y))))
            }
            LocalKind::SlowExp => 1.0 + (-dist(x, y)).exp(),
            LocalKind::Custom(f) => f(x, y, xi, eta),
        }
    }
}

/// Either kind of oscillating coefficient.
#[derive(Debug, Clone)]
pub enum Coefficient {
    Periodic(PeriodicCoefficient),
    LocallyPeriodic(LocallyPeriodicCoefficient),
}

impl From<PeriodicCoefficient> for Coefficient {
    fn from(c: PeriodicCoefficient) -> Self {
        Self::Periodic(c)
    }
}

impl From<LocallyPeriodicCoefficient> for Coefficient {
    fn from(c: LocallyPeriodicCoefficient) -> Self {
        Self::LocallyPeriodic(c)
    }
}

impl Coefficient {
    pub fn name(&self) -> &str {
        match self {
            Self::Periodic(c) => c.name(),
            Self::LocallyPeriodic(c) => c.name(),
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Self::Periodic(c) => c.dimension,
            Self::LocallyPeriodic(c) => c.dimension,
        }
    }

    pub fn gamma(&self) -> f64 {
        match self {
            Self::Periodic(c) => c.gamma,
            Self::LocallyPeriodic(c) => c.gamma,
        }
    }

    pub fn constant_value(&self) -> Option<f64> {
        match self {
            Self::Periodic(c) => c.constant_value(),
            Self::LocallyPeriodic(_) => None,
        }
    }

    pub fn is_locally_periodic(&self) -> bool {
        matches!(self, Self::LocallyPeriodic(_))
    }
}

/// `Lambda(x/eps, y/eps)` or `Lambda(x, y, x/eps, y/eps)`.
#[inline]
pub fn eval_oscillating(coeff: &Coefficient, eps: f64, x: &[f64], y: &[f64]) -> f64 {
    let d = x.len();
    let mut xi = [0.0; 2];
    let mut eta = [0.0; 2];
    for k in 0..d {
        xi[k] = x[k] / eps;
        eta[k] = y[k] / eps;
    }
    match coeff {
        Coefficient::Periodic(c) => c.eval(&xi[..d], &eta[..d]),
        Coefficient::LocallyPeriodic(c) => c.eval(x, y, &xi[..d], &eta[..d]),
    }
}

/// Midpoint-rule plan over the cell pair `[0,1]^{2d}`: `s` points per axis,
/// checked against `2s`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellQuad {
    pub s: usize,
    pub tol: f64,
}

impl CellQuad {
    pub fn for_dimension(dimension: usize) -> Self {
        Self {
            s: if dimension == 1 { 64 } else { 16 },
            tol: 1e-10,
        }
    }
}

/// Tensor midpoint average of `g` over `[0,1]^{2d}` with `s` points per axis.
pub fn cell_average(dimension: usize, s: usize, g: impl Fn(&[f64], &[f64]) -> f64) -> f64 {
    let h = 1.0 / s as f64;
    let pts: Vec<f64> = (0..s).map(|i| (i as f64 + 0.5) * h).collect();
    let mut total = 0.0;
    match dimension {
        1 => {
            for &a in &pts {
                let mut row = 0.0;
                for &b in &pts {
                    row += g(&[a], &[b]);
                }
                total += row;
            }
            total * h * h
        }
        _ => {
            for &a0 in &pts {
                for &a1 in &pts {
                    let xi = [a0, a1];
                    let mut row = 0.0;
                    for &b0 in &pts {
                        for &b1 in &pts {
                            row += g(&xi, &[b0, b1]);
                        }
                    }
                    total += row;
                }
            }
            total * h.powi(4)
        }
    }
}

fn refined_average(
    dimension: usize,
    quad: &CellQuad,
    g: impl Fn(&[f64], &[f64]) -> f64,
) -> Result<f64> {
    if quad.s == 0 {
        return Err(invalid("s", "cell quadrature needs at least one point per axis"));
    }
    let coarse = cell_average(dimension, quad.s, &g);
    let fine = cell_average(dimension, 2 * quad.s, &g);
    if (coarse - fine).abs() > quad.tol * fine.abs().max(1.0) {
        return Err(Error::Quadrature(format!(
            "cell average changed from {coarse} to {fine} between s = {} and s = {}",
            quad.s,
            2 * quad.s
        )));
    }
    Ok(fine)
}

/// `Lambda_bar`, the average over the unit cell pair.
///
/// The quadrature is always run and refinement-checked. Built-in families
/// have a closed-form mean; when the quadrature confirms it within
/// tolerance the closed form is returned, so that coefficients with equal
/// averages yield bitwise identical effective operators.
pub fn effective_lambda(coeff: &PeriodicCoefficient, quad: &CellQuad) -> Result<f64> {
    let q = refined_average(coeff.dimension, quad, |a, b| coeff.eval(a, b))?;
    match coeff.exact_mean() {
        Some(m) if (m - q).abs() <= quad.tol * m.abs().max(1.0) => Ok(m),
        Some(m) => Err(Error::Quadrature(format!(
            "cell quadrature {q} disagrees with the closed-form mean {m}"
        ))),
        None => Ok(q),
    }
}

/// `Lambda_bar(x, y)` for a locally periodic coefficient.
///
/// Separable built-ins reduce to the periodic mean times the slow factor;
/// general coefficients are averaged by refinement-checked quadrature.
pub fn effective_lambda_field(
    coeff: &LocallyPeriodicCoefficient,
    x: &[f64],
    y: &[f64],
    quad: &CellQuad,
) -> Result<f64> {
    FieldEvaluator::new(coeff, quad)?.eval(x, y)
}

/// Precomputed evaluator of `Lambda_bar(x, y)`, reused across many pairs.
#[derive(Clone)]
pub struct FieldEvaluator<'a> {
    coeff: &'a LocallyPeriodicCoefficient,
    quad: CellQuad,
    periodic_mean: Option<f64>,
}

impl<'a> FieldEvaluator<'a> {
    pub fn new(coeff: &'a LocallyPeriodicCoefficient, quad: &CellQuad) -> Result<Self> {
        let periodic_mean = match &coeff.kind {
            LocalKind::Modulated { periodic, .. } => Some(effective_lambda(periodic, quad)?),
            _ => None,
        };
        Ok(Self {
            coeff,
            quad: *quad,
            periodic_mean,
        })
    }

    /// Whether `eval` is cheap (closed-form reduction) or a full cell
    /// quadrature that is worth caching.
    pub fn is_closed_form(&self) -> bool {
        !matches!(self.coeff.kind, LocalKind::Custom(_))
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        match &self.coeff.kind {
            LocalKind::Modulated { weight, .. } => {
                let mean = self.periodic_mean.expect("computed in new");
                Ok(mean * (1.0 + weight / (1.0 + (norm2(x) + norm2(y)))))
            }
            LocalKind::SlowExp => Ok(1.0 + (-dist(x, y)).exp()),
            LocalKind::Custom(f) => {
                // symmetric argument order so the result is exactly symmetric
                let (a, b) = if x.partial_cmp(y) == Some(std::cmp::Ordering::Greater) {
                    (y, x)
                } else {
                    (x, y)
                };
                refined_average(self.coeff.dimension, &self.quad, |xi, eta| f(a, b, xi, eta))
            }
        }
    }

    /// Row average `int_0^1 Lambda(x, y, xi, eta) d eta` at `xi = x/eps`,
    /// used for the far exterior where `y/eps` is not resolved.
    pub fn row_average(&self, eps: f64, x: &[f64], y: &[f64]) -> f64 {
        let d = self.coeff.dimension;
        let mut xi = [0.0; 2];
        for k in 0..d {
            xi[k] = x[k] / eps;
        }
        row_average_local(self.coeff, x, y, &xi[..d], self.quad.s)
    }
}

fn row_average_local(c: &LocallyPeriodicCoefficient, x: &[f64], y: &[f64], xi: &[f64], s: usize) -> f64 {
    let h = 1.0 / s as f64;
    let mut total = 0.0;
    match c.dimension {
        1 => {
            for j in 0..s {
                total += c.eval(x, y, xi, &[(j as f64 + 0.5) * h]);
            }
            total * h
        }
        _ => {
            for j0 in 0..s {
                for j1 in 0..s {
                    total += c.eval(x, y, xi, &[(j0 as f64 + 0.5) * h, (j1 as f64 + 0.5) * h]);
                }
            }
            total * h * h
        }
    }
}

/// `int_0^1 Lambda(xi, eta) d eta` by the midpoint rule.
pub fn row_average_periodic(c: &PeriodicCoefficient, xi: &[f64], s: usize) -> f64 {
    let h = 1.0 / s as f64;
    let mut total = 0.0;
    match c.dimension {
        1 => {
            for j in 0..s {
                total += c.eval(xi, &[(j as f64 + 0.5) * h]);
            }
            total * h
        }
        _ => {
            for j0 in 0..s {
                for j1 in 0..s {
                    total += c.eval(xi, &[(j0 as f64 + 0.5) * h, (j1 as f64 + 0.5) * h]);
                }
            }
            total * h * h
        }
    }
}

/// `Lambda_eff(x, y) = Lambda_bar * k((x - y)/|x - y|)`.
pub fn effective_angular_kernel(lambda_bar: f64, k: &AngularDensity, x: &[f64], y: &[f64]) -> Result<f64> {
    let mut z = [0.0; 2];
    let mut any = false;
    for (i, (a, b)) in x.iter().zip(y).enumerate() {
        z[i] = a - b;
        any |= z[i] != 0.0;
    }
    if !any {
        return Err(Error::CoincidentPoints);
    }
    Ok(lambda_bar * k.at(&z[..x.len()]))
}

/// Largest observed violation of symmetry, diagonal periodicity and the
/// ellipticity bounds over the given sample pairs.
#[derive(Debug, Clone, Serialize)]
pub struct CoefficientAudit {
    pub symmetry_defect: f64,
    pub periodicity_defect: f64,
    pub min_value: f64,
    pub max_value: f64,
    pub within_bounds: bool,
}

pub fn audit_periodic(c: &PeriodicCoefficient, samples: &[(Vec<f64>, Vec<f64>)], shifts: &[Vec<f64>]) -> CoefficientAudit {
    let mut sym: f64 = 0.0;
    let mut per: f64 = 0.0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (a, b) in samples {
        let v = c.eval(a, b);
        lo = lo.min(v);
        hi = hi.max(v);
        sym = sym.max((v - c.eval(b, a)).abs());
        for z in shifts {
            let a2: Vec<f64> = a.iter().zip(z).map(|(p, q)| p + q).collect();
            let b2: Vec<f64> = b.iter().zip(z).map(|(p, q)| p + q).collect();
            per = per.max((v - c.eval(&a2, &b2)).abs());
        }
    }
    CoefficientAudit {
        symmetry_defect: sym,
        periodicity_defect: per,
        min_value: lo,
        max_value: hi,
        within_bounds: lo >= 1.0 / c.gamma && hi <= c.gamma,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn difference_example() {
        let c: Coefficient = PeriodicCoefficient::difference(1, 2.0, 1.0).unwrap().into();
        let v = eval_oscillating(&c, 0.25, &[0.0], &[0.125]);
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn constant_mean_is_exact() {
        let c = PeriodicCoefficient::constant(1, 1.0).unwrap();
        assert_eq!(effective_lambda(&c, &CellQuad::for_dimension(1)).unwrap(), 1.0);
        let c = PeriodicCoefficient::constant(2, 3.0).unwrap();
        assert_eq!(effective_lambda(&c, &CellQuad::for_dimension(2)).unwrap(), 3.0);
    }

    #[test]
    fn oscillating_means() {
        for c in [
            PeriodicCoefficient::product(1, 2.0, 1.0).unwrap(),
            PeriodicCoefficient::difference(1, 2.0, 1.0).unwrap(),
            PeriodicCoefficient::product(2, 2.0, 1.0).unwrap(),
        ] {
            let q = CellQuad::for_dimension(c.dimension());
            assert_eq!(effective_lambda(&c, &q).unwrap(), 2.0);
            let raw = cell_average(c.dimension(), q.s, |a, b| c.eval(a, b));
            assert!((raw - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rough_custom_coefficient_fails_refinement() {
        let c = PeriodicCoefficient::custom(
            "step",
            1,
            2.0,
            Arc::new(|a: &[f64], b: &[f64]| {
                let f = |t: f64| if (t.rem_euclid(1.0) * 3.0) < 1.0 { 1.0 } else { 0.0 };
                1.0 + f(a[0] - b[0])
            }),
        )
        .unwrap();
        let q = CellQuad { s: 64, tol: 1e-12 };
        assert!(matches!(effective_lambda(&c, &q), Err(Error::Quadrature(_))));
    }

    #[test]
    fn ellipticity_rejects_degenerate_ranges() {
        assert!(PeriodicCoefficient::product(1, 1.0, 1.0).is_err());
        assert!(PeriodicCoefficient::constant(1, 0.0).is_err());
        assert_eq!(PeriodicCoefficient::product(1, 2.0, 1.0).unwrap().gamma(), 3.0);
    }

    #[test]
    fn slow_exp_field_has_no_fast_variable() {
        let c = LocallyPeriodicCoefficient::slow_exp(1).unwrap();
        let v = effective_lambda_field(&c, &[0.3], &[1.7], &CellQuad::for_dimension(1)).unwrap();
        assert_eq!(v, 1.0 + (-1.4f64).exp());
    }

    #[test]
    fn modulated_field_is_product_of_averages() {
        let c = LocallyPeriodicCoefficient::modulated(1).unwrap();
        let q = CellQuad::for_dimension(1);
        let v = effective_lambda_field(&c, &[0.0], &[1.0], &q).unwrap();
        assert!((v - 2.0 * (1.0 + 0.5 / 2.0)).abs() < 1e-14);
        let g = c.gamma();
        assert!((1.0 / g..=g).contains(&v));
    }

    #[test]
    fn custom_field_matches_separable_builtin() {
        let builtin = LocallyPeriodicCoefficient::modulated(1).unwrap();
        let b2 = builtin.clone();
        let custom = LocallyPeriodicCoefficient::custom(
            "copy",
            1,
            builtin.gamma(),
            Modulus::Lipschitz(1.0),
            Arc::new(move |x, y, xi, eta| b2.eval(x, y, xi, eta)),
        )
        .unwrap();
        let q = CellQuad::for_dimension(1);
        let a = effective_lambda_field(&builtin, &[0.4], &[-1.1], &q).unwrap();
        let b = effective_lambda_field(&custom, &[0.4], &[-1.1], &q).unwrap();
        assert!((a - b).abs() < 1e-12);
        let b_swapped = effective_lambda_field(&custom, &[-1.1], &[0.4], &q).unwrap();
        assert_eq!(b, b_swapped);
    }

    #[test]
    fn angular_kernel_examples() {
        let k = AngularDensity::constant(1, 0.5);
        assert_eq!(effective_angular_kernel(2.0, &k, &[0.0], &[1.0]).unwrap(), 1.0);
        assert!(matches!(
            effective_angular_kernel(2.0, &k, &[1.0], &[1.0]),
            Err(Error::CoincidentPoints)
        ));
    }

    #[test]
    fn row_average_of_product_is_base() {
        let c = PeriodicCoefficient::product(1, 2.0, 1.0).unwrap();
        assert!((row_average_periodic(&c, &[0.3], 16) - 2.0).abs() < 1e-14);
    }
}
