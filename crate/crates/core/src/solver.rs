//! Resolvent solves `(m - L) u = f` by conjugate gradients.
//!
//! CG on the SPD matrix `m I - L` minimizes the discrete energy
//! `F(u) = E(u, u) + m |u|^2 - 2 (f, u)` over growing Krylov spaces, so the
//! iterates realize the variational characterization of the solution.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{dot, GridFunction};
use crate::operator::NonlocalOperator;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub m: f64,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    /// Defaults to `10 n`.
    #[serde(default)]
    pub max_iter: Option<usize>,
}

fn default_rel_tol() -> f64 {
    1e-10
}

impl SolveConfig {
    pub fn new(m: f64) -> Self {
        Self {
            m,
            rel_tol: default_rel_tol(),
            max_iter: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m > 0.0) || !self.m.is_finite() {
            return Err(Error::NonPositiveMass(self.m));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(invalid("rel_tol", format!("must lie in (0, 1), got {}", self.rel_tol)));
        }
        if self.max_iter == Some(0) {
            return Err(invalid("max_iter", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    #[serde(skip)]
    pub solution: Option<GridFunction>,
    pub iterations: usize,
    /// `|f - (m - L) u| / |f|`, recomputed from the final iterate.
    pub rel_residual: f64,
    pub converged: bool,
    /// `F(u)` at the returned iterate.
    pub energy: f64,
    pub l2_norm: f64,
    pub f_norm: f64,
    pub m: f64,
    /// `|f| / m`.
    pub resolvent_bound: f64,
    /// `F(u_k)` for `k = 0, 1, ...`.
    #[serde(skip)]
    pub energy_history: Vec<f64>,
}

impl SolveReport {
    pub fn solution(&self) -> &GridFunction {
        self.solution.as_ref().expect("solve reports always carry the iterate")
    }

    pub fn into_solution(self) -> GridFunction {
        self.solution.expect("solve reports always carry the iterate")
    }
}

pub fn resolvent_solve(op: &NonlocalOperator, f: &GridFunction, cfg: &SolveConfig) -> Result<SolveReport> {
    solve_from(op, f, cfg, None)
}

/// CG from an explicit initial guess (zero when `None`).
pub fn solve_from(
    op: &NonlocalOperator,
    f: &GridFunction,
    cfg: &SolveConfig,
    initial: Option<&GridFunction>,
) -> Result<SolveReport> {
    cfg.validate()?;
    op.grid().ensure_same(f.grid())?;
    if let Some(u0) = initial {
        op.grid().ensure_same(u0.grid())?;
    }
    let n = op.len();
    let m = cfg.m;
    let max_iter = cfg.max_iter.unwrap_or(10 * n);
    let hd = op.grid().cell_volume();
    let fv = f.values();
    let f_euclid = dot(fv, fv).sqrt();

    let mut u = initial.map_or_else(|| vec![0.0; n], |g| g.values().to_vec());
    let mut au = vec![0.0; n];
    let shifted = |x: &[f64], out: &mut [f64]| {
        op.apply_slice(x, out);
        for (o, xi) in out.iter_mut().zip(x) {
            *o = m * xi - *o;
        }
    };
    shifted(&u, &mut au);
    let mut r: Vec<f64> = fv.iter().zip(&au).map(|(a, b)| a - b).collect();
    let energy_of = |u: &[f64], r: &[f64]| -> f64 {
        let s: f64 = u.iter().zip(r.iter().zip(fv)).map(|(ui, (ri, fi))| (ri + fi) * ui).sum();
        -s * hd
    };
    let mut history = vec![energy_of(&u, &r)];
    let target = cfg.rel_tol * f_euclid;

    let mut rr = dot(&r, &r);
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = f_euclid == 0.0 || rr.sqrt() <= target;
    while !converged && iterations < max_iter {
        shifted(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            break;
        }
        let a = rr / pap;
        for k in 0..n {
            u[k] += a * p[k];
            r[k] -= a * ap[k];
        }
        iterations += 1;
        history.push(energy_of(&u, &r));
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= target {
            // confirm against the true residual before stopping
            shifted(&u, &mut au);
            for k in 0..n {
                r[k] = fv[k] - au[k];
            }
            let true_rr = dot(&r, &r);
            if true_rr.sqrt() <= target {
                converged = true;
                break;
            }
            rr = true_rr;
            p.copy_from_slice(&r);
            continue;
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for k in 0..n {
            p[k] = r[k] + beta * p[k];
        }
    }

    shifted(&u, &mut au);
    for k in 0..n {
        r[k] = fv[k] - au[k];
    }
    let rel_residual = if f_euclid == 0.0 {
        dot(&r, &r).sqrt()
    } else {
        dot(&r, &r).sqrt() / f_euclid
    };
    let energy = energy_of(&u, &r);
    let solution = GridFunction::new(*op.grid(), u)?;
    let f_norm = f.l2_norm();
    let report = SolveReport {
        l2_norm: solution.l2_norm(),
        solution: Some(solution),
        iterations,
        rel_residual,
        converged: converged && (f_euclid == 0.0 || rel_residual <= cfg.rel_tol),
        energy,
        f_norm,
        m,
        resolvent_bound: f_norm / m,
        energy_history: history,
    };
    if report.converged {
        Ok(report)
    } else {
        Err(Error::NotConverged(Box::new(report)))
    }
}

/// `F(u) = E(u, u) + m |u|^2 - 2 (f, u)`.
pub fn energy_functional(op: &NonlocalOperator, f: &GridFunction, m: f64, u: &GridFunction) -> Result<f64> {
    let e = op.energy(u, u)?;
    let uu = u.inner(u)?;
    let fu = f.inner(u)?;
    Ok(e + m * uu - 2.0 * fu)
}
