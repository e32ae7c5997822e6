//! Fixed-order Gauss-Legendre rules and the small amount of interval
//! machinery the kernel and exterior integrals are built on.

use std::f64::consts::PI;

/// Gauss-Legendre rule on the reference interval `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    /// Builds the `order`-point rule by Newton iteration on the Legendre
    /// recurrence. Nodes are returned in increasing order.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss rule needs at least one node");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess for the i-th largest root.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let step = p / d;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Composite rule with `panels` equal sub-intervals.
    pub fn integrate_composite(
        &self,
        a: f64,
        b: f64,
        panels: usize,
        mut f: impl FnMut(f64) -> f64,
    ) -> f64 {
        let panels = panels.max(1);
        let width = (b - a) / panels as f64;
        let mut total = 0.0;
        for k in 0..panels {
            let lo = a + width * k as f64;
            let hi = if k + 1 == panels { b } else { lo + width };
            total += self.integrate(lo, hi, &mut f);
        }
        total
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, d)
}

/// Splits `[a, b]` at the given breakpoints (those strictly inside).
pub(crate) fn split_interval(a: f64, b: f64, breakpoints: &[f64]) -> Vec<(f64, f64)> {
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&c| c > a && c < b)
        .collect();
    cuts.sort_by(|x, y| x.total_cmp(y));
    cuts.dedup();
    let mut out = Vec::with_capacity(cuts.len() + 1);
    let mut lo = a;
    for c in cuts {
        out.push((lo, c));
        lo = c;
    }
    out.push((lo, b));
    out
}

/// Running sum over geometrically growing shells with the stopping rule used
/// for every semi-infinite radial integral in the crate: stop once two
/// consecutive shells are below `tol` relative to the running total, then
/// complete the remainder as a geometric series with the observed ratio.
#[derive(Debug, Clone)]
pub(crate) struct ShellSum {
    total: f64,
    prev: Option<f64>,
    last: Option<f64>,
    small_streak: usize,
    pub shells: usize,
}

impl ShellSum {
    pub fn new() -> Self {
        Self {
            total: 0.0,
            prev: None,
            last: None,
            small_streak: 0,
            shells: 0,
        }
    }

    pub fn push(&mut self, value: f64, tol: f64) {
        self.total += value;
        self.prev = self.last;
        self.last = Some(value);
        self.shells += 1;
        if value.abs() <= tol * self.total.abs() {
            self.small_streak += 1;
        } else {
            self.small_streak = 0;
        }
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn done(&self) -> bool {
        self.small_streak >= 2
    }

    pub fn ratio(&self) -> Option<f64> {
        match (self.prev, self.last) {
            (Some(p), Some(l)) if p != 0.0 => Some(l / p),
            _ => None,
        }
    }

    /// Total including the geometric completion of the unsummed shells.
    pub fn finish(&self) -> f64 {
        match (self.ratio(), self.last) {
            (Some(r), Some(l)) if r > 0.0 && r < 1.0 => self.total + l * r / (1.0 - r),
            _ => self.total,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rule_is_exact_for_polynomials() {
        let rule = GaussRule::new(8);
        // degree 15 is the highest exactly integrated degree
        let v = rule.integrate(0.0, 2.0, |x| x.powi(15));
        assert!((v - 2f64.powi(16) / 16.0).abs() < 1e-9);
        let w: f64 = rule.mapped(-1.0, 1.0).map(|(_, w)| w).sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn odd_order_has_center_node() {
        let rule = GaussRule::new(5);
        assert_eq!(rule.order(), 5);
        let v = rule.integrate(-1.0, 1.0, |x| x * x);
        assert!((v - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn split_interval_respects_breakpoints() {
        let parts = split_interval(0.0, 4.0, &[3.0, 1.0, 5.0, 1.0]);
        assert_eq!(parts, vec![(0.0, 1.0), (1.0, 3.0), (3.0, 4.0)]);
    }

    #[test]
    fn geometric_completion_is_exact_for_geometric_shells() {
        let mut s = ShellSum::new();
        let mut v = 1.0;
        while !s.done() {
            s.push(v, 1e-3);
            v *= 0.5;
        }
        assert!((s.finish() - 2.0).abs() < 1e-12);
    }
}
