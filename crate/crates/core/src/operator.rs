//! Dense symmetric nonlocal operators on a grid.
//!
//! `(L u)_i = sum_{j != i} w_ij (u_j - u_i) - kappa_i u_i`, where the
//! killing term `kappa` carries the interaction mass with the exterior of
//! the box (where `u` is zero).

use std::io::{BufRead, BufReader, Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum OperatorKind {
    Oscillating { eps: f64 },
    Effective,
    /// Built directly from weights, e.g. in tests or from a text file.
    Explicit,
}

/// Provenance recorded with every operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorMeta {
    pub kind: OperatorKind,
    pub kernel: String,
    pub coefficient: String,
    pub alpha: Option<f64>,
    /// Weights depend only on `x_i - x_j` (constant coefficient).
    pub translation_invariant: bool,
    pub plan: String,
}

impl OperatorMeta {
    pub fn explicit() -> Self {
        Self {
            kind: OperatorKind::Explicit,
            kernel: "explicit".into(),
            coefficient: "explicit".into(),
            alpha: None,
            translation_invariant: false,
            plan: String::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct NonlocalOperator {
    grid: Grid,
    n: usize,
    /// Row-major `n x n`, zero diagonal.
    weights: Vec<f64>,
    killing: Vec<f64>,
    meta: OperatorMeta,
}

impl NonlocalOperator {
    /// Checks symmetry, non-negativity and the zero diagonal.
    pub fn from_parts(grid: Grid, weights: Vec<f64>, killing: Vec<f64>, meta: OperatorMeta) -> Result<Self> {
        let n = grid.len();
        if weights.len() != n * n || killing.len() != n {
            return Err(Error::GridMismatch(format!(
                "operator parts have {} weights and {} killing entries for {n} cells",
                weights.len(),
                killing.len()
            )));
        }
        for i in 0..n {
            if weights[i * n + i] != 0.0 {
                return Err(Error::Parse(format!("nonzero diagonal weight at {i}")));
            }
            if !(killing[i] >= 0.0) {
                return Err(Error::Parse(format!("negative killing term at {i}")));
            }
            for j in (i + 1)..n {
                let a = weights[i * n + j];
                if !(a >= 0.0) || a != weights[j * n + i] {
                    return Err(Error::Parse(format!("weights at ({i}, {j}) are not symmetric and nonnegative")));
                }
            }
        }
        Ok(Self {
            grid,
            n,
            weights,
            killing,
            meta,
        })
    }

    pub(crate) fn from_trusted(grid: Grid, weights: Vec<f64>, killing: Vec<f64>, meta: OperatorMeta) -> Self {
        let n = grid.len();
        debug_assert_eq!(weights.len(), n * n);
        debug_assert_eq!(killing.len(), n);
        Self {
            grid,
            n,
            weights,
            killing,
            meta,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn meta(&self) -> &OperatorMeta {
        &self.meta
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.n..(i + 1) * self.n]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn killing(&self) -> &[f64] {
        &self.killing
    }

    /// A copy with the killing term removed.
    pub fn without_killing(&self) -> Self {
        let mut out = self.clone();
        out.killing.iter_mut().for_each(|k| *k = 0.0);
        out
    }

    /// Largest `sum_j w_ij + kappa_i`, which bounds the spectrum of `-L`.
    pub fn max_row_sum(&self) -> f64 {
        (0..self.n)
            .into_par_iter()
            .map(|i| self.row(i).iter().sum::<f64>() + self.killing[i])
            .reduce(|| 0.0, f64::max)
    }

    pub fn apply(&self, u: &GridFunction) -> Result<GridFunction> {
        self.grid.ensure_same(u.grid())?;
        let mut out = vec![0.0; self.n];
        self.apply_slice(u.values(), &mut out);
        GridFunction::new(self.grid, out)
    }

    /// Matvec on raw slices; rows are independent so the result does not
    /// depend on the thread count.
    pub fn apply_slice(&self, u: &[f64], out: &mut [f64]) {
        out.par_iter_mut().enumerate().for_each(|(i, o)| {
            let ui = u[i];
            let s: f64 = self.row(i).iter().zip(u).map(|(w, uj)| w * (uj - ui)).sum();
            *o = s - self.killing[i] * ui;
        });
    }

    /// Symmetric form `E(u, v)`.
    pub fn energy(&self, u: &GridFunction, v: &GridFunction) -> Result<f64> {
        self.grid.ensure_same(u.grid())?;
        self.grid.ensure_same(v.grid())?;
        Ok(self.energy_slice(u.values(), v.values()))
    }

    pub fn energy_slice(&self, u: &[f64], v: &[f64]) -> f64 {
        let per_row: Vec<f64> = (0..self.n)
            .into_par_iter()
            .map(|i| {
                let (ui, vi) = (u[i], v[i]);
                let mut s = 0.0;
                for (j, w) in self.row(i).iter().enumerate() {
                    s += w * (u[j] - ui) * (v[j] - vi);
                }
                0.5 * s + self.killing[i] * ui * vi
            })
            .collect();
        per_row.iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// Plain-text export: a `#` header, one `w i j weight` line per nonzero
    /// pair with `i < j`, and one `k i kappa` line per cell.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        let g = &self.grid;
        writeln!(
            w,
            "# nonlocal-operator dimension={} half_width={} cells_per_axis={}",
            g.dimension(),
            g.half_width(),
            g.n_per_axis()
        )?;
        writeln!(w, "# meta {}", serde_json::to_string(&self.meta).map_err(|e| Error::Parse(e.to_string()))?)?;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let v = self.weight(i, j);
                if v != 0.0 {
                    writeln!(w, "w {i} {j} {v:e}")?;
                }
            }
        }
        for (i, k) in self.killing.iter().enumerate() {
            writeln!(w, "k {i} {k:e}")?;
        }
        Ok(())
    }

    pub fn read_text<R: Read>(r: R) -> Result<Self> {
        let mut lines = BufReader::new(r).lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty operator file".into()))??;
        let grid_header = header
            .strip_prefix("# nonlocal-operator")
            .ok_or_else(|| Error::Parse("missing operator header".into()))?;
        let grid = parse_grid(grid_header)?;
        let n = grid.len();
        let mut weights = vec![0.0; n * n];
        let mut killing = vec![0.0; n];
        let mut meta = OperatorMeta::explicit();
        for (ln, line) in lines.enumerate() {
            let line = line?;
            let line = line.trim();
            if let Some(m) = line.strip_prefix("# meta ") {
                meta = serde_json::from_str(m).map_err(|e| Error::Parse(format!("meta: {e}")))?;
                continue;
            }
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::Parse(format!("line {}: `{line}`", ln + 2));
            let idx = |s: &str| -> Result<usize> {
                let v: usize = s.parse().map_err(|_| bad())?;
                if v < n {
                    Ok(v)
                } else {
                    Err(bad())
                }
            };
            let num = |s: &str| -> Result<f64> { s.parse().map_err(|_| bad()) };
            match parts.as_slice() {
                ["w", i, j, v] => {
                    let (i, j, v) = (idx(i)?, idx(j)?, num(v)?);
                    weights[i * n + j] = v;
                    weights[j * n + i] = v;
                }
                ["k", i, v] => killing[idx(i)?] = num(v)?,
                _ => return Err(bad()),
            }
        }
        Self::from_parts(grid, weights, killing, meta)
    }
}

fn parse_grid(body: &str) -> Result<Grid> {
    let mut d = None;
    let mut r = None;
    let mut n = None;
    for tok in body.split_whitespace() {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad header token `{tok}`")))?;
        let bad = || Error::Parse(format!("header `{k}`"));
        match k {
            "dimension" => d = Some(v.parse::<usize>().map_err(|_| bad())?),
            "half_width" => r = Some(v.parse::<f64>().map_err(|_| bad())?),
            "cells_per_axis" => n = Some(v.parse::<usize>().map_err(|_| bad())?),
            _ => return Err(Error::Parse(format!("unknown header key `{k}`"))),
        }
    }
    match (d, r, n) {
        (Some(d), Some(r), Some(n)) => Grid::new(d, r, n),
        _ => Err(Error::Parse("operator header needs dimension, half_width and cells_per_axis".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_cell_like() -> NonlocalOperator {
        let g = Grid::new(1, 4.0, 8).unwrap();
        let mut w = vec![0.0; 64];
        w[1] = 1.0;
        w[8] = 1.0;
        NonlocalOperator::from_parts(g, w, vec![0.0; 8], OperatorMeta::explicit()).unwrap()
    }

    #[test]
    fn single_pair_action() {
        let op = two_cell_like();
        let mut u = op.grid().zeros();
        u.values_mut()[0] = 1.0;
        let lu = op.apply(&u).unwrap();
        assert_eq!(&lu.values()[..2], &[-1.0, 1.0]);
        assert!(lu.values()[2..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_asymmetric_weights() {
        let g = Grid::new(1, 4.0, 8).unwrap();
        let mut w = vec![0.0; 64];
        w[1] = 1.0;
        assert!(NonlocalOperator::from_parts(g, w, vec![0.0; 8], OperatorMeta::explicit()).is_err());
    }

    #[test]
    fn grid_mismatch() {
        let op = two_cell_like();
        let other = Grid::new(1, 4.0, 16).unwrap().zeros();
        assert!(matches!(op.apply(&other), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn text_round_trip() {
        let g = Grid::new(1, 2.0, 8).unwrap();
        let n = 8;
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    w[i * n + j] = 1.0 / ((i as f64 - j as f64).abs() + 0.1);
                }
            }
        }
        let k: Vec<f64> = (0..n).map(|i| i as f64 / 3.0).collect();
        let op = NonlocalOperator::from_parts(g, w, k, OperatorMeta::explicit()).unwrap();
        let mut buf = Vec::new();
        op.write_text(&mut buf).unwrap();
        let back = NonlocalOperator::read_text(buf.as_slice()).unwrap();
        assert_eq!(back.weights(), op.weights());
        assert_eq!(back.killing(), op.killing());
        assert_eq!(back.meta().kind, OperatorKind::Explicit);
    }
}
