//! Cell-centered grids on the box `[-R, R]^d` and functions on them.

use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dimension: usize,
    half_width: f64,
    n_per_axis: usize,
}

impl Grid {
    pub fn new(dimension: usize, half_width: f64, n_per_axis: usize) -> Result<Self> {
        if dimension != 1 && dimension != 2 {
            return Err(invalid("dimension", format!("must be 1 or 2, got {dimension}")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(invalid("half_width", format!("must be positive, got {half_width}")));
        }
        if n_per_axis < 8 {
            return Err(invalid("cells_per_axis", format!("must be at least 8, got {n_per_axis}")));
        }
        Ok(Self {
            dimension,
            half_width,
            n_per_axis,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n_per_axis(&self) -> usize {
        self.n_per_axis
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n_per_axis as f64
    }

    /// `h^d`, the volume of one cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dimension as i32)
    }

    pub fn len(&self) -> usize {
        self.n_per_axis.pow(self.dimension as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Center coordinate along one axis.
    #[inline]
    pub fn axis_center(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.spacing()
    }

    /// Per-axis indices of flat index `i` (axis 0 varies slowest).
    #[inline]
    pub fn multi_index(&self, i: usize) -> [usize; 2] {
        match self.dimension {
            1 => [i, 0],
            _ => [i / self.n_per_axis, i % self.n_per_axis],
        }
    }

    /// Cell center of flat index `i`; unused trailing coordinates are zero.
    #[inline]
    pub fn center(&self, i: usize) -> [f64; 2] {
        let m = self.multi_index(i);
        match self.dimension {
            1 => [self.axis_center(m[0]), 0.0],
            _ => [self.axis_center(m[0]), self.axis_center(m[1])],
        }
    }

    pub fn centers(&self) -> Vec<[f64; 2]> {
        (0..self.len()).map(|i| self.center(i)).collect()
    }

    pub fn zeros(&self) -> GridFunction {
        GridFunction {
            grid: *self,
            values: vec![0.0; self.len()],
        }
    }

    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> GridFunction {
        let d = self.dimension;
        let values = (0..self.len()).map(|i| f(&self.center(i)[..d])).collect();
        GridFunction { grid: *self, values }
    }

    pub fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid with {} cells",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Discrete L2 inner product `h^d sum u_i v_i`.
    pub fn inner(&self, other: &GridFunction) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(dot(&self.values, &other.values) * self.grid.cell_volume())
    }

    pub fn l2_norm(&self) -> f64 {
        self.grid.cell_volume().sqrt() * dot(&self.values, &self.values).sqrt()
    }

    pub fn l2_distance(&self, other: &GridFunction) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        Ok(self.grid.cell_volume().sqrt() * s.sqrt())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let g = &self.grid;
        let mut w = w;
        writeln!(
            w,
            "# dimension={} half_width={} cells_per_axis={}",
            g.dimension, g.half_width, g.n_per_axis
        )?;
        let mut out = csv::Writer::from_writer(w);
        match g.dimension {
            1 => out.write_record(["x", "value"])?,
            _ => out.write_record(["x", "y", "value"])?,
        }
        for (i, v) in self.values.iter().enumerate() {
            let c = g.center(i);
            match g.dimension {
                1 => out.write_record(&[c[0].to_string(), v.to_string()])?,
                _ => out.write_record(&[c[0].to_string(), c[1].to_string(), v.to_string()])?,
            }
        }
        out.flush()?;
        Ok(())
    }

    /// Reads the format written by [`GridFunction::write_csv`]. Values are
    /// taken in file order; coordinates are checked against the header grid.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut reader = BufReader::new(r);
        let mut header = String::new();
        reader.read_line(&mut header)?;
        let grid = parse_header(&header)?;
        let mut rows = csv::Reader::from_reader(reader);
        let mut values = Vec::with_capacity(grid.len());
        for (i, rec) in rows.records().enumerate() {
            let rec = rec?;
            if rec.len() != grid.dimension + 1 {
                return Err(Error::Parse(format!("row {i}: expected {} columns", grid.dimension + 1)));
            }
            if i >= grid.len() {
                return Err(Error::Parse("more rows than grid cells".into()));
            }
            let num = |k: usize| -> Result<f64> {
                rec[k]
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {i}, column {k}: {e}")))
            };
            let c = grid.center(i);
            for k in 0..grid.dimension {
                if (num(k)? - c[k]).abs() > 1e-9 * grid.half_width {
                    return Err(Error::Parse(format!("row {i}: coordinate does not match the grid")));
                }
            }
            values.push(num(grid.dimension)?);
        }
        GridFunction::new(grid, values)
    }
}

fn parse_header(line: &str) -> Result<Grid> {
    let body = line
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse("missing `#` grid header".into()))?;
    let mut d = None;
    let mut r = None;
    let mut n = None;
    for tok in body.split_whitespace() {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad header token `{tok}`")))?;
        let bad = |e: &dyn std::fmt::Display| Error::Parse(format!("header `{k}`: {e}"));
        match k {
            "dimension" => d = Some(v.parse::<usize>().map_err(|e| bad(&e))?),
            "half_width" => r = Some(v.parse::<f64>().map_err(|e| bad(&e))?),
            "cells_per_axis" => n = Some(v.parse::<usize>().map_err(|e| bad(&e))?),
            _ => return Err(Error::Parse(format!("unknown header key `{k}`"))),
        }
    }
    match (d, r, n) {
        (Some(d), Some(r), Some(n)) => Grid::new(d, r, n),
        _ => Err(Error::Parse("header needs dimension, half_width and cells_per_axis".into())),
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Named analytic source profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "profile", deny_unknown_fields)]
pub enum SourceProfile {
    /// `amplitude * exp(-|x - center|^2 / (2 sigma^2))`
    Gaussian {
        #[serde(default)]
        center: Vec<f64>,
        sigma: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `amplitude * exp(1 - 1/(1 - |x - center|^2/radius^2))` inside the ball.
    Bump {
        #[serde(default)]
        center: Vec<f64>,
        radius: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    Zero,
}

fn one() -> f64 {
    1.0
}

impl SourceProfile {
    fn center(&self, d: usize) -> [f64; 2] {
        let c = match self {
            Self::Gaussian { center, .. } | Self::Bump { center, .. } => center.as_slice(),
            Self::Zero => &[],
        };
        let mut out = [0.0; 2];
        for k in 0..d.min(c.len()) {
            out[k] = c[k];
        }
        out
    }

    pub fn validate(&self, dimension: usize) -> Result<()> {
        match self {
            Self::Gaussian { center, sigma, .. } => {
                if !(*sigma > 0.0) {
                    return Err(invalid("sigma", format!("must be positive, got {sigma}")));
                }
                check_center(center, dimension)
            }
            Self::Bump { center, radius, .. } => {
                if !(*radius > 0.0) {
                    return Err(invalid("radius", format!("must be positive, got {radius}")));
                }
                check_center(center, dimension)
            }
            Self::Zero => Ok(()),
        }
    }

    /// Radius of the ball around the origin outside of which the profile is
    /// negligible: `|center| + 4 sigma` for Gaussians.
    pub fn support_radius(&self, dimension: usize) -> f64 {
        let c = self.center(dimension);
        let cn = (c[0] * c[0] + c[1] * c[1]).sqrt();
        match self {
            Self::Gaussian { sigma, .. } => cn + 4.0 * sigma,
            Self::Bump { radius, .. } => cn + radius,
            Self::Zero => 0.0,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let c = self.center(x.len());
        let r2: f64 = x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
        match self {
            Self::Gaussian { sigma, amplitude, .. } => amplitude * (-r2 / (2.0 * sigma * sigma)).exp(),
            Self::Bump { radius, amplitude, .. } => {
                let t = r2 / (radius * radius);
                if t < 1.0 {
                    amplitude * (1.0 - 1.0 / (1.0 - t)).exp()
                } else {
                    0.0
                }
            }
            Self::Zero => 0.0,
        }
    }

    pub fn sample(&self, grid: &Grid) -> Result<GridFunction> {
        self.validate(grid.dimension())?;
        Ok(grid.sample(|x| self.eval(x)))
    }
}

fn check_center(c: &[f64], d: usize) -> Result<()> {
    if c.is_empty() || c.len() == d {
        Ok(())
    } else {
        Err(invalid("center", format!("needs {d} coordinates, got {}", c.len())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_centers() {
        let g = Grid::new(1, 8.0, 16).unwrap();
        assert_eq!(g.spacing(), 1.0);
        assert_eq!(g.center(0)[0], -7.5);
        assert_eq!(g.center(15)[0], 7.5);
        let g2 = Grid::new(2, 1.0, 8).unwrap();
        assert_eq!(g2.len(), 64);
        assert_eq!(g2.center(9), [-0.625, -0.625]);
        assert!(Grid::new(1, 1.0, 4).is_err());
    }

    #[test]
    fn norm_convention() {
        let g = Grid::new(1, 2.0, 16).unwrap();
        let u = g.sample(|_| 1.0);
        assert!((u.l2_norm() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn csv_round_trip() {
        for g in [Grid::new(1, 3.0, 12).unwrap(), Grid::new(2, 1.5, 8).unwrap()] {
            let u = g.sample(|x| x.iter().map(|v| v.sin()).sum::<f64>() / 3.0);
            let mut buf = Vec::new();
            u.write_csv(&mut buf).unwrap();
            let back = GridFunction::read_csv(buf.as_slice()).unwrap();
            assert_eq!(back, u);
        }
    }

    #[test]
    fn csv_rejects_bad_header() {
        assert!(GridFunction::read_csv("x,value\n0,1\n".as_bytes()).is_err());
    }

    #[test]
    fn profiles() {
        let p = SourceProfile::Gaussian {
            center: vec![],
            sigma: 0.5,
            amplitude: 1.0,
        };
        assert_eq!(p.support_radius(1), 2.0);
        assert_eq!(p.eval(&[0.0]), 1.0);
        let b = SourceProfile::Bump {
            center: vec![1.0],
            radius: 0.5,
            amplitude: 2.0,
        };
        assert_eq!(b.eval(&[1.0]), 2.0);
        assert_eq!(b.eval(&[1.6]), 0.0);
        assert!(SourceProfile::Gaussian { center: vec![0.0, 0.0], sigma: 1.0, amplitude: 1.0 }
            .validate(1)
            .is_err());
    }
}
