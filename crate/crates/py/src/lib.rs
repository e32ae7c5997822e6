//! Python bindings: kernels, coefficients, grids, operators, resolvent
//! solves and convergence studies. Reports come back as plain dicts.

use homlab_core::coefficients::CellQuad;
use homlab_core::{
    self as core, AssemblyConfig, GridFunction, LocallyPeriodicCoefficient, PeriodicCoefficient, SolveConfig,
    SourceProfile, StudyConfig,
};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn err(e: core::Error) -> PyErr {
    match e {
        core::Error::NotConverged(_) | core::Error::Quadrature(_) | core::Error::QuadratureStall { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Serializes through JSON so nested reports arrive as dicts and lists.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(name = "Kernel", module = "homlab", frozen)]
struct Kernel(core::KernelSpec);

#[pymethods]
impl Kernel {
    #[staticmethod]
    #[pyo3(signature = (alpha, r0=1.0, dimension=1))]
    fn pareto(alpha: f64, r0: f64, dimension: usize) -> PyResult<Self> {
        core::make_pareto_kernel(dimension, alpha, r0).map(Self).map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (alpha, core_mass, dimension=1))]
    fn core_tail(alpha: f64, core_mass: f64, dimension: usize) -> PyResult<Self> {
        core::make_core_tail_kernel(dimension, alpha, core_mass).map(Self).map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (alpha, cutoff, r0=1.0, dimension=1))]
    fn truncated(alpha: f64, cutoff: f64, r0: f64, dimension: usize) -> PyResult<Self> {
        core::make_truncated_kernel(dimension, alpha, r0, cutoff).map(Self).map_err(err)
    }

    #[getter]
    fn name(&self) -> String {
        self.0.name().to_string()
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha()
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.0.dimension()
    }

    fn density(&self, z: Vec<f64>) -> PyResult<f64> {
        if z.len() != self.0.dimension() {
            return Err(PyValueError::new_err(format!("expected {} coordinates", self.0.dimension())));
        }
        Ok(self.0.density(&z))
    }

    /// Runs the four hypothesis checks with the default plan.
    fn check_hypotheses<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let k = self.0.clone();
        let rep = py
            .detach(move || core::check_hypotheses(&k, &core::HypothesisPlan::default()))
            .map_err(err)?;
        to_py(py, &rep)
    }

    fn __repr__(&self) -> String {
        format!("Kernel({})", self.0.name())
    }
}

#[pyclass(name = "Coefficient", module = "homlab", frozen)]
struct Coefficient(core::Coefficient);

#[pymethods]
impl Coefficient {
    #[staticmethod]
    #[pyo3(signature = (value, dimension=1))]
    fn constant(value: f64, dimension: usize) -> PyResult<Self> {
        Ok(Self(PeriodicCoefficient::constant(dimension, value).map_err(err)?.into()))
    }

    /// `base + amp sin(2 pi xi) sin(2 pi eta)`
    #[staticmethod]
    #[pyo3(signature = (base=2.0, amp=1.0, dimension=1))]
    fn product(base: f64, amp: f64, dimension: usize) -> PyResult<Self> {
        Ok(Self(PeriodicCoefficient::product(dimension, base, amp).map_err(err)?.into()))
    }

    /// `base + amp cos(2 pi (xi - eta))`
    #[staticmethod]
    #[pyo3(signature = (base=2.0, amp=1.0, dimension=1))]
    fn difference(base: f64, amp: f64, dimension: usize) -> PyResult<Self> {
        Ok(Self(PeriodicCoefficient::difference(dimension, base, amp).map_err(err)?.into()))
    }

    #[staticmethod]
    #[pyo3(signature = (dimension=1))]
    fn modulated(dimension: usize) -> PyResult<Self> {
        Ok(Self(LocallyPeriodicCoefficient::modulated(dimension).map_err(err)?.into()))
    }

    #[staticmethod]
    #[pyo3(signature = (dimension=1))]
    fn slow_exp(dimension: usize) -> PyResult<Self> {
        Ok(Self(LocallyPeriodicCoefficient::slow_exp(dimension).map_err(err)?.into()))
    }

    #[getter]
    fn name(&self) -> String {
        self.0.name().to_string()
    }

    #[getter]
    fn locally_periodic(&self) -> bool {
        self.0.is_locally_periodic()
    }

    /// `Lambda_bar` of a periodic coefficient.
    fn effective_lambda(&self) -> PyResult<f64> {
        match &self.0 {
            core::Coefficient::Periodic(c) => {
                core::effective_lambda(c, &CellQuad::for_dimension(c.dimension())).map_err(err)
            }
            core::Coefficient::LocallyPeriodic(_) => {
                Err(PyValueError::new_err("use effective_lambda_field for a locally periodic coefficient"))
            }
        }
    }

    /// `Lambda_bar(x, y)` of a locally periodic coefficient.
    fn effective_lambda_field(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
        match &self.0 {
            core::Coefficient::LocallyPeriodic(c) => {
                if x.len() != c.dimension() || y.len() != c.dimension() {
                    return Err(PyValueError::new_err(format!("expected {} coordinates", c.dimension())));
                }
                core::effective_lambda_field(c, &x, &y, &CellQuad::for_dimension(c.dimension())).map_err(err)
            }
            core::Coefficient::Periodic(_) => Err(PyValueError::new_err(
                "use effective_lambda for a periodic coefficient",
            )),
        }
    }

    fn __repr__(&self) -> String {
        format!("Coefficient({})", self.0.name())
    }
}

#[pyclass(name = "Grid", module = "homlab", frozen)]
struct Grid(core::Grid);

#[pymethods]
impl Grid {
    #[new]
    #[pyo3(signature = (half_width, cells_per_axis, dimension=1))]
    fn new(half_width: f64, cells_per_axis: usize, dimension: usize) -> PyResult<Self> {
        core::Grid::new(dimension, half_width, cells_per_axis).map(Self).map_err(err)
    }

    #[getter]
    fn spacing(&self) -> f64 {
        self.0.spacing()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    /// Cell centers, one coordinate list per cell.
    fn centers(&self) -> Vec<Vec<f64>> {
        let d = self.0.dimension();
        self.0.centers().iter().map(|c| c[..d].to_vec()).collect()
    }

    /// Gaussian `amplitude exp(-|x - center|^2 / (2 sigma^2))` at the cell centers.
    #[pyo3(signature = (sigma, center=None, amplitude=1.0))]
    fn gaussian(&self, sigma: f64, center: Option<Vec<f64>>, amplitude: f64) -> PyResult<Vec<f64>> {
        let p = SourceProfile::Gaussian {
            center: center.unwrap_or_default(),
            sigma,
            amplitude,
        };
        Ok(p.sample(&self.0).map_err(err)?.into_values())
    }

    fn __repr__(&self) -> String {
        format!(
            "Grid(half_width={}, cells_per_axis={}, dimension={})",
            self.0.half_width(),
            self.0.n_per_axis(),
            self.0.dimension()
        )
    }
}

fn grid_function(grid: &core::Grid, values: Vec<f64>) -> PyResult<GridFunction> {
    GridFunction::new(*grid, values).map_err(err)
}

#[pyclass(name = "Operator", module = "homlab", frozen)]
struct Operator(core::NonlocalOperator);

#[pymethods]
impl Operator {
    /// Discrete oscillating operator at scale `eps`.
    #[staticmethod]
    fn oscillating(py: Python<'_>, kernel: &Kernel, coefficient: &Coefficient, eps: f64, grid: &Grid) -> PyResult<Self> {
        let (k, c, g) = (kernel.0.clone(), coefficient.0.clone(), grid.0);
        py.detach(move || core::assemble_eps(&k, &c, eps, &g, &AssemblyConfig::default()))
            .map(Self)
            .map_err(err)
    }

    /// Discrete homogenized operator for a constant `lambda_bar` and a
    /// constant angular density `k`.
    #[staticmethod]
    fn effective(py: Python<'_>, lambda_bar: f64, k: f64, alpha: f64, grid: &Grid) -> PyResult<Self> {
        let g = grid.0;
        py.detach(move || {
            core::assemble_effective(
                &core::AngularDensity::constant(g.dimension(), k),
                &core::LambdaBar::Constant(lambda_bar),
                alpha,
                &g,
                &AssemblyConfig::default(),
            )
        })
        .map(Self)
        .map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn weight(&self, i: usize, j: usize) -> PyResult<f64> {
        if i >= self.0.len() || j >= self.0.len() {
            return Err(PyValueError::new_err("index out of range"));
        }
        Ok(self.0.weight(i, j))
    }

    fn killing(&self) -> Vec<f64> {
        self.0.killing().to_vec()
    }

    fn apply(&self, u: Vec<f64>) -> PyResult<Vec<f64>> {
        let u = grid_function(self.0.grid(), u)?;
        Ok(self.0.apply(&u).map_err(err)?.into_values())
    }

    /// Symmetric form `E(u, v)`.
    fn energy(&self, u: Vec<f64>, v: Vec<f64>) -> PyResult<f64> {
        let u = grid_function(self.0.grid(), u)?;
        let v = grid_function(self.0.grid(), v)?;
        self.0.energy(&u, &v).map_err(err)
    }

    fn meta<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, self.0.meta())
    }
}

/// Solves `(m - L) u = f`; returns the report dict with a `solution` list.
#[pyfunction]
#[pyo3(signature = (op, f, m, rel_tol=1e-10))]
fn solve<'py>(py: Python<'py>, op: &Operator, f: Vec<f64>, m: f64, rel_tol: f64) -> PyResult<Bound<'py, PyAny>> {
    let f = grid_function(op.0.grid(), f)?;
    let mut cfg = SolveConfig::new(m);
    cfg.rel_tol = rel_tol;
    let rep = py.detach(|| core::resolvent_solve(&op.0, &f, &cfg)).map_err(err)?;
    let out = to_py(py, &rep)?;
    out.set_item("solution", rep.solution().values().to_vec())?;
    Ok(out)
}

/// Convergence study with a centered Gaussian source. Returns the report
/// dict plus `u0` and per-eps `solutions`.
#[pyfunction]
#[pyo3(signature = (kernel, coefficient, grid, eps_list, sigma, m=1.0))]
fn convergence_study<'py>(
    py: Python<'py>,
    kernel: &Kernel,
    coefficient: &Coefficient,
    grid: &Grid,
    eps_list: Vec<f64>,
    sigma: f64,
    m: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = StudyConfig::new(
        kernel.0.clone(),
        coefficient.0.clone(),
        grid.0,
        eps_list,
        SourceProfile::Gaussian {
            center: Vec::new(),
            sigma,
            amplitude: 1.0,
        },
        m,
    );
    let out = py.detach(move || core::run_convergence_study(&cfg)).map_err(err)?;
    let rep = to_py(py, &out.report)?;
    rep.set_item("u0", out.u0.values().to_vec())?;
    let sols: Vec<Vec<f64>> = out.solutions.into_iter().map(|u| u.into_values()).collect();
    rep.set_item("solutions", sols)?;
    Ok(rep)
}

#[pymodule]
fn homlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Kernel>()?;
    m.add_class::<Coefficient>()?;
    m.add_class::<Grid>()?;
    m.add_class::<Operator>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(convergence_study, m)?)?;
    Ok(())
}
