//! Experiment configuration: one JSON file with a schema version. Unknown
//! keys are rejected at every level.

use std::path::Path;

use homlab_core::kernels::{AngularDensity, HypothesisPlan, KernelSpec};
use homlab_core::{
    make_core_tail_kernel, make_pareto_kernel, make_truncated_kernel, AssemblyConfig, Coefficient, Grid,
    LocallyPeriodicCoefficient, PeriodicCoefficient, SolveConfig, SourceProfile, StudyConfig,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default = "one_dim")]
    pub dimension: usize,
    pub kernel: KernelEntry,
    pub coefficient: CoefficientEntry,
    pub m: f64,
    pub grid: GridEntry,
    pub eps: Vec<f64>,
    pub source: SourceProfile,
    /// Fixed angular density; estimated from the kernel when absent.
    #[serde(default)]
    pub angular_density: Option<AngularDensity>,
    #[serde(default)]
    pub solve: SolveOverrides,
    #[serde(default)]
    pub assembly: AssemblyConfig,
    #[serde(default)]
    pub hypotheses: HypothesisPlan,
    #[serde(default)]
    pub effective: EffectiveEntry,
    #[serde(default)]
    pub diagnostics: DiagnosticsEntry,
    /// Run directory used when `--out` is not given.
    #[serde(default)]
    pub output_dir: Option<String>,
}

fn one_dim() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "name", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelEntry {
    Pareto(ParetoParams),
    CoreTail(CoreTailParams),
    Truncated(TruncatedParams),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParetoParams {
    pub alpha: f64,
    #[serde(default = "unit")]
    pub r0: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoreTailParams {
    pub alpha: f64,
    pub core_mass: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncatedParams {
    pub alpha: f64,
    #[serde(default = "unit")]
    pub r0: f64,
    pub cutoff: f64,
}

fn unit() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Periodic,
    LocallyPeriodic,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientEntry {
    pub name: String,
    #[serde(default)]
    pub params: serde_json::Value,
    /// Optional consistency check against the family's mode.
    #[serde(default)]
    pub mode: Option<Mode>,
}

impl CoefficientEntry {
    pub fn family(&self) -> Result<CoefficientFamily, CliError> {
        let params = match &self.params {
            serde_json::Value::Null => serde_json::json!({}),
            p => p.clone(),
        };
        let tagged = serde_json::json!({ "name": self.name, "params": params });
        serde_json::from_value(tagged).map_err(|e| CliError::Config(format!("coefficient: {e}")))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "name", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientFamily {
    Constant(ConstantParams),
    Product(OscillationParams),
    Difference(OscillationParams),
    Modulated(ModulatedParams),
    SlowExp(NoParams),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantParams {
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillationParams {
    #[serde(default = "two")]
    pub base: f64,
    #[serde(default = "unit")]
    pub amp: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulatedParams {
    #[serde(default = "two")]
    pub base: f64,
    #[serde(default = "unit")]
    pub amp: f64,
    #[serde(default = "half")]
    pub weight: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoParams {}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridEntry {
    pub half_width: f64,
    pub cells_per_axis: usize,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveOverrides {
    #[serde(default)]
    pub rel_tol: Option<f64>,
    #[serde(default)]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EffectiveEntry {
    /// Extra `(x, y)` pairs, flattened to `2 d` numbers, at which the
    /// locally periodic field is reported.
    pub points: Vec<Vec<f64>>,
    /// Lattice points per axis for the sampled field (d = 1).
    pub lattice: usize,
}

impl Default for EffectiveEntry {
    fn default() -> Self {
        Self {
            points: Vec::new(),
            lattice: 17,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsEntry {
    /// Scale of the operator used for region splits and translation
    /// energies; the smallest study eps when absent.
    pub eps: Option<f64>,
    /// Smooth test functions for the region and cube checks.
    pub u: SourceProfile,
    pub phi: SourceProfile,
    pub regions: Vec<f64>,
    pub cubes: Vec<CubeEntry>,
    pub translation_shifts: Vec<usize>,
    pub exterior_n: Vec<f64>,
    /// Random vectors for the form-identity check; seeded by `--seed`.
    pub random_checks: usize,
}

impl Default for DiagnosticsEntry {
    fn default() -> Self {
        Self {
            eps: None,
            u: SourceProfile::Gaussian {
                center: Vec::new(),
                sigma: std::f64::consts::FRAC_1_SQRT_2,
                amplitude: 1.0,
            },
            phi: SourceProfile::Gaussian {
                center: vec![0.3],
                sigma: 0.5,
                amplitude: 1.0,
            },
            regions: Vec::new(),
            cubes: Vec::new(),
            translation_shifts: Vec::new(),
            exterior_n: Vec::new(),
            random_checks: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CubeEntry {
    pub eps: f64,
    pub delta: f64,
    #[serde(default)]
    pub outer: Option<f64>,
    /// Grid for this check; the experiment grid when absent.
    #[serde(default)]
    pub grid: Option<GridEntry>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<(Self, String), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg = Self::parse(&text)?;
        Ok((cfg, text))
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version: expected {SCHEMA_VERSION}, got {}",
                cfg.schema_version
            )));
        }
        let family = cfg.coefficient.family()?;
        if let Some(mode) = cfg.coefficient.mode {
            if mode != family.mode() {
                return Err(CliError::Config(format!(
                    "coefficient.mode: `{}` is not {mode:?}",
                    family.name()
                )));
            }
        }
        Ok(cfg)
    }

    pub fn kernel(&self) -> Result<KernelSpec, CliError> {
        let d = self.dimension;
        Ok(match &self.kernel {
            KernelEntry::Pareto(p) => make_pareto_kernel(d, p.alpha, p.r0)?,
            KernelEntry::CoreTail(p) => make_core_tail_kernel(d, p.alpha, p.core_mass)?,
            KernelEntry::Truncated(p) => make_truncated_kernel(d, p.alpha, p.r0, p.cutoff)?,
        })
    }

    pub fn coefficient(&self) -> Result<Coefficient, CliError> {
        let d = self.dimension;
        Ok(match self.coefficient.family()? {
            CoefficientFamily::Constant(p) => PeriodicCoefficient::constant(d, p.value)?.into(),
            CoefficientFamily::Product(p) => PeriodicCoefficient::product(d, p.base, p.amp)?.into(),
            CoefficientFamily::Difference(p) => PeriodicCoefficient::difference(d, p.base, p.amp)?.into(),
            CoefficientFamily::Modulated(p) => {
                LocallyPeriodicCoefficient::modulated_with(PeriodicCoefficient::product(d, p.base, p.amp)?, p.weight)?
                    .into()
            }
            CoefficientFamily::SlowExp(_) => LocallyPeriodicCoefficient::slow_exp(d)?.into(),
        })
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        Ok(Grid::new(self.dimension, self.grid.half_width, self.grid.cells_per_axis)?)
    }

    pub fn solve(&self) -> SolveConfig {
        let mut s = SolveConfig::new(self.m);
        if let Some(t) = self.solve.rel_tol {
            s.rel_tol = t;
        }
        s.max_iter = self.solve.max_iter;
        s
    }

    /// The eps list must be strictly decreasing and dyadic.
    pub fn checked_eps(&self) -> Result<Vec<f64>, CliError> {
        if self.eps.is_empty() {
            return Err(CliError::Config("eps: list is empty".into()));
        }
        for w in self.eps.windows(2) {
            if !(w[1] < w[0]) {
                return Err(CliError::Config("eps: values must be strictly decreasing".into()));
            }
        }
        for &e in &self.eps {
            let l = e.log2();
            if !(e > 0.0) || l != l.round() {
                return Err(CliError::Config(format!("eps: {e} is not a power of two")));
            }
        }
        Ok(self.eps.clone())
    }

    pub fn study(&self) -> Result<StudyConfig, CliError> {
        let mut s = StudyConfig::new(
            self.kernel()?,
            self.coefficient()?,
            self.grid()?,
            self.checked_eps()?,
            self.source.clone(),
            self.m,
        );
        s.solve = self.solve();
        s.assembly = self.assembly.clone();
        s.angular = self.angular_density.clone();
        s.hypotheses = self.hypotheses.clone();
        Ok(s)
    }
}

impl CoefficientFamily {
    pub fn mode(&self) -> Mode {
        match self {
            Self::Modulated(_) | Self::SlowExp(_) => Mode::LocallyPeriodic,
            _ => Mode::Periodic,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Constant(_) => "constant",
            Self::Product(_) => "product",
            Self::Difference(_) => "difference",
            Self::Modulated(_) => "modulated",
            Self::SlowExp(_) => "slow_exp",
        }
    }
}
