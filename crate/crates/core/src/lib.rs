//! Nonlocal operators of convolution type with oscillating coefficients.
//!
//! The crate builds the rescaled operators
//! `L^eps u(x) = eps^{-d-alpha} int p((x - y)/eps) Lambda(x/eps, y/eps) (u(y) - u(x)) dy`
//! on a box grid, their homogenized limit with kernel
//! `Lambda_bar k(x - y) |x - y|^{-d-alpha}`, solves the resolvent problems
//! `(m - L) u = f` and compares the two.

pub mod assembly;
pub mod coefficients;
pub mod diagnostics;
pub mod error;
pub mod fastconv;
pub mod grid;
pub mod kernels;
pub mod operator;
pub mod quadrature;
pub mod solver;

pub use assembly::{assemble_effective, assemble_eps, AssemblyConfig, ExteriorQuad, LambdaBar};
pub use coefficients::{
    effective_lambda, effective_lambda_field, CellQuad, Coefficient, FieldEvaluator, LocallyPeriodicCoefficient,
    PeriodicCoefficient,
};
pub use diagnostics::{
    cube_decomposition_check, exterior_decay_check, region_split_energy, run_convergence_study,
    translation_energy_check, ConvergenceReport, StudyConfig, StudyOutcome,
};
pub use error::{Error, Result};
pub use fastconv::{fast_apply_convolution, ConvolutionPlan};
pub use grid::{Grid, GridFunction, SourceProfile};
pub use kernels::{
    check_hypotheses, estimate_k, make_core_tail_kernel, make_pareto_kernel, make_truncated_kernel, AngularDensity,
    DirectionSet, HypothesisPlan, HypothesisReport, KernelSpec,
};
pub use operator::{NonlocalOperator, OperatorKind, OperatorMeta};
pub use solver::{resolvent_solve, SolveConfig, SolveReport};
