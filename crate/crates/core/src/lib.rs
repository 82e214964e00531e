//! Mixed finite elements for the pseudostress-velocity formulation of the
//! Oseen equation in two dimensions.
//!
//! The unknowns are the pseudostress `σ = ∇u - pI`, discretized row-wise
//! in RT0 or BDM1, and a piecewise-constant velocity. Around the solver
//! sit local velocity postprocessing, patch recovery of the pseudostress,
//! a recovery-based adaptive loop and drivers for convergence studies.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar for the common case.
//!
//! ```
//! use oseen_core::{problem1, solve_oseen, ElementKind, HdivSpace};
//!
//! let mesh = oseen_core::make_unit_square_uniform::<f64>(4);
//! let space = HdivSpace::new(&mesh, ElementKind::Rt0).unwrap();
//! let sol = solve_oseen(&problem1(), &space).unwrap();
//! assert!(sol.residual < 1e-9);
//! ```
#![allow(clippy::needless_range_loop)]

pub(crate) mod dense;
pub mod error;
pub mod mesh;
pub mod quadrature;
pub mod scalar;
pub mod spaces;
pub mod sparse;
pub mod tensor;

pub mod assembly;
pub mod problem;

pub mod metrics;
pub mod postprocess;

pub mod adaptivity;
pub mod experiments;

pub use adaptivity::{adaptive_solve, compute_indicators, mark_max, AdaptiveHistory, AdaptiveRecord, IndicatorSet, StopRule};
pub use assembly::{assemble, solve_oseen, LinearSystem, OseenSolution};
pub use error::{Error, Result};
pub use experiments::{run_adaptive, run_convergence, ConvergenceTable, Mode, ProblemId, RunConfig};
pub use mesh::{make_lshape_mesh, make_square_piecewise_uniform, make_unit_square_uniform, read_mesh, refine_marked, uniform_quad_refine, write_mesh, Mesh};
pub use metrics::{fit_order, Column, ErrorRow};
pub use postprocess::{postprocess_velocity, recover_pseudostress, P1VelocityField, RecoveredTensorField};
pub use problem::{problem1, problem2, problem3, ProblemSpec};
pub use scalar::{Point, Real};
pub use spaces::{ElementKind, HdivSpace, PseudostressField, VelocityField};
pub use sparse::{lu_solve, CsrMatrix, TripletBuffer};
pub use tensor::{apply_deviatoric, Matrix2};

pub type Mesh64 = Mesh<f64>;
pub type Mesh32 = Mesh<f32>;
pub type Space64<'m> = HdivSpace<'m, f64>;
pub type Space32<'m> = HdivSpace<'m, f32>;
pub type Problem64 = ProblemSpec<f64>;
pub type Problem32 = ProblemSpec<f32>;
pub type Solution64<'a> = OseenSolution<'a, f64>;
pub type Solution32<'a> = OseenSolution<'a, f32>;
pub type Csr64 = CsrMatrix<f64>;
pub type Csr32 = CsrMatrix<f32>;
