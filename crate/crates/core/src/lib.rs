//! Time-averaged optimization over finite decision sets with a dual
//! subgradient method, plus the analysis tooling around it: multiplier
//! estimation, bound evaluation, transient/steady-state detection and
//! convergence-rate measurement.
//!
//! Everything is generic over [`Scalar`]; the aliases below pin the two
//! scalar types used in practice.

pub mod analysis;
pub mod config;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod instances;
pub mod oracle;
pub mod problem;
pub mod scalar;

pub use engine::{run, staggered_average, DualState, Frame, Record, RunTrace, SolverConfig};
pub use error::{Error, Result};
pub use problem::{AffineConstraint, DecisionSet, ExtendedBox, Piece, ProblemSpec, SeparableConvexObjective};
pub use scalar::{Exact, Scalar};

pub type Spec = ProblemSpec<f64>;
pub type ExactSpec = ProblemSpec<Exact>;
pub type Trace = RunTrace<f64>;
pub type ExactTrace = RunTrace<Exact>;
pub type Config = SolverConfig<f64>;
pub type ExactConfig = SolverConfig<Exact>;
