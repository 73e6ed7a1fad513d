//! Local hidden-variable models for n-particle GHZ statistics with lossy
//! detectors: target tables, symmetry-reduced LP feasibility, detection
//! efficiency thresholds and Monte Carlo simulation.

pub mod error;
pub mod exact;
pub mod exec;
pub mod fixture;
pub mod mc;
pub mod oracle;
pub mod pauli;
pub mod scenario;
pub mod simplex;
pub mod solver;
pub mod stabilizer;
pub mod strategy;
pub mod symmetry;
pub mod target;

pub use error::{Error, Result};
pub use exact::Rational;
pub use exec::Execution;
pub use scenario::{Click, Observable, Outcome, Setting};
pub use solver::{Arithmetic, Mode, ProblemTemplate};
pub use stabilizer::MerminSpec;
pub use strategy::{GlobalStrategy, InstructionClass, LhvModel};
pub use target::{target_table, ExactTable, ScenarioParams, StatTable};
