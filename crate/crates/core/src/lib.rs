#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod kernels;
pub mod operator;
pub mod quadrature;
pub mod runner;
pub mod subsolution;
pub mod toeplitz;

pub use config::{parse_config, Config, ConfigError};
pub use error::{Error, Result};
pub use grid::{ExteriorDatum, GridState};
pub use kernels::{KernelKind, KernelSpec};
pub use evolution::{run, ReactionSpec, RunSpec, RunStatus, SolverKind, Trajectory};
pub use operator::{assemble_system, OperatorMatrix};
pub use runner::{CommandReport, Outcome, RunManifest};
pub use subsolution::{Barrier, CertificationReport, SubsolutionParams, Zone};
pub use toeplitz::{levinson_solve, ToeplitzSystem};
