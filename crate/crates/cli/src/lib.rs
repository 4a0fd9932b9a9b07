//! Configuration, convergence studies and report files for the `feast-dpg`
//! command line tool.

pub mod config;
mod output;
pub mod study;

pub use config::{ContourConfig, Degrees, DiscConfig, Domain, FeastConfig, OutputConfig, SolverConfig, StudyConfig};
pub use study::{reference_for, run_level, run_study, solve_once, solver_filter, LevelResult, StudyReport};

use feast_dpg::analysis::AnalysisError;
use feast_dpg::dpg::DpgError;
use feast_dpg::elements::ElementsError;
use feast_dpg::feast::FeastError;
use feast_dpg::mesh::MeshError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Elements(#[from] ElementsError),
    #[error(transparent)]
    Dpg(#[from] DpgError),
    #[error(transparent)]
    Feast(#[from] FeastError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("p = {p}, level {level}: {source}")]
    Solve {
        p: usize,
        level: usize,
        #[source]
        source: SolveError,
    },
    #[error("i/o error: {0}")]
    Io(String),
}

impl StudyError {
    /// Process exit code: 2 for configuration errors, 3 for solver failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            StudyError::Config(_) => 2,
            StudyError::Solve { .. } => 3,
            StudyError::Io(_) => 1,
        }
    }
}
