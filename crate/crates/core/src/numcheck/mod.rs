//! Finite-difference checks of symbolic results on concrete sections.

mod checks;
mod grid;
mod section;

use thiserror::Error;

use crate::lagrangian::LagrangianError;
use crate::symcore::{EvalError, SymError};

pub use checks::{
    charge_over_slice, divergence_of_current, el_residual, random_first_jet_points, sample_onshell, write_samples_csv,
    ChargeReport, Divergence, ElResidual, NumericEnv, ResidualStats, ONSHELL_TOLERANCE,
};
pub use grid::{Axis, GridSpec, MIN_POINTS};
pub use section::{jet_prolong_numeric, AnalyticSection, GridSection, JetValues, Location, SolutionSection};

#[derive(Debug, Error)]
pub enum NumError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("grid axis {0} is not uniformly spaced")]
    NonUniform(usize),
    #[error("invalid section: {0}")]
    Section(String),
    #[error("grid index {index:?} is within {margin} points of the boundary")]
    Margin { index: Vec<usize>, margin: usize },
    #[error("sampled point is off shell: |EL| = {0:e}")]
    OffShell(f64),
    #[error("csv output failed: {0}")]
    Csv(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error(transparent)]
    Lagrangian(#[from] LagrangianError),
}

impl From<csv::Error> for NumError {
    fn from(e: csv::Error) -> Self {
        NumError::Csv(e.to_string())
    }
}
