//! Experiments built on the condition engines: the counterexample search,
//! empirical constants, the log-Hölder and Fourier variants, and the pinned
//! example runs.

mod constants;
mod falsify;
mod family;
mod fourier;
mod log_holder;
mod modular_log;
mod reproduce;

use thiserror::Error;

use crate::conditions::ConditionError;
use crate::expr::ParseError;
use crate::grid::GridError;
use crate::maximal::OperatorError;
use crate::modular::ModularError;

pub use constants::{
    estimate_constants, estimate_constants_unbounded, ConstantsOptions, InequalityReport, MemberCheck, Regime, Split,
};
pub use falsify::{
    any_cube_violates, falsify, falsify_tail, find_violating_cube, Cube, FalsifyOptions, FalsifyOutcome, TailPoint,
    TailWitness, TrajectoryPoint, Witness,
};
pub use family::StepFamily;
pub use fourier::fourier_check;
pub use log_holder::{log_holder_diagnostic, log_holder_refinement, LogHolderDiagnostic};
pub use modular_log::{modular_log_check, tail_integral};
pub use reproduce::{golden_reference, reproduce_example, Check, ExampleReport, GoldenRow, EXAMPLE_IDS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Condition(#[from] ConditionError),
    #[error(transparent)]
    Modular(#[from] ModularError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("refused: {0}")]
    Refused(String),
    #[error("{violations} of {total} holdout functions violate the inequality; enlarge the calibration family")]
    HoldoutViolation { violations: usize, total: usize },
    #[error("unknown example id `{0}` (known: {known})", known = EXAMPLE_IDS.join(", "))]
    UnknownExample(String),
}
