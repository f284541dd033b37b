//! Plan instances and their translation into mixed-integer linear programs.

mod build;
mod instance;
mod quantity;
mod scenario;

use thiserror::Error;

pub(crate) use build::merge as merge_terms;
pub use build::{build_base, build_lp, quantity_expr, set_objective, terms_expr, Entity, VariableMap};
pub use instance::{
    Activity, ActivityKind, BoilerType, IndicatorTable, IndicatorValue, Matrix, PlanInstance, Severity, Violation,
};
pub use quantity::{ObjectiveSpec, QuantityKey, UserConstraint};
pub use scenario::{extract_scenario, solve_scenario, Scenario, ScenarioKind};

use crate::assessment::AssessmentError;
use crate::lp::{SolveError, SolveStatus};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid instance: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidInstance(Vec<Violation>),
    #[error("unknown quantity {0}")]
    UnknownQuantity(String),
    #[error("{0} has no terms")]
    EmptyExpression(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("model is {}", .0.as_str())]
    NotOptimal(SolveStatus),
    #[error(transparent)]
    Assessment(#[from] AssessmentError),
    #[error("{quantity}: solver value {model} disagrees with assessment {recomputed}")]
    CrossCheck {
        quantity: String,
        model: f64,
        recomputed: f64,
    },
}
