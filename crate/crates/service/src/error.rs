use axum::http::StatusCode;
use serde::Serialize;

use planopt_core::io::LoadError;
use planopt_core::lp::{SolveError, SolveStatus};
use planopt_core::model::{ModelError, Violation};
use planopt_core::pareto::ParetoError;

/// Every non-200 outcome of a request.
#[derive(Debug, Clone, PartialEq)]
pub enum ApiError {
    /// 422: the body or the instance it names is invalid.
    Invalid(Vec<Violation>),
    /// 409
    Infeasible { constraint: Option<String> },
    /// 409
    Unbounded { objective: Option<String> },
    /// 404
    UnknownSample(String),
    /// 408
    Timeout,
    /// 500
    Internal(String),
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    constraint: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    objective: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sample: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    violations: Option<&'a [Violation]>,
}

impl ApiError {
    pub fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        ApiError::Invalid(vec![Violation::error(path, message)])
    }

    pub fn status_code(&self) -> StatusCode {
        match self {
            ApiError::Invalid(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::Infeasible { .. } | ApiError::Unbounded { .. } => StatusCode::CONFLICT,
            ApiError::UnknownSample(_) => StatusCode::NOT_FOUND,
            ApiError::Timeout => StatusCode::REQUEST_TIMEOUT,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    pub fn body(&self) -> String {
        let mut b = ErrorBody {
            status: "",
            message: None,
            constraint: None,
            objective: None,
            sample: None,
            violations: None,
        };
        match self {
            ApiError::Invalid(v) => {
                b.status = "invalid";
                b.violations = Some(v);
            }
            ApiError::Infeasible { constraint } => {
                b.status = "infeasible";
                b.constraint = constraint.as_deref();
            }
            ApiError::Unbounded { objective } => {
                b.status = "unbounded";
                b.objective = objective.as_deref();
            }
            ApiError::UnknownSample(name) => {
                b.status = "not_found";
                b.message = Some(format!("unknown sample {name:?}"));
                b.sample = Some(name);
            }
            ApiError::Timeout => {
                b.status = "timeout";
                b.message = Some("computation exceeded the server time limit".into());
            }
            ApiError::Internal(m) => {
                b.status = "error";
                b.message = Some(m.clone());
            }
        }
        planopt_core::io::to_document_string(&b)
    }

    /// Maps a load failure, prefixing field paths with where the document sits
    /// in the request.
    pub fn from_load(e: LoadError, prefix: &str) -> Self {
        let join = |p: &str| match (prefix.is_empty(), p.is_empty()) {
            (true, _) => p.to_string(),
            (false, true) => prefix.to_string(),
            (false, false) => format!("{prefix}.{p}"),
        };
        match e {
            LoadError::Parse {
                line, column, message, ..
            } => ApiError::invalid("", format!("line {line} column {column}: {message}")),
            LoadError::Schema { field, message, .. } => ApiError::invalid(join(&field), message),
            LoadError::Invariant(v) => ApiError::Invalid(
                v.into_iter()
                    .map(|v| Violation {
                        path: join(&v.path),
                        ..v
                    })
                    .collect(),
            ),
            LoadError::Io { path, message } => ApiError::Internal(format!("{path}: {message}")),
        }
    }
}

impl From<ModelError> for ApiError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::InvalidInstance(v) => ApiError::Invalid(v),
            ModelError::UnknownQuantity(_) | ModelError::EmptyExpression(_) => ApiError::invalid("", e.to_string()),
            ModelError::NotOptimal(SolveStatus::Unbounded) => ApiError::Unbounded { objective: None },
            ModelError::NotOptimal(_) => ApiError::Infeasible { constraint: None },
            ModelError::Solve(SolveError::Invalid(v)) => ApiError::Internal(v.join("; ")),
            other => ApiError::Internal(other.to_string()),
        }
    }
}

impl From<ParetoError> for ApiError {
    fn from(e: ParetoError) -> Self {
        match e {
            ParetoError::TooFewObjectives(_) | ParetoError::DuplicateLabel(_) => {
                ApiError::invalid("objectives", e.to_string())
            }
            ParetoError::TooFewPoints(_) => ApiError::invalid("points", e.to_string()),
            ParetoError::Infeasible { constraint } => ApiError::Infeasible { constraint },
            ParetoError::Unbounded(label) => ApiError::Unbounded { objective: Some(label) },
            ParetoError::Timeout => ApiError::Timeout,
            ParetoError::MissingObjective(_) => ApiError::Internal(e.to_string()),
            ParetoError::Model(m) => m.into(),
        }
    }
}
