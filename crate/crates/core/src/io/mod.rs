//! Document formats for instances, scenarios, fronts and assessments.
//!
//! Every document is JSON with an integer `schema_version`. Reals are
//! written in shortest round-trip form, so reading a written document gives
//! back bit-identical values.

mod instance;
mod qualitative;

use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use instance::{Cell, FactorSpec, IndicatorTableDocument, InstanceDocument, MatrixSource};
pub use qualitative::{qualitative_to_coefficient, Label, QualitativeMapping, QualitativeMatrix};

use crate::assessment::AssessmentResult;
use crate::model::{PlanInstance, Scenario, Violation};
use crate::pareto::ParetoFront;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LoadError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{location}:{line}:{column}: {message}")]
    Parse {
        location: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{location}: {field}: {message}")]
    Schema {
        location: String,
        field: String,
        message: String,
    },
    #[error("{}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n"))]
    Invariant(Vec<Violation>),
}

impl LoadError {
    pub fn class(&self) -> &'static str {
        match self {
            LoadError::Io { .. } => "io",
            LoadError::Parse { .. } => "parse",
            LoadError::Schema { .. } => "schema",
            LoadError::Invariant(_) => "invariant",
        }
    }

    /// Field path of a schema error; `None` for the other classes.
    pub fn field(&self) -> Option<&str> {
        match self {
            LoadError::Schema { field, .. } => Some(field),
            _ => None,
        }
    }
}

/// Deserializes a document, separating syntax errors from data errors and
/// locating the latter by field path.
pub fn from_json<T: DeserializeOwned>(text: &str, location: &str) -> Result<T, LoadError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let field = e.path().to_string();
        classify(e.into_inner(), location, field)
    })?;
    de.end().map_err(|e| classify(e, location, String::new()))?;
    Ok(value)
}

fn classify(e: serde_json::Error, location: &str, field: String) -> LoadError {
    use serde_json::error::Category;
    match e.classify() {
        Category::Data => LoadError::Schema {
            location: location.to_string(),
            field: if field == "." { String::new() } else { field },
            message: strip_position(&e.to_string()),
        },
        _ => LoadError::Parse {
            location: location.to_string(),
            line: e.line(),
            column: e.column(),
            message: strip_position(&e.to_string()),
        },
    }
}

fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(k) => message[..k].to_string(),
        None => message.to_string(),
    }
}

fn read_text(path: &Path) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|e| LoadError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), LoadError> {
    fs::write(path, text).map_err(|e| LoadError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Pretty JSON with a trailing newline; the single serialization used by
/// every output channel.
pub fn to_document_string<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

/// Parses an instance document. Table references resolve against `base`;
/// without one they are rejected.
pub fn parse_instance(
    text: &str,
    base: Option<&Path>,
    mapping: Option<&QualitativeMapping>,
    location: &str,
) -> Result<PlanInstance, LoadError> {
    let doc: InstanceDocument = from_json(text, location)?;
    doc.into_instance(base, mapping, location)
}

pub fn load_instance(path: &Path) -> Result<PlanInstance, LoadError> {
    load_instance_with(path, None)
}

/// As [`load_instance`], with a qualitative mapping that takes precedence
/// over the one in the file.
pub fn load_instance_with(path: &Path, mapping: Option<&QualitativeMapping>) -> Result<PlanInstance, LoadError> {
    let text = read_text(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_instance(&text, Some(base), mapping, &path.display().to_string())
}

pub fn instance_to_string(instance: &PlanInstance) -> String {
    to_document_string(&InstanceDocument::from(instance))
}

pub fn write_instance(instance: &PlanInstance, path: &Path) -> Result<(), LoadError> {
    write_text(path, &instance_to_string(instance))
}

fn check_version(version: u32, location: &str) -> Result<(), LoadError> {
    if version == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(LoadError::Schema {
            location: location.to_string(),
            field: "schema_version".into(),
            message: format!("unsupported version {version}, expected {SCHEMA_VERSION}"),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDocument {
    pub schema_version: u32,
    #[serde(flatten)]
    pub scenario: Scenario,
}

impl From<Scenario> for ScenarioDocument {
    fn from(scenario: Scenario) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            scenario,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontDocument {
    pub schema_version: u32,
    #[serde(flatten)]
    pub front: ParetoFront,
}

impl From<ParetoFront> for FrontDocument {
    fn from(front: ParetoFront) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            front,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessmentDocument {
    pub schema_version: u32,
    #[serde(flatten)]
    pub result: AssessmentResult,
}

impl From<AssessmentResult> for AssessmentDocument {
    fn from(result: AssessmentResult) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            result,
        }
    }
}

/// A fixed plan to assess. Boiler powers may be omitted when every activity
/// with boilers has exactly one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanDocument {
    pub magnitudes: IndexMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boiler_powers: Option<IndexMap<String, f64>>,
}

pub fn scenario_to_string(scenario: &Scenario) -> String {
    to_document_string(&ScenarioDocument::from(scenario.clone()))
}

pub fn front_to_string(front: &ParetoFront) -> String {
    to_document_string(&FrontDocument::from(front.clone()))
}

pub fn assessment_to_string(result: &AssessmentResult) -> String {
    to_document_string(&AssessmentDocument::from(result.clone()))
}

pub fn parse_scenario(text: &str, location: &str) -> Result<Scenario, LoadError> {
    let doc: ScenarioDocument = from_json(text, location)?;
    check_version(doc.schema_version, location)?;
    Ok(doc.scenario)
}

pub fn parse_front(text: &str, location: &str) -> Result<ParetoFront, LoadError> {
    let doc: FrontDocument = from_json(text, location)?;
    check_version(doc.schema_version, location)?;
    Ok(doc.front)
}

pub fn write_front(front: &ParetoFront, path: &Path) -> Result<(), LoadError> {
    write_text(path, &front_to_string(front))
}

pub fn read_front(path: &Path) -> Result<ParetoFront, LoadError> {
    parse_front(&read_text(path)?, &path.display().to_string())
}

pub fn write_scenario(scenario: &Scenario, path: &Path) -> Result<(), LoadError> {
    write_text(path, &scenario_to_string(scenario))
}

pub fn read_scenario(path: &Path) -> Result<Scenario, LoadError> {
    parse_scenario(&read_text(path)?, &path.display().to_string())
}

pub fn load_plan(path: &Path) -> Result<PlanDocument, LoadError> {
    from_json(&read_text(path)?, &path.display().to_string())
}

/// The sample instances shipped with the library, by name.
pub fn embedded_samples() -> Vec<(&'static str, &'static str)> {
    vec![
        ("sample-region", include_str!("../../samples/sample-region.json")),
        ("toy-segment", include_str!("../../samples/toy-segment.json")),
    ]
}
