use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use planopt_core::io::{embedded_samples, from_json, parse_instance, InstanceDocument};
use planopt_core::model::{solve_scenario, ObjectiveSpec, PlanInstance, UserConstraint};
use planopt_core::pareto::{nnc_front_until, ParetoRequest};

use crate::error::ApiError;

/// Body of `POST /api/v1/solve`. Exactly one of `instance` and `sample`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveRequestBody {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstanceDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<String>,
    pub objective: ObjectiveSpec,
    #[serde(default)]
    pub constraints: Vec<UserConstraint>,
}

/// Body of `POST /api/v1/pareto`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParetoRequestBody {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstanceDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<String>,
    pub objectives: Vec<ObjectiveSpec>,
    pub points: usize,
    #[serde(default)]
    pub constraints: Vec<UserConstraint>,
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub name: String,
    pub text: String,
    /// Directory that table references resolve against.
    pub base: Option<PathBuf>,
}

/// Read-only named instances.
#[derive(Debug, Clone, Default)]
pub struct SampleStore {
    samples: Vec<Sample>,
}

impl SampleStore {
    pub fn embedded() -> Self {
        Self {
            samples: embedded_samples()
                .into_iter()
                .map(|(name, text)| Sample {
                    name: name.to_string(),
                    text: text.to_string(),
                    base: None,
                })
                .collect(),
        }
    }

    /// Every `*.json` file in `dir`, named by file stem, in name order.
    pub fn from_dir(dir: &Path) -> io::Result<Self> {
        let mut samples = Vec::new();
        for entry in fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "json") && path.is_file() {
                let Some(name) = path.file_stem().and_then(|s| s.to_str()) else {
                    continue;
                };
                samples.push(Sample {
                    name: name.to_string(),
                    text: fs::read_to_string(&path)?,
                    base: Some(dir.to_path_buf()),
                });
            }
        }
        samples.sort_by(|a, b| a.name.cmp(&b.name));
        Ok(Self { samples })
    }

    pub fn names(&self) -> Vec<&str> {
        self.samples.iter().map(|s| s.name.as_str()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&Sample> {
        self.samples.iter().find(|s| s.name == name)
    }

    pub fn load(&self, name: &str) -> Result<PlanInstance, ApiError> {
        let s = self.get(name).ok_or_else(|| ApiError::UnknownSample(name.to_string()))?;
        parse_instance(&s.text, s.base.as_deref(), None, &s.name)
            .map_err(|e| ApiError::Internal(format!("sample {name}: {e}")))
    }
}

fn resolve_instance(
    store: &SampleStore,
    instance: Option<InstanceDocument>,
    sample: Option<String>,
) -> Result<PlanInstance, ApiError> {
    match (instance, sample) {
        (Some(_), Some(_)) => Err(ApiError::invalid("sample", "give either instance or sample, not both")),
        (None, None) => Err(ApiError::invalid("instance", "missing instance or sample")),
        (Some(doc), None) => doc
            .into_instance(None, None, "request")
            .map_err(|e| ApiError::from_load(e, "instance")),
        (None, Some(name)) => store.load(&name),
    }
}

fn check_expressions(
    instance: &PlanInstance,
    objectives: &[(String, &ObjectiveSpec)],
    constraints: &[UserConstraint],
) -> Result<(), ApiError> {
    let mut violations = Vec::new();
    for (path, o) in objectives {
        if let Err(e) = o.check(instance) {
            violations.push(planopt_core::model::Violation::error(path.clone(), e.to_string()));
        }
    }
    for (i, c) in constraints.iter().enumerate() {
        if let Err(e) = c.check(instance) {
            violations.push(planopt_core::model::Violation::error(format!("constraints[{i}]"), e.to_string()));
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(ApiError::Invalid(violations))
    }
}

pub fn parse_body<T: serde::de::DeserializeOwned>(body: &str) -> Result<T, ApiError> {
    from_json(body, "request").map_err(|e| ApiError::from_load(e, ""))
}

/// Runs a solve request to the Scenario document it answers with.
pub fn execute_solve(store: &SampleStore, body: SolveRequestBody) -> Result<String, ApiError> {
    let instance = resolve_instance(store, body.instance, body.sample)?;
    check_expressions(&instance, &[("objective".into(), &body.objective)], &body.constraints)?;
    let scenario = solve_scenario(&instance, &body.objective, &body.constraints)?;
    Ok(planopt_core::io::scenario_to_string(&scenario))
}

/// Runs a pareto request to the Front document it answers with.
pub fn execute_pareto(
    store: &SampleStore,
    body: ParetoRequestBody,
    deadline: Option<Instant>,
) -> Result<String, ApiError> {
    let instance = resolve_instance(store, body.instance, body.sample)?;
    let labelled: Vec<_> = body
        .objectives
        .iter()
        .enumerate()
        .map(|(i, o)| (format!("objectives[{i}]"), o))
        .collect();
    check_expressions(&instance, &labelled, &body.constraints)?;
    let request = ParetoRequest {
        objectives: body.objectives,
        points: body.points,
        extra: body.constraints,
    };
    let front = nnc_front_until(&instance, &request, deadline)?;
    Ok(planopt_core::io::front_to_string(&front))
}
