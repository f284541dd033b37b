use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::instance::PlanInstance;
use super::ModelError;
use crate::lp::{Relation, Sense};

/// A plan quantity that objectives and user constraints can reference.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum QuantityKey {
    TotalCost,
    TotalOutcome,
    /// Magnitude of one activity (used for per-source bounds).
    Activity(String),
    Receptor(String),
    Emission(String),
    /// Worst-case value of an indicator.
    Indicator(String),
}

impl fmt::Display for QuantityKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuantityKey::TotalCost => f.write_str("total_cost"),
            QuantityKey::TotalOutcome => f.write_str("total_outcome"),
            QuantityKey::Activity(n) => write!(f, "activity:{n}"),
            QuantityKey::Receptor(n) => write!(f, "receptor:{n}"),
            QuantityKey::Emission(n) => write!(f, "emission:{n}"),
            QuantityKey::Indicator(n) => write!(f, "indicator:{n}"),
        }
    }
}

impl FromStr for QuantityKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "total_cost" => return Ok(QuantityKey::TotalCost),
            "total_outcome" => return Ok(QuantityKey::TotalOutcome),
            _ => {}
        }
        let Some((kind, name)) = s.split_once(':') else {
            return Err(format!("unknown quantity {s:?}"));
        };
        if name.is_empty() {
            return Err(format!("quantity {s:?} is missing a name after ':'"));
        }
        let name = name.to_string();
        match kind {
            "activity" => Ok(QuantityKey::Activity(name)),
            "receptor" => Ok(QuantityKey::Receptor(name)),
            "emission" => Ok(QuantityKey::Emission(name)),
            "indicator" => Ok(QuantityKey::Indicator(name)),
            _ => Err(format!("unknown quantity kind {kind:?} in {s:?}")),
        }
    }
}

impl TryFrom<String> for QuantityKey {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<QuantityKey> for String {
    fn from(k: QuantityKey) -> Self {
        k.to_string()
    }
}

impl QuantityKey {
    /// Fails with [`ModelError::UnknownQuantity`] when the name does not
    /// exist in the instance.
    pub fn resolve(&self, instance: &PlanInstance) -> Result<(), ModelError> {
        let known = match self {
            QuantityKey::TotalCost | QuantityKey::TotalOutcome => true,
            QuantityKey::Activity(n) => instance.activity_index(n).is_some(),
            QuantityKey::Receptor(n) => instance.receptor_names.contains(n),
            QuantityKey::Emission(n) => instance.emission_names.contains(n),
            QuantityKey::Indicator(n) => instance.indicator_tables.iter().any(|t| &t.name == n),
        };
        if known {
            Ok(())
        } else {
            Err(ModelError::UnknownQuantity(self.to_string()))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub terms: IndexMap<QuantityKey, f64>,
    pub sense: Sense,
    pub label: String,
}

impl ObjectiveSpec {
    pub fn new(label: impl Into<String>, sense: Sense, terms: impl IntoIterator<Item = (QuantityKey, f64)>) -> Self {
        Self {
            terms: terms.into_iter().collect(),
            sense,
            label: label.into(),
        }
    }

    pub fn minimize(label: impl Into<String>, key: QuantityKey) -> Self {
        Self::new(label, Sense::Minimize, [(key, 1.0)])
    }

    pub fn maximize(label: impl Into<String>, key: QuantityKey) -> Self {
        Self::new(label, Sense::Maximize, [(key, 1.0)])
    }

    pub fn check(&self, instance: &PlanInstance) -> Result<(), ModelError> {
        if self.terms.is_empty() {
            return Err(ModelError::EmptyExpression(format!("objective {:?}", self.label)));
        }
        self.terms.keys().try_for_each(|k| k.resolve(instance))
    }

    /// Maps a value in the user's sense to the minimization sense.
    pub fn canonical(&self, value: f64) -> f64 {
        match self.sense {
            Sense::Minimize => value,
            Sense::Maximize => -value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserConstraint {
    pub terms: IndexMap<QuantityKey, f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl UserConstraint {
    pub fn new(terms: impl IntoIterator<Item = (QuantityKey, f64)>, relation: Relation, rhs: f64) -> Self {
        Self {
            terms: terms.into_iter().collect(),
            relation,
            rhs,
        }
    }

    pub fn check(&self, instance: &PlanInstance) -> Result<(), ModelError> {
        if self.terms.is_empty() {
            return Err(ModelError::EmptyExpression("user constraint".into()));
        }
        self.terms.keys().try_for_each(|k| k.resolve(instance))
    }
}

impl fmt::Display for UserConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (key, coef)) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{coef}*{key}")?;
        }
        write!(f, " {} {}", self.relation, self.rhs)
    }
}
