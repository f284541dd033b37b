use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::Matrix;

/// The closed vocabulary of coaxial-matrix cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    High,
    Medium,
    Low,
    Null,
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "high" => Ok(Label::High),
            "medium" => Ok(Label::Medium),
            "low" => Ok(Label::Low),
            "null" => Ok(Label::Null),
            other => Err(format!("unknown qualitative label {other:?}")),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::High => "high",
            Label::Medium => "medium",
            Label::Low => "low",
            Label::Null => "null",
        })
    }
}

/// Coefficient assigned to each label. Omitted fields keep their default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QualitativeMapping {
    pub high: f64,
    pub medium: f64,
    pub low: f64,
    pub null: f64,
}

impl Default for QualitativeMapping {
    fn default() -> Self {
        Self {
            high: 1.0,
            medium: 0.5,
            low: 0.25,
            null: 0.0,
        }
    }
}

impl QualitativeMapping {
    pub fn value(&self, label: Label) -> f64 {
        match label {
            Label::High => self.high,
            Label::Medium => self.medium,
            Label::Low => self.low,
            Label::Null => self.null,
        }
    }

    pub fn check(&self) -> Result<(), String> {
        for (label, v) in [("high", self.high), ("medium", self.medium), ("low", self.low)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("mapping for {label} is {v}, outside [0, 1]"));
            }
        }
        if self.null != 0.0 {
            return Err(format!("mapping for null must be 0, found {}", self.null));
        }
        Ok(())
    }

    /// Parses `high=1,medium=0.5,low=0.25`; unlisted labels keep the default.
    pub fn parse_overrides(text: &str) -> Result<Self, String> {
        let mut m = Self::default();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (label, value) = item
                .split_once('=')
                .ok_or_else(|| format!("expected label=value, found {item:?}"))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| format!("invalid number {:?} for {}", value.trim(), label.trim()))?;
            match label.parse::<Label>()? {
                Label::High => m.high = value,
                Label::Medium => m.medium = value,
                Label::Low => m.low = value,
                Label::Null => m.null = value,
            }
        }
        m.check()?;
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualitativeMatrix {
    pub row_names: Vec<String>,
    pub column_names: Vec<String>,
    pub cells: Vec<Vec<Label>>,
}

impl QualitativeMatrix {
    /// Fails with the first cell that is not one of the four labels.
    pub fn from_strings(
        row_names: Vec<String>,
        column_names: Vec<String>,
        cells: &[Vec<String>],
    ) -> Result<Self, String> {
        if cells.len() != row_names.len() {
            return Err(format!("{} rows for {} row names", cells.len(), row_names.len()));
        }
        let cells = cells
            .iter()
            .enumerate()
            .map(|(i, row)| {
                if row.len() != column_names.len() {
                    return Err(format!("row {i} has {} cells, expected {}", row.len(), column_names.len()));
                }
                row.iter()
                    .enumerate()
                    .map(|(j, c)| c.parse().map_err(|e| format!("cell [{i}][{j}]: {e}")))
                    .collect()
            })
            .collect::<Result<_, _>>()?;
        Ok(Self {
            row_names,
            column_names,
            cells,
        })
    }
}

/// Elementwise substitution of labels by their coefficients.
pub fn qualitative_to_coefficient(matrix: &QualitativeMatrix, mapping: &QualitativeMapping) -> Result<Matrix, String> {
    mapping.check()?;
    let rows = matrix
        .cells
        .iter()
        .map(|row| row.iter().map(|&l| mapping.value(l)).collect())
        .collect();
    let mut m = Matrix::from_rows(rows).map_err(|i| format!("row {i} has a different length"))?;
    if m.rows() == 0 {
        m = Matrix::zeros(0, matrix.column_names.len());
    }
    Ok(m)
}
