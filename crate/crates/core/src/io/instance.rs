use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::qualitative::{qualitative_to_coefficient, QualitativeMapping, QualitativeMatrix};
use super::{LoadError, SCHEMA_VERSION};
use crate::model::{Activity, BoilerType, IndicatorTable, IndicatorValue, Matrix, PlanInstance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Number(f64),
    Label(String),
}

/// A matrix given inline (numbers or qualitative labels) or as a path to a
/// delimited table, relative to the document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSource {
    Table { table: String },
    Cells(Vec<Vec<Cell>>),
}

impl From<&Matrix> for MatrixSource {
    fn from(m: &Matrix) -> Self {
        MatrixSource::Cells(
            m.to_rows()
                .into_iter()
                .map(|r| r.into_iter().map(Cell::Number).collect())
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FactorSpec {
    /// Per-substance factors of a compound class.
    Members { members: Vec<f64> },
    Triple(IndicatorValue),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorTableDocument {
    pub name: String,
    #[serde(default)]
    pub unit: String,
    pub factors: IndexMap<String, FactorSpec>,
}

/// On-disk form of a [`PlanInstance`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDocument {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qualitative_mapping: Option<QualitativeMapping>,
    pub activities: Vec<Activity>,
    pub budget: f64,
    pub min_outcome: f64,
    pub dep_plus: MatrixSource,
    pub dep_minus: MatrixSource,
    pub mop: MatrixSource,
    pub mpr: MatrixSource,
    pub pressure_names: Vec<String>,
    pub receptor_names: Vec<String>,
    pub boilers: Vec<BoilerType>,
    pub moc: MatrixSource,
    pub mec: MatrixSource,
    pub emission_names: Vec<String>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub emission_groups: IndexMap<String, String>,
    pub indicator_tables: Vec<IndicatorTableDocument>,
    pub hours_per_year: f64,
    pub efficiency: f64,
}

impl From<&PlanInstance> for InstanceDocument {
    fn from(inst: &PlanInstance) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            qualitative_mapping: None,
            activities: inst.activities.clone(),
            budget: inst.budget,
            min_outcome: inst.min_outcome,
            dep_plus: (&inst.dep_plus).into(),
            dep_minus: (&inst.dep_minus).into(),
            mop: (&inst.mop).into(),
            mpr: (&inst.mpr).into(),
            pressure_names: inst.pressure_names.clone(),
            receptor_names: inst.receptor_names.clone(),
            boilers: inst.boilers.clone(),
            moc: (&inst.moc).into(),
            mec: (&inst.mec).into(),
            emission_names: inst.emission_names.clone(),
            emission_groups: inst.emission_groups.clone(),
            indicator_tables: inst
                .indicator_tables
                .iter()
                .map(|t| IndicatorTableDocument {
                    name: t.name.clone(),
                    unit: t.unit.clone(),
                    factors: t.factors.iter().map(|(k, &v)| (k.clone(), FactorSpec::Triple(v))).collect(),
                })
                .collect(),
            hours_per_year: inst.hours_per_year,
            efficiency: inst.efficiency,
        }
    }
}

fn axes<'a>(field: &'static str, rows: &[&'a str], cols: &[&'a str], qualitative: bool) -> Axes<'a> {
    Axes {
        field,
        rows: rows.to_vec(),
        cols: cols.to_vec(),
        qualitative,
    }
}

struct Axes<'a> {
    field: &'static str,
    rows: Vec<&'a str>,
    cols: Vec<&'a str>,
    qualitative: bool,
}

fn schema(location: &str, field: impl Into<String>, message: impl Into<String>) -> LoadError {
    LoadError::Schema {
        location: location.to_string(),
        field: field.into(),
        message: message.into(),
    }
}

/// Raw cells of a delimited table: header row of column names, first column
/// of row names.
fn read_table(path: &Path, location: &str, field: &str) -> Result<(Vec<String>, Vec<String>, Vec<Vec<String>>), LoadError> {
    let text = std::fs::read_to_string(path).map_err(|e| LoadError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let table_err = |e: csv::Error| schema(location, field, format!("{}: {e}", path.display()));
    let headers = reader.headers().map_err(table_err)?.clone();
    let cols: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for record in reader.records() {
        let record = record.map_err(table_err)?;
        let mut it = record.iter();
        rows.push(it.next().unwrap_or_default().to_string());
        cells.push(it.map(str::to_string).collect());
    }
    Ok((rows, cols, cells))
}

fn to_cells(raw: Vec<Vec<String>>) -> Vec<Vec<Cell>> {
    raw.into_iter()
        .map(|r| {
            r.into_iter()
                .map(|s| match s.parse::<f64>() {
                    Ok(v) => Cell::Number(v),
                    Err(_) => Cell::Label(s),
                })
                .collect()
        })
        .collect()
}

fn resolve_matrix(
    source: &MatrixSource,
    axes: &Axes<'_>,
    mapping: &QualitativeMapping,
    base: Option<&Path>,
    location: &str,
) -> Result<Matrix, LoadError> {
    let field = axes.field;
    let cells = match source {
        MatrixSource::Cells(c) => c.clone(),
        MatrixSource::Table { table } => {
            let Some(base) = base else {
                return Err(schema(location, field, "table references are not allowed here"));
            };
            let (rows, cols, raw) = read_table(&base.join(table), location, field)?;
            if rows != axes.rows {
                return Err(schema(location, field, format!("table rows {rows:?} do not match {:?}", axes.rows)));
            }
            if cols != axes.cols {
                return Err(schema(location, field, format!("table columns {cols:?} do not match {:?}", axes.cols)));
            }
            to_cells(raw)
        }
    };
    let labels = cells.iter().flatten().filter(|c| matches!(c, Cell::Label(_))).count();
    let total = cells.iter().map(Vec::len).sum::<usize>();
    let numeric = if labels == 0 {
        cells
            .iter()
            .map(|r| r.iter().map(|c| if let Cell::Number(v) = c { *v } else { 0.0 }).collect())
            .collect()
    } else if labels < total {
        return Err(schema(location, field, "matrix mixes numbers and qualitative labels"));
    } else if !axes.qualitative {
        return Err(schema(location, field, "qualitative labels are only allowed in mop and mpr"));
    } else {
        let strings: Vec<Vec<String>> = cells
            .iter()
            .map(|r| r.iter().map(|c| if let Cell::Label(s) = c { s.clone() } else { String::new() }).collect())
            .collect();
        let rows = (0..strings.len()).map(|i| i.to_string()).collect();
        let cols = (0..strings.first().map_or(0, Vec::len)).map(|j| j.to_string()).collect();
        let q = QualitativeMatrix::from_strings(rows, cols, &strings).map_err(|e| schema(location, field, e))?;
        let m = qualitative_to_coefficient(&q, mapping).map_err(|e| schema(location, field, e))?;
        m.to_rows()
    };
    let m = Matrix::from_rows(numeric).map_err(|i| schema(location, format!("{field}[{i}]"), "row has a different length"))?;
    Ok(if m.rows() == 0 { Matrix::zeros(0, axes.cols.len()) } else { m })
}

impl InstanceDocument {
    /// Resolves tables and labels and checks the instance invariants.
    pub fn into_instance(
        self,
        base: Option<&Path>,
        mapping_override: Option<&QualitativeMapping>,
        location: &str,
    ) -> Result<PlanInstance, LoadError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(schema(
                location,
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        let mapping = mapping_override.copied().or(self.qualitative_mapping).unwrap_or_default();
        mapping.check().map_err(|e| schema(location, "qualitative_mapping", e))?;

        let ids: Vec<&str> = self.activities.iter().map(|a| a.id.as_str()).collect();
        let primaries: Vec<&str> = self
            .activities
            .iter()
            .filter(|a| a.kind == crate::model::ActivityKind::Primary)
            .map(|a| a.id.as_str())
            .collect();
        let secondaries: Vec<&str> = self
            .activities
            .iter()
            .filter(|a| a.kind == crate::model::ActivityKind::Secondary)
            .map(|a| a.id.as_str())
            .collect();
        let pressures: Vec<&str> = self.pressure_names.iter().map(String::as_str).collect();
        let receptors: Vec<&str> = self.receptor_names.iter().map(String::as_str).collect();
        let boilers: Vec<&str> = self.boilers.iter().map(|b| b.id.as_str()).collect();
        let emissions: Vec<&str> = self.emission_names.iter().map(String::as_str).collect();
        let resolve = |src: &MatrixSource, ax: Axes<'_>| resolve_matrix(src, &ax, &mapping, base, location);

        let dep_plus = resolve(&self.dep_plus, axes("dep_plus", &primaries, &secondaries, false))?;
        let dep_minus = resolve(&self.dep_minus, axes("dep_minus", &primaries, &secondaries, false))?;
        let mop = resolve(&self.mop, axes("mop", &ids, &pressures, true))?;
        let mpr = resolve(&self.mpr, axes("mpr", &pressures, &receptors, true))?;
        let moc = resolve(&self.moc, axes("moc", &ids, &boilers, false))?;
        let mec = resolve(&self.mec, axes("mec", &emissions, &boilers, false))?;

        let mut indicator_tables = Vec::with_capacity(self.indicator_tables.len());
        for (t, table) in self.indicator_tables.into_iter().enumerate() {
            let mut factors = IndexMap::new();
            for (name, spec) in table.factors {
                let value = match spec {
                    FactorSpec::Triple(v) => v,
                    FactorSpec::Members { members } => IndicatorValue::from_members(&members).ok_or_else(|| {
                        schema(location, format!("indicator_tables[{t}].factors.{name}"), "members must not be empty")
                    })?,
                };
                factors.insert(name, value);
            }
            indicator_tables.push(IndicatorTable {
                name: table.name,
                unit: table.unit,
                factors,
            });
        }

        let instance = PlanInstance {
            activities: self.activities,
            budget: self.budget,
            min_outcome: self.min_outcome,
            dep_plus,
            dep_minus,
            mop,
            mpr,
            pressure_names: self.pressure_names,
            receptor_names: self.receptor_names,
            boilers: self.boilers,
            moc,
            mec,
            emission_names: self.emission_names,
            emission_groups: self.emission_groups,
            indicator_tables,
            hours_per_year: self.hours_per_year,
            efficiency: self.efficiency,
        };
        let errors = instance.errors();
        if errors.is_empty() {
            Ok(instance)
        } else {
            Err(LoadError::Invariant(errors))
        }
    }
}
