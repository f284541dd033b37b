use std::collections::HashSet;
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivityKind {
    Primary,
    Secondary,
}

/// One plan action. Magnitudes are in the activity's own unit (e.g. MW);
/// a negative magnitude means decommissioning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Activity {
    pub id: String,
    pub name: String,
    pub kind: ActivityKind,
    pub lower: f64,
    pub upper: f64,
    /// Currency per magnitude unit, charged on the positive part only.
    pub unit_cost: f64,
    /// Plan outcome (e.g. ktoe) per magnitude unit.
    pub unit_outcome: f64,
}

impl Activity {
    /// Primary activities whose domain reaches below zero get a
    /// positive/negative split in the model.
    pub fn is_decommissionable(&self) -> bool {
        self.kind == ActivityKind::Primary && self.lower < 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoilerType {
    pub id: String,
    pub name: String,
}

/// Best, average and worst case of an aggregated indicator or of one of its
/// per-emission factors.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IndicatorValue {
    pub best: f64,
    pub average: f64,
    pub worst: f64,
}

impl IndicatorValue {
    pub fn uniform(v: f64) -> Self {
        Self {
            best: v,
            average: v,
            worst: v,
        }
    }

    /// Factors for a compound class given the per-substance factors of its
    /// members: lowest, arithmetic mean and highest.
    pub fn from_members(members: &[f64]) -> Option<Self> {
        if members.is_empty() {
            return None;
        }
        let best = members.iter().copied().fold(f64::INFINITY, f64::min);
        let worst = members.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let average = members.iter().sum::<f64>() / members.len() as f64;
        Some(Self {
            best,
            average: average.clamp(best, worst),
            worst,
        })
    }

    pub fn is_ordered(&self) -> bool {
        self.best <= self.average && self.average <= self.worst
    }
}

/// Weighting table turning emissions into one indicator (e.g. human
/// toxicity in kg Pb-equivalent). Factors are keyed by emission name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorTable {
    pub name: String,
    #[serde(default)]
    pub unit: String,
    pub factors: IndexMap<String, IndicatorValue>,
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Fails with the index of the first row whose length differs from the first.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, usize> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(i);
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// With zero rows the column count cannot be recorded, so any is accepted.
    pub fn has_shape(&self, rows: usize, cols: usize) -> bool {
        self.rows == rows && (rows == 0 || self.cols == cols)
    }

    fn indexed(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.data
            .iter()
            .enumerate()
            .map(move |(k, &v)| (k / self.cols.max(1), k % self.cols.max(1), v))
    }
}

impl Serialize for Matrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(deserializer)?;
        Matrix::from_rows(rows)
            .map_err(|i| serde::de::Error::custom(format!("row {i} has a different length")))
    }
}

/// The full planning problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanInstance {
    pub activities: Vec<Activity>,
    pub budget: f64,
    pub min_outcome: f64,
    /// Secondary magnitude per unit of primary growth (primary x secondary).
    pub dep_plus: Matrix,
    /// Secondary magnitude per unit of primary reduction (primary x secondary).
    pub dep_minus: Matrix,
    /// Activity to pressure coefficients in [0, 1].
    pub mop: Matrix,
    /// Pressure to receptor coefficients in [0, 1].
    pub mpr: Matrix,
    pub pressure_names: Vec<String>,
    pub receptor_names: Vec<String>,
    pub boilers: Vec<BoilerType>,
    /// 0/1 matrix (activity x boiler): which boilers a plant type may use.
    pub moc: Matrix,
    /// Grams of pollutant per GJ of fuel (emission x boiler).
    pub mec: Matrix,
    pub emission_names: Vec<String>,
    /// Optional display grouping of emissions (e.g. "Heavy metals").
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub emission_groups: IndexMap<String, String>,
    pub indicator_tables: Vec<IndicatorTable>,
    /// Average running hours per year of a plant.
    pub hours_per_year: f64,
    /// Average output/input efficiency of plants.
    pub efficiency: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// One invariant problem, located by a field path such as `activities[2].lower`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
    pub severity: Severity,
}

impl Violation {
    pub fn error(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
            severity: Severity::Error,
        }
    }

    pub fn warning(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
            severity: Severity::Warning,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: {}: {}", self.path, self.message)
    }
}

fn check_unique<'a>(
    out: &mut Vec<Violation>,
    field: &str,
    names: impl Iterator<Item = &'a str>,
) {
    let mut seen = HashSet::new();
    for (i, name) in names.enumerate() {
        if name.is_empty() {
            out.push(Violation::error(format!("{field}[{i}]"), "name must not be empty"));
        } else if !seen.insert(name) {
            out.push(Violation::error(
                format!("{field}[{i}]"),
                format!("duplicate name {name:?}"),
            ));
        }
    }
}

fn check_shape(out: &mut Vec<Violation>, field: &str, m: &Matrix, rows: usize, cols: usize) -> bool {
    if m.has_shape(rows, cols) {
        true
    } else {
        out.push(Violation::error(
            field,
            format!(
                "expected a {rows}x{cols} matrix, found {}x{}",
                m.rows(),
                m.cols()
            ),
        ));
        false
    }
}

fn check_entries(
    out: &mut Vec<Violation>,
    field: &str,
    m: &Matrix,
    ok: impl Fn(f64) -> bool,
    what: &str,
) {
    for (i, j, v) in m.indexed() {
        if !ok(v) {
            out.push(Violation::error(
                format!("{field}[{i}][{j}]"),
                format!("value {v} is not {what}"),
            ));
        }
    }
}

impl PlanInstance {
    pub fn primaries(&self) -> impl Iterator<Item = (usize, &Activity)> {
        self.activities
            .iter()
            .enumerate()
            .filter(|(_, a)| a.kind == ActivityKind::Primary)
    }

    pub fn secondaries(&self) -> impl Iterator<Item = (usize, &Activity)> {
        self.activities
            .iter()
            .enumerate()
            .filter(|(_, a)| a.kind == ActivityKind::Secondary)
    }

    pub fn activity_index(&self, id: &str) -> Option<usize> {
        self.activities.iter().position(|a| a.id == id)
    }

    pub fn boiler_index(&self, id: &str) -> Option<usize> {
        self.boilers.iter().position(|b| b.id == id)
    }

    /// Whether the activity is coupled to at least one boiler type.
    pub fn has_boilers(&self, activity: usize) -> bool {
        self.moc.cols() > 0 && self.moc.row(activity).iter().any(|&v| v != 0.0)
    }

    /// All invariant problems, errors and warnings alike.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        check_unique(&mut out, "activities", self.activities.iter().map(|a| a.id.as_str()));
        for (i, a) in self.activities.iter().enumerate() {
            for (field, v) in [
                ("lower", a.lower),
                ("upper", a.upper),
                ("unit_cost", a.unit_cost),
                ("unit_outcome", a.unit_outcome),
            ] {
                if !v.is_finite() {
                    out.push(Violation::error(
                        format!("activities[{i}].{field}"),
                        "must be a finite number",
                    ));
                }
            }
            if a.lower > a.upper {
                out.push(Violation::error(
                    format!("activities[{i}].lower"),
                    format!("lower bound {} exceeds upper bound {}", a.lower, a.upper),
                ));
            }
            if a.kind == ActivityKind::Secondary && a.lower < 0.0 {
                out.push(Violation::error(
                    format!("activities[{i}].lower"),
                    "secondary activities cannot be decommissioned (lower must be >= 0)",
                ));
            }
        }
        for (field, v) in [("budget", self.budget), ("min_outcome", self.min_outcome)] {
            if !v.is_finite() {
                out.push(Violation::error(field, "must be a finite number"));
            }
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            out.push(Violation::error(
                "efficiency",
                format!("must lie in (0, 1], found {}", self.efficiency),
            ));
        }
        if !(self.hours_per_year > 0.0 && self.hours_per_year <= 8784.0) {
            out.push(Violation::error(
                "hours_per_year",
                format!("must lie in (0, 8784], found {}", self.hours_per_year),
            ));
        }

        check_unique(&mut out, "pressure_names", self.pressure_names.iter().map(String::as_str));
        check_unique(&mut out, "receptor_names", self.receptor_names.iter().map(String::as_str));
        check_unique(&mut out, "emission_names", self.emission_names.iter().map(String::as_str));
        check_unique(&mut out, "boilers", self.boilers.iter().map(|b| b.id.as_str()));

        let n_act = self.activities.len();
        let n_pri = self.primaries().count();
        let n_sec = self.secondaries().count();
        let n_pre = self.pressure_names.len();
        let n_rec = self.receptor_names.len();
        let n_boil = self.boilers.len();
        let n_emi = self.emission_names.len();

        let nonneg = |v: f64| v.is_finite() && v >= 0.0;
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        for (field, m) in [("dep_plus", &self.dep_plus), ("dep_minus", &self.dep_minus)] {
            if check_shape(&mut out, field, m, n_pri, n_sec) {
                check_entries(&mut out, field, m, nonneg, "a finite value >= 0");
            }
        }
        if check_shape(&mut out, "mop", &self.mop, n_act, n_pre) {
            check_entries(&mut out, "mop", &self.mop, unit, "in [0, 1]");
        }
        if check_shape(&mut out, "mpr", &self.mpr, n_pre, n_rec) {
            check_entries(&mut out, "mpr", &self.mpr, unit, "in [0, 1]");
        }
        let moc_ok = check_shape(&mut out, "moc", &self.moc, n_act, n_boil);
        if moc_ok {
            check_entries(&mut out, "moc", &self.moc, |v| v == 0.0 || v == 1.0, "0 or 1");
            for (i, a) in self.activities.iter().enumerate() {
                if n_boil > 0 && self.has_boilers(i) && a.lower < 0.0 {
                    out.push(Violation::error(
                        format!("activities[{i}].lower"),
                        "an activity coupled to boilers cannot have a negative lower bound",
                    ));
                }
            }
            for (j, b) in self.boilers.iter().enumerate() {
                if n_act > 0 && (0..n_act).all(|i| self.moc.get(i, j) == 0.0) {
                    out.push(Violation::error(
                        format!("boilers[{j}]"),
                        format!("boiler {:?} is not usable by any activity", b.id),
                    ));
                }
            }
        }
        if check_shape(&mut out, "mec", &self.mec, n_emi, n_boil) {
            check_entries(&mut out, "mec", &self.mec, nonneg, "a finite value >= 0");
        }

        for emission in self.emission_groups.keys() {
            if !self.emission_names.contains(emission) {
                out.push(Violation::error(
                    format!("emission_groups.{emission}"),
                    "unknown emission",
                ));
            }
        }

        check_unique(&mut out, "indicator_tables", self.indicator_tables.iter().map(|t| t.name.as_str()));
        for (k, table) in self.indicator_tables.iter().enumerate() {
            for (emission, f) in &table.factors {
                let path = format!("indicator_tables[{k}].factors.{emission}");
                if !self.emission_names.contains(emission) {
                    out.push(Violation::error(&path, "unknown emission"));
                }
                if ![f.best, f.average, f.worst].iter().all(|v| v.is_finite()) {
                    out.push(Violation::error(&path, "factors must be finite"));
                } else if !f.is_ordered() {
                    out.push(Violation::error(
                        &path,
                        format!(
                            "factors must satisfy best <= average <= worst, found ({}, {}, {})",
                            f.best, f.average, f.worst
                        ),
                    ));
                }
            }
            for emission in &self.emission_names {
                if !table.factors.contains_key(emission) {
                    out.push(Violation::warning(
                        format!("indicator_tables[{k}].factors"),
                        format!("no factor for emission {emission:?}; it contributes 0"),
                    ));
                }
            }
        }
        out
    }

    pub fn errors(&self) -> Vec<Violation> {
        self.validate().into_iter().filter(Violation::is_error).collect()
    }

    pub fn warnings(&self) -> Vec<Violation> {
        self.validate().into_iter().filter(|v| !v.is_error()).collect()
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// One primary activity, one pressure, one receptor, no boilers.
    pub(crate) fn single_activity() -> PlanInstance {
        PlanInstance {
            activities: vec![Activity {
                id: "a".into(),
                name: "A".into(),
                kind: ActivityKind::Primary,
                lower: 0.0,
                upper: 10.0,
                unit_cost: 2.0,
                unit_outcome: 1.0,
            }],
            budget: 10.0,
            min_outcome: 3.0,
            dep_plus: Matrix::zeros(1, 0),
            dep_minus: Matrix::zeros(1, 0),
            mop: Matrix::from_rows(vec![vec![1.0]]).unwrap(),
            mpr: Matrix::from_rows(vec![vec![1.0]]).unwrap(),
            pressure_names: vec!["p".into()],
            receptor_names: vec!["r".into()],
            boilers: vec![],
            moc: Matrix::zeros(1, 0),
            mec: Matrix::zeros(0, 0),
            emission_names: vec![],
            emission_groups: IndexMap::new(),
            indicator_tables: vec![],
            hours_per_year: 7500.0,
            efficiency: 0.39,
        }
    }

    #[test]
    fn well_formed_instance_has_no_violations() {
        assert!(single_activity().validate().is_empty());
    }

    #[test]
    fn zero_efficiency_names_the_field() {
        let mut inst = single_activity();
        inst.efficiency = 0.0;
        let errors = inst.errors();
        assert_eq!(errors.len(), 1);
        assert_eq!(errors[0].path, "efficiency");
    }

    #[test]
    fn negative_secondary_is_rejected() {
        let mut inst = single_activity();
        inst.activities.push(Activity {
            id: "s".into(),
            name: "S".into(),
            kind: ActivityKind::Secondary,
            lower: -1.0,
            upper: 1.0,
            unit_cost: 0.0,
            unit_outcome: 0.0,
        });
        inst.dep_plus = Matrix::zeros(1, 1);
        inst.dep_minus = Matrix::zeros(1, 1);
        inst.mop = Matrix::zeros(2, 1);
        inst.moc = Matrix::zeros(2, 0);
        let errors = inst.errors();
        assert_eq!(errors.len(), 1, "{errors:?}");
        assert_eq!(errors[0].path, "activities[1].lower");
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let mut inst = single_activity();
        inst.mop = Matrix::zeros(1, 2);
        assert_eq!(inst.errors()[0].path, "mop");
    }

    #[test]
    fn out_of_range_coefficient_is_located() {
        let mut inst = single_activity();
        inst.mpr.set(0, 0, 1.5);
        assert_eq!(inst.errors()[0].path, "mpr[0][0]");
    }

    #[test]
    fn missing_factor_row_is_a_warning() {
        let mut inst = single_activity();
        inst.emission_names = vec!["NOx".into(), "SOx".into()];
        inst.mec = Matrix::zeros(2, 0);
        inst.indicator_tables.push(IndicatorTable {
            name: "acidification".into(),
            unit: "kg SO2-eq".into(),
            factors: [("SOx".to_string(), IndicatorValue::uniform(1.0))].into_iter().collect(),
        });
        assert!(inst.errors().is_empty());
        let warnings = inst.warnings();
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].message.contains("NOx"));
    }

    #[test]
    fn unordered_factor_triple_is_an_error() {
        let mut inst = single_activity();
        inst.emission_names = vec!["NOx".into()];
        inst.mec = Matrix::zeros(1, 0);
        inst.indicator_tables.push(IndicatorTable {
            name: "tox".into(),
            unit: String::new(),
            factors: [(
                "NOx".to_string(),
                IndicatorValue {
                    best: 300.0,
                    average: 197.5,
                    worst: 95.0,
                },
            )]
            .into_iter()
            .collect(),
        });
        assert_eq!(inst.errors().len(), 1);
    }

    #[test]
    fn members_give_min_mean_max() {
        let v = IndicatorValue::from_members(&[95.0, 300.0]).unwrap();
        assert_eq!(v, IndicatorValue { best: 95.0, average: 197.5, worst: 300.0 });
        assert!(IndicatorValue::from_members(&[]).is_none());
    }
}
