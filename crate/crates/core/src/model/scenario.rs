use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::build::{build_lp, Entity, VariableMap};
use super::instance::{IndicatorValue, PlanInstance};
use super::quantity::{ObjectiveSpec, QuantityKey, UserConstraint};
use super::ModelError;
use crate::assessment::assess_vectors;
use crate::lp::{solve, Solution};

/// Relative tolerance for agreement between solver values and the
/// independent assessment.
const CROSS_CHECK_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    /// Optimizes a single objective.
    Boundary,
    /// Balances several objectives.
    Intermediate,
}

/// One solved plan with its full assessment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub magnitudes: IndexMap<String, f64>,
    pub positive_parts: IndexMap<String, f64>,
    pub pressures: IndexMap<String, f64>,
    pub receptors: IndexMap<String, f64>,
    pub boiler_powers: IndexMap<String, f64>,
    pub emissions: IndexMap<String, f64>,
    pub indicators: IndexMap<String, IndicatorValue>,
    pub total_cost: f64,
    pub total_outcome: f64,
    pub objective_values: IndexMap<String, f64>,
    pub kind: ScenarioKind,
}

impl Scenario {
    /// Value of a quantity in this scenario; indicators report the worst case.
    pub fn quantity(&self, key: &QuantityKey) -> Option<f64> {
        match key {
            QuantityKey::TotalCost => Some(self.total_cost),
            QuantityKey::TotalOutcome => Some(self.total_outcome),
            QuantityKey::Activity(n) => self.magnitudes.get(n).copied(),
            QuantityKey::Receptor(n) => self.receptors.get(n).copied(),
            QuantityKey::Emission(n) => self.emissions.get(n).copied(),
            QuantityKey::Indicator(n) => self.indicators.get(n).map(|v| v.worst),
        }
    }

    pub fn evaluate(&self, terms: &IndexMap<QuantityKey, f64>) -> Option<f64> {
        terms
            .iter()
            .map(|(k, w)| self.quantity(k).map(|v| w * v))
            .sum()
    }

    pub fn satisfies(&self, constraint: &UserConstraint, tol: f64) -> bool {
        let Some(lhs) = self.evaluate(&constraint.terms) else {
            return false;
        };
        let t = tol * (1.0 + constraint.rhs.abs().max(lhs.abs()));
        match constraint.relation {
            crate::lp::Relation::Le => lhs <= constraint.rhs + t,
            crate::lp::Relation::Ge => lhs >= constraint.rhs - t,
            crate::lp::Relation::Eq => (lhs - constraint.rhs).abs() <= t,
        }
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= CROSS_CHECK_TOL * 1f64.max(a.abs()).max(b.abs())
}

fn cross_check(what: &str, model: &IndexMap<String, f64>, recomputed: &IndexMap<String, f64>) -> Result<(), ModelError> {
    for (name, &m) in model {
        let r = recomputed[name];
        if !close(m, r) {
            return Err(ModelError::CrossCheck {
                quantity: format!("{what}:{name}"),
                model: m,
                recomputed: r,
            });
        }
    }
    Ok(())
}

/// Assembles a scenario from an optimal solution and verifies the derived
/// quantities against an independent assessment of the same plan.
pub fn extract_scenario(
    instance: &PlanInstance,
    solution: &Solution,
    vars: &VariableMap,
    objectives: &[ObjectiveSpec],
    kind: ScenarioKind,
) -> Result<Scenario, ModelError> {
    if !solution.is_optimal() {
        return Err(ModelError::NotOptimal(solution.status));
    }
    let value = |e: Entity| solution.values[vars.index_of(e).expect("generated entity")];

    let mut magnitudes = IndexMap::new();
    let mut positive_parts = IndexMap::new();
    let mut mags = Vec::with_capacity(instance.activities.len());
    for (i, a) in instance.activities.iter().enumerate() {
        let m = value(Entity::Magnitude(i));
        let p = if vars.is_split(i) {
            value(Entity::Positive(i))
        } else {
            m.max(0.0)
        };
        magnitudes.insert(a.id.clone(), m);
        positive_parts.insert(a.id.clone(), p);
        mags.push(m);
    }
    let boilers: Vec<f64> = (0..instance.boilers.len())
        .map(|j| value(Entity::Boiler(j)).max(0.0))
        .collect();
    let boiler_powers = instance
        .boilers
        .iter()
        .zip(&boilers)
        .map(|(b, &v)| (b.id.clone(), v))
        .collect();
    let pressures: IndexMap<String, f64> = instance
        .pressure_names
        .iter()
        .enumerate()
        .map(|(k, n)| (n.clone(), value(Entity::Pressure(k))))
        .collect();
    let receptors: IndexMap<String, f64> = instance
        .receptor_names
        .iter()
        .enumerate()
        .map(|(k, n)| (n.clone(), value(Entity::Receptor(k))))
        .collect();
    let emissions: IndexMap<String, f64> = instance
        .emission_names
        .iter()
        .enumerate()
        .map(|(k, n)| (n.clone(), value(Entity::Emission(k)).max(0.0)))
        .collect();

    let recomputed = assess_vectors(instance, &mags, &boilers)?;
    cross_check("pressure", &pressures, &recomputed.pressures)?;
    cross_check("receptor", &receptors, &recomputed.receptors)?;
    cross_check("emission", &emissions, &recomputed.emissions)?;
    for (k, table) in instance.indicator_tables.iter().enumerate() {
        let m = value(Entity::Indicator(k));
        let r = recomputed.indicators[&table.name].worst;
        if !close(m, r) {
            return Err(ModelError::CrossCheck {
                quantity: format!("indicator:{}", table.name),
                model: m,
                recomputed: r,
            });
        }
    }

    let total_cost = instance
        .activities
        .iter()
        .map(|a| a.unit_cost * positive_parts[&a.id])
        .sum();
    let total_outcome = instance
        .activities
        .iter()
        .map(|a| a.unit_outcome * magnitudes[&a.id])
        .sum();

    let mut scenario = Scenario {
        magnitudes,
        positive_parts,
        pressures,
        receptors,
        boiler_powers,
        emissions,
        indicators: recomputed.indicators,
        total_cost,
        total_outcome,
        objective_values: IndexMap::new(),
        kind,
    };
    for obj in objectives {
        let v = scenario
            .evaluate(&obj.terms)
            .ok_or_else(|| ModelError::UnknownQuantity(obj.label.clone()))?;
        scenario.objective_values.insert(obj.label.clone(), v);
    }
    Ok(scenario)
}

/// Builds, solves and extracts a single-objective scenario.
pub fn solve_scenario(
    instance: &PlanInstance,
    objective: &ObjectiveSpec,
    extra: &[UserConstraint],
) -> Result<Scenario, ModelError> {
    let (lp, vars) = build_lp(instance, objective, extra)?;
    let solution = solve(&lp)?;
    extract_scenario(
        instance,
        &solution,
        &vars,
        std::slice::from_ref(objective),
        ScenarioKind::Boundary,
    )
}
