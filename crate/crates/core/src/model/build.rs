use std::collections::HashMap;

use indexmap::IndexMap;

use super::instance::PlanInstance;
use super::quantity::{ObjectiveSpec, QuantityKey, UserConstraint};
use super::ModelError;
use crate::assessment::{fuel_gj_per_mw, GRAMS_PER_KG};
use crate::lp::{LinearExpr, LinearProgram, Relation, Sense, Variable};

/// Model entity behind one LP variable. Indices refer to instance order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Entity {
    Magnitude(usize),
    Positive(usize),
    Negative(usize),
    /// Complementarity binary: 1 allows growth, 0 allows reduction.
    Switch(usize),
    Boiler(usize),
    Pressure(usize),
    Receptor(usize),
    Emission(usize),
    Indicator(usize),
}

/// Bidirectional map between model entities and LP variable indices.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VariableMap {
    entities: Vec<Entity>,
    names: Vec<String>,
    index: HashMap<Entity, usize>,
}

impl VariableMap {
    fn push(&mut self, lp: &mut LinearProgram, entity: Entity, var: Variable) {
        let idx = lp.add_variable(var);
        self.names.push(lp.variables[idx].name.clone());
        self.entities.push(entity);
        self.index.insert(entity, idx);
    }

    pub fn index_of(&self, entity: Entity) -> Option<usize> {
        self.index.get(&entity).copied()
    }

    pub fn entity_of(&self, var: usize) -> Option<Entity> {
        self.entities.get(var).copied()
    }

    /// LP variable name of an entity. Panics if the entity was not generated.
    pub fn name(&self, entity: Entity) -> &str {
        &self.names[self.index[&entity]]
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    pub fn is_split(&self, activity: usize) -> bool {
        self.index.contains_key(&Entity::Positive(activity))
    }

    /// The variable carrying the positive part of an activity.
    pub fn positive_part(&self, activity: usize) -> &str {
        if self.is_split(activity) {
            self.name(Entity::Positive(activity))
        } else {
            self.name(Entity::Magnitude(activity))
        }
    }
}

/// Sums coefficients of repeated variables and drops zeros.
pub(crate) fn merge(expr: LinearExpr) -> LinearExpr {
    let mut acc: IndexMap<String, f64> = IndexMap::new();
    for (name, coef) in expr.terms {
        *acc.entry(name).or_insert(0.0) += coef;
    }
    LinearExpr {
        terms: acc.into_iter().filter(|(_, c)| *c != 0.0).collect(),
    }
}

/// Linear form of a quantity over the LP variables.
pub fn quantity_expr(instance: &PlanInstance, vars: &VariableMap, key: &QuantityKey) -> Result<LinearExpr, ModelError> {
    key.resolve(instance)?;
    let mut e = LinearExpr::new();
    match key {
        QuantityKey::TotalCost => {
            for (i, a) in instance.activities.iter().enumerate() {
                e.add(vars.positive_part(i), a.unit_cost);
            }
        }
        QuantityKey::TotalOutcome => {
            for (i, a) in instance.activities.iter().enumerate() {
                e.add(vars.name(Entity::Magnitude(i)), a.unit_outcome);
            }
        }
        QuantityKey::Activity(id) => {
            let i = instance.activity_index(id).expect("resolved");
            e.add(vars.name(Entity::Magnitude(i)), 1.0);
        }
        QuantityKey::Receptor(n) => {
            let r = instance.receptor_names.iter().position(|x| x == n).expect("resolved");
            e.add(vars.name(Entity::Receptor(r)), 1.0);
        }
        QuantityKey::Emission(n) => {
            let k = instance.emission_names.iter().position(|x| x == n).expect("resolved");
            e.add(vars.name(Entity::Emission(k)), 1.0);
        }
        QuantityKey::Indicator(n) => {
            let k = instance.indicator_tables.iter().position(|t| &t.name == n).expect("resolved");
            e.add(vars.name(Entity::Indicator(k)), 1.0);
        }
    }
    Ok(e)
}

/// Weighted sum of quantities.
pub fn terms_expr<'a>(
    instance: &PlanInstance,
    vars: &VariableMap,
    terms: impl IntoIterator<Item = (&'a QuantityKey, &'a f64)>,
) -> Result<LinearExpr, ModelError> {
    let mut e = LinearExpr::new();
    for (key, weight) in terms {
        for (name, coef) in quantity_expr(instance, vars, key)?.terms {
            e.add(name, weight * coef);
        }
    }
    Ok(merge(e))
}

/// Builds every instance constraint plus the user's extra constraints; the
/// objective is left empty.
pub fn build_base(instance: &PlanInstance, extra: &[UserConstraint]) -> Result<(LinearProgram, VariableMap), ModelError> {
    let errors = instance.errors();
    if !errors.is_empty() {
        return Err(ModelError::InvalidInstance(errors));
    }
    for c in extra {
        c.check(instance)?;
    }

    let mut lp = LinearProgram::new(Sense::Minimize);
    let mut vars = VariableMap::default();

    for (i, a) in instance.activities.iter().enumerate() {
        vars.push(&mut lp, Entity::Magnitude(i), Variable::continuous(format!("ope[{}]", a.id), a.lower, a.upper));
        if a.is_decommissionable() {
            vars.push(&mut lp, Entity::Positive(i), Variable::continuous(format!("pos[{}]", a.id), 0.0, a.upper.max(0.0)));
            vars.push(&mut lp, Entity::Negative(i), Variable::continuous(format!("neg[{}]", a.id), 0.0, -a.lower));
            vars.push(&mut lp, Entity::Switch(i), Variable::binary(format!("dec[{}]", a.id)));
        }
    }
    for (j, b) in instance.boilers.iter().enumerate() {
        vars.push(&mut lp, Entity::Boiler(j), Variable::continuous(format!("boiler[{}]", b.id), 0.0, f64::INFINITY));
    }
    for (p, name) in instance.pressure_names.iter().enumerate() {
        vars.push(&mut lp, Entity::Pressure(p), Variable::free(format!("pressure[{name}]")));
    }
    for (r, name) in instance.receptor_names.iter().enumerate() {
        vars.push(&mut lp, Entity::Receptor(r), Variable::free(format!("receptor[{name}]")));
    }
    for (k, name) in instance.emission_names.iter().enumerate() {
        vars.push(&mut lp, Entity::Emission(k), Variable::free(format!("emission[{name}]")));
    }
    for (k, t) in instance.indicator_tables.iter().enumerate() {
        vars.push(&mut lp, Entity::Indicator(k), Variable::free(format!("indicator[{}]", t.name)));
    }

    // Positive/negative decomposition with explicit-bound complementarity.
    for (i, a) in instance.activities.iter().enumerate() {
        if !vars.is_split(i) {
            continue;
        }
        let (ope, pos, neg, dec) = (
            vars.name(Entity::Magnitude(i)).to_string(),
            vars.name(Entity::Positive(i)).to_string(),
            vars.name(Entity::Negative(i)).to_string(),
            vars.name(Entity::Switch(i)).to_string(),
        );
        let grow = a.upper.max(0.0);
        let shrink = -a.lower;
        lp.add_constraint(
            format!("split[{}]", a.id),
            LinearExpr::new().with(&ope, 1.0).with(&pos, -1.0).with(&neg, 1.0),
            Relation::Eq,
            0.0,
        );
        lp.add_constraint(
            format!("grow[{}]", a.id),
            LinearExpr::new().with(&pos, 1.0).with(&dec, -grow),
            Relation::Le,
            0.0,
        );
        lp.add_constraint(
            format!("shrink[{}]", a.id),
            LinearExpr::new().with(&neg, 1.0).with(&dec, shrink),
            Relation::Le,
            shrink,
        );
    }

    // Secondary activities induced by growth and by reduction of primaries.
    let primaries: Vec<usize> = instance.primaries().map(|(i, _)| i).collect();
    for (s, (j, sec)) in instance.secondaries().enumerate() {
        let mut e = LinearExpr::new().with(vars.name(Entity::Magnitude(j)), 1.0);
        for (p, &i) in primaries.iter().enumerate() {
            e.add(vars.positive_part(i), -instance.dep_plus.get(p, s));
            if vars.is_split(i) {
                e.add(vars.name(Entity::Negative(i)), -instance.dep_minus.get(p, s));
            }
        }
        lp.add_constraint(format!("secondary[{}]", sec.id), e, Relation::Eq, 0.0);
    }

    lp.add_constraint(
        "budget",
        merge(quantity_expr(instance, &vars, &QuantityKey::TotalCost)?),
        Relation::Le,
        instance.budget,
    );
    lp.add_constraint(
        "outcome",
        merge(quantity_expr(instance, &vars, &QuantityKey::TotalOutcome)?),
        Relation::Ge,
        instance.min_outcome,
    );

    // Operating capacity of a plant type is the sum of its boilers' powers.
    for (i, a) in instance.activities.iter().enumerate() {
        if instance.boilers.is_empty() || !instance.has_boilers(i) {
            continue;
        }
        let mut e = LinearExpr::new().with(vars.positive_part(i), 1.0);
        for j in 0..instance.boilers.len() {
            e.add(vars.name(Entity::Boiler(j)), -instance.moc.get(i, j));
        }
        lp.add_constraint(format!("boilers[{}]", a.id), e, Relation::Eq, 0.0);
    }

    for (p, name) in instance.pressure_names.iter().enumerate() {
        let mut e = LinearExpr::new().with(vars.name(Entity::Pressure(p)), 1.0);
        for i in 0..instance.activities.len() {
            e.add(vars.positive_part(i), -instance.mop.get(i, p));
        }
        lp.add_constraint(format!("pressure[{name}]"), merge(e), Relation::Eq, 0.0);
    }
    for (r, name) in instance.receptor_names.iter().enumerate() {
        let mut e = LinearExpr::new().with(vars.name(Entity::Receptor(r)), 1.0);
        for p in 0..instance.pressure_names.len() {
            e.add(vars.name(Entity::Pressure(p)), -instance.mpr.get(p, r));
        }
        lp.add_constraint(format!("receptor[{name}]"), e, Relation::Eq, 0.0);
    }
    let fuel = fuel_gj_per_mw(instance);
    for (k, name) in instance.emission_names.iter().enumerate() {
        let mut e = LinearExpr::new().with(vars.name(Entity::Emission(k)), 1.0);
        for j in 0..instance.boilers.len() {
            e.add(vars.name(Entity::Boiler(j)), -instance.mec.get(k, j) * fuel);
        }
        lp.add_constraint(format!("emission[{name}]"), e, Relation::Eq, 0.0);
    }
    // Indicators enter the model through their worst-case factors.
    for (k, table) in instance.indicator_tables.iter().enumerate() {
        let mut e = LinearExpr::new().with(vars.name(Entity::Indicator(k)), 1.0);
        for (m, name) in instance.emission_names.iter().enumerate() {
            if let Some(f) = table.factors.get(name) {
                e.add(vars.name(Entity::Emission(m)), -f.worst / GRAMS_PER_KG);
            }
        }
        lp.add_constraint(format!("indicator[{}]", table.name), e, Relation::Eq, 0.0);
    }

    for (n, c) in extra.iter().enumerate() {
        let e = terms_expr(instance, &vars, &c.terms)?;
        lp.add_constraint(format!("user[{n}]: {c}"), e, c.relation, c.rhs);
    }
    Ok((lp, vars))
}

/// Installs `objective` on a base program.
pub fn set_objective(
    instance: &PlanInstance,
    lp: &mut LinearProgram,
    vars: &VariableMap,
    objective: &ObjectiveSpec,
) -> Result<(), ModelError> {
    objective.check(instance)?;
    lp.objective.expr = terms_expr(instance, vars, &objective.terms)?;
    lp.objective.sense = objective.sense;
    Ok(())
}

/// Translates an instance, an objective and extra constraints into an LP.
pub fn build_lp(
    instance: &PlanInstance,
    objective: &ObjectiveSpec,
    extra: &[UserConstraint],
) -> Result<(LinearProgram, VariableMap), ModelError> {
    objective.check(instance)?;
    let (mut lp, vars) = build_base(instance, extra)?;
    set_objective(instance, &mut lp, &vars, objective)?;
    Ok((lp, vars))
}
