//! Pareto fronts by the normalized normal constraint method.
//!
//! 1. Anchors: each objective is minimized on its own (maximization is
//!    negated), then the remaining objectives are minimized with the first
//!    held at its optimum so that anchors are non-dominated.
//! 2. Normalization: the utopia point and the column maxima of the anchor
//!    matrix map every objective onto [0, 1].
//! 3. Reference points: convex combinations of the normalized anchors, spread
//!    evenly over the utopia hyperplane.
//! 4. Subproblems: at each reference point minimize the last normalized
//!    objective under the normal constraints `D_k . (F - X_p) <= 0`, with
//!    `D_k` running from anchor k to the last anchor.
//! 5. Filtering: anchors and subproblem optima are merged, dominated points
//!    and duplicates removed, and the result ordered by the first objective.

use std::cmp::Ordering;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{solve, LinearExpr, LinearProgram, Relation, Sense, SolveStatus};
use crate::model::{
    build_base, extract_scenario, terms_expr, ModelError, ObjectiveSpec, PlanInstance, Scenario, ScenarioKind,
    UserConstraint, VariableMap,
};

/// Absolute floor of the scale-aware tolerance used for dominance and equality.
pub const DOMINANCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoRequest {
    pub objectives: Vec<ObjectiveSpec>,
    pub points: usize,
    #[serde(default)]
    pub extra: Vec<UserConstraint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoFront {
    pub objectives: Vec<ObjectiveSpec>,
    pub scenarios: Vec<Scenario>,
    /// Best value of each objective, in the objective's own sense.
    pub utopia: Vec<f64>,
    /// Worst value of each objective over the anchors.
    pub nadir_estimate: Vec<f64>,
    /// Subproblems that failed or whose optimum was dominated.
    pub dropped: usize,
    /// Labels of objectives that took the same value at every anchor.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constant_objectives: Vec<String>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParetoError {
    #[error("at least 2 objectives are required, found {0}")]
    TooFewObjectives(usize),
    #[error("points must be at least 2, found {0}")]
    TooFewPoints(usize),
    #[error("duplicate objective label {0:?}")]
    DuplicateLabel(String),
    #[error("{}", match .constraint {
        Some(c) => format!("model is infeasible once constraint {c:?} is added"),
        None => "model is infeasible".to_string(),
    })]
    Infeasible { constraint: Option<String> },
    #[error("objective {0:?} is unbounded")]
    Unbounded(String),
    #[error("scenario has no value for objective {0:?}")]
    MissingObjective(String),
    #[error("deadline exceeded")]
    Timeout,
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl ParetoRequest {
    pub fn check(&self, instance: &PlanInstance) -> Result<(), ParetoError> {
        if self.objectives.len() < 2 {
            return Err(ParetoError::TooFewObjectives(self.objectives.len()));
        }
        if self.points < 2 {
            return Err(ParetoError::TooFewPoints(self.points));
        }
        for (k, o) in self.objectives.iter().enumerate() {
            if self.objectives[..k].iter().any(|p| p.label == o.label) {
                return Err(ParetoError::DuplicateLabel(o.label.clone()));
            }
            o.check(instance)?;
        }
        for c in &self.extra {
            c.check(instance)?;
        }
        Ok(())
    }
}

fn scale_tol(a: f64, b: f64) -> f64 {
    DOMINANCE_TOL * 1f64.max(a.abs()).max(b.abs())
}

/// `a` dominates `b` in the minimization sense.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (&x, &y) in a.iter().zip(b) {
        let t = scale_tol(x, y);
        if x > y + t {
            return false;
        }
        if x < y - t {
            strict = true;
        }
    }
    strict
}

pub fn equivalent(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(&x, &y)| (x - y).abs() <= scale_tol(x, y))
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or_else(|| a.len().cmp(&b.len()))
}

/// Result of filtering: survivor indices and, for each survivor, every input
/// index it stands for.
struct Filtered {
    groups: Vec<Vec<usize>>,
    dominated: Vec<usize>,
}

/// Non-dominated filter over minimization vectors. Duplicates collapse onto
/// the member with the smallest tie key.
fn filter_indices(values: &[Vec<f64>], tie: &[Vec<f64>]) -> Filtered {
    let mut survivors = Vec::new();
    let mut dominated = Vec::new();
    for i in 0..values.len() {
        if (0..values.len()).any(|j| j != i && dominates(&values[j], &values[i])) {
            dominated.push(i);
        } else {
            survivors.push(i);
        }
    }
    survivors.sort_by(|&a, &b| lexicographic(&tie[a], &tie[b]).then(a.cmp(&b)));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in survivors {
        match groups.iter_mut().find(|g| equivalent(&values[g[0]], &values[i])) {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }
    Filtered { groups, dominated }
}

fn canonical_values(scenario: &Scenario, objectives: &[ObjectiveSpec]) -> Result<Vec<f64>, ParetoError> {
    objectives
        .iter()
        .map(|o| {
            scenario
                .objective_values
                .get(&o.label)
                .map(|&v| o.canonical(v))
                .ok_or_else(|| ParetoError::MissingObjective(o.label.clone()))
        })
        .collect()
}

fn magnitude_key(s: &Scenario) -> Vec<f64> {
    s.magnitudes.values().copied().collect()
}

/// Keeps the scenarios not strictly dominated by another; duplicates collapse
/// to the one with the lexicographically smallest magnitude vector. Input
/// order is preserved among survivors.
pub fn pareto_filter(scenarios: &[Scenario], objectives: &[ObjectiveSpec]) -> Result<Vec<Scenario>, ParetoError> {
    let values = scenarios
        .iter()
        .map(|s| canonical_values(s, objectives))
        .collect::<Result<Vec<_>, _>>()?;
    let tie: Vec<Vec<f64>> = scenarios.iter().map(magnitude_key).collect();
    let mut keep: Vec<usize> = filter_indices(&values, &tie).groups.iter().map(|g| g[0]).collect();
    keep.sort_unstable();
    Ok(keep.into_iter().map(|i| scenarios[i].clone()).collect())
}

/// Utopia point and normalization denominators from the anchor matrix
/// (`anchor_values[k][j]` is objective j at anchor k, minimization sense).
/// A degenerate denominator is replaced by 1 and flagged.
pub fn normalize(anchor_values: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>, Vec<bool>) {
    let n = anchor_values.len();
    let mut utopia = Vec::with_capacity(n);
    let mut denominators = Vec::with_capacity(n);
    let mut constant = Vec::with_capacity(n);
    for j in 0..n {
        let u = anchor_values[j][j];
        let worst = anchor_values.iter().map(|row| row[j]).fold(f64::NEG_INFINITY, f64::max);
        let d = worst - u;
        utopia.push(u);
        if d <= scale_tol(u, worst) {
            denominators.push(1.0);
            constant.push(true);
        } else {
            denominators.push(d);
            constant.push(false);
        }
    }
    (utopia, denominators, constant)
}

fn lattice(n: usize, resolution: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
    let used: usize = prefix.iter().sum();
    if prefix.len() == n - 1 {
        prefix.push(resolution - used);
        out.push(prefix.iter().map(|&c| c as f64 / resolution as f64).collect());
        prefix.pop();
        return;
    }
    for c in (0..=resolution - used).rev() {
        prefix.push(c);
        lattice(n, resolution, prefix, out);
        prefix.pop();
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Evenly spread convex weights over `n` anchors. For two objectives this is
/// exactly `points` vectors; otherwise the smallest simplex lattice with at
/// least `points` members, first components descending.
pub fn reference_points(n: usize, points: usize) -> Vec<Vec<f64>> {
    let points = points.max(2);
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![vec![1.0]];
    }
    if n == 2 {
        let last = (points - 1) as f64;
        return (0..points)
            .map(|k| vec![(points - 1 - k) as f64 / last, k as f64 / last])
            .collect();
    }
    let mut resolution = 1;
    while binomial(resolution + n - 1, n - 1) < points {
        resolution += 1;
    }
    let mut out = Vec::new();
    lattice(n, resolution, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Objective in minimization sense, scaled.
fn canonical_expr(
    instance: &PlanInstance,
    vars: &VariableMap,
    objective: &ObjectiveSpec,
    scale: f64,
) -> Result<LinearExpr, ModelError> {
    let sign = match objective.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let weighted: Vec<_> = objective.terms.iter().map(|(k, &w)| (k.clone(), w * sign * scale)).collect();
    terms_expr(instance, vars, weighted.iter().map(|(k, w)| (k, w)))
}

fn combine(parts: impl IntoIterator<Item = LinearExpr>) -> LinearExpr {
    let mut e = LinearExpr::new();
    for p in parts {
        for (name, coef) in p.terms {
            e.add(name, coef);
        }
    }
    crate::model::merge_terms(e)
}

struct Context<'a> {
    instance: &'a PlanInstance,
    request: &'a ParetoRequest,
    base: LinearProgram,
    vars: VariableMap,
}

enum Outcome {
    Optimal(Scenario),
    Infeasible,
    Unbounded,
}

impl Context<'_> {
    fn run(&self, lp: &LinearProgram, kind: ScenarioKind) -> Result<Outcome, ModelError> {
        let sol = solve(lp)?;
        match sol.status {
            SolveStatus::Optimal => Ok(Outcome::Optimal(extract_scenario(
                self.instance,
                &sol,
                &self.vars,
                &self.request.objectives,
                kind,
            )?)),
            SolveStatus::Infeasible => Ok(Outcome::Infeasible),
            SolveStatus::Unbounded => Ok(Outcome::Unbounded),
        }
    }

    fn with_objective(&self, expr: LinearExpr) -> LinearProgram {
        let mut lp = self.base.clone();
        lp.objective.expr = expr;
        lp.objective.sense = Sense::Minimize;
        lp
    }

    /// Minimizes objective k, then the sum of the others with k held at its
    /// optimum.
    fn anchor(&self, k: usize) -> Result<Scenario, ParetoError> {
        let objectives = &self.request.objectives;
        let fk = canonical_expr(self.instance, &self.vars, &objectives[k], 1.0)?;
        let first = match self.run(&self.with_objective(fk.clone()), ScenarioKind::Boundary)? {
            Outcome::Optimal(s) => s,
            Outcome::Infeasible => return Err(self.diagnose_infeasible()),
            Outcome::Unbounded => return Err(ParetoError::Unbounded(objectives[k].label.clone())),
        };
        let best = objectives[k].canonical(first.objective_values[&objectives[k].label]);
        let others = objectives
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, o)| canonical_expr(self.instance, &self.vars, o, 1.0))
            .collect::<Result<Vec<_>, _>>()?;
        let mut lp = self.with_objective(combine(others));
        lp.add_constraint("anchor", fk, Relation::Le, best + 1e-9 * (1.0 + best.abs()));
        match self.run(&lp, ScenarioKind::Boundary) {
            Ok(Outcome::Optimal(s)) => Ok(s),
            _ => Ok(first),
        }
    }

    /// Names the first extra constraint that makes the model infeasible.
    fn diagnose_infeasible(&self) -> ParetoError {
        let feasible = |extra: &[UserConstraint]| -> bool {
            build_base(self.instance, extra)
                .ok()
                .and_then(|(lp, _)| solve(&lp).ok())
                .is_some_and(|s| s.status != SolveStatus::Infeasible)
        };
        let extra = &self.request.extra;
        if extra.is_empty() || !feasible(&[]) {
            return ParetoError::Infeasible { constraint: None };
        }
        let culprit = (1..=extra.len())
            .find(|&k| !feasible(&extra[..k]))
            .map(|k| format!("user[{}]: {}", k - 1, extra[k - 1]));
        ParetoError::Infeasible { constraint: culprit }
    }
}

/// Single-objective optimum of every requested objective.
pub fn compute_anchors(instance: &PlanInstance, request: &ParetoRequest) -> Result<Vec<Scenario>, ParetoError> {
    request.check(instance)?;
    let ctx = context(instance, request)?;
    (0..request.objectives.len()).map(|k| ctx.anchor(k)).collect()
}

fn context<'a>(instance: &'a PlanInstance, request: &'a ParetoRequest) -> Result<Context<'a>, ParetoError> {
    let (base, vars) = build_base(instance, &request.extra)?;
    Ok(Context {
        instance,
        request,
        base,
        vars,
    })
}

pub fn nnc_front(instance: &PlanInstance, request: &ParetoRequest) -> Result<ParetoFront, ParetoError> {
    nnc_front_until(instance, request, None)
}

/// As [`nnc_front`], giving up with [`ParetoError::Timeout`] once `deadline`
/// has passed. The deadline is checked between solves.
pub fn nnc_front_until(
    instance: &PlanInstance,
    request: &ParetoRequest,
    deadline: Option<Instant>,
) -> Result<ParetoFront, ParetoError> {
    request.check(instance)?;
    let expired = || deadline.is_some_and(|d| Instant::now() >= d);
    let ctx = context(instance, request)?;
    let objectives = &request.objectives;
    let n = objectives.len();

    let anchors = (0..n)
        .into_par_iter()
        .map(|k| if expired() { Err(ParetoError::Timeout) } else { ctx.anchor(k) })
        .collect::<Result<Vec<_>, _>>()?;
    let anchor_values = anchors
        .iter()
        .map(|s| canonical_values(s, objectives))
        .collect::<Result<Vec<_>, _>>()?;
    let (utopia, denominators, constant) = normalize(&anchor_values);
    let active: Vec<usize> = (0..n).filter(|&j| !constant[j]).collect();

    let mut candidates: Vec<Scenario> = anchors.clone();
    let mut failed = 0;
    if active.len() >= 2 {
        let m = active.len();
        // Normalized anchors restricted to the active objectives.
        let v: Vec<Vec<f64>> = active
            .iter()
            .map(|&k| {
                active
                    .iter()
                    .map(|&j| (anchor_values[k][j] - utopia[j]) / denominators[j])
                    .collect()
            })
            .collect();
        let normalized_exprs = active
            .iter()
            .map(|&j| canonical_expr(instance, &ctx.vars, &objectives[j], 1.0 / denominators[j]))
            .collect::<Result<Vec<_>, _>>()?;
        let target = canonical_expr(instance, &ctx.vars, &objectives[active[m - 1]], 1.0)?;
        let weights = reference_points(m, request.points);

        let results: Vec<Result<Option<Scenario>, ParetoError>> = weights
            .par_iter()
            .map(|w| {
                if expired() {
                    return Err(ParetoError::Timeout);
                }
                let x: Vec<f64> = (0..m).map(|j| (0..m).map(|k| w[k] * v[k][j]).sum()).collect();
                let mut lp = ctx.with_objective(target.clone());
                for k in 0..m - 1 {
                    let d: Vec<f64> = (0..m).map(|j| v[m - 1][j] - v[k][j]).collect();
                    let parts = (0..m).map(|j| {
                        let mut e = normalized_exprs[j].clone();
                        e.terms.iter_mut().for_each(|t| t.1 *= d[j]);
                        e
                    });
                    // D_k . F_bar = sum_j d_j (f_j - u_j) / den_j
                    let offset: f64 = (0..m).map(|j| d[j] * utopia[active[j]] / denominators[active[j]]).sum();
                    let rhs: f64 = (0..m).map(|j| d[j] * x[j]).sum::<f64>() + offset;
                    lp.add_constraint(format!("normal[{k}]"), combine(parts), Relation::Le, rhs);
                }
                Ok(match ctx.run(&lp, ScenarioKind::Intermediate) {
                    Ok(Outcome::Optimal(s)) => Some(s),
                    _ => None,
                })
            })
            .collect();
        for r in results {
            match r? {
                Some(s) => candidates.push(s),
                None => failed += 1,
            }
        }
    }

    let values = candidates
        .iter()
        .map(|s| canonical_values(s, objectives))
        .collect::<Result<Vec<_>, _>>()?;
    let compared: Vec<Vec<f64>> = values
        .iter()
        .map(|row| active.iter().map(|&j| row[j]).collect())
        .collect();
    let tie: Vec<Vec<f64>> = candidates.iter().map(magnitude_key).collect();
    let filtered = filter_indices(&compared, &tie);
    let dominated_subproblems = filtered.dominated.iter().filter(|&&i| i >= n).count();

    let mut scenarios: Vec<(Vec<f64>, Scenario)> = filtered
        .groups
        .iter()
        .map(|g| {
            let mut s = candidates[g[0]].clone();
            s.kind = if g.iter().any(|&i| i < n) {
                ScenarioKind::Boundary
            } else {
                ScenarioKind::Intermediate
            };
            (values[g[0]].clone(), s)
        })
        .collect();
    scenarios.sort_by(|(a, sa), (b, sb)| {
        a[0].total_cmp(&b[0])
            .then_with(|| lexicographic(&magnitude_key(sa), &magnitude_key(sb)))
    });

    let back = |j: usize, v: f64| objectives[j].canonical(v);
    Ok(ParetoFront {
        objectives: objectives.clone(),
        scenarios: scenarios.into_iter().map(|(_, s)| s).collect(),
        utopia: (0..n).map(|j| back(j, utopia[j])).collect(),
        nadir_estimate: (0..n)
            .map(|j| back(j, anchor_values.iter().map(|r| r[j]).fold(f64::NEG_INFINITY, f64::max)))
            .collect(),
        dropped: failed + dominated_subproblems,
        constant_objectives: (0..n).filter(|&j| constant[j]).map(|j| objectives[j].label.clone()).collect(),
    })
}
