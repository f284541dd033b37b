//! Exact solver for small linear programs with optional binary variables.
//!
//! The solver is a dense bounded-variable primal simplex (two phases, Bland's
//! rule) wrapped in a depth-first branch-and-bound over the binaries. It is
//! meant for desk-scale models of a few hundred variables.

mod branch;
mod simplex;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use simplex::SimplexStats;

/// Primal feasibility tolerance, relative to the magnitude of the row.
pub const FEASIBILITY_TOL: f64 = 1e-7;
/// Reduced-cost tolerance used to decide optimality.
pub const OPTIMALITY_TOL: f64 = 1e-9;
/// A binary whose value is this close to 0 or 1 counts as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub binary: bool,
}

impl Variable {
    pub fn continuous(name: impl Into<String>, lower: f64, upper: f64) -> Self {
        Self {
            name: name.into(),
            lower,
            upper,
            binary: false,
        }
    }

    pub fn free(name: impl Into<String>) -> Self {
        Self::continuous(name, f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn binary(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            lower: 0.0,
            upper: 1.0,
            binary: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Sparse linear form over variable names. Terms keep insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearExpr {
    pub terms: Vec<(String, f64)>,
}

impl LinearExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, var: impl Into<String>, coef: f64) -> &mut Self {
        if coef != 0.0 {
            self.terms.push((var.into(), coef));
        }
        self
    }

    pub fn with(mut self, var: impl Into<String>, coef: f64) -> Self {
        self.add(var, coef);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    /// Diagnostic label; not required to be unique.
    pub name: String,
    pub expr: LinearExpr,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub expr: LinearExpr,
    pub sense: Sense,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub objective: Objective,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
        }
    }
}

/// Result of [`solve`]. `values` is aligned with `LinearProgram::variables`
/// and is empty unless the status is optimal.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: SolveStatus,
    pub values: Vec<f64>,
    pub objective_value: Option<f64>,
}

impl Solution {
    pub fn infeasible() -> Self {
        Self {
            status: SolveStatus::Infeasible,
            values: Vec::new(),
            objective_value: None,
        }
    }

    pub fn unbounded() -> Self {
        Self {
            status: SolveStatus::Unbounded,
            values: Vec::new(),
            objective_value: None,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("invalid linear program: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("simplex iteration limit of {0} exceeded")]
    IterationLimit(usize),
    #[error("branch-and-bound node limit of {0} exceeded")]
    NodeLimit(usize),
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        Self {
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: Objective {
                expr: LinearExpr::new(),
                sense,
            },
        }
    }

    /// Appends a variable and returns its index.
    pub fn add_variable(&mut self, var: Variable) -> usize {
        self.variables.push(var);
        self.variables.len() - 1
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        expr: LinearExpr,
        relation: Relation,
        rhs: f64,
    ) {
        self.constraints.push(Constraint {
            name: name.into(),
            expr,
            relation,
            rhs,
        });
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// Evaluates a linear form at a point aligned with `variables`.
    pub fn evaluate(&self, expr: &LinearExpr, values: &[f64]) -> Option<f64> {
        let mut total = 0.0;
        for (name, coef) in &expr.terms {
            total += coef * values[self.variable_index(name)?];
        }
        Some(total)
    }

    /// Checks the structural invariants; an empty list means well-formed.
    pub fn validate(&self) -> Vec<String> {
        let mut violations = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for v in &self.variables {
            if !seen.insert(v.name.as_str()) {
                violations.push(format!("variable {} is declared more than once", v.name));
            }
            if v.lower.is_nan() || v.upper.is_nan() {
                violations.push(format!("variable {} has a NaN bound", v.name));
            } else if v.lower > v.upper {
                violations.push(format!(
                    "variable {} has lower bound {} above upper bound {}",
                    v.name, v.lower, v.upper
                ));
            }
            if v.binary && (v.lower < 0.0 || v.upper > 1.0) {
                violations.push(format!(
                    "binary variable {} has bounds [{}, {}] outside [0, 1]",
                    v.name, v.lower, v.upper
                ));
            }
        }
        for (idx, c) in self.constraints.iter().enumerate() {
            for (name, coef) in &c.expr.terms {
                if !seen.contains(name.as_str()) {
                    violations.push(format!(
                        "constraint {idx} references unknown variable {name}"
                    ));
                }
                if !coef.is_finite() {
                    violations.push(format!(
                        "constraint {idx} has a non-finite coefficient on {name}"
                    ));
                }
            }
            if !c.rhs.is_finite() {
                violations.push(format!("constraint {idx} has a non-finite right-hand side"));
            }
        }
        for (name, coef) in &self.objective.expr.terms {
            if !seen.contains(name.as_str()) {
                violations.push(format!("objective references unknown variable {name}"));
            }
            if !coef.is_finite() {
                violations.push(format!("objective has a non-finite coefficient on {name}"));
            }
        }
        violations
    }

    /// Checks a candidate point against bounds, constraints and integrality.
    /// Residuals are measured relative to the magnitude of the terms involved.
    pub fn check_point(&self, values: &[f64]) -> Vec<String> {
        let mut problems = Vec::new();
        for (v, &x) in self.variables.iter().zip(values) {
            let tol = FEASIBILITY_TOL * (1.0 + x.abs());
            if x < v.lower - tol || x > v.upper + tol {
                problems.push(format!(
                    "{} = {x} outside [{}, {}]",
                    v.name, v.lower, v.upper
                ));
            }
            if v.binary && x.min(1.0 - x).abs() > FEASIBILITY_TOL {
                problems.push(format!("binary {} = {x} is fractional", v.name));
            }
        }
        for c in &self.constraints {
            let mut lhs = 0.0;
            let mut scale = c.rhs.abs();
            for (name, coef) in &c.expr.terms {
                if let Some(j) = self.variable_index(name) {
                    lhs += coef * values[j];
                    scale += (coef * values[j]).abs();
                }
            }
            let tol = FEASIBILITY_TOL * (1.0 + scale);
            let ok = match c.relation {
                Relation::Le => lhs <= c.rhs + tol,
                Relation::Ge => lhs >= c.rhs - tol,
                Relation::Eq => (lhs - c.rhs).abs() <= tol,
            };
            if !ok {
                problems.push(format!(
                    "constraint {} violated: {lhs} {} {}",
                    c.name, c.relation, c.rhs
                ));
            }
        }
        problems
    }

    pub fn binary_count(&self) -> usize {
        self.variables.iter().filter(|v| v.binary).count()
    }
}

/// Solves the program to proven optimality.
pub fn solve(lp: &LinearProgram) -> Result<Solution, SolveError> {
    let violations = lp.validate();
    if !violations.is_empty() {
        return Err(SolveError::Invalid(violations));
    }
    branch::solve_milp(lp)
}

/// Solves the continuous relaxation only, ignoring integrality.
pub fn solve_relaxation(lp: &LinearProgram) -> Result<Solution, SolveError> {
    let violations = lp.validate();
    if !violations.is_empty() {
        return Err(SolveError::Invalid(violations));
    }
    let bounds: Vec<(f64, f64)> = lp.variables.iter().map(|v| (v.lower, v.upper)).collect();
    simplex::solve_lp(lp, &bounds).map(|(sol, _)| sol)
}

fn write_expr(f: &mut fmt::Formatter<'_>, expr: &LinearExpr) -> fmt::Result {
    if expr.terms.is_empty() {
        return f.write_str("0");
    }
    for (k, (name, coef)) in expr.terms.iter().enumerate() {
        let (sign, mag) = if *coef < 0.0 { ("-", -coef) } else { ("+", *coef) };
        if k == 0 {
            if sign == "-" {
                f.write_str("-")?;
            }
        } else {
            write!(f, " {sign} ")?;
        }
        if mag == 1.0 {
            write!(f, "{name}")?;
        } else {
            write!(f, "{mag} {name}")?;
        }
    }
    Ok(())
}

/// Human-readable dump, one equation per line.
impl fmt::Display for LinearProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sense = match self.objective.sense {
            Sense::Minimize => "minimize",
            Sense::Maximize => "maximize",
        };
        write!(f, "{sense}: ")?;
        write_expr(f, &self.objective.expr)?;
        writeln!(f)?;
        writeln!(f, "subject to")?;
        for c in &self.constraints {
            write!(f, "  {}: ", c.name)?;
            write_expr(f, &c.expr)?;
            writeln!(f, " {} {}", c.relation, c.rhs)?;
        }
        writeln!(f, "bounds")?;
        for v in &self.variables {
            let kind = if v.binary { " binary" } else { "" };
            writeln!(f, "  {} <= {} <= {}{kind}", v.lower, v.name, v.upper)?;
        }
        Ok(())
    }
}
