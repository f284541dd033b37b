//! Depth-first branch-and-bound over binary variables.

use super::simplex::solve_lp;
use super::{LinearProgram, Sense, Solution, SolveError, SolveStatus, INTEGRALITY_TOL};

const NODE_LIMIT: usize = 200_000;

struct Search<'a> {
    lp: &'a LinearProgram,
    binaries: Vec<usize>,
    sign: f64,
    incumbent: Option<(Vec<f64>, f64)>,
    nodes: usize,
}

impl Search<'_> {
    fn canonical(&self, sol: &Solution) -> f64 {
        self.sign * sol.objective_value.unwrap_or(0.0)
    }

    fn explore(&mut self, bounds: &mut Vec<(f64, f64)>, sol: Solution) -> Result<(), SolveError> {
        self.nodes += 1;
        if self.nodes > NODE_LIMIT {
            return Err(SolveError::NodeLimit(NODE_LIMIT));
        }
        let bound = self.canonical(&sol);
        if let Some((_, best)) = &self.incumbent {
            if bound >= best - 1e-9 * (1.0 + best.abs()) {
                return Ok(());
            }
        }

        // Most fractional binary; ties go to the lowest index.
        let mut pick: Option<(usize, f64)> = None;
        for &k in &self.binaries {
            let v = sol.values[k];
            let frac = (v - v.round()).abs();
            if frac > INTEGRALITY_TOL && pick.is_none_or(|(_, f)| frac > f) {
                pick = Some((k, frac));
            }
        }
        let Some((k, _)) = pick else {
            self.incumbent = Some((sol.values, bound));
            return Ok(());
        };

        let first = if sol.values[k] >= 0.5 { 1.0 } else { 0.0 };
        let saved = bounds[k];
        for value in [first, 1.0 - first] {
            bounds[k] = (value, value);
            let (child, _) = solve_lp(self.lp, bounds)?;
            if child.status == SolveStatus::Optimal {
                self.explore(bounds, child)?;
            }
        }
        bounds[k] = saved;
        Ok(())
    }
}

pub(crate) fn solve_milp(lp: &LinearProgram) -> Result<Solution, SolveError> {
    let mut bounds: Vec<(f64, f64)> = lp.variables.iter().map(|v| (v.lower, v.upper)).collect();
    let binaries: Vec<usize> = lp
        .variables
        .iter()
        .enumerate()
        .filter(|(_, v)| v.binary)
        .map(|(j, _)| j)
        .collect();
    for &k in &binaries {
        let (l, u) = bounds[k];
        bounds[k] = (l.max(0.0).ceil(), u.min(1.0).floor());
    }

    let (root, _) = solve_lp(lp, &bounds)?;
    if binaries.is_empty() {
        return Ok(root);
    }
    match root.status {
        SolveStatus::Infeasible => return Ok(root),
        SolveStatus::Unbounded => {
            // The relaxation's recession cone is the MILP's, so the MILP is
            // unbounded exactly when it has any integer-feasible point.
            let mut probe = lp.clone();
            probe.objective.expr.terms.clear();
            let feasible = solve_milp(&probe)?;
            return Ok(if feasible.is_optimal() {
                Solution::unbounded()
            } else {
                Solution::infeasible()
            });
        }
        SolveStatus::Optimal => {}
    }

    let mut search = Search {
        lp,
        binaries,
        sign: match lp.objective.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        },
        incumbent: None,
        nodes: 0,
    };
    search.explore(&mut bounds, root)?;
    let Some((values, _)) = search.incumbent else {
        return Ok(Solution::infeasible());
    };

    // Re-solve with the binaries pinned to exact integers so the reported
    // point carries no integrality residue.
    for &k in &search.binaries {
        let v = values[k].round();
        bounds[k] = (v, v);
    }
    let (clean, _) = solve_lp(lp, &bounds)?;
    if clean.is_optimal() {
        return Ok(clean);
    }
    let mut values = values;
    for &k in &search.binaries {
        values[k] = values[k].round();
    }
    let objective_value = lp.evaluate(&lp.objective.expr, &values);
    Ok(Solution {
        status: SolveStatus::Optimal,
        values,
        objective_value,
    })
}
