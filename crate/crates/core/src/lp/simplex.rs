//! Dense two-phase bounded-variable primal simplex.
//!
//! Every structural variable is shifted or split so that the working form is
//! `min c'y  s.t.  Ay = b, 0 <= y <= u`. Rows and columns are equilibrated by
//! powers of two, which keeps the scaling exact. Phase one starts from an all
//! artificial basis; after it the artificials are fixed at zero so they can
//! only leave the basis. Entering and leaving choices follow Bland's rule.

use std::collections::HashMap;

use super::{
    LinearProgram, Relation, Sense, Solution, SolveError, SolveStatus, FEASIBILITY_TOL,
    OPTIMALITY_TOL,
};

const PIVOT_TOL: f64 = 1e-9;
const NONBASIC: usize = usize::MAX;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimplexStats {
    pub iterations: usize,
}

/// How an original variable is recovered from working columns:
/// `x = offset + sum(sign * scale * y[col])`.
struct ColumnMap {
    offset: f64,
    parts: Vec<(usize, f64)>,
}

enum Phase {
    Optimal,
    Unbounded,
}

struct Tableau {
    rows: usize,
    cols: usize,
    t: Vec<f64>,
    xb: Vec<f64>,
    basis: Vec<usize>,
    basic_row: Vec<usize>,
    at_upper: Vec<bool>,
    upper: Vec<f64>,
    reduced: Vec<f64>,
    iterations: usize,
    max_iterations: usize,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.cols + j]
    }

    fn price(&mut self, cost: &[f64]) {
        self.reduced.clear();
        self.reduced.extend_from_slice(cost);
        for i in 0..self.rows {
            let cb = cost[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.t[i * self.cols..(i + 1) * self.cols];
            for (d, a) in self.reduced.iter_mut().zip(row) {
                *d -= cb * a;
            }
        }
        for i in 0..self.rows {
            self.reduced[self.basis[i]] = 0.0;
        }
    }

    fn value_of(&self, j: usize) -> f64 {
        match self.basic_row[j] {
            NONBASIC if self.at_upper[j] => self.upper[j],
            NONBASIC => 0.0,
            r => self.xb[r],
        }
    }

    fn entering(&self) -> Option<(usize, f64)> {
        (0..self.cols).find_map(|j| {
            if self.basic_row[j] != NONBASIC || self.upper[j] <= 0.0 {
                return None;
            }
            let d = self.reduced[j];
            if !self.at_upper[j] && d < -OPTIMALITY_TOL {
                Some((j, 1.0))
            } else if self.at_upper[j] && d > OPTIMALITY_TOL {
                Some((j, -1.0))
            } else {
                None
            }
        })
    }

    fn run(&mut self) -> Result<Phase, SolveError> {
        loop {
            let Some((enter, dir)) = self.entering() else {
                return Ok(Phase::Optimal);
            };
            self.iterations += 1;
            if self.iterations > self.max_iterations {
                return Err(SolveError::IterationLimit(self.max_iterations));
            }

            // Ratio test; `None` as the leaving row means a bound flip.
            let mut step = self.upper[enter];
            let mut leave: Option<(usize, bool)> = None;
            for i in 0..self.rows {
                let alpha = dir * self.at(i, enter);
                let basic = self.basis[i];
                let (limit, to_upper) = if alpha > PIVOT_TOL {
                    (self.xb[i].max(0.0) / alpha, false)
                } else if alpha < -PIVOT_TOL && self.upper[basic].is_finite() {
                    ((self.upper[basic] - self.xb[i]).max(0.0) / -alpha, true)
                } else {
                    continue;
                };
                let tie = 1e-12 * (1.0 + limit.abs());
                let better = limit < step - tie
                    || (limit <= step + tie
                        && leave.is_some_and(|(r, _)| basic < self.basis[r]));
                if better {
                    step = step.min(limit);
                    leave = Some((i, to_upper));
                }
            }
            if step.is_infinite() {
                return Ok(Phase::Unbounded);
            }

            let entering_value = self.value_of(enter) + dir * step;
            if step != 0.0 {
                for i in 0..self.rows {
                    let a = self.at(i, enter);
                    if a != 0.0 {
                        self.xb[i] -= dir * step * a;
                    }
                }
            }
            match leave {
                None => self.at_upper[enter] = !self.at_upper[enter],
                Some((r, to_upper)) => {
                    let out = self.basis[r];
                    self.at_upper[out] = to_upper;
                    self.basic_row[out] = NONBASIC;
                    self.pivot(r, enter);
                    self.xb[r] = entering_value;
                    self.basis[r] = enter;
                    self.basic_row[enter] = r;
                    self.at_upper[enter] = false;
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let cols = self.cols;
        let p = self.at(r, j);
        {
            let row = &mut self.t[r * cols..(r + 1) * cols];
            for a in row.iter_mut() {
                *a /= p;
            }
            row[j] = 1.0;
        }
        let pivot_row: Vec<f64> = self.t[r * cols..(r + 1) * cols].to_vec();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.t[i * cols + j];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[i * cols..(i + 1) * cols];
            for (a, pr) in row.iter_mut().zip(&pivot_row) {
                *a -= f * pr;
            }
            row[j] = 0.0;
        }
        let f = self.reduced[j];
        if f != 0.0 {
            for (d, pr) in self.reduced.iter_mut().zip(&pivot_row) {
                *d -= f * pr;
            }
            self.reduced[j] = 0.0;
        }
    }
}

fn pow2_scale(max_abs: f64) -> f64 {
    if max_abs > 0.0 && max_abs.is_finite() {
        (-max_abs.log2().round()).exp2()
    } else {
        1.0
    }
}

/// Solves the continuous program with the given per-variable bounds, which
/// override those declared on `lp` (branch-and-bound tightens them).
pub(crate) fn solve_lp(
    lp: &LinearProgram,
    bounds: &[(f64, f64)],
) -> Result<(Solution, SimplexStats), SolveError> {
    let index: HashMap<&str, usize> = lp
        .variables
        .iter()
        .enumerate()
        .map(|(j, v)| (v.name.as_str(), j))
        .collect();

    if bounds.iter().any(|(l, u)| l > u) {
        return Ok((Solution::infeasible(), SimplexStats::default()));
    }

    let mut upper: Vec<f64> = Vec::new();
    let mut maps: Vec<ColumnMap> = Vec::with_capacity(bounds.len());
    for &(l, u) in bounds {
        let map = if l.is_finite() {
            upper.push(u - l);
            ColumnMap {
                offset: l,
                parts: vec![(upper.len() - 1, 1.0)],
            }
        } else if u.is_finite() {
            upper.push(f64::INFINITY);
            ColumnMap {
                offset: u,
                parts: vec![(upper.len() - 1, -1.0)],
            }
        } else {
            upper.push(f64::INFINITY);
            upper.push(f64::INFINITY);
            let n = upper.len();
            ColumnMap {
                offset: 0.0,
                parts: vec![(n - 2, 1.0), (n - 1, -1.0)],
            }
        };
        maps.push(map);
    }
    let structural = upper.len();
    let slacks = lp
        .constraints
        .iter()
        .filter(|c| c.relation != Relation::Eq)
        .count();
    let rows = lp.constraints.len();
    let real_cols = structural + slacks;
    let cols = real_cols + rows;
    upper.extend(std::iter::repeat(f64::INFINITY).take(slacks));
    upper.extend(std::iter::repeat(f64::INFINITY).take(rows));

    let mut t = vec![0.0; rows * cols];
    let mut b = vec![0.0; rows];
    let mut slack = structural;
    for (i, c) in lp.constraints.iter().enumerate() {
        let row = &mut t[i * cols..(i + 1) * cols];
        let mut rhs = c.rhs;
        for (name, coef) in &c.expr.terms {
            let map = &maps[index[name.as_str()]];
            rhs -= coef * map.offset;
            for &(col, sign) in &map.parts {
                row[col] += coef * sign;
            }
        }
        match c.relation {
            Relation::Le => {
                row[slack] = 1.0;
                slack += 1;
            }
            Relation::Ge => {
                row[slack] = -1.0;
                slack += 1;
            }
            Relation::Eq => {}
        }
        b[i] = rhs;
    }

    let sense_sign = match lp.objective.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut cost = vec![0.0; cols];
    for (name, coef) in &lp.objective.expr.terms {
        for &(col, sign) in &maps[index[name.as_str()]].parts {
            cost[col] += sense_sign * coef * sign;
        }
    }

    // Equilibrate rows, then columns.
    for i in 0..rows {
        let row = &mut t[i * cols..i * cols + real_cols];
        let r = pow2_scale(row.iter().fold(0.0_f64, |m, a| m.max(a.abs())));
        if r != 1.0 {
            row.iter_mut().for_each(|a| *a *= r);
            b[i] *= r;
        }
    }
    let mut col_scale = vec![1.0; cols];
    for j in 0..real_cols {
        let max = (0..rows).fold(0.0_f64, |m, i| m.max(t[i * cols + j].abs()));
        let s = pow2_scale(max);
        if s != 1.0 {
            for i in 0..rows {
                t[i * cols + j] *= s;
            }
            upper[j] /= s;
            cost[j] *= s;
            col_scale[j] = s;
        }
    }
    for i in 0..rows {
        if b[i] < 0.0 {
            b[i] = -b[i];
            t[i * cols..(i + 1) * cols].iter_mut().for_each(|a| *a = -*a);
        }
        t[i * cols + real_cols + i] = 1.0;
    }
    let b_norm = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));

    let mut basic_row = vec![NONBASIC; cols];
    for i in 0..rows {
        basic_row[real_cols + i] = i;
    }
    let mut tab = Tableau {
        rows,
        cols,
        t,
        xb: b,
        basis: (real_cols..cols).collect(),
        basic_row,
        at_upper: vec![false; cols],
        upper,
        reduced: Vec::with_capacity(cols),
        iterations: 0,
        max_iterations: 50_000 + 100 * (rows + cols),
    };

    if rows > 0 {
        let mut phase_one = vec![0.0; cols];
        phase_one[real_cols..].iter_mut().for_each(|c| *c = 1.0);
        tab.price(&phase_one);
        tab.run()?;
        let infeasibility: f64 = (0..rows)
            .filter(|&i| tab.basis[i] >= real_cols)
            .map(|i| tab.xb[i].max(0.0))
            .sum();
        if infeasibility > FEASIBILITY_TOL * (1.0 + b_norm) {
            let stats = SimplexStats {
                iterations: tab.iterations,
            };
            return Ok((Solution::infeasible(), stats));
        }
        for j in real_cols..cols {
            tab.upper[j] = 0.0;
            tab.at_upper[j] = false;
            let r = tab.basic_row[j];
            if r != NONBASIC {
                tab.xb[r] = 0.0;
            }
        }
    }

    tab.price(&cost);
    let phase = tab.run()?;
    let stats = SimplexStats {
        iterations: tab.iterations,
    };
    if let Phase::Unbounded = phase {
        return Ok((Solution::unbounded(), stats));
    }

    let working: Vec<f64> = (0..real_cols)
        .map(|j| tab.value_of(j).clamp(0.0, tab.upper[j]) * col_scale[j])
        .collect();
    let values: Vec<f64> = maps
        .iter()
        .zip(bounds)
        .map(|(map, &(l, u))| {
            let x = map.offset
                + map
                    .parts
                    .iter()
                    .map(|&(col, sign)| sign * working[col])
                    .sum::<f64>();
            x.clamp(l, u)
        })
        .collect();
    let objective_value = lp
        .objective
        .expr
        .terms
        .iter()
        .map(|(name, coef)| coef * values[index[name.as_str()]])
        .sum();
    Ok((
        Solution {
            status: SolveStatus::Optimal,
            values,
            objective_value: Some(objective_value),
        },
        stats,
    ))
}
