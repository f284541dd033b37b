//! Brute-force reference solvers used only by tests.
//!
//! The vertex oracle enumerates every intersection of `n` hyperplanes drawn
//! from the constraints and the (finite) variable bounds, keeps the feasible
//! ones and returns the best objective. It shares no code with the simplex.
#![allow(dead_code)]

use planopt_core::lp::{LinearProgram, Relation, Sense};
use rand::rngs::StdRng;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleResult {
    Optimal(f64),
    Infeasible,
}

/// Dense view of a bounded program: rows of (coefficients, relation, rhs).
struct Dense {
    n: usize,
    rows: Vec<(Vec<f64>, Relation, f64)>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    maximize: bool,
}

/// Fixed variables (lower == upper) are substituted out as constants; the
/// returned offset is their objective contribution.
fn densify(lp: &LinearProgram) -> (Dense, f64) {
    let free: Vec<usize> = (0..lp.variables.len())
        .filter(|&j| lp.variables[j].lower != lp.variables[j].upper)
        .collect();
    let n = free.len();
    let locate = |name: &str| -> (usize, Option<usize>) {
        let j = lp.variables.iter().position(|v| v.name == name).unwrap();
        (j, free.iter().position(|&f| f == j))
    };
    let rows = lp
        .constraints
        .iter()
        .map(|c| {
            let mut a = vec![0.0; n];
            let mut rhs = c.rhs;
            for (name, coef) in &c.expr.terms {
                match locate(name) {
                    (_, Some(k)) => a[k] += coef,
                    (j, None) => rhs -= coef * lp.variables[j].lower,
                }
            }
            (a, c.relation, rhs)
        })
        .collect();
    let mut cost = vec![0.0; n];
    let mut offset = 0.0;
    for (name, coef) in &lp.objective.expr.terms {
        match locate(name) {
            (_, Some(k)) => cost[k] += coef,
            (j, None) => offset += coef * lp.variables[j].lower,
        }
    }
    let dense = Dense {
        n,
        rows,
        lower: free.iter().map(|&j| lp.variables[j].lower).collect(),
        upper: free.iter().map(|&j| lp.variables[j].upper).collect(),
        cost,
        maximize: lp.objective.sense == Sense::Maximize,
    };
    (dense, offset)
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for k in col..n {
                        a[r][k] -= f * a[col][k];
                    }
                    b[r] -= f * b[col];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn combinations(m: usize, k: usize, out: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if out.len() == k {
        f(out);
        return;
    }
    let start = out.last().map_or(0, |&l| l + 1);
    for i in start..m {
        if m - i < k - out.len() {
            break;
        }
        out.push(i);
        combinations(m, k, out, f);
        out.pop();
    }
}

/// Vertex enumeration. Requires every variable to have finite bounds, so the
/// feasible set is a polytope and the optimum (if any) sits on a vertex.
pub fn vertex_oracle(lp: &LinearProgram) -> OracleResult {
    let (d, offset) = densify(lp);
    assert!(d.lower.iter().chain(&d.upper).all(|b| b.is_finite()));
    let mut planes: Vec<(Vec<f64>, f64)> = d.rows.iter().map(|(a, _, b)| (a.clone(), *b)).collect();
    for j in 0..d.n {
        let mut e = vec![0.0; d.n];
        e[j] = 1.0;
        planes.push((e.clone(), d.lower[j]));
        planes.push((e, d.upper[j]));
    }
    let feasible = |x: &[f64]| {
        let tol = 1e-9;
        (0..d.n).all(|j| x[j] >= d.lower[j] - tol && x[j] <= d.upper[j] + tol)
            && d.rows.iter().all(|(a, rel, b)| {
                let lhs: f64 = a.iter().zip(x).map(|(a, x)| a * x).sum();
                let t = tol * (1.0 + b.abs() + a.iter().zip(x).map(|(a, x)| (a * x).abs()).sum::<f64>());
                match rel {
                    Relation::Le => lhs <= b + t,
                    Relation::Ge => lhs >= b - t,
                    Relation::Eq => (lhs - b).abs() <= t,
                }
            })
    };
    let mut best: Option<f64> = None;
    if d.n == 0 {
        return if feasible(&[]) { OracleResult::Optimal(offset) } else { OracleResult::Infeasible };
    }
    combinations(planes.len(), d.n, &mut Vec::new(), &mut |pick| {
        let a = pick.iter().map(|&p| planes[p].0.clone()).collect();
        let b = pick.iter().map(|&p| planes[p].1).collect();
        if let Some(x) = solve_square(a, b) {
            if feasible(&x) {
                let obj: f64 = offset + d.cost.iter().zip(&x).map(|(c, x)| c * x).sum::<f64>();
                best = Some(match best {
                    None => obj,
                    Some(b) if d.maximize => b.max(obj),
                    Some(b) => b.min(obj),
                });
            }
        }
    });
    best.map_or(OracleResult::Infeasible, OracleResult::Optimal)
}

/// Exhaustive enumeration of binary assignments; each assignment is solved
/// as a pure LP by [`vertex_oracle`].
pub fn binary_enumeration_oracle(lp: &LinearProgram) -> OracleResult {
    let binaries: Vec<usize> = (0..lp.variables.len()).filter(|&j| lp.variables[j].binary).collect();
    let maximize = lp.objective.sense == Sense::Maximize;
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << binaries.len()) {
        let mut fixed = lp.clone();
        for (bit, &j) in binaries.iter().enumerate() {
            let v = f64::from((mask >> bit) & 1);
            fixed.variables[j].lower = v;
            fixed.variables[j].upper = v;
            fixed.variables[j].binary = false;
        }
        if let OracleResult::Optimal(obj) = vertex_oracle(&fixed) {
            best = Some(match best {
                None => obj,
                Some(b) if maximize => b.max(obj),
                Some(b) => b.min(obj),
            });
        }
    }
    best.map_or(OracleResult::Infeasible, OracleResult::Optimal)
}

fn random_relation(rng: &mut StdRng) -> Relation {
    if rng.gen_bool(0.5) {
        Relation::Le
    } else {
        Relation::Ge
    }
}

/// Random bounded LP: at most 5 variables, at most 8 inequality rows,
/// integer coefficients in [-5, 5].
pub fn random_lp(rng: &mut StdRng) -> LinearProgram {
    use planopt_core::lp::{LinearExpr, Variable};
    let n = rng.gen_range(1..=5);
    let m = rng.gen_range(0..=8);
    let sense = if rng.gen_bool(0.5) { Sense::Minimize } else { Sense::Maximize };
    let mut lp = LinearProgram::new(sense);
    for j in 0..n {
        let lo = f64::from(rng.gen_range(-5..=0));
        let hi = lo + f64::from(rng.gen_range(0..=8));
        lp.add_variable(Variable::continuous(format!("x{j}"), lo, hi));
    }
    for i in 0..m {
        let mut e = LinearExpr::new();
        for j in 0..n {
            e.add(format!("x{j}"), f64::from(rng.gen_range(-5..=5)));
        }
        lp.add_constraint(format!("r{i}"), e, random_relation(rng), f64::from(rng.gen_range(-10..=10)));
    }
    let mut obj = LinearExpr::new();
    for j in 0..n {
        obj.add(format!("x{j}"), f64::from(rng.gen_range(-5..=5)));
    }
    lp.objective.expr = obj;
    lp
}

/// Random MILP with 1..=6 binaries and up to 3 bounded continuous variables.
pub fn random_milp(rng: &mut StdRng) -> LinearProgram {
    use planopt_core::lp::{LinearExpr, Variable};
    let k = rng.gen_range(1..=6);
    let c = rng.gen_range(0..=3);
    let m = rng.gen_range(1..=6);
    let sense = if rng.gen_bool(0.5) { Sense::Minimize } else { Sense::Maximize };
    let mut lp = LinearProgram::new(sense);
    let mut names = Vec::new();
    for j in 0..k {
        names.push(format!("z{j}"));
        lp.add_variable(Variable::binary(format!("z{j}")));
    }
    for j in 0..c {
        names.push(format!("x{j}"));
        let lo = f64::from(rng.gen_range(-3..=0));
        lp.add_variable(Variable::continuous(format!("x{j}"), lo, lo + f64::from(rng.gen_range(1..=6))));
    }
    for i in 0..m {
        let mut e = LinearExpr::new();
        for name in &names {
            e.add(name.clone(), f64::from(rng.gen_range(-5..=5)));
        }
        lp.add_constraint(format!("r{i}"), e, random_relation(rng), f64::from(rng.gen_range(-6..=8)));
    }
    let mut obj = LinearExpr::new();
    for name in &names {
        obj.add(name.clone(), f64::from(rng.gen_range(-5..=5)));
    }
    lp.objective.expr = obj;
    lp
}
