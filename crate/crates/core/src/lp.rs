//! Dense two-phase simplex over `BigRational` with Bland's rule.
//!
//! Small and exact; used for suspension data, admissibility and move realizability.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { value: Q, x: Vec<Q> },
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
struct Row {
    coeffs: Vec<Q>,
    rel: Relation,
    rhs: Q,
}

/// `maximize c.x` subject to linear rows; variables are free unless marked nonnegative.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    num_vars: usize,
    nonneg: Vec<bool>,
    rows: Vec<Row>,
    objective: Vec<Q>,
}

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            nonneg: vec![false; num_vars],
            rows: Vec::new(),
            objective: vec![Q::zero(); num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn set_nonnegative(&mut self, var: usize) {
        self.nonneg[var] = true;
    }

    pub fn constrain(&mut self, coeffs: Vec<Q>, rel: Relation, rhs: Q) {
        assert_eq!(coeffs.len(), self.num_vars, "coefficient length");
        self.rows.push(Row { coeffs, rel, rhs });
    }

    pub fn maximize(&mut self, objective: Vec<Q>) {
        assert_eq!(objective.len(), self.num_vars, "objective length");
        self.objective = objective;
    }

    pub fn solve(&self) -> LpOutcome {
        // column layout: for each var a positive part, plus a negative part if free
        let mut col_of = Vec::with_capacity(self.num_vars);
        let mut ncols = 0usize;
        for &nn in &self.nonneg {
            col_of.push((ncols, if nn { None } else { Some(ncols + 1) }));
            ncols += if nn { 1 } else { 2 };
        }
        let structural = ncols;
        let m = self.rows.len();
        // normalize rows to nonnegative rhs
        let mut rows: Vec<(Vec<Q>, Relation, Q)> = Vec::with_capacity(m);
        for r in &self.rows {
            let mut a = vec![Q::zero(); structural];
            for (v, c) in r.coeffs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let (p, n) = col_of[v];
                a[p] = c.clone();
                if let Some(n) = n {
                    a[n] = -c.clone();
                }
            }
            let (a, rel, rhs) = if r.rhs.is_negative() {
                let rel = match r.rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                (a.into_iter().map(|x| -x).collect(), rel, -r.rhs.clone())
            } else {
                (a, r.rel, r.rhs.clone())
            };
            rows.push((a, rel, rhs));
        }
        let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
        let total = structural + n_slack + n_art;
        let mut tab: Vec<Vec<Q>> = Vec::with_capacity(m);
        let mut basis = vec![0usize; m];
        let mut artificial = vec![false; total];
        let (mut s_idx, mut a_idx) = (structural, structural + n_slack);
        for (i, (a, rel, rhs)) in rows.into_iter().enumerate() {
            let mut row = a;
            row.resize(total + 1, Q::zero());
            match rel {
                Relation::Le => {
                    row[s_idx] = Q::one();
                    basis[i] = s_idx;
                    s_idx += 1;
                }
                Relation::Ge => {
                    row[s_idx] = -Q::one();
                    s_idx += 1;
                    row[a_idx] = Q::one();
                    artificial[a_idx] = true;
                    basis[i] = a_idx;
                    a_idx += 1;
                }
                Relation::Eq => {
                    row[a_idx] = Q::one();
                    artificial[a_idx] = true;
                    basis[i] = a_idx;
                    a_idx += 1;
                }
            }
            row[total] = rhs;
            tab.push(row);
        }
        let mut t = Tableau { rows: tab, basis, total };

        if n_art > 0 {
            // phase one: maximize -(sum of artificials)
            let mut cost = vec![Q::zero(); total];
            for (j, &is_art) in artificial.iter().enumerate() {
                if is_art {
                    cost[j] = -Q::one();
                }
            }
            let allowed = vec![true; total];
            match t.optimize(&cost, &allowed) {
                Step::Optimal => {}
                Step::Unbounded => unreachable!("phase one is bounded"),
            }
            if t.objective_value(&cost).is_negative() {
                return LpOutcome::Infeasible;
            }
            // drive zero-level artificials out of the basis
            for i in 0..m {
                if artificial[t.basis[i]] {
                    if let Some(j) = (0..total).find(|&j| !artificial[j] && !t.rows[i][j].is_zero()) {
                        t.pivot(i, j);
                    }
                }
            }
        }

        let mut cost = vec![Q::zero(); total];
        for (v, c) in self.objective.iter().enumerate() {
            let (p, n) = col_of[v];
            cost[p] = c.clone();
            if let Some(n) = n {
                cost[n] = -c.clone();
            }
        }
        let allowed: Vec<bool> = artificial.iter().map(|a| !a).collect();
        match t.optimize(&cost, &allowed) {
            Step::Unbounded => LpOutcome::Unbounded,
            Step::Optimal => {
                let mut cols = vec![Q::zero(); total];
                for (i, &b) in t.basis.iter().enumerate() {
                    cols[b] = t.rows[i][total].clone();
                }
                let x = col_of
                    .iter()
                    .map(|&(p, n)| match n {
                        Some(n) => cols[p].clone() - cols[n].clone(),
                        None => cols[p].clone(),
                    })
                    .collect();
                LpOutcome::Optimal { value: t.objective_value(&cost), x }
            }
        }
    }
}

enum Step {
    Optimal,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Q>>,
    basis: Vec<usize>,
    total: usize,
}

impl Tableau {
    fn objective_value(&self, cost: &[Q]) -> Q {
        self.basis
            .iter()
            .enumerate()
            .fold(Q::zero(), |acc, (i, &b)| acc + cost[b].clone() * self.rows[i][self.total].clone())
    }

    fn reduced_cost(&self, cost: &[Q], j: usize) -> Q {
        let mut r = cost[j].clone();
        for (i, &b) in self.basis.iter().enumerate() {
            if !cost[b].is_zero() && !self.rows[i][j].is_zero() {
                r -= cost[b].clone() * self.rows[i][j].clone();
            }
        }
        r
    }

    fn optimize(&mut self, cost: &[Q], allowed: &[bool]) -> Step {
        loop {
            // Bland: smallest improving column, then smallest basis index among ties
            let entering = (0..self.total)
                .filter(|&j| allowed[j] && !self.basis.contains(&j))
                .find(|&j| self.reduced_cost(cost, j).is_positive());
            let Some(j) = entering else {
                return Step::Optimal;
            };
            let mut best: Option<(usize, Q)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][j];
                if a.is_positive() {
                    let ratio = self.rows[i][self.total].clone() / a.clone();
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            match best {
                None => return Step::Unbounded,
                Some((i, _)) => self.pivot(i, j),
            }
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v = v.clone() / p.clone();
            }
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= f.clone() * pv.clone();
                }
            }
        }
        self.basis[r] = c;
    }
}

/// Finds `x` with `eq_i . x = 0` for every equality row and `s_j . x > 0` for every
/// strict row, maximizing the common slack (capped at 1). `None` if no such `x` exists.
pub fn strictly_feasible(dim: usize, equalities: &[Vec<Q>], strict: &[Vec<Q>]) -> Option<Vec<Q>> {
    let eps = dim;
    let mut lp = LinearProgram::new(dim + 1);
    for e in equalities {
        let mut row = e.clone();
        row.push(Q::zero());
        lp.constrain(row, Relation::Eq, Q::zero());
    }
    for s in strict {
        let mut row = s.clone();
        row.push(-Q::one());
        lp.constrain(row, Relation::Ge, Q::zero());
    }
    let mut cap = vec![Q::zero(); dim + 1];
    cap[eps] = Q::one();
    lp.constrain(cap.clone(), Relation::Le, Q::one());
    lp.maximize(cap);
    match lp.solve() {
        LpOutcome::Optimal { value, mut x } if value.is_positive() => {
            x.truncate(dim);
            Some(x)
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18
        let mut lp = LinearProgram::new(2);
        lp.set_nonnegative(0);
        lp.set_nonnegative(1);
        lp.constrain(vec![q(1), q(0)], Relation::Le, q(4));
        lp.constrain(vec![q(0), q(2)], Relation::Le, q(12));
        lp.constrain(vec![q(3), q(2)], Relation::Le, q(18));
        lp.maximize(vec![q(3), q(5)]);
        match lp.solve() {
            LpOutcome::Optimal { value, x } => {
                assert_eq!(value, q(36));
                assert_eq!(x, vec![q(2), q(6)]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.constrain(vec![q(1)], Relation::Ge, q(2));
        lp.constrain(vec![q(1)], Relation::Le, q(1));
        assert_eq!(lp.solve(), LpOutcome::Infeasible);

        let mut lp = LinearProgram::new(2);
        lp.constrain(vec![q(1), q(-1)], Relation::Eq, q(0));
        lp.maximize(vec![q(1), q(1)]);
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn free_variables_go_negative() {
        let mut lp = LinearProgram::new(1);
        lp.constrain(vec![q(1)], Relation::Ge, q(-3));
        lp.maximize(vec![q(-1)]);
        match lp.solve() {
            LpOutcome::Optimal { value, x } => {
                assert_eq!(x, vec![q(-3)]);
                assert_eq!(value, q(3));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn strict_feasibility() {
        // x > 0, y > 0, x - y = 0
        let x = strictly_feasible(2, &[vec![q(1), q(-1)]], &[vec![q(1), q(0)], vec![q(0), q(1)]]).unwrap();
        assert!(x[0].is_positive() && x[0] == x[1]);
        // x > 0 and -x > 0
        assert!(strictly_feasible(1, &[], &[vec![q(1)], vec![q(-1)]]).is_none());
    }

    #[test]
    fn degenerate_equalities_are_handled() {
        // duplicated equality rows leave an artificial at level zero
        let mut lp = LinearProgram::new(2);
        lp.set_nonnegative(0);
        lp.set_nonnegative(1);
        lp.constrain(vec![q(1), q(1)], Relation::Eq, q(2));
        lp.constrain(vec![q(2), q(2)], Relation::Eq, q(4));
        lp.maximize(vec![q(1), q(0)]);
        match lp.solve() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, q(2)),
            other => panic!("{other:?}"),
        }
    }
}
