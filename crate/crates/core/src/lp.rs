//! Exact two-phase primal simplex over rationals.
//!
//! Variables carry a finite lower bound and an optional upper bound. Lower bounds
//! are shifted to zero, fixed variables are substituted out, upper bounds become
//! extra rows. Entering and leaving choices follow Bland's rule, so the method
//! terminates, and the returned point is a basic solution of the internal form.
//! Hence the number of coordinates strictly inside their bounds never exceeds
//! the number of constraint rows.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{is_integral, Rat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, Rat)>,
    pub relation: Relation,
    pub rhs: Rat,
}

/// `min c.x` subject to rows and `lo <= x <= hi`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<Rat>,
    pub lower: Vec<Rat>,
    pub upper: Vec<Option<Rat>>,
    pub rows: Vec<Constraint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasicSolution {
    pub status: LpStatus,
    pub values: Vec<Rat>,
    pub objective: Rat,
    pub fractional_indices: Vec<usize>,
}

impl BasicSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Adds a variable and returns its index.
    pub fn add_var(&mut self, cost: Rat, lo: Rat, hi: Option<Rat>) -> usize {
        self.objective.push(cost);
        self.lower.push(lo);
        self.upper.push(hi);
        self.objective.len() - 1
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, Rat)>, relation: Relation, rhs: Rat) {
        self.rows.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.objective.len();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::LengthMismatch(self.lower.len().min(self.upper.len()), n));
        }
        for (j, (lo, hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            if let Some(h) = hi {
                if h < lo {
                    return Err(Error::InvalidInstance(format!("variable {j}: upper bound below lower bound")));
                }
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if let Some((j, _)) = row.coeffs.iter().find(|(j, _)| *j >= n) {
                return Err(Error::InvalidInstance(format!("row {i} references variable {j} of {n}")));
            }
        }
        Ok(())
    }

    /// True when `x` satisfies every bound and row exactly.
    pub fn is_feasible_point(&self, x: &[Rat]) -> bool {
        if x.len() != self.num_vars() {
            return false;
        }
        let bounds_ok = x.iter().enumerate().all(|(j, v)| {
            *v >= self.lower[j] && self.upper[j].as_ref().map_or(true, |h| v <= h)
        });
        bounds_ok
            && self.rows.iter().all(|row| {
                let lhs: Rat = row.coeffs.iter().map(|(j, a)| a * &x[*j]).sum();
                match row.relation {
                    Relation::Le => lhs <= row.rhs,
                    Relation::Ge => lhs >= row.rhs,
                    Relation::Eq => lhs == row.rhs,
                }
            })
    }

    pub fn objective_value(&self, x: &[Rat]) -> Rat {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Coordinates strictly between their bounds and not integral.
    pub fn fractional_indices(&self, x: &[Rat]) -> Vec<usize> {
        (0..x.len())
            .filter(|&j| {
                x[j] > self.lower[j]
                    && self.upper[j].as_ref().map_or(true, |h| &x[j] < h)
                    && !is_integral(&x[j])
            })
            .collect()
    }

    /// Coordinates strictly between their bounds, integral or not.
    pub fn interior_count(&self, x: &[Rat]) -> usize {
        (0..x.len())
            .filter(|&j| x[j] > self.lower[j] && self.upper[j].as_ref().map_or(true, |h| &x[j] < h))
            .count()
    }
}

/// Number of non-integral coordinates strictly inside their bounds.
pub fn count_fractional(sol: &BasicSolution) -> usize {
    sol.fractional_indices.len()
}

/// Solves to an optimal basic solution; infeasibility and unboundedness are statuses.
pub fn solve_to_basic_optimum(lp: &LinearProgram) -> Result<BasicSolution> {
    lp.validate()?;
    let n = lp.num_vars();

    // Column map: free (non-fixed) variables get a tableau column.
    let mut col_of = vec![usize::MAX; n];
    let mut vars: Vec<usize> = Vec::new();
    for j in 0..n {
        let fixed = lp.upper[j].as_ref() == Some(&lp.lower[j]);
        if !fixed {
            col_of[j] = vars.len();
            vars.push(j);
        }
    }
    let nv = vars.len();

    // Rows over shifted variables y = x - lo.
    struct Row {
        coeffs: Vec<(usize, Rat)>,
        relation: Relation,
        rhs: Rat,
    }
    let mut rows: Vec<Row> = Vec::new();
    for c in &lp.rows {
        let mut rhs = c.rhs.clone();
        let mut dense: Vec<Rat> = vec![Rat::zero(); nv];
        for (j, a) in &c.coeffs {
            rhs -= a * &lp.lower[*j];
            if col_of[*j] != usize::MAX {
                dense[col_of[*j]] += a;
            }
        }
        let coeffs: Vec<(usize, Rat)> = dense
            .into_iter()
            .enumerate()
            .filter(|(_, a)| !a.is_zero())
            .collect();
        if coeffs.is_empty() {
            let ok = match c.relation {
                Relation::Le => !rhs.is_negative(),
                Relation::Ge => !rhs.is_positive(),
                Relation::Eq => rhs.is_zero(),
            };
            if !ok {
                return Ok(infeasible(n));
            }
            continue;
        }
        rows.push(Row {
            coeffs,
            relation: c.relation,
            rhs,
        });
    }
    for (col, &j) in vars.iter().enumerate() {
        if let Some(h) = &lp.upper[j] {
            rows.push(Row {
                coeffs: vec![(col, Rat::one())],
                relation: Relation::Le,
                rhs: h - &lp.lower[j],
            });
        }
    }
    for r in rows.iter_mut() {
        if r.rhs.is_negative() {
            r.rhs = -r.rhs.clone();
            for (_, a) in r.coeffs.iter_mut() {
                *a = -a.clone();
            }
            r.relation = match r.relation {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    // Columns: structural, then one slack/surplus per inequality, then artificials.
    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.relation != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.relation != Relation::Le).count();
    let art_start = nv + n_slack;
    let ncols = art_start + n_art;
    let mut tab = Tableau {
        a: vec![vec![Rat::zero(); ncols + 1]; m],
        basis: vec![0; m],
        ncols,
    };
    let (mut s, mut t) = (nv, art_start);
    for (i, r) in rows.iter().enumerate() {
        for (c, v) in &r.coeffs {
            tab.a[i][*c] = v.clone();
        }
        tab.a[i][ncols] = r.rhs.clone();
        match r.relation {
            Relation::Le => {
                tab.a[i][s] = Rat::one();
                tab.basis[i] = s;
                s += 1;
            }
            Relation::Ge => {
                tab.a[i][s] = -Rat::one();
                s += 1;
                tab.a[i][t] = Rat::one();
                tab.basis[i] = t;
                t += 1;
            }
            Relation::Eq => {
                tab.a[i][t] = Rat::one();
                tab.basis[i] = t;
                t += 1;
            }
        }
    }

    // Phase 1.
    if n_art > 0 {
        let mut cost = vec![Rat::zero(); ncols];
        for c in cost.iter_mut().skip(art_start) {
            *c = Rat::one();
        }
        let mut z = tab.reduced_costs(&cost);
        match tab.run(&mut z, ncols) {
            Outcome::Optimal => {}
            Outcome::Unbounded => unreachable!("phase one objective is bounded below"),
        }
        if !z[ncols].is_zero() {
            return Ok(infeasible(n));
        }
        // Drive zero-valued artificials out of the basis; drop redundant rows.
        let mut i = 0;
        while i < tab.a.len() {
            if tab.basis[i] >= art_start {
                match (0..art_start).find(|&c| !tab.a[i][c].is_zero()) {
                    Some(c) => {
                        tab.pivot(i, c, &mut z);
                        i += 1;
                    }
                    None => {
                        tab.a.remove(i);
                        tab.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
    }

    // Phase 2: artificials may not re-enter.
    let mut cost = vec![Rat::zero(); ncols];
    for (col, &j) in vars.iter().enumerate() {
        cost[col] = lp.objective[j].clone();
    }
    let mut z = tab.reduced_costs(&cost);
    if let Outcome::Unbounded = tab.run(&mut z, art_start) {
        return Ok(BasicSolution {
            status: LpStatus::Unbounded,
            values: vec![],
            objective: Rat::zero(),
            fractional_indices: vec![],
        });
    }

    let mut values = lp.lower.clone();
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < nv {
            values[vars[b]] += &tab.a[i][ncols];
        }
    }
    debug_assert!(lp.is_feasible_point(&values));
    let objective = lp.objective_value(&values);
    let fractional_indices = lp.fractional_indices(&values);
    Ok(BasicSolution {
        status: LpStatus::Optimal,
        values,
        objective,
        fractional_indices,
    })
}

fn infeasible(_n: usize) -> BasicSolution {
    BasicSolution {
        status: LpStatus::Infeasible,
        values: vec![],
        objective: Rat::zero(),
        fractional_indices: vec![],
    }
}

enum Outcome {
    Optimal,
    Unbounded,
}

struct Tableau {
    a: Vec<Vec<Rat>>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    /// Reduced-cost row; the last entry holds minus the current objective.
    fn reduced_costs(&self, cost: &[Rat]) -> Vec<Rat> {
        let mut z: Vec<Rat> = cost.to_vec();
        z.push(Rat::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (c, v) in self.a[i].iter().enumerate() {
                if !v.is_zero() {
                    z[c] -= cb * v;
                }
            }
        }
        z
    }

    fn pivot(&mut self, r: usize, c: usize, z: &mut [Rat]) {
        let p = self.a[r][c].clone();
        if !p.is_one() {
            for v in self.a[r].iter_mut() {
                if !v.is_zero() {
                    *v /= &p;
                }
            }
        }
        let nz: Vec<usize> = (0..=self.ncols).filter(|&k| !self.a[r][k].is_zero()).collect();
        let prow: Vec<Rat> = nz.iter().map(|&k| self.a[r][k].clone()).collect();
        for i in 0..self.a.len() {
            if i == r || self.a[i][c].is_zero() {
                continue;
            }
            let f = self.a[i][c].clone();
            for (&k, v) in nz.iter().zip(&prow) {
                self.a[i][k] -= &f * v;
            }
        }
        if !z[c].is_zero() {
            let f = z[c].clone();
            for (&k, v) in nz.iter().zip(&prow) {
                z[k] -= &f * v;
            }
        }
        self.basis[r] = c;
    }

    /// Bland's rule over columns `< allowed`.
    fn run(&mut self, z: &mut [Rat], allowed: usize) -> Outcome {
        loop {
            let Some(c) = (0..allowed).find(|&c| z[c].is_negative()) else {
                return Outcome::Optimal;
            };
            let mut best: Option<(usize, Rat)> = None;
            for i in 0..self.a.len() {
                let a = &self.a[i][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.a[i][self.ncols] / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                None => return Outcome::Unbounded,
                Some((r, _)) => self.pivot(r, c, z),
            }
        }
    }
}

/// Asserts the extreme-point bound for a solution of `lp`.
pub fn check_vertex_property(lp: &LinearProgram, sol: &BasicSolution) -> Result<()> {
    if sol.is_optimal() {
        let inside = lp.interior_count(&sol.values);
        if inside > lp.num_rows() {
            return Err(Error::Numeric(format!(
                "{inside} coordinates strictly inside bounds with {} rows",
                lp.num_rows()
            )));
        }
    }
    Ok(())
}
