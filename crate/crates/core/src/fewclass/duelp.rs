//! Due-date LP for the jobs outside the guessed set, and its round-up to integral due dates.

use num_traits::{One, Signed, Zero};

use crate::lp::{BasicSolution, LinearProgram, Relation};
use crate::model::edd::interval_excess;
use crate::model::gsp::Job;
use crate::rational::{int, Rat};

#[derive(Debug, Clone)]
pub struct DueDateLp {
    pub lp: LinearProgram,
    /// `(job, due date)` per variable.
    pub vars: Vec<(usize, i64)>,
    /// Jobs carried by the LP, ascending.
    pub free: Vec<usize>,
}

/// Builds the LP. Rows whose interval has no excess are implied by `x >= 0` and left out,
/// so the covering rows are exactly the pairs `(r, t)` with positive excess. `guessed[j]` is the fixed due date of a guessed job; every other job gets
/// one variable per option `(t, cost)` whose cost does not exceed `c_thres`. Options are
/// expected to satisfy `r_j + p_j <= t` already.
pub fn build_due_date_lp(
    jobs: &[Job],
    guessed: &[Option<i64>],
    options: &[Vec<(i64, Rat)>],
    c_thres: Option<&Rat>,
    d_set: &[i64],
    releases: &[i64],
) -> DueDateLp {
    let mut lp = LinearProgram::new();
    let mut vars = Vec::new();
    let mut free = Vec::new();
    let mut by_job: Vec<Vec<(usize, i64)>> = vec![Vec::new(); jobs.len()];
    for (j, opts) in options.iter().enumerate() {
        if guessed[j].is_some() {
            continue;
        }
        free.push(j);
        for (t, c) in opts {
            if c_thres.map_or(false, |th| c > th) {
                continue;
            }
            let v = lp.add_var(c.clone(), Rat::zero(), None);
            vars.push((j, *t));
            by_job[j].push((v, *t));
        }
    }
    for &r in releases {
        for &t in d_set.iter().filter(|&&t| t >= r) {
            let fixed: i64 = jobs
                .iter()
                .zip(guessed)
                .filter(|(job, d)| r <= job.r && job.r <= t && d.map_or(false, |d| d > t))
                .map(|(job, _)| job.p)
                .sum();
            let ex = interval_excess(jobs, r, t);
            if ex == 0 {
                continue;
            }
            let rhs = ex - fixed;
            let coeffs: Vec<(usize, Rat)> = free
                .iter()
                .filter(|&&j| r <= jobs[j].r && jobs[j].r <= t)
                .flat_map(|&j| by_job[j].iter().filter(|(_, tt)| *tt > t).map(move |&(v, _)| (v, int(jobs[j].p))))
                .collect();
            lp.add_row(coeffs, Relation::Ge, int(rhs));
        }
    }
    for &j in &free {
        let coeffs = by_job[j].iter().map(|&(v, _)| (v, Rat::one())).collect();
        lp.add_row(coeffs, Relation::Eq, Rat::one());
    }
    DueDateLp { lp, vars, free }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundedDueDates {
    /// Due date per job for LP jobs; `None` for guessed jobs.
    pub due: Vec<Option<i64>>,
    /// Jobs with a strictly fractional variable.
    pub rounded_up: usize,
}

/// Each LP job takes the latest due date in its support.
pub fn round_due_date_lp(dlp: &DueDateLp, sol: &BasicSolution, n: usize) -> RoundedDueDates {
    let mut due: Vec<Option<i64>> = vec![None; n];
    let mut fractional = vec![false; n];
    for (v, &(j, t)) in dlp.vars.iter().enumerate() {
        let x = &sol.values[v];
        if x.is_positive() {
            due[j] = Some(due[j].map_or(t, |d| d.max(t)));
            if x < &Rat::one() {
                fractional[j] = true;
            }
        }
    }
    RoundedDueDates {
        due,
        rounded_up: fractional.iter().filter(|&&f| f).count(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::solve_to_basic_optimum;
    use crate::model::gsp::fixtures::g1;
    use crate::model::step::StepCostFunction;
    use crate::oracles::exact_due_dates;
    use crate::par::Execution;

    fn options(jobs: &[Job], d_set: &[i64]) -> Vec<Vec<(i64, Rat)>> {
        jobs.iter()
            .map(|j| {
                d_set
                    .iter()
                    .filter(|&&t| t >= j.r + j.p)
                    .map(|&t| (t, j.f.eval_int(t).finite().unwrap().clone()))
                    .collect()
            })
            .collect()
    }

    #[test]
    fn all_guessed_is_empty() {
        let inst = g1();
        let d = [2, 5];
        let dlp = build_due_date_lp(&inst.jobs, &[Some(2), Some(5)], &options(&inst.jobs, &d), None, &d, &[0]);
        assert_eq!(dlp.lp.num_vars(), 0);
        let sol = solve_to_basic_optimum(&dlp.lp).unwrap();
        assert!(sol.is_optimal());
        assert_eq!(sol.objective, Rat::zero());
    }

    #[test]
    fn single_option_forced() {
        let j = Job::new(0, 2, 0, StepCostFunction::new(vec![(int(1), int(4))], None).unwrap());
        let jobs = vec![j];
        let d = [2];
        let dlp = build_due_date_lp(&jobs, &[None], &options(&jobs, &d), None, &d, &[0]);
        let sol = solve_to_basic_optimum(&dlp.lp).unwrap();
        assert_eq!(sol.values, vec![Rat::one()]);
        let r = round_due_date_lp(&dlp, &sol, 1);
        assert_eq!(r.due, vec![Some(2)]);
        assert_eq!(r.rounded_up, 0);
    }

    #[test]
    fn relaxation_below_oracle_on_g1() {
        let inst = g1();
        let d = [2, 3, 5];
        let dlp = build_due_date_lp(&inst.jobs, &[None, None], &options(&inst.jobs, &d), None, &d, &[0]);
        let sol = solve_to_basic_optimum(&dlp.lp).unwrap();
        let opt = exact_due_dates(&inst, &d, 1_000_000, Execution::Sequential).unwrap().unwrap();
        assert!(sol.objective <= opt.cost);
        let r = round_due_date_lp(&dlp, &sol, 2);
        let due: Vec<i64> = r.due.iter().map(|d| d.unwrap()).collect();
        assert!(crate::model::edd::edd_feasible(&inst.jobs, &due));
        assert!(r.rounded_up <= dlp.lp.num_rows());
    }

    #[test]
    fn max_support_rounding() {
        let inst = g1();
        let d = [2, 5];
        let dlp = build_due_date_lp(&inst.jobs, &[None, Some(5)], &options(&inst.jobs, &d), None, &d, &[0]);
        let sol = BasicSolution {
            status: crate::lp::LpStatus::Optimal,
            values: vec![Rat::new(1.into(), 2.into()); 2],
            objective: Rat::zero(),
            fractional_indices: vec![0, 1],
        };
        let r = round_due_date_lp(&dlp, &sol, 2);
        assert_eq!(r.due, vec![Some(5), None]);
        assert_eq!(r.rounded_up, 1);
    }
}
