//! Approximation for instances whose cost functions are weighted copies of a few global
//! functions and whose jobs share a few release dates.
//!
//! For each budget `B` on a geometric grid the global functions are rounded and due dates
//! are restricted to a small candidate set. The most expensive jobs get their due dates by
//! enumeration, the rest by a due-date LP whose basic optimum is rounded to the latest due
//! date in its support. The chosen due dates are realized by preemptive EDD.

pub mod duelp;
pub mod rounding;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::solve_to_basic_optimum;
use crate::model::edd::{edd_feasible, edd_schedule, interval_excess, PreemptiveSchedule};
use crate::model::gsp::{DueDateAssignment, GspInstance, Job};
use crate::model::step::StepCostFunction;
use crate::par::{self, Execution};
use crate::rational::{ceil_log, ceil_usize, floor_log, int, powi, serialize_rat, Rat};
use duelp::{build_due_date_lp, round_due_date_lp};
use rounding::{budget_crossing, due_date_candidates, round_class_functions, RoundingParams};

pub const DEFAULT_MAX_RELEASES: usize = 4;
pub const DEFAULT_NODE_BUDGET: u64 = 2_000_000;

#[derive(Debug, Clone)]
pub struct FewClassConfig {
    /// In `(0, 1]`.
    pub eps: Rat,
    pub max_releases: usize,
    /// Number of guessed jobs. `None` uses `min(n, ceil(rho / eps))` where `rho` counts
    /// the release/due-date pairs with positive excess.
    pub guess_size: Option<usize>,
    /// Search nodes per top-level branch and budget.
    pub node_budget: u64,
    pub exec: Execution,
}

impl FewClassConfig {
    pub fn new(eps: Rat) -> Self {
        FewClassConfig {
            eps,
            max_releases: DEFAULT_MAX_RELEASES,
            guess_size: None,
            node_budget: DEFAULT_NODE_BUDGET,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FewClassStats {
    pub budgets_tried: usize,
    /// Whether some budget met its acceptance bound.
    pub accepted: bool,
    pub candidate_dates: usize,
    pub guess_size: usize,
    /// Guess size the rounding bound asks for, capped at `n`.
    pub guess_bound: usize,
    pub certified: bool,
    pub nodes: u64,
    pub cap_hit: bool,
    pub lp_solves: usize,
    pub max_rounded_up: usize,
    pub max_lp_rows: usize,
    pub rounding_checks: usize,
    pub rounding_violations: usize,
    /// LP roundings whose full assignment failed the EDD test.
    pub infeasible_roundings: usize,
}

impl FewClassStats {
    fn absorb(&mut self, o: &FewClassStats) {
        self.nodes += o.nodes;
        self.cap_hit |= o.cap_hit;
        self.lp_solves += o.lp_solves;
        self.max_rounded_up = self.max_rounded_up.max(o.max_rounded_up);
        self.max_lp_rows = self.max_lp_rows.max(o.max_lp_rows);
        self.rounding_checks += o.rounding_checks;
        self.rounding_violations += o.rounding_violations;
        self.infeasible_roundings += o.infeasible_roundings;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FewClassSolution {
    pub assignment: DueDateAssignment,
    pub schedule: PreemptiveSchedule,
    /// `sum_j f_j(d_j)` under the original functions.
    #[serde(serialize_with = "serialize_rat")]
    pub cost: Rat,
    /// The same due dates priced by the rounded functions.
    #[serde(serialize_with = "serialize_rat")]
    pub rounded_cost: Rat,
    #[serde(serialize_with = "serialize_rat")]
    pub budget: Rat,
    pub d_set: Vec<i64>,
    pub stats: FewClassStats,
}

/// Factor lost to value rounding and to the LP round-up.
pub fn lemma_factor(eps: &Rat) -> Rat {
    (Rat::one() + int(2) * eps) * (Rat::one() + eps)
}

/// End-to-end factor with a certified guess size, including the slack of the budget grid.
pub fn guarantee_factor(eps: &Rat) -> Rat {
    lemma_factor(eps) * (Rat::one() + eps)
}

/// Everything fixed by one budget.
struct BudgetSetup {
    budget: Rat,
    rounded: Vec<StepCostFunction>,
    d_set: Vec<i64>,
    /// Per job `(t, rounded cost)`, cheapest first; of equal-cost dates only the latest.
    options: Vec<Vec<(i64, Rat)>>,
    guess_size: usize,
    guess_bound: usize,
    certified: bool,
}

fn class_of(job: &Job) -> (usize, Rat) {
    (
        job.class.expect("class form checked"),
        int(job.weight.expect("class form checked")),
    )
}

fn rounded_cost(job: &Job, rounded: &[StepCostFunction], t: i64) -> Option<Rat> {
    let (u, w) = class_of(job);
    rounded[u].eval_int(t).finite().map(|v| v * w)
}

fn setup_budget(inst: &GspInstance, cfg: &FewClassConfig, budget: Rat) -> Result<BudgetSetup> {
    let n = inst.n();
    let horizon = inst.horizon();
    let params = RoundingParams {
        budget: budget.clone(),
        weight_bound: inst.weight_bound,
        n,
        eps: cfg.eps.clone(),
    };
    let rounded = round_class_functions(&inst.global_functions, &params)?;
    let mut d_set = due_date_candidates(&rounded, horizon);
    d_set.extend(
        inst.global_functions
            .iter()
            .filter_map(|g| budget_crossing(g, &budget))
            .filter(|&t| (0..=horizon).contains(&t)),
    );
    d_set.sort_unstable();
    d_set.dedup();

    let options = inst
        .jobs
        .iter()
        .map(|job| {
            let (u, _) = class_of(job);
            let g = &inst.global_functions[u];
            let mut opts: Vec<(i64, Rat)> = Vec::new();
            for &t in d_set.iter().filter(|&&t| t >= job.r + job.p) {
                let allowed = g.eval_int(t).finite().map_or(false, |v| v <= &budget);
                if !allowed || !job.f.eval_int(t).is_finite() {
                    continue;
                }
                let Some(c) = rounded_cost(job, &rounded, t) else { continue };
                match opts.last_mut() {
                    Some(last) if last.1 == c => last.0 = t,
                    _ => opts.push((t, c)),
                }
            }
            opts.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)));
            opts
        })
        .collect();

    let releases = inst.release_dates();
    let rho = releases
        .iter()
        .flat_map(|&r| d_set.iter().filter(move |&&t| t >= r).map(move |&t| (r, t)))
        .filter(|&(r, t)| interval_excess(&inst.jobs, r, t) > 0)
        .count();
    let guess_bound = ceil_usize(&(int(rho as i64) / &cfg.eps)).min(n);
    let guess_size = cfg.guess_size.unwrap_or(guess_bound).min(n);
    Ok(BudgetSetup {
        budget,
        rounded,
        d_set,
        options,
        guess_size,
        guess_bound,
        certified: guess_size >= guess_bound,
    })
}

/// Interval test on a partial assignment: for every release `r` and due date `d`, the
/// assigned jobs released in `[r, d]` and due by `d` fit into `[r, d]`.
fn partial_feasible(jobs: &[Job], due: &[Option<i64>]) -> bool {
    let items: Vec<(i64, i64, i64)> = jobs
        .iter()
        .zip(due)
        .filter_map(|(j, d)| d.map(|d| (j.r, j.p, d)))
        .collect();
    items.iter().all(|&(r, _, _)| {
        items.iter().all(|&(_, _, d)| {
            d < r || items.iter().filter(|&&(rj, _, dj)| rj >= r && dj <= d).map(|x| x.1).sum::<i64>() <= d - r
        })
    })
}

#[derive(Debug, Clone)]
struct Leaf {
    cost: Rat,
    due: Vec<i64>,
}

struct Search<'a> {
    jobs: &'a [Job],
    setup: &'a BudgetSetup,
    releases: &'a [i64],
    eps: &'a Rat,
    suffix_min: Vec<Rat>,
    node_budget: u64,
    due: Vec<Option<i64>>,
    cost: Vec<Option<Rat>>,
    guessed: usize,
    best: Option<Leaf>,
    stats: FewClassStats,
}

impl Search<'_> {
    fn dfs(&mut self, j: usize, partial: Rat) {
        self.stats.nodes += 1;
        if self.stats.nodes > self.node_budget {
            self.stats.cap_hit = true;
            return;
        }
        if self.best.as_ref().map_or(false, |b| &partial + &self.suffix_min[j] >= b.cost) {
            return;
        }
        let n = self.jobs.len();
        if j == n {
            self.leaf(partial);
            return;
        }
        let need = self.setup.guess_size - self.guessed;
        if need > 0 {
            for k in 0..self.setup.options[j].len() {
                let (t, c) = self.setup.options[j][k].clone();
                self.due[j] = Some(t);
                if partial_feasible(self.jobs, &self.due) {
                    self.cost[j] = Some(c.clone());
                    self.guessed += 1;
                    self.dfs(j + 1, &partial + &c);
                    self.guessed -= 1;
                    self.cost[j] = None;
                }
                self.due[j] = None;
            }
        }
        if n - j > need {
            self.dfs(j + 1, partial);
        }
    }

    fn leaf(&mut self, partial: Rat) {
        let n = self.jobs.len();
        if self.guessed == n {
            let due: Vec<i64> = self.due.iter().map(|d| d.expect("all guessed")).collect();
            self.offer(Leaf { cost: partial, due });
            return;
        }
        let c_thres = self.cost.iter().flatten().min().cloned();
        let dlp = build_due_date_lp(
            self.jobs,
            &self.due,
            &self.setup.options,
            c_thres.as_ref(),
            &self.setup.d_set,
            self.releases,
        );
        let Ok(sol) = solve_to_basic_optimum(&dlp.lp) else { return };
        if !sol.is_optimal() {
            return;
        }
        self.stats.lp_solves += 1;
        let cover_rows = dlp.lp.num_rows() - dlp.free.len();
        self.stats.max_lp_rows = self.stats.max_lp_rows.max(cover_rows);
        let rounded = round_due_date_lp(&dlp, &sol, n);
        self.stats.max_rounded_up = self.stats.max_rounded_up.max(rounded.rounded_up);

        let mut due = vec![0i64; n];
        let mut out_cost = Rat::zero();
        let mut max_free = Rat::zero();
        for j in 0..n {
            match (self.due[j], rounded.due[j]) {
                (Some(d), _) => due[j] = d,
                (None, Some(d)) => {
                    due[j] = d;
                    let c = self.setup.options[j].iter().find(|o| o.0 == d).expect("LP option").1.clone();
                    max_free = max_free.max(c.clone());
                    out_cost += c;
                }
                (None, None) => return,
            }
        }
        self.stats.rounding_checks += 1;
        let step = c_thres.unwrap_or(max_free);
        let mut holds = out_cost <= &sol.objective + int(rounded.rounded_up as i64) * &step;
        if self.setup.certified {
            holds &= out_cost <= &sol.objective + self.eps * &partial;
        }
        if !holds {
            self.stats.rounding_violations += 1;
        }
        if !edd_feasible(self.jobs, &due) {
            self.stats.infeasible_roundings += 1;
            return;
        }
        self.offer(Leaf { cost: partial + out_cost, due });
    }

    fn offer(&mut self, leaf: Leaf) {
        if self.best.as_ref().map_or(true, |b| leaf.cost < b.cost) {
            self.best = Some(leaf);
        }
    }
}

/// Best rounded assignment for one budget, with search statistics.
fn search_budget(inst: &GspInstance, cfg: &FewClassConfig, setup: &BudgetSetup) -> (Option<Leaf>, FewClassStats) {
    let n = inst.n();
    let releases = inst.release_dates();
    let mut suffix_min = vec![Rat::zero(); n + 1];
    for j in (0..n).rev() {
        let m = setup.options[j].first().map_or_else(Rat::zero, |o| o.1.clone());
        suffix_min[j] = &suffix_min[j + 1] + m;
    }
    if setup.options.iter().any(|o| o.is_empty()) {
        return (None, FewClassStats::default());
    }
    let new_search = || Search {
        jobs: &inst.jobs,
        setup,
        releases: &releases,
        eps: &cfg.eps,
        suffix_min: suffix_min.clone(),
        node_budget: cfg.node_budget,
        due: vec![None; n],
        cost: vec![None; n],
        guessed: 0,
        best: None,
        stats: FewClassStats::default(),
    };
    if n == 0 {
        let mut s = new_search();
        s.dfs(0, Rat::zero());
        return (s.best, s.stats);
    }
    // Top-level branches: each option of job 0 when guessing, then leaving it to the LP.
    let mut branches: Vec<Option<usize>> = Vec::new();
    if setup.guess_size > 0 {
        branches.extend((0..setup.options[0].len()).map(Some));
    }
    if n > setup.guess_size {
        branches.push(None);
    }
    let results = par::map(cfg.exec, &branches, |b| {
        let mut s = new_search();
        s.stats.nodes = 1;
        match b {
            Some(k) => {
                let (t, c) = setup.options[0][*k].clone();
                s.due[0] = Some(t);
                s.cost[0] = Some(c.clone());
                s.guessed = 1;
                s.dfs(1, c);
            }
            None => s.dfs(1, Rat::zero()),
        }
        (s.best, s.stats)
    });
    let mut best: Option<Leaf> = None;
    let mut stats = FewClassStats::default();
    for (leaf, st) in results {
        stats.absorb(&st);
        if let Some(l) = leaf {
            if best.as_ref().map_or(true, |b| l.cost < b.cost) {
                best = Some(l);
            }
        }
    }
    (best, stats)
}

/// Moves each due date down to the earliest candidate with the same rounded cost that keeps
/// the assignment feasible.
fn tighten(inst: &GspInstance, setup: &BudgetSetup, due: &mut [i64]) {
    for j in 0..due.len() {
        let job = &inst.jobs[j];
        let old = due[j];
        let current = rounded_cost(job, &setup.rounded, old);
        for &t in setup.d_set.iter().filter(|&&t| t >= job.r + job.p && t < old) {
            if rounded_cost(job, &setup.rounded, t) != current || !job.f.eval_int(t).is_finite() {
                continue;
            }
            due[j] = t;
            if edd_feasible(&inst.jobs, due) {
                break;
            }
            due[j] = old;
        }
    }
}

/// Budget range `[lb, ub]` bracketing the optimum; `(1, 1)` when every cost is zero.
fn budget_range(inst: &GspInstance) -> Result<(Rat, Rat)> {
    let mut lb = Rat::zero();
    for job in &inst.jobs {
        match job.f.eval_int(job.r + job.p).finite() {
            Some(v) => lb = lb.max(v.clone()),
            None => return Err(Error::Infeasible(format!("job {} cannot meet any due date", job.id))),
        }
    }
    let values = || inst.jobs.iter().flat_map(|j| j.f.breakpoints().iter().map(|(_, v)| v.clone()));
    if lb.is_zero() {
        lb = values().filter(|v| v > &Rat::zero()).min().unwrap_or_else(Rat::zero);
    }
    let ub: Rat = inst
        .jobs
        .iter()
        .map(|j| j.f.breakpoints().iter().map(|(_, v)| v.clone()).max().unwrap_or_else(Rat::zero))
        .sum();
    if lb.is_zero() || ub.is_zero() {
        return Ok((Rat::one(), Rat::one()));
    }
    Ok((lb.clone(), ub.max(lb)))
}

/// Scans the budget grid upward and returns the first budget whose rounded optimum meets
/// `(1+eps)(1+2eps) B`; if none does, the cheapest assignment seen.
pub fn solve_few_classes(inst: &GspInstance, cfg: &FewClassConfig) -> Result<FewClassSolution> {
    if cfg.eps <= Rat::zero() || cfg.eps > Rat::one() {
        return Err(Error::Precondition("eps must lie in (0, 1]".into()));
    }
    if inst.n() > 0 && !inst.is_class_form() {
        return Err(Error::Precondition("every job needs a class and a weight".into()));
    }
    let releases = inst.release_dates();
    if releases.len() > cfg.max_releases {
        return Err(Error::Precondition(format!(
            "{} distinct release dates exceed the bound {}",
            releases.len(),
            cfg.max_releases
        )));
    }
    let base = Rat::one() + &cfg.eps;
    let (lb, ub) = budget_range(inst)?;
    let (k_lo, _) = floor_log(&base, &lb);
    let (k_hi, _) = ceil_log(&base, &ub);
    let accept = lemma_factor(&cfg.eps);

    let mut stats = FewClassStats::default();
    let mut fallback: Option<(Rat, Leaf, BudgetSetup)> = None;
    let mut chosen: Option<(Leaf, BudgetSetup)> = None;
    for k in k_lo..=k_hi {
        let setup = setup_budget(inst, cfg, powi(&base, k))?;
        let (leaf, st) = search_budget(inst, cfg, &setup);
        stats.budgets_tried += 1;
        stats.absorb(&st);
        let Some(leaf) = leaf else { continue };
        if leaf.cost <= &accept * &setup.budget {
            stats.accepted = true;
            chosen = Some((leaf, setup));
            break;
        }
        let true_cost = DueDateAssignment { due: leaf.due.clone() }.cost(inst);
        let true_cost = true_cost.finite().cloned().expect("allowed options are finite");
        if fallback.as_ref().map_or(true, |(c, _, _)| true_cost < *c) {
            fallback = Some((true_cost, leaf, setup));
        }
    }
    let (leaf, setup) = match (chosen, fallback) {
        (Some(c), _) => c,
        (None, Some((_, l, s))) => (l, s),
        (None, None) => return Err(Error::Infeasible("no feasible due-date assignment".into())),
    };

    let mut due = leaf.due;
    tighten(inst, &setup, &mut due);
    let assignment = DueDateAssignment { due };
    let cost = assignment.cost(inst).finite().cloned().expect("allowed options are finite");
    let rounded_cost = inst
        .jobs
        .iter()
        .zip(&assignment.due)
        .map(|(j, &d)| rounded_cost(j, &setup.rounded, d).expect("finite rounded cost"))
        .sum();
    let schedule = edd_schedule(&inst.jobs, &assignment.due);
    stats.candidate_dates = setup.d_set.len();
    stats.guess_size = setup.guess_size;
    stats.guess_bound = setup.guess_bound;
    stats.certified = setup.certified;
    Ok(FewClassSolution {
        assignment,
        schedule,
        cost,
        rounded_cost,
        budget: setup.budget,
        d_set: setup.d_set,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::gsp::fixtures::linear;
    use crate::oracles::exact_due_dates;
    use crate::rational::frac;
    use crate::workbench::generate::{generate_gsp, GspParams};

    fn two_class_g1() -> GspInstance {
        // G1 rewritten with f_1 = 1 * t and f_2 = 2 * t on a common horizon.
        let g = linear(1, 5);
        let jobs = vec![Job::in_class(0, 2, 0, 1, 0, &g), Job::in_class(1, 3, 0, 2, 0, &g)];
        GspInstance::new(jobs, vec![g], 2).unwrap()
    }

    fn optimum(inst: &GspInstance) -> Rat {
        let all: Vec<i64> = (0..=inst.horizon()).collect();
        exact_due_dates(inst, &all, 10_000_000, Execution::Sequential).unwrap().unwrap().cost
    }

    #[test]
    fn g1_two_classes() {
        let inst = two_class_g1();
        let sol = solve_few_classes(&inst, &FewClassConfig::new(frac(1, 2))).unwrap();
        let opt = optimum(&inst);
        assert!(sol.cost <= lemma_factor(&frac(1, 2)) * &opt, "{} vs {}", sol.cost, opt);
        assert!(edd_feasible(&inst.jobs, &sol.assignment.due));
        assert!(sol.cost <= sol.rounded_cost);
        assert_eq!(sol.stats.rounding_violations, 0);
    }

    #[test]
    fn single_job() {
        let g = StepCostFunction::new(vec![(int(2), int(3)), (int(6), int(10))], None).unwrap();
        let inst = GspInstance::new(vec![Job::in_class(0, 4, 0, 1, 0, &g)], vec![g], 1).unwrap();
        let sol = solve_few_classes(&inst, &FewClassConfig::new(frac(1, 2))).unwrap();
        let earliest = *sol.d_set.iter().find(|&&t| t >= 4).unwrap();
        assert_eq!(sol.assignment.due, vec![earliest]);
        assert_eq!(sol.cost, int(3));
        assert!(sol.rounded_cost >= int(3) && sol.rounded_cost <= frac(9, 2));
    }

    #[test]
    fn all_zero() {
        let g = StepCostFunction::zero();
        let jobs = (0..3).map(|i| Job::in_class(i, 2, 0, 1, 0, &g)).collect();
        let inst = GspInstance::new(jobs, vec![g], 1).unwrap();
        let sol = solve_few_classes(&inst, &FewClassConfig::new(frac(1, 2))).unwrap();
        assert_eq!(sol.cost, Rat::zero());
        assert_eq!(sol.schedule.completion.len(), 3);
    }

    #[test]
    fn rejects_plain_and_many_releases() {
        let plain = GspInstance::from_jobs(vec![Job::new(0, 1, 0, linear(1, 3))]).unwrap();
        assert!(solve_few_classes(&plain, &FewClassConfig::new(frac(1, 2))).is_err());
        let g = linear(1, 20);
        let jobs = (0..3).map(|i| Job::in_class(i, 1, i as i64, 1, 0, &g)).collect();
        let inst = GspInstance::new(jobs, vec![g], 1).unwrap();
        let mut cfg = FewClassConfig::new(frac(1, 2));
        cfg.max_releases = 2;
        assert!(solve_few_classes(&inst, &cfg).is_err());
    }

    #[test]
    fn random_against_oracle() {
        let eps = frac(1, 2);
        for seed in 0..15 {
            let params = GspParams { n: 5, classes: 2, releases: vec![0, 3], ..GspParams::default() };
            let inst = generate_gsp(seed, &params).unwrap();
            let sol = solve_few_classes(&inst, &FewClassConfig::new(eps.clone())).unwrap();
            let opt = optimum(&inst);
            assert!(sol.cost <= lemma_factor(&eps) * &opt, "seed {seed}: {} vs {}", sol.cost, opt);
            assert!(edd_feasible(&inst.jobs, &sol.assignment.due));
            assert_eq!(sol.stats.rounding_violations, 0);
            assert!(!sol.stats.cap_hit);
        }
    }

    #[test]
    fn small_guess_uses_lp() {
        let eps = frac(1, 2);
        for seed in 0..10 {
            let params = GspParams { n: 6, classes: 2, releases: vec![0, 2], ..GspParams::default() };
            let inst = generate_gsp(seed, &params).unwrap();
            let mut cfg = FewClassConfig::new(eps.clone());
            cfg.guess_size = Some(2);
            let sol = solve_few_classes(&inst, &cfg).unwrap();
            assert!(sol.stats.lp_solves > 0);
            assert!(sol.stats.max_rounded_up <= sol.stats.max_lp_rows);
            assert_eq!(sol.stats.rounding_violations, 0);
            assert!(edd_feasible(&inst.jobs, &sol.assignment.due));
        }
    }

    #[test]
    fn parallel_matches_sequential() {
        let params = GspParams { n: 6, classes: 3, releases: vec![0, 4], ..GspParams::default() };
        let inst = generate_gsp(7, &params).unwrap();
        let mut cfg = FewClassConfig::new(frac(1, 2));
        cfg.exec = Execution::Sequential;
        let a = solve_few_classes(&inst, &cfg).unwrap();
        cfg.exec = Execution::Parallel;
        let b = solve_few_classes(&inst, &cfg).unwrap();
        assert_eq!(a.assignment, b.assignment);
        assert_eq!(a.cost, b.cost);
    }
}
