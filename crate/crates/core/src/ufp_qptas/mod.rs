//! Quasi-polynomial approximation scheme for UFP-cover: budget guessing, cheap/expensive
//! preprocessing and the middle-edge recursion.

pub mod candidates;
pub mod groups;
mod recursion;
pub mod stats;

use num_traits::{One, Signed};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ufp::{induced_heights, is_feasible_cover, UfpCoverInstance};
use crate::par::Execution;
use crate::rational::{ceil_log, floor_log, int, Rat};

pub use candidates::{
    augment_edge_tasks, build_group_candidates, cover_profile_lp, small_guess_limit, Candidate, CoverLpOutcome,
    Origin,
};
pub use groups::{
    approx_profile_count, class_profiles, enumerate_approx_profiles, group_key, group_tasks, height_levels,
    GroupKey, LevelEdges, TaskGroup,
};
pub use stats::{QptasStats, StatsSnapshot};

pub const DEFAULT_CANDIDATE_CAP: usize = 64;

#[derive(Debug, Clone)]
pub struct QptasConfig {
    pub epsilon: Rat,
    /// Maximum candidates kept per group and per combined list.
    pub candidate_cap: usize,
    pub exec: Execution,
}

impl QptasConfig {
    pub fn new(epsilon: Rat) -> Self {
        QptasConfig {
            epsilon,
            candidate_cap: DEFAULT_CANDIDATE_CAP,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Preprocessed {
    pub kept: Vec<usize>,
    pub auto_selected: Vec<usize>,
    pub rejected: Vec<usize>,
    pub residual: Vec<i64>,
}

/// Rejects tasks costing more than `budget`, selects those costing at most
/// `eps * budget / n`, and lowers the demands by what the selected ones cover.
pub fn preprocess(inst: &UfpCoverInstance, budget: &Rat, eps: &Rat) -> Result<Preprocessed> {
    if !budget.is_positive() {
        return Err(Error::Precondition("budget must be positive".into()));
    }
    let n = inst.tasks.len().max(1) as i64;
    let cheap = eps * budget / int(n);
    let mut out = Preprocessed {
        kept: vec![],
        auto_selected: vec![],
        rejected: vec![],
        residual: vec![],
    };
    for (i, t) in inst.tasks.iter().enumerate() {
        if &t.c > budget {
            out.rejected.push(i);
        } else if t.c <= cheap {
            out.auto_selected.push(i);
        } else {
            out.kept.push(i);
        }
    }
    let covered = induced_heights(out.auto_selected.iter().map(|&i| &inst.tasks[i]), inst.edge_count())?;
    out.residual = inst.demands.iter().zip(&covered).map(|(d, c)| (d - c).max(0)).collect();
    Ok(out)
}

/// Per-group blow-up `1 + 2 eps (1+eps) (2+eps)`.
pub fn group_factor(eps: &Rat) -> Rat {
    let one = Rat::one();
    &one + int(2) * eps * (&one + eps) * (int(2) + eps)
}

/// Budget acceptance slack: preprocessing times group factor.
pub fn acceptance_factor(eps: &Rat) -> Rat {
    (Rat::one() + eps) * group_factor(eps)
}

/// End-to-end guarantee: acceptance slack times the budget grid step.
pub fn guarantee_factor(eps: &Rat) -> Rat {
    acceptance_factor(eps) * (Rat::one() + eps)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UfpSolution {
    /// Task indices, ascending.
    pub tasks: Vec<usize>,
    #[serde(serialize_with = "crate::rational::serialize_rat")]
    pub cost: Rat,
    /// Budget at which the run was accepted.
    #[serde(serialize_with = "crate::rational::serialize_rat")]
    pub budget: Rat,
    pub budgets_tried: usize,
    /// False only when no budget met the slack and the largest one was used as fallback.
    pub within_slack: bool,
    #[serde(serialize_with = "crate::rational::serialize_rat")]
    pub guarantee: Rat,
    pub stats: StatsSnapshot,
}

/// Powers of `1+eps` from the one at or below the cheapest positive cost to the one
/// at or above the total cost.
pub fn budget_grid(inst: &UfpCoverInstance, eps: &Rat) -> Vec<Rat> {
    let base = Rat::one() + eps;
    let positive: Vec<&Rat> = inst.tasks.iter().map(|t| &t.c).filter(|c| c.is_positive()).collect();
    let Some(min) = positive.iter().min() else {
        return vec![Rat::one()];
    };
    let total: Rat = positive.iter().copied().sum();
    let (lo, mut b) = floor_log(&base, min);
    let (hi, _) = ceil_log(&base, &total);
    let mut out = Vec::new();
    for _ in lo..=hi {
        out.push(b.clone());
        b *= &base;
    }
    out
}

/// Runs the scheme. `Ok(None)` iff the instance has no feasible cover.
pub fn solve_qptas(inst: &UfpCoverInstance, cfg: &QptasConfig) -> Result<Option<UfpSolution>> {
    inst.validate()?;
    let eps = &cfg.epsilon;
    if !eps.is_positive() {
        return Err(Error::Precondition("epsilon must be positive".into()));
    }
    let all: Vec<usize> = (0..inst.tasks.len()).collect();
    if !is_feasible_cover(inst, &all) {
        return Ok(None);
    }
    let stats = QptasStats::default();
    let slack = acceptance_factor(eps);
    let grid = budget_grid(inst, eps);
    let ctx = recursion::Ctx {
        inst,
        eps,
        cap: cfg.candidate_cap,
        exec: cfg.exec,
        stats: &stats,
    };
    let mut fallback: Option<(Rat, Vec<usize>, Rat, usize)> = None;
    for (idx, budget) in grid.iter().enumerate() {
        let pre = preprocess(inst, budget, eps)?;
        let Some((cost, mut tasks)) = recursion::solve_sub(&ctx, 0, &pre.residual, &pre.kept)? else {
            continue;
        };
        tasks.extend(&pre.auto_selected);
        tasks.sort_unstable();
        let total = cost + inst.cost_of(&pre.auto_selected);
        debug_assert!(is_feasible_cover(inst, &tasks));
        if total <= &slack * budget {
            return Ok(Some(UfpSolution {
                tasks,
                cost: total,
                budget: budget.clone(),
                budgets_tried: idx + 1,
                within_slack: true,
                guarantee: guarantee_factor(eps),
                stats: stats.snapshot(),
            }));
        }
        if fallback.as_ref().map_or(true, |f| total < f.0) {
            fallback = Some((total, tasks, budget.clone(), idx + 1));
        }
    }
    match fallback {
        Some((cost, tasks, budget, _)) => Ok(Some(UfpSolution {
            tasks,
            cost,
            budget,
            budgets_tried: grid.len(),
            within_slack: false,
            guarantee: guarantee_factor(eps),
            stats: stats.snapshot(),
        })),
        None => Err(Error::Numeric("no budget produced a cover on a feasible instance".into())),
    }
}
