//! Brute-force exact solvers used as ground truth.

use std::collections::BTreeSet;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::model::edd::edd_feasible;
use crate::model::gsp::{DueDateAssignment, GspInstance, Job, Schedule};
use crate::model::step::Cost;
use crate::model::ufp::UfpCoverInstance;
use crate::par::{self, Execution};
use crate::rational::{from_scaled, scale_to_i128, Rat};

pub const DEFAULT_UFP_CAP: usize = 20;
pub const DEFAULT_GSP_CAP: usize = 9;
pub const DEFAULT_DUE_DATE_NODES: u64 = 50_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UfpOptimum {
    /// Sorted task ids.
    pub tasks: Vec<usize>,
    pub cost: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GspOptimum {
    pub schedule: Schedule,
    pub cost: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DueDateOptimum {
    pub assignment: DueDateAssignment,
    pub cost: Rat,
}

/// `true` iff the sorted id list of `a` is lexicographically smaller than that of `b`.
fn lex_less(a: u64, b: u64) -> bool {
    let diff = a ^ b;
    if diff == 0 {
        return false;
    }
    let low = diff.trailing_zeros();
    let (with, other) = if a >> low & 1 == 1 { (a, b) } else { (b, a) };
    let beyond = other >> low >> 1;
    let with_is_smaller = beyond != 0;
    (with == a) == with_is_smaller
}

/// Minimum-cost feasible cover by enumerating all subsets. `Ok(None)` when no cover exists.
pub fn exact_ufp_cover(inst: &UfpCoverInstance, cap: usize, exec: Execution) -> Result<Option<UfpOptimum>> {
    let n = inst.tasks.len();
    if n > cap.min(62) {
        return Err(Error::CapExceeded {
            what: "ufp tasks",
            needed: n as u128,
            cap: cap as u128,
        });
    }
    let all: Vec<usize> = (0..n).collect();
    if !crate::model::ufp::is_feasible_cover(inst, &all) {
        return Ok(None);
    }
    let costs: Vec<Rat> = inst.tasks.iter().map(|t| t.c.clone()).collect();
    let (scaled, scale) = scale_to_i128(&costs)?;
    let m = inst.edge_count();

    // Split on the top `k` task bits; each chunk walks the rest in Gray-code order.
    let k = n.min(6);
    let low = n - k;
    let chunks = par::map_range(exec, 1usize << k, |hi| {
        let mut heights = vec![0i64; m];
        let mut cost: i128 = 0;
        let mut mask: u64 = (hi as u64) << low;
        let apply = |heights: &mut Vec<i64>, cost: &mut i128, i: usize, sign: i64| {
            let t = &inst.tasks[i];
            for h in &mut heights[t.s..t.t] {
                *h += sign * t.p;
            }
            *cost += sign as i128 * scaled[i];
        };
        for i in low..n {
            if mask >> i & 1 == 1 {
                apply(&mut heights, &mut cost, i, 1);
            }
        }
        let covered = |h: &[i64]| h.iter().zip(&inst.demands).all(|(a, b)| a >= b);
        let mut best: Option<(i128, u64)> = None;
        let consider = |cost: i128, mask: u64, best: &mut Option<(i128, u64)>| {
            let better = match best {
                None => true,
                Some((bc, bm)) => cost < *bc || (cost == *bc && lex_less(mask, *bm)),
            };
            if better {
                *best = Some((cost, mask));
            }
        };
        if covered(&heights) {
            consider(cost, mask, &mut best);
        }
        for step in 1u64..(1u64 << low) {
            let i = step.trailing_zeros() as usize;
            let sign = if mask >> i & 1 == 1 { -1 } else { 1 };
            mask ^= 1 << i;
            apply(&mut heights, &mut cost, i, sign);
            if covered(&heights) {
                consider(cost, mask, &mut best);
            }
        }
        best
    });
    let mut best: Option<(i128, u64)> = None;
    for (c, mk) in chunks.into_iter().flatten() {
        let better = match best {
            None => true,
            Some((bc, bm)) => c < bc || (c == bc && lex_less(mk, bm)),
        };
        if better {
            best = Some((c, mk));
        }
    }
    Ok(best.map(|(c, mk)| UfpOptimum {
        tasks: (0..n).filter(|i| mk >> i & 1 == 1).collect(),
        cost: from_scaled(c, &scale),
    }))
}

/// Integer-time cost table; `None` marks infinite cost.
struct CostTable {
    scale: num_bigint::BigInt,
    table: Vec<Vec<Option<i128>>>,
}

impl CostTable {
    fn new(jobs: &[Job], horizon: i64) -> Result<Self> {
        let mut finite: Vec<Rat> = Vec::new();
        let mut raw: Vec<Vec<Cost>> = Vec::with_capacity(jobs.len());
        for j in jobs {
            let row: Vec<Cost> = (0..=horizon).map(|t| j.f.eval_int(t)).collect();
            finite.extend(row.iter().filter_map(|c| c.finite().cloned()));
            raw.push(row);
        }
        let (_, scale) = scale_to_i128(&finite)?;
        let table = raw
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|c| {
                        c.finite().map(|v| {
                            let s = v * Rat::from_integer(scale.clone());
                            i128::try_from(s.to_integer()).expect("scaled by common denominator")
                        })
                    })
                    .collect()
            })
            .collect();
        Ok(CostTable { scale, table })
    }

    fn at(&self, j: usize, t: i64) -> Option<i128> {
        self.table[j][t as usize]
    }
}

/// Minimum of `sum f_j(C_j)` over all idle-free orders at unit speed, all jobs released
/// together. Ties go to the lexicographically smallest order. `Ok(None)` when every order
/// hits an infinite cost.
pub fn exact_gsp_uniform_release(inst: &GspInstance, cap: usize, exec: Execution) -> Result<Option<GspOptimum>> {
    let n = inst.n();
    if n > cap {
        return Err(Error::CapExceeded {
            what: "gsp jobs",
            needed: n as u128,
            cap: cap as u128,
        });
    }
    if !inst.has_uniform_release() {
        return Err(Error::Precondition("exact permutation oracle needs a common release date".into()));
    }
    if n == 0 {
        return Ok(Some(GspOptimum {
            schedule: Schedule::empty(),
            cost: Rat::zero(),
        }));
    }
    let r0 = inst.jobs[0].r;
    let table = CostTable::new(&inst.jobs, inst.horizon())?;
    let p: Vec<i64> = inst.jobs.iter().map(|j| j.p).collect();

    struct Search<'a> {
        table: &'a CostTable,
        p: &'a [i64],
        used: Vec<bool>,
        order: Vec<usize>,
        best: Option<(i128, Vec<usize>)>,
    }
    impl Search<'_> {
        fn bound(&self, t: i64) -> Option<i128> {
            let mut b = 0i128;
            for j in 0..self.p.len() {
                if !self.used[j] {
                    b += self.table.at(j, t + self.p[j])?;
                }
            }
            Some(b)
        }
        fn dfs(&mut self, t: i64, cost: i128) {
            if self.order.len() == self.p.len() {
                if self.best.as_ref().map_or(true, |(b, _)| cost < *b) {
                    self.best = Some((cost, self.order.clone()));
                }
                return;
            }
            let Some(lb) = self.bound(t) else { return };
            if self.best.as_ref().map_or(false, |(b, _)| cost + lb >= *b) {
                return;
            }
            for j in 0..self.p.len() {
                if self.used[j] {
                    continue;
                }
                let c = t + self.p[j];
                let Some(fc) = self.table.at(j, c) else { continue };
                self.used[j] = true;
                self.order.push(j);
                self.dfs(c, cost + fc);
                self.order.pop();
                self.used[j] = false;
            }
        }
    }

    let branches = par::map_range(exec, n, |first| {
        let c = r0 + p[first];
        let fc = table.at(first, c)?;
        let mut s = Search {
            table: &table,
            p: &p,
            used: vec![false; n],
            order: vec![first],
            best: None,
        };
        s.used[first] = true;
        s.dfs(c, fc);
        s.best
    });
    let best = branches
        .into_iter()
        .flatten()
        .min_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    Ok(best.map(|(c, order)| GspOptimum {
        schedule: Schedule::sequential(inst, &order, Rat::from_integer(1.into())),
        cost: from_scaled(c, &table.scale),
    }))
}

/// Every completion time some idle-free order can produce: `r + sum of a nonempty subset`.
pub fn permutation_completion_times(inst: &GspInstance) -> Result<Vec<i64>> {
    if !inst.has_uniform_release() {
        return Err(Error::Precondition("completion-time set needs a common release date".into()));
    }
    let r0 = inst.jobs.first().map_or(0, |j| j.r);
    let mut sums: BTreeSet<i64> = BTreeSet::from([0]);
    for j in &inst.jobs {
        let next: Vec<i64> = sums.iter().map(|s| s + j.p).collect();
        sums.extend(next);
    }
    sums.remove(&0);
    Ok(sums.into_iter().map(|s| s + r0).collect())
}

/// Minimum `sum f_j(d_j)` over EDD-feasible assignments with every `d_j` in `d_set`.
/// Ties go to the lexicographically smallest due-date vector. `node_budget` bounds the
/// number of search nodes.
pub fn exact_due_dates(
    inst: &GspInstance,
    d_set: &[i64],
    node_budget: u64,
    exec: Execution,
) -> Result<Option<DueDateOptimum>> {
    let n = inst.n();
    let mut ds: Vec<i64> = d_set.iter().copied().filter(|&d| d >= 0).collect();
    ds.sort_unstable();
    ds.dedup();
    if n == 0 {
        return Ok(Some(DueDateOptimum {
            assignment: DueDateAssignment { due: vec![] },
            cost: Rat::zero(),
        }));
    }
    let horizon = ds.iter().copied().max().unwrap_or(0).max(inst.horizon());
    let table = CostTable::new(&inst.jobs, horizon)?;
    // Per job: admissible due dates (not before release + processing) with finite cost.
    let options: Vec<Vec<(i64, i128)>> = inst
        .jobs
        .iter()
        .enumerate()
        .map(|(j, job)| {
            ds.iter()
                .filter(|&&d| d >= job.r + job.p)
                .filter_map(|&d| table.at(j, d).map(|c| (d, c)))
                .collect()
        })
        .collect();
    if options.iter().any(|o| o.is_empty()) {
        return Ok(None);
    }
    // Cheapest remaining completion from job `j` on.
    let mut suffix_min = vec![0i128; n + 1];
    for j in (0..n).rev() {
        suffix_min[j] = suffix_min[j + 1] + options[j].iter().map(|o| o.1).min().unwrap_or(0);
    }

    struct Search<'a> {
        jobs: &'a [Job],
        options: &'a [Vec<(i64, i128)>],
        suffix_min: &'a [i128],
        due: Vec<i64>,
        best: Option<(i128, Vec<i64>)>,
        nodes: u64,
        budget: u64,
    }
    impl Search<'_> {
        fn dfs(&mut self, j: usize, cost: i128) -> bool {
            self.nodes += 1;
            if self.nodes > self.budget {
                return false;
            }
            if self.best.as_ref().map_or(false, |(b, _)| cost + self.suffix_min[j] >= *b) {
                return true;
            }
            if !edd_feasible(&self.jobs[..j], &self.due) {
                return true;
            }
            if j == self.jobs.len() {
                self.best = Some((cost, self.due.clone()));
                return true;
            }
            for k in 0..self.options[j].len() {
                let (d, c) = self.options[j][k];
                self.due.push(d);
                let ok = self.dfs(j + 1, cost + c);
                self.due.pop();
                if !ok {
                    return false;
                }
            }
            true
        }
    }

    let branches = par::map(exec, &options[0], |&(d, c)| {
        let mut s = Search {
            jobs: &inst.jobs,
            options: &options,
            suffix_min: &suffix_min,
            due: vec![d],
            best: None,
            nodes: 0,
            budget: node_budget,
        };
        let ok = s.dfs(1, c);
        (ok, s.best)
    });
    if branches.iter().any(|(ok, _)| !ok) {
        return Err(Error::CapExceeded {
            what: "due-date search nodes",
            needed: node_budget as u128 + 1,
            cap: node_budget as u128,
        });
    }
    let best = branches
        .into_iter()
        .filter_map(|(_, b)| b)
        .min_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    Ok(best.map(|(c, due)| DueDateOptimum {
        assignment: DueDateAssignment { due },
        cost: from_scaled(c, &table.scale),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::gsp::fixtures::{g1, linear};
    use crate::model::gsp::schedule_cost;
    use crate::model::ufp::fixtures::u1;
    use crate::model::ufp::{is_feasible_cover, UfpTask};
    use crate::rational::int;
    use proptest::prelude::*;

    const SEQ: Execution = Execution::Sequential;

    #[test]
    fn lex_order_on_sets() {
        assert!(lex_less(0b0110, 0b1010)); // {1,2} < {1,3}
        assert!(lex_less(0b0010, 0b0110)); // {1} < {1,2}
        assert!(!lex_less(0b0110, 0b0010));
        assert!(lex_less(0b0001, 0b0010)); // {0} < {1}
        assert!(lex_less(0b0000, 0b0001));
        assert!(!lex_less(0b0101, 0b0101));
    }

    #[test]
    fn ufp_examples() {
        let inst = u1();
        let opt = exact_ufp_cover(&inst, DEFAULT_UFP_CAP, SEQ).unwrap().unwrap();
        assert_eq!(opt.tasks, vec![0, 1]);
        assert_eq!(opt.cost, int(3));
        let zero = UfpCoverInstance::new(vec![0, 0, 0], inst.tasks.clone()).unwrap();
        let opt = exact_ufp_cover(&zero, DEFAULT_UFP_CAP, SEQ).unwrap().unwrap();
        assert!(opt.tasks.is_empty());
        assert_eq!(opt.cost, int(0));
        let gap = UfpCoverInstance::new(
            vec![1, 1],
            vec![UfpTask { id: 0, s: 0, t: 1, p: 5, c: int(1) }],
        )
        .unwrap();
        assert_eq!(exact_ufp_cover(&gap, DEFAULT_UFP_CAP, SEQ).unwrap(), None);
        assert!(exact_ufp_cover(&inst, 3, SEQ).is_err());
    }

    #[test]
    fn parallel_matches_sequential_ufp() {
        let inst = u1();
        assert_eq!(
            exact_ufp_cover(&inst, 20, Execution::Parallel).unwrap(),
            exact_ufp_cover(&inst, 20, SEQ).unwrap()
        );
    }

    #[test]
    fn gsp_examples() {
        let inst = g1();
        let opt = exact_gsp_uniform_release(&inst, DEFAULT_GSP_CAP, SEQ).unwrap().unwrap();
        assert_eq!(opt.schedule.order(), vec![1, 0]);
        assert_eq!(opt.cost, int(11));

        let single = GspInstance::from_jobs(vec![Job::new(0, 4, 0, linear(3, 10))]).unwrap();
        let opt = exact_gsp_uniform_release(&single, DEFAULT_GSP_CAP, SEQ).unwrap().unwrap();
        assert_eq!(opt.cost, int(12));

        let twins = GspInstance::from_jobs(vec![
            Job::new(0, 2, 0, linear(1, 10)),
            Job::new(1, 2, 0, linear(1, 10)),
        ])
        .unwrap();
        let opt = exact_gsp_uniform_release(&twins, DEFAULT_GSP_CAP, SEQ).unwrap().unwrap();
        assert_eq!(opt.schedule.order(), vec![0, 1]);
        assert_eq!(opt.cost, int(6));
    }

    #[test]
    fn due_date_examples() {
        let inst = g1();
        let opt = exact_due_dates(&inst, &[2, 3, 5], DEFAULT_DUE_DATE_NODES, SEQ).unwrap().unwrap();
        assert_eq!(opt.assignment.due, vec![5, 3]);
        assert_eq!(opt.cost, int(11));
        // With D={2,5}: (2,5) costs 12; (5,2) is out since job 2 needs 3 time units.
        let opt = exact_due_dates(&inst, &[2, 5], DEFAULT_DUE_DATE_NODES, SEQ).unwrap().unwrap();
        assert_eq!(opt.assignment.due, vec![2, 5]);
        assert_eq!(opt.cost, int(12));

        let one = GspInstance::from_jobs(vec![Job::new(0, 3, 0, linear(1, 10))]).unwrap();
        let opt = exact_due_dates(&one, &[3], DEFAULT_DUE_DATE_NODES, SEQ).unwrap().unwrap();
        assert_eq!(opt.assignment.due, vec![3]);
        assert_eq!(exact_due_dates(&inst, &[1], DEFAULT_DUE_DATE_NODES, SEQ).unwrap(), None);
        assert!(exact_due_dates(&inst, &[2, 3, 5], 1, SEQ).is_err());
    }

    fn arb_ufp() -> impl Strategy<Value = UfpCoverInstance> {
        (
            prop::collection::vec(0i64..4, 4),
            prop::collection::vec((0usize..4, 1usize..4, 1i64..4, 0i64..6), 1..9),
        )
            .prop_map(|(d, ts)| {
                let tasks = ts
                    .into_iter()
                    .enumerate()
                    .map(|(id, (s, len, p, c))| UfpTask { id, s, t: (s + len).min(4), p, c: int(c) })
                    .collect();
                UfpCoverInstance::new(d, tasks).unwrap()
            })
    }

    fn subset_cover_brute(inst: &UfpCoverInstance) -> Option<Rat> {
        let n = inst.tasks.len();
        (0u32..1 << n)
            .filter_map(|mask| {
                let chosen: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                is_feasible_cover(inst, &chosen).then(|| inst.cost_of(&chosen))
            })
            .min()
    }

    fn arb_gsp(max_n: usize) -> impl Strategy<Value = GspInstance> {
        prop::collection::vec((1i64..4, prop::collection::vec(0i64..3, 12)), 1..=max_n).prop_map(|spec| {
            let jobs = spec
                .into_iter()
                .enumerate()
                .map(|(i, (p, incs))| {
                    let mut acc = 0;
                    let vals: Vec<Rat> = std::iter::once(int(0))
                        .chain(incs.iter().map(|d| {
                            acc += d;
                            int(acc)
                        }))
                        .collect();
                    Job::new(i, p, 0, crate::model::step::StepCostFunction::from_samples(&vals).unwrap())
                })
                .collect();
            GspInstance::from_jobs(jobs).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ufp_oracle_matches_plain_enumeration(inst in arb_ufp()) {
            let opt = exact_ufp_cover(&inst, 20, SEQ).unwrap();
            prop_assert_eq!(opt.as_ref().map(|o| o.cost.clone()), subset_cover_brute(&inst));
            if let Some(o) = opt {
                prop_assert!(is_feasible_cover(&inst, &o.tasks));
                prop_assert_eq!(inst.cost_of(&o.tasks), o.cost);
            }
        }

        #[test]
        fn ufp_optimum_is_monotone(inst in arb_ufp(), edge in 0usize..4) {
            let base = exact_ufp_cover(&inst, 20, SEQ).unwrap().map(|o| o.cost);
            let mut fewer = inst.clone();
            fewer.tasks.pop();
            if let Some(c) = &base {
                if let Some(f) = exact_ufp_cover(&fewer, 20, SEQ).unwrap() {
                    prop_assert!(&f.cost >= c);
                }
            }
            let mut raised = inst.clone();
            raised.demands[edge] += 1;
            if let Some(r) = exact_ufp_cover(&raised, 20, SEQ).unwrap() {
                prop_assert!(base.is_some());
                prop_assert!(r.cost >= base.unwrap());
            }
        }

        #[test]
        fn due_dates_match_permutations(inst in arb_gsp(5)) {
            let perm = exact_gsp_uniform_release(&inst, 9, SEQ).unwrap();
            let d = permutation_completion_times(&inst).unwrap();
            let dd = exact_due_dates(&inst, &d, DEFAULT_DUE_DATE_NODES, SEQ).unwrap();
            prop_assert_eq!(perm.as_ref().map(|o| o.cost.clone()), dd.map(|o| o.cost));
            if let Some(o) = perm {
                prop_assert_eq!(schedule_cost(&inst, &o.schedule), Cost::Finite(o.cost));
            }
        }
    }
}
