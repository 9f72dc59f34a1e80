//! Middle-edge recursion over subpaths, parameterized by residual demands.

use num_traits::Zero;

use super::candidates::{build_group_candidates, Candidate};
use super::groups::group_tasks;
use super::stats::QptasStats;
use crate::error::Result;
use crate::model::ufp::UfpCoverInstance;
use crate::par::{self, Execution};
use crate::rational::Rat;

pub(crate) struct Ctx<'a> {
    pub inst: &'a UfpCoverInstance,
    pub eps: &'a Rat,
    pub cap: usize,
    pub exec: Execution,
    pub stats: &'a QptasStats,
}

/// A candidate with its coverage on the current subpath, clamped at the residual demand.
#[derive(Debug, Clone)]
pub(crate) struct Partial {
    pub tasks: Vec<usize>,
    pub cost: Rat,
    pub cover: Vec<i64>,
}

fn coverage(inst: &UfpCoverInstance, tasks: &[usize], lo: usize, residual: &[i64]) -> Vec<i64> {
    let mut h = vec![0i64; residual.len()];
    for &i in tasks {
        let t = &inst.tasks[i];
        for e in t.s.max(lo)..t.t.min(lo + residual.len()) {
            h[e - lo] += t.p;
        }
    }
    h.iter_mut().zip(residual).for_each(|(a, &r)| *a = (*a).min(r.max(0)));
    h
}

/// Drops candidates dominated in both cost and coverage, then enforces `cap`,
/// keeping the cheapest ones and the one with the largest coverage.
pub(crate) fn pareto_prune(mut list: Vec<Partial>, cap: usize, stats: &QptasStats) -> Vec<Partial> {
    list.sort_by(|a, b| {
        a.cost
            .cmp(&b.cost)
            .then_with(|| b.cover.iter().sum::<i64>().cmp(&a.cover.iter().sum::<i64>()))
            .then_with(|| a.tasks.cmp(&b.tasks))
    });
    let mut kept: Vec<Partial> = Vec::new();
    for c in list {
        let dominated = kept
            .iter()
            .any(|k| k.cover.iter().zip(&c.cover).all(|(a, b)| a >= b));
        if !dominated {
            kept.push(c);
        }
    }
    if kept.len() > cap.max(1) {
        stats.cap_hit();
        let widest = (0..kept.len())
            .max_by(|&a, &b| {
                let (sa, sb) = (kept[a].cover.iter().sum::<i64>(), kept[b].cover.iter().sum::<i64>());
                sa.cmp(&sb).then_with(|| b.cmp(&a))
            })
            .unwrap_or(0);
        let keep_first = cap.max(1) - usize::from(widest >= cap.max(1));
        let w = kept[widest].clone();
        kept.truncate(keep_first);
        if widest >= keep_first {
            kept.push(w);
        }
    }
    kept
}

/// Best cover of the residual on `lo..lo+residual.len()` using `avail` (tasks inside
/// the subpath). `Ok(None)` stands for an infeasible subproblem.
pub(crate) fn solve_sub(ctx: &Ctx, lo: usize, residual: &[i64], avail: &[usize]) -> Result<Option<(Rat, Vec<usize>)>> {
    ctx.stats.call();
    if residual.iter().all(|&d| d <= 0) {
        return Ok(Some((Rat::zero(), vec![])));
    }
    let m = residual.len();
    if m == 1 {
        return Ok(single_edge(ctx.inst, residual[0], avail));
    }
    let mid = lo + m / 2;
    let crossing: Vec<usize> = avail.iter().copied().filter(|&i| ctx.inst.tasks[i].uses(mid)).collect();
    let left: Vec<usize> = avail.iter().copied().filter(|&i| ctx.inst.tasks[i].t <= mid).collect();
    let right: Vec<usize> = avail.iter().copied().filter(|&i| ctx.inst.tasks[i].s > mid).collect();

    let groups = group_tasks(ctx.inst, &crossing, ctx.eps);
    let per_group = par::map(ctx.exec, &groups, |g| -> Result<Vec<Partial>> {
        let cands = build_group_candidates(ctx.inst, g, ctx.eps, mid, ctx.stats)?;
        let parts = cands
            .into_iter()
            .map(|c: Candidate| Partial {
                cover: coverage(ctx.inst, &c.tasks, lo, residual),
                tasks: c.tasks,
                cost: c.cost,
            })
            .collect();
        Ok(pareto_prune(parts, ctx.cap, ctx.stats))
    });

    let mut combined = vec![Partial {
        tasks: vec![],
        cost: Rat::zero(),
        cover: vec![0; m],
    }];
    for list in per_group {
        let list = list?;
        let mut next = Vec::with_capacity(combined.len() * list.len());
        for a in &combined {
            for b in &list {
                let mut tasks = a.tasks.clone();
                tasks.extend_from_slice(&b.tasks);
                tasks.sort_unstable();
                let cover = a
                    .cover
                    .iter()
                    .zip(&b.cover)
                    .zip(residual)
                    .map(|((x, y), &r)| (x + y).min(r.max(0)))
                    .collect();
                next.push(Partial {
                    tasks,
                    cost: &a.cost + &b.cost,
                    cover,
                });
            }
        }
        combined = pareto_prune(next, ctx.cap, ctx.stats);
    }
    let k = mid - lo;
    combined.retain(|c| c.cover[k] >= residual[k]);

    let results = par::map(ctx.exec, &combined, |c| -> Result<Option<(Rat, Vec<usize>)>> {
        let rest: Vec<i64> = residual.iter().zip(&c.cover).map(|(r, h)| r - h).collect();
        let Some((lc, lt)) = solve_sub(ctx, lo, &rest[..k], &left)? else {
            return Ok(None);
        };
        let Some((rc, rt)) = solve_sub(ctx, mid + 1, &rest[k + 1..], &right)? else {
            return Ok(None);
        };
        let mut tasks = c.tasks.clone();
        tasks.extend(lt);
        tasks.extend(rt);
        tasks.sort_unstable();
        Ok(Some((&c.cost + lc + rc, tasks)))
    });
    let mut best: Option<(Rat, Vec<usize>)> = None;
    for r in results {
        if let Some(cand) = r? {
            if best.as_ref().map_or(true, |b| (&cand.0, &cand.1) < (&b.0, &b.1)) {
                best = Some(cand);
            }
        }
    }
    Ok(best)
}

/// Exact minimum-cost subset of `tasks` with total size at least `demand`
/// (knapsack-cover dynamic program over capped coverage).
pub(crate) fn single_edge(inst: &UfpCoverInstance, demand: i64, tasks: &[usize]) -> Option<(Rat, Vec<usize>)> {
    if demand <= 0 {
        return Some((Rat::zero(), vec![]));
    }
    let d = demand as usize;
    let mut dp: Vec<Option<(Rat, Vec<usize>)>> = vec![None; d + 1];
    dp[0] = Some((Rat::zero(), vec![]));
    let mut order = tasks.to_vec();
    order.sort_unstable();
    for &i in &order {
        let t = &inst.tasks[i];
        for c in (0..=d).rev() {
            let Some((cost, set)) = dp[c].clone() else { continue };
            let to = (c + t.p.max(0) as usize).min(d);
            let mut nset = set;
            nset.push(i);
            let cand = (cost + &t.c, nset);
            if dp[to].as_ref().map_or(true, |b| (&cand.0, &cand.1) < (&b.0, &b.1)) {
                dp[to] = Some(cand);
            }
        }
    }
    dp[d].take()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ufp::fixtures::u1;
    use crate::model::ufp::UfpTask;
    use crate::oracles::exact_ufp_cover;
    use crate::rational::int;

    #[test]
    fn single_edge_matches_oracle() {
        let t = |id, p, c| UfpTask { id, s: 0, t: 1, p, c: int(c) };
        let inst = UfpCoverInstance::new(vec![7], vec![t(0, 3, 2), t(1, 4, 3), t(2, 5, 4), t(3, 2, 1)]).unwrap();
        let (c, set) = single_edge(&inst, 7, &[0, 1, 2, 3]).unwrap();
        let opt = exact_ufp_cover(&inst, 20, Execution::Sequential).unwrap().unwrap();
        assert_eq!(c, opt.cost);
        assert!(crate::model::ufp::is_feasible_cover(&inst, &set));
        assert!(single_edge(&inst, 100, &[0, 1]).is_none());
    }

    #[test]
    fn recursion_on_u1() {
        let inst = u1();
        let stats = QptasStats::default();
        let eps = int(1);
        let ctx = Ctx { inst: &inst, eps: &eps, cap: 64, exec: Execution::Sequential, stats: &stats };
        let (c, set) = solve_sub(&ctx, 0, &inst.demands, &[0, 1, 2, 3]).unwrap().unwrap();
        assert!(crate::model::ufp::is_feasible_cover(&inst, &set));
        assert!(c >= int(3));
        let zero = solve_sub(&ctx, 0, &[0, 0, 0], &[0, 1, 2, 3]).unwrap().unwrap();
        assert_eq!(zero, (int(0), vec![]));
    }

    #[test]
    fn pruning_keeps_widest() {
        let stats = QptasStats::default();
        let p = |c: i64, cover: Vec<i64>| Partial { tasks: vec![c as usize], cost: int(c), cover };
        let list = vec![p(1, vec![1, 0]), p(2, vec![0, 1]), p(3, vec![1, 1]), p(4, vec![2, 2]), p(5, vec![1, 1])];
        let kept = pareto_prune(list.clone(), 10, &stats);
        assert_eq!(kept.iter().map(|k| k.tasks[0]).collect::<Vec<_>>(), vec![1, 2, 3, 4]);
        let capped = pareto_prune(list, 2, &stats);
        assert_eq!(capped.iter().map(|k| k.tasks[0]).collect::<Vec<_>>(), vec![1, 4]);
        assert_eq!(stats.snapshot().cap_hits, 1);
    }
}
