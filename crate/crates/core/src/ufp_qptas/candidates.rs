//! Per-group candidate task sets: exhaustive small subsets, and for larger guesses a
//! rounded cover LP per staircase profile plus edge augmentation.

use std::collections::BTreeSet;

use num_traits::{One, Zero};

use super::groups::{class_profiles, height_levels, LevelEdges, TaskGroup};
use super::stats::QptasStats;
use crate::error::Result;
use crate::lp::{check_vertex_property, solve_to_basic_optimum, LinearProgram, Relation};
use crate::model::ufp::UfpCoverInstance;
use crate::rational::{ceil_usize, floor_rat, int, Rat};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Subset,
    Profile { guess: usize, levels: LevelEdges },
    WholeGroup,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    /// Task indices, ascending.
    pub tasks: Vec<usize>,
    pub cost: Rat,
    pub origin: Origin,
}

/// Rounded cover of one staircase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverLpOutcome {
    pub tasks: Vec<usize>,
    pub lp_cost: Rat,
    pub rounded_cost: Rat,
    pub fractional: usize,
    pub rows: usize,
}

/// `floor(1/eps^2)`: guesses up to this size are enumerated exactly.
pub fn small_guess_limit(eps: &Rat) -> usize {
    let v = floor_rat(&(Rat::one() / (eps * eps)));
    usize::try_from(v).unwrap_or(usize::MAX)
}

/// Solves the cover LP of `group` for the staircase `prof` with step heights `levels`
/// (only the first `prof.peak()` are present) and rounds fractional values up.
/// `Ok(None)` when the LP is infeasible.
pub fn cover_profile_lp(
    inst: &UfpCoverInstance,
    group: &TaskGroup,
    levels: &[Rat],
    prof: &LevelEdges,
    stats: &QptasStats,
) -> Result<Option<CoverLpOutcome>> {
    let mut rows: BTreeSet<(Vec<usize>, usize)> = BTreeSet::new();
    for j in 0..prof.peak() {
        let left: Vec<usize> = (0..group.tasks.len())
            .filter(|&v| inst.tasks[group.tasks[v]].s <= prof.left[j])
            .collect();
        let right: Vec<usize> = (0..group.tasks.len())
            .filter(|&v| inst.tasks[group.tasks[v]].t > prof.right[j])
            .collect();
        rows.insert((left, j));
        rows.insert((right, j));
    }
    for (vars, j) in &rows {
        let vol: i64 = vars.iter().map(|&v| inst.tasks[group.tasks[v]].p).sum();
        if int(vol) < levels[*j] {
            return Ok(None);
        }
    }
    let mut lp = LinearProgram::new();
    for &i in &group.tasks {
        lp.add_var(inst.tasks[i].c.clone(), Rat::zero(), Some(Rat::one()));
    }
    for (vars, j) in &rows {
        let coeffs = vars.iter().map(|&v| (v, int(inst.tasks[group.tasks[v]].p))).collect();
        lp.add_row(coeffs, Relation::Ge, levels[*j].clone());
    }
    let sol = solve_to_basic_optimum(&lp)?;
    if !sol.is_optimal() {
        return Ok(None);
    }
    let fractional = sol.fractional_indices.len();
    stats.record_lp(fractional, lp.num_rows(), check_vertex_property(&lp, &sol).is_ok());
    let tasks: Vec<usize> = (0..group.tasks.len())
        .filter(|&v| !sol.values[v].is_zero())
        .map(|v| group.tasks[v])
        .collect();
    let rounded_cost = inst.cost_of(&tasks);
    let max_cost = group.tasks.iter().map(|&i| inst.tasks[i].c.clone()).max().unwrap_or_default();
    stats.record_rounding(rounded_cost <= &sol.objective + max_cost * int(fractional as i64));
    Ok(Some(CoverLpOutcome {
        tasks,
        lp_cost: sol.objective,
        rounded_cost,
        fractional,
        rows: lp.num_rows(),
    }))
}

/// Unchosen group tasks with the `q` leftmost starts and the `q` rightmost ends,
/// `q = ceil(eps (1+eps) g)`; ties by index.
pub fn augment_edge_tasks(inst: &UfpCoverInstance, group: &TaskGroup, chosen: &[usize], g: usize, eps: &Rat) -> Vec<usize> {
    let q = ceil_usize(&(eps * (Rat::one() + eps) * int(g as i64)));
    let chosen: BTreeSet<usize> = chosen.iter().copied().collect();
    let mut rest: Vec<usize> = group.tasks.iter().copied().filter(|i| !chosen.contains(i)).collect();
    let mut out: BTreeSet<usize> = BTreeSet::new();
    rest.sort_by_key(|&i| (inst.tasks[i].s, i));
    out.extend(rest.iter().take(q));
    rest.sort_by_key(|&i| (std::cmp::Reverse(inst.tasks[i].t), i));
    out.extend(rest.iter().take(q));
    out.into_iter().collect()
}

/// Candidate sets for one group whose tasks all use `mid`. Duplicated task sets are
/// dropped; the whole group is always included as a fallback.
pub fn build_group_candidates(
    inst: &UfpCoverInstance,
    group: &TaskGroup,
    eps: &Rat,
    mid: usize,
    stats: &QptasStats,
) -> Result<Vec<Candidate>> {
    let n = group.tasks.len();
    let small = small_guess_limit(eps).min(n);
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut out = Vec::new();
    let mut push = |tasks: Vec<usize>, origin: Origin, out: &mut Vec<Candidate>| {
        if seen.insert(tasks.clone()) {
            let cost = inst.cost_of(&tasks);
            out.push(Candidate { tasks, cost, origin });
        }
    };

    for size in 0..=small {
        for combo in combinations(n, size) {
            let tasks = combo.iter().map(|&v| group.tasks[v]).collect();
            push(tasks, Origin::Subset, &mut out);
        }
    }

    if n > small {
        let mut left_edges: Vec<usize> = group.tasks.iter().map(|&i| inst.tasks[i].s).collect();
        left_edges.sort_unstable();
        left_edges.dedup();
        let mut right_edges: Vec<usize> = group.tasks.iter().map(|&i| inst.tasks[i].t - 1).collect();
        right_edges.sort_unstable_by(|a, b| b.cmp(a));
        right_edges.dedup();
        debug_assert!(left_edges.iter().all(|&e| e <= mid) && right_edges.iter().all(|&e| e >= mid));
        for g in small + 1..=n {
            let levels = height_levels(g, group.key.l, eps);
            for prof in class_profiles(levels.len(), &left_edges, &right_edges) {
                let Some(cover) = cover_profile_lp(inst, group, &levels, &prof, stats)? else {
                    continue;
                };
                let extra = augment_edge_tasks(inst, group, &cover.tasks, g, eps);
                let mut tasks = cover.tasks;
                tasks.extend(extra);
                tasks.sort_unstable();
                push(tasks, Origin::Profile { guess: g, levels: prof }, &mut out);
            }
        }
    }
    push(group.tasks.clone(), Origin::WholeGroup, &mut out);
    Ok(out)
}

/// Index subsets of `0..n` with exactly `k` elements, in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(n: usize, k: usize, from: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in from..n {
            if n - v < k - cur.len() {
                break;
            }
            cur.push(v);
            rec(n, k, v + 1, cur, out);
            cur.pop();
        }
    }
    rec(n, k, 0, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::super::groups::{group_key, GroupKey};
    use super::*;
    use crate::model::ufp::UfpTask;
    use crate::rational::frac;

    fn group_of(inst: &UfpCoverInstance, eps: &Rat) -> TaskGroup {
        let t0 = &inst.tasks[0];
        TaskGroup {
            key: group_key(&t0.c, t0.p, eps),
            tasks: (0..inst.tasks.len()).collect(),
        }
    }

    #[test]
    fn zero_profile_gives_empty_cover() {
        let inst = UfpCoverInstance::new(vec![2], vec![UfpTask { id: 0, s: 0, t: 1, p: 2, c: int(1) }]).unwrap();
        let g = group_of(&inst, &frac(1, 2));
        let stats = QptasStats::default();
        let out = cover_profile_lp(&inst, &g, &[int(1)], &LevelEdges { left: vec![], right: vec![] }, &stats)
            .unwrap()
            .unwrap();
        assert!(out.tasks.is_empty());
        assert_eq!(out.rounded_cost, int(0));
    }

    #[test]
    fn two_half_tasks_are_both_chosen() {
        let t = |id| UfpTask { id, s: 0, t: 2, p: 1, c: int(1) };
        let inst = UfpCoverInstance::new(vec![2, 2], vec![t(0), t(1)]).unwrap();
        let g = group_of(&inst, &frac(1, 2));
        let stats = QptasStats::default();
        let prof = LevelEdges { left: vec![0], right: vec![1] };
        let out = cover_profile_lp(&inst, &g, &[int(2)], &prof, &stats).unwrap().unwrap();
        assert_eq!(out.tasks, vec![0, 1]);
        assert!(out.fractional <= 2 * 2);
        assert_eq!(stats.snapshot().vertex_violations, 0);
        // a height no subset reaches
        assert!(cover_profile_lp(&inst, &g, &[int(3)], &prof, &stats).unwrap().is_none());
    }

    #[test]
    fn augmentation_takes_extremes() {
        let t = |id, s, t| UfpTask { id, s, t, p: 1, c: int(1) };
        let inst = UfpCoverInstance::new(
            vec![0; 7],
            vec![t(0, 0, 1), t(1, 0, 2), t(2, 1, 3), t(3, 2, 7), t(4, 3, 6), t(5, 4, 5)],
        )
        .unwrap();
        let g = TaskGroup { key: GroupKey { k: Some(0), l: 0 }, tasks: (0..6).collect() };
        let eps = frac(1, 2);
        // quota ceil(0.75 * 2) = 2; remaining {1,2,3,4,5}
        let a = augment_edge_tasks(&inst, &g, &[0], 2, &eps);
        assert_eq!(a, vec![1, 2, 3, 4]);
        assert!(augment_edge_tasks(&inst, &g, &[0, 1, 2, 3, 4, 5], 2, &eps).is_empty());
        assert_eq!(augment_edge_tasks(&inst, &g, &[0, 1, 2], 20, &eps), vec![3, 4, 5]);
    }

    #[test]
    fn small_groups_enumerate_subsets() {
        let t = |id| UfpTask { id, s: 0, t: 1, p: 1, c: int(1) };
        let inst = UfpCoverInstance::new(vec![1], vec![t(0), t(1), t(2)]).unwrap();
        let g = group_of(&inst, &int(1));
        let stats = QptasStats::default();
        let cands = build_group_candidates(&inst, &g, &int(1), 0, &stats).unwrap();
        let sets: Vec<Vec<usize>> = cands.iter().map(|c| c.tasks.clone()).collect();
        assert!(sets.contains(&vec![]));
        assert!(sets.contains(&vec![0]) && sets.contains(&vec![1]) && sets.contains(&vec![2]));
        assert!(sets.contains(&vec![0, 1, 2]));
        let empty = TaskGroup { key: g.key, tasks: vec![] };
        let cands = build_group_candidates(&inst, &empty, &int(1), 0, &stats).unwrap();
        assert_eq!(cands.len(), 1);
        assert!(cands[0].tasks.is_empty());
    }

    #[test]
    fn combination_counts() {
        assert_eq!(combinations(5, 2).len(), 10);
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
        assert!(combinations(2, 3).is_empty());
    }
}
