//! Cost/size grouping of the tasks through the middle edge, and the staircase
//! profiles used to guess a group's coverage.

use std::collections::BTreeMap;

use num_traits::{One, Signed};
use serde::Serialize;

use crate::model::ufp::UfpCoverInstance;
use crate::rational::{floor_log, int, Rat};

/// `k` is the cost exponent (`None` for cost 0), `l` the size exponent, both base `1+eps`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct GroupKey {
    pub k: Option<i64>,
    pub l: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskGroup {
    pub key: GroupKey,
    /// Task indices, ascending.
    pub tasks: Vec<usize>,
}

pub fn group_key(c: &Rat, p: i64, eps: &Rat) -> GroupKey {
    let base = Rat::one() + eps;
    let k = c.is_positive().then(|| floor_log(&base, c).0);
    GroupKey {
        k,
        l: floor_log(&base, &int(p)).0,
    }
}

/// Partitions `tasks` by group key; empty groups never appear.
pub fn group_tasks(inst: &UfpCoverInstance, tasks: &[usize], eps: &Rat) -> Vec<TaskGroup> {
    let mut by_key: BTreeMap<GroupKey, Vec<usize>> = BTreeMap::new();
    for &i in tasks {
        let t = &inst.tasks[i];
        by_key.entry(group_key(&t.c, t.p, eps)).or_default().push(i);
    }
    by_key
        .into_iter()
        .map(|(key, mut tasks)| {
            tasks.sort_unstable();
            TaskGroup { key, tasks }
        })
        .collect()
}

/// All nondecreasing sequences of length `len` over `0..items`.
pub(crate) fn nondecreasing(items: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len);
    fn rec(items: usize, len: usize, from: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for v in from..items {
            cur.push(v);
            rec(items, len, v, cur, out);
            cur.pop();
        }
    }
    rec(items, len, 0, &mut cur, &mut out);
    out
}

/// Every unimodal assignment of level indices `0..=levels` to a subpath with `left`
/// edges before the middle edge and `right` after it. Entry `left` is the middle edge.
pub fn enumerate_approx_profiles(levels: usize, left: usize, right: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for peak in 0..=levels {
        let lefts = nondecreasing(peak + 1, left);
        let rights = nondecreasing(peak + 1, right);
        for l in &lefts {
            for r in &rights {
                let mut q = l.clone();
                q.push(peak);
                q.extend(r.iter().rev());
                out.push(q);
            }
        }
    }
    out
}

/// Closed-form size of [`enumerate_approx_profiles`]: `sum_J C(left+J, J) * C(right+J, J)`.
pub fn approx_profile_count(levels: usize, left: usize, right: usize) -> u128 {
    fn binom(n: u128, k: u128) -> u128 {
        (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
    }
    (0..=levels as u128)
        .map(|j| binom(left as u128 + j, j) * binom(right as u128 + j, j))
        .sum()
}

/// Step heights `j * g * (1+eps)^(l+1) / K` for `j = 1..=K`, `K = ceil(1/eps)`.
pub fn height_levels(g: usize, l: i64, eps: &Rat) -> Vec<Rat> {
    let k = (Rat::one() / eps).ceil().to_integer();
    let kk: i64 = k.try_into().expect("1/eps fits i64");
    let top = int(g as i64) * crate::rational::powi(&(Rat::one() + eps), l + 1);
    (1..=kk).map(|j| &top * int(j) / int(kk)).collect()
}

/// A profile reduced to what the cover LP sees: for each present level `j`, the first
/// and last edge at which the staircase reaches it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelEdges {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

impl LevelEdges {
    pub fn peak(&self) -> usize {
        self.left.len()
    }

    /// Expands to per-edge level indices on `lo..hi`.
    pub fn expand(&self, lo: usize, hi: usize) -> Vec<usize> {
        (lo..hi)
            .map(|e| {
                (0..self.peak())
                    .filter(|&j| self.left[j] <= e && e <= self.right[j])
                    .map(|j| j + 1)
                    .max()
                    .unwrap_or(0)
            })
            .collect()
    }
}

/// Staircases up to `levels` whose level edges sit on the given boundary edges.
/// `left_edges` are the edges at which the set of group tasks covering the edge
/// changes on the left of the middle edge (ascending, last one the middle edge),
/// `right_edges` the same on the right (descending, last one the middle edge). Two
/// staircases whose level edges fall into the same classes give identical LPs, so
/// this is the enumeration modulo that equivalence.
pub fn class_profiles(levels: usize, left_edges: &[usize], right_edges: &[usize]) -> Vec<LevelEdges> {
    let mut out = Vec::new();
    for peak in 0..=levels {
        let ls = nondecreasing(left_edges.len(), peak);
        let rs = nondecreasing(right_edges.len(), peak);
        for l in &ls {
            for r in &rs {
                out.push(LevelEdges {
                    left: l.iter().map(|&i| left_edges[i]).collect(),
                    right: r.iter().map(|&i| right_edges[i]).collect(),
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ufp::UfpTask;
    use crate::rational::frac;

    #[test]
    fn cost_exponents() {
        let eps = frac(1, 2);
        let ks: Vec<Option<i64>> = [int(1), frac(14, 10), frac(23, 10)]
            .iter()
            .map(|c| group_key(c, 1, &eps).k)
            .collect();
        assert_eq!(ks, vec![Some(0), Some(0), Some(2)]);
        assert_eq!(group_key(&int(0), 1, &eps).k, None);
    }

    #[test]
    fn grouping() {
        let t = |id, c, p| UfpTask { id, s: 0, t: 1, p, c: int(c) };
        let inst = UfpCoverInstance::new(vec![1], vec![t(0, 1, 1), t(1, 1, 1), t(2, 5, 1)]).unwrap();
        let eps = frac(1, 2);
        assert_eq!(group_tasks(&inst, &[0], &eps).len(), 1);
        assert_eq!(group_tasks(&inst, &[0, 1], &eps).len(), 1);
        let gs = group_tasks(&inst, &[2, 1, 0], &eps);
        assert_eq!(gs.len(), 2);
        assert_eq!(gs[0].tasks, vec![0, 1]);
    }

    #[test]
    fn profile_enumeration_matches_closed_form() {
        // three heights, middle edge plus one edge to its left
        let all = enumerate_approx_profiles(2, 1, 0);
        assert_eq!(all.len(), 6);
        assert_eq!(approx_profile_count(2, 1, 0), 6);
        for q in &all {
            assert!(q[0] <= q[1]);
        }
        assert_eq!(enumerate_approx_profiles(2, 0, 0).len(), 3);
        assert_eq!(enumerate_approx_profiles(0, 3, 2), vec![vec![0; 6]]);
        for (k, a, b) in [(1, 2, 2), (2, 3, 1), (3, 2, 3), (4, 0, 4)] {
            let qs = enumerate_approx_profiles(k, a, b);
            assert_eq!(qs.len() as u128, approx_profile_count(k, a, b));
            let distinct: std::collections::BTreeSet<_> = qs.iter().collect();
            assert_eq!(distinct.len(), qs.len());
            for q in &qs {
                assert!(q[..=a].windows(2).all(|w| w[0] <= w[1]));
                assert!(q[a..].windows(2).all(|w| w[0] >= w[1]));
            }
        }
    }

    #[test]
    fn class_profiles_expand_unimodal() {
        let ps = class_profiles(2, &[1, 3], &[6, 3]);
        assert_eq!(ps.len(), 1 + 4 + 9);
        for p in &ps {
            let q = p.expand(0, 8);
            assert!(q[..=3].windows(2).all(|w| w[0] <= w[1]));
            assert!(q[3..].windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn heights() {
        let h = height_levels(5, 0, &frac(1, 2));
        assert_eq!(h, vec![frac(15, 4), frac(15, 2)]);
    }
}
