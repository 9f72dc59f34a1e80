//! Due-date feasibility: preemptive earliest-due-date simulation and the
//! release-interval excess condition. The two must agree.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use serde::{Deserialize, Serialize};

use super::gsp::Job;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Piece {
    pub job: usize,
    pub start: i64,
    pub end: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreemptiveSchedule {
    pub pieces: Vec<Piece>,
    pub completion: Vec<i64>,
}

/// Preemptive EDD from the release dates; ties on due date go to the smaller index.
pub fn edd_schedule(jobs: &[Job], due: &[i64]) -> PreemptiveSchedule {
    let n = jobs.len();
    let mut by_release: Vec<usize> = (0..n).collect();
    by_release.sort_by_key(|&j| (jobs[j].r, j));
    let mut remaining: Vec<i64> = jobs.iter().map(|j| j.p).collect();
    let mut completion = vec![0i64; n];
    let mut pieces: Vec<Piece> = Vec::new();
    let mut ready = BinaryHeap::new();
    let mut next = 0;
    let mut t = 0i64;
    let mut done = 0;
    while done < n {
        while next < n && jobs[by_release[next]].r <= t {
            let j = by_release[next];
            ready.push(Reverse((due[j], j)));
            next += 1;
        }
        let Some(Reverse((_, j))) = ready.pop() else {
            t = jobs[by_release[next]].r;
            continue;
        };
        let horizon = if next < n { jobs[by_release[next]].r } else { i64::MAX };
        let run = remaining[j].min(horizon - t);
        match pieces.last_mut() {
            Some(last) if last.job == j && last.end == t => last.end += run,
            _ => pieces.push(Piece {
                job: j,
                start: t,
                end: t + run,
            }),
        }
        t += run;
        remaining[j] -= run;
        if remaining[j] == 0 {
            completion[j] = t;
            done += 1;
        } else {
            ready.push(Reverse((due[j], j)));
        }
    }
    PreemptiveSchedule { pieces, completion }
}

/// Feasibility by simulation.
pub fn edd_feasible(jobs: &[Job], due: &[i64]) -> bool {
    if jobs.iter().zip(due).any(|(j, &d)| d < j.r) {
        return false;
    }
    let s = edd_schedule(jobs, due);
    s.completion.iter().zip(due).all(|(c, d)| c <= d)
}

/// An interval `[r, d]` whose later-deadline volume falls short of its excess.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExcessWitness {
    pub r: i64,
    pub d: i64,
    pub excess: i64,
    pub later_volume: i64,
}

/// Excess of `[r, d]`: `max(sum of p over jobs released in [r, d] - (d - r), 0)`.
pub fn interval_excess(jobs: &[Job], r: i64, d: i64) -> i64 {
    let vol: i64 = jobs.iter().filter(|j| r <= j.r && j.r <= d).map(|j| j.p).sum();
    (vol - (d - r)).max(0)
}

/// Feasibility by the interval condition: for every `I = [r_j, d_j']`, jobs released in
/// `I` with deadline after `I` must carry at least the excess of `I`.
pub fn edd_feasible_intervals(jobs: &[Job], due: &[i64]) -> Result<(), ExcessWitness> {
    if let Some((j, &d)) = jobs.iter().zip(due).find(|(j, &d)| d < j.r) {
        return Err(ExcessWitness {
            r: j.r,
            d,
            excess: j.p,
            later_volume: 0,
        });
    }
    let releases: BTreeSet<i64> = jobs.iter().map(|j| j.r).collect();
    let deadlines: BTreeSet<i64> = due.iter().copied().collect();
    for &r in &releases {
        for &d in deadlines.range(r..) {
            let excess = interval_excess(jobs, r, d);
            if excess == 0 {
                continue;
            }
            let later_volume: i64 = jobs
                .iter()
                .zip(due)
                .filter(|(j, &dj)| r <= j.r && j.r <= d && dj > d)
                .map(|(j, _)| j.p)
                .sum();
            if later_volume < excess {
                return Err(ExcessWitness {
                    r,
                    d,
                    excess,
                    later_volume,
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::step::StepCostFunction;

    fn jobs(pr: &[(i64, i64)]) -> Vec<Job> {
        pr.iter()
            .enumerate()
            .map(|(i, &(p, r))| Job::new(i, p, r, StepCostFunction::zero()))
            .collect()
    }

    #[test]
    fn edd_examples() {
        let js = jobs(&[(2, 0), (3, 0)]);
        assert!(edd_feasible(&js, &[5, 3]));
        assert!(edd_feasible_intervals(&js, &[5, 3]).is_ok());
        assert!(!edd_feasible(&js, &[4, 3]));
        let w = edd_feasible_intervals(&js, &[4, 3]).unwrap_err();
        assert_eq!((w.r, w.d, w.excess, w.later_volume), (0, 4, 1, 0));
        let one = jobs(&[(1, 0)]);
        assert!(edd_feasible(&one, &[1]));
        assert!(edd_feasible_intervals(&one, &[1]).is_ok());
    }

    #[test]
    fn preemption_follows_due_dates() {
        let js = jobs(&[(4, 0), (1, 1)]);
        let s = edd_schedule(&js, &[10, 2]);
        assert_eq!(s.completion, vec![5, 2]);
        assert_eq!(s.pieces.len(), 3);
        assert!(edd_feasible(&js, &[10, 2]));
        assert!(!edd_feasible(&js, &[4, 2]));
    }

    #[test]
    fn idle_until_release() {
        let js = jobs(&[(1, 5)]);
        let s = edd_schedule(&js, &[6]);
        assert_eq!(s.completion, vec![6]);
        assert!(!edd_feasible(&js, &[4]));
        assert!(edd_feasible_intervals(&js, &[4]).is_err());
    }
}
