//! Slot-assignment LP for one guess of per-interval patterns, and its rounding through a
//! bipartite matching that loses at most one job length per interval window.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::grid::IntervalGrid;
use super::matching::min_cost_left_perfect;
use super::pattern::Pattern;
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Relation};
use crate::model::gsp::GspInstance;
use crate::model::step::Cost;
use crate::rational::{int, Rat};

/// Patterns for the consecutive intervals `first, first+1, ...`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Guess {
    pub first: i64,
    pub patterns: Vec<Pattern>,
}

impl Guess {
    pub fn interval(&self, i: usize) -> i64 {
        self.first + i as i64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlpVar {
    Slot { slot: usize, job: usize },
    Window { interval: usize, job: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotInfo {
    /// Position in the guess, not the interval exponent.
    pub interval: usize,
    pub beg: Rat,
    pub end: Rat,
}

#[derive(Debug, Clone)]
pub struct SlpLayout {
    pub lp: LinearProgram,
    pub vars: Vec<SlpVar>,
    pub slots: Vec<SlotInfo>,
    /// Window start and length per interval.
    pub window_start: Vec<Rat>,
    pub rem: Vec<Rat>,
    /// `eps |I_t|` per interval.
    pub slack: Vec<Rat>,
    /// Job lengths as seen by the LP.
    pub lengths: Vec<Rat>,
}

impl SlpLayout {
    pub fn n_jobs(&self) -> usize {
        self.lengths.len()
    }

    pub fn var_cost(&self, v: usize) -> &Rat {
        &self.lp.objective[v]
    }
}

/// Builds the LP. Pairs excluded by the release and length rules get no variable.
/// `None` if some job cannot be placed anywhere in this guess.
pub fn build_slp(
    grid: &IntervalGrid,
    guess: &Guess,
    inst: &GspInstance,
    lengths: &[Rat],
    releases: &[Rat],
) -> Result<Option<SlpLayout>> {
    let mut slots = Vec::new();
    let mut window_start = Vec::new();
    let mut rem = Vec::new();
    let mut slack = Vec::new();
    for (i, pat) in guess.patterns.iter().enumerate() {
        let t = guess.interval(i);
        pat.validate(grid.units(), grid.min_slot_units())?;
        for &(a, b) in &pat.slots {
            slots.push(SlotInfo {
                interval: i,
                beg: grid.fine_point(t, a),
                end: grid.fine_point(t, b),
            });
        }
        let (wa, _) = pat.window.unwrap_or((0, 0));
        window_start.push(grid.fine_point(t, wa));
        rem.push(grid.unit(t) * int(pat.window_units()));
        slack.push(&grid.eps * grid.length(t));
    }

    let mut lp = LinearProgram::new();
    let mut vars = Vec::new();
    let mut per_job: Vec<Vec<(usize, Rat)>> = vec![Vec::new(); inst.n()];
    let mut per_slot: Vec<Vec<(usize, Rat)>> = vec![Vec::new(); slots.len()];
    let mut per_interval: Vec<Vec<(usize, Rat)>> = vec![Vec::new(); guess.patterns.len()];
    for (j, job) in inst.jobs.iter().enumerate() {
        for (s, info) in slots.iter().enumerate() {
            if releases[j] > info.beg || lengths[j] > &info.end - &info.beg {
                continue;
            }
            let Cost::Finite(c) = job.f.eval(&grid.r(guess.interval(info.interval) + 1)) else { continue };
            let v = lp.add_var(c, Rat::zero(), None);
            vars.push(SlpVar::Slot { slot: s, job: j });
            per_job[j].push((v, Rat::one()));
            per_slot[s].push((v, Rat::one()));
        }
        for i in 0..guess.patterns.len() {
            let t = guess.interval(i);
            if releases[j] > grid.r(t) || lengths[j] > slack[i] {
                continue;
            }
            let Cost::Finite(c) = job.f.eval(&grid.r(t + 1)) else { continue };
            let v = lp.add_var(c, Rat::zero(), None);
            vars.push(SlpVar::Window { interval: i, job: j });
            per_job[j].push((v, Rat::one()));
            per_interval[i].push((v, lengths[j].clone()));
        }
    }
    if per_job.iter().any(|r| r.is_empty()) {
        return Ok(None);
    }
    for row in per_job {
        lp.add_row(row, Relation::Eq, Rat::one());
    }
    for row in per_slot.into_iter().filter(|r| !r.is_empty()) {
        lp.add_row(row, Relation::Le, Rat::one());
    }
    for (i, row) in per_interval.into_iter().enumerate() {
        if !row.is_empty() {
            lp.add_row(row, Relation::Le, rem[i].clone());
        }
    }
    Ok(Some(SlpLayout {
        lp,
        vars,
        slots,
        window_start,
        rem,
        slack,
        lengths: lengths.to_vec(),
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Placement {
    Slot(usize),
    Window(usize),
}

/// Integral solution: one placement per job.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotAssignment {
    pub placement: Vec<Placement>,
    /// Variable chosen per job.
    pub var: Vec<usize>,
}

impl SlotAssignment {
    pub fn cost(&self, layout: &SlpLayout) -> Rat {
        self.var.iter().map(|&v| layout.var_cost(v).clone()).sum()
    }

    /// Window load minus `rem(t)` per interval (negative when under capacity).
    pub fn overflow(&self, layout: &SlpLayout) -> Vec<Rat> {
        let mut load: Vec<Rat> = layout.rem.iter().map(|r| -r).collect();
        for (j, p) in self.placement.iter().enumerate() {
            if let Placement::Window(i) = p {
                load[*i] += &layout.lengths[j];
            }
        }
        load
    }

    /// One job per slot, and each window loaded to at most `rem(t) + eps |I_t|`.
    pub fn check(&self, layout: &SlpLayout) -> Result<()> {
        let mut used = vec![false; layout.slots.len()];
        for p in &self.placement {
            if let Placement::Slot(s) = p {
                if std::mem::replace(&mut used[*s], true) {
                    return Err(Error::Numeric(format!("slot {s} holds two jobs")));
                }
            }
        }
        for (i, o) in self.overflow(layout).iter().enumerate() {
            if o > &layout.slack[i] {
                return Err(Error::Numeric(format!("window {i} overflows by {o}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RoundedSlp {
    pub assignment: SlotAssignment,
    pub fractional_cost: Rat,
    pub integral_cost: Rat,
}

/// Rounds a feasible fractional point. Window `t` is split into `ceil(sum_j y_tj)` unit
/// vertices filled greedily by non-increasing length; a min-cost matching on the support
/// then assigns every job.
pub fn round_slp(layout: &SlpLayout, values: &[Rat]) -> Result<RoundedSlp> {
    let n = layout.n_jobs();
    let fractional_cost = layout.lp.objective_value(values);
    let n_slots = layout.slots.len();
    let mut edges: Vec<(usize, usize, Rat)> = Vec::new();
    let mut right_var: Vec<Vec<(usize, usize)>> = Vec::new(); // per right vertex: (job, var)
    right_var.resize(n_slots, Vec::new());

    let mut window_vars: Vec<Vec<usize>> = vec![Vec::new(); layout.rem.len()];
    for (v, var) in layout.vars.iter().enumerate() {
        if !values[v].is_positive() {
            continue;
        }
        match *var {
            SlpVar::Slot { slot, job } => {
                edges.push((job, slot, layout.var_cost(v).clone()));
                right_var[slot].push((job, v));
            }
            SlpVar::Window { interval, .. } => window_vars[interval].push(v),
        }
    }
    for vs in window_vars.iter_mut() {
        let job_of = |v: usize| match layout.vars[v] {
            SlpVar::Window { job, .. } => job,
            SlpVar::Slot { .. } => unreachable!(),
        };
        vs.sort_by(|&a, &b| {
            let (ja, jb) = (job_of(a), job_of(b));
            layout.lengths[jb].cmp(&layout.lengths[ja]).then(ja.cmp(&jb))
        });
        let mut room = Rat::zero();
        for &v in vs.iter() {
            let mut left = values[v].clone();
            while left.is_positive() {
                if !room.is_positive() {
                    right_var.push(Vec::new());
                    room = Rat::one();
                }
                let take = if left < room { left.clone() } else { room.clone() };
                let w = right_var.len() - 1;
                right_var[w].push((job_of(v), v));
                edges.push((job_of(v), w, layout.var_cost(v).clone()));
                left -= &take;
                room -= &take;
            }
        }
    }
    edges.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    edges.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);

    let matching = min_cost_left_perfect(n, right_var.len(), &edges)
        .ok_or_else(|| Error::Numeric("fractional point admits no integral matching".into()))?;
    let mut placement = Vec::with_capacity(n);
    let mut var = Vec::with_capacity(n);
    for (j, &w) in matching.iter().enumerate() {
        let v = right_var[w]
            .iter()
            .find(|(job, _)| *job == j)
            .map(|&(_, v)| v)
            .expect("edge came from this vertex");
        var.push(v);
        placement.push(match layout.vars[v] {
            SlpVar::Slot { slot, .. } => Placement::Slot(slot),
            SlpVar::Window { interval, .. } => Placement::Window(interval),
        });
    }
    let assignment = SlotAssignment { placement, var };
    let integral_cost = assignment.cost(layout);
    if integral_cost > fractional_cost {
        return Err(Error::Numeric(format!(
            "rounding raised the cost from {fractional_cost} to {integral_cost}"
        )));
    }
    assignment.check(layout)?;
    Ok(RoundedSlp {
        assignment,
        fractional_cost,
        integral_cost,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::solve_to_basic_optimum;
    use crate::model::gsp::Job;
    use crate::model::step::StepCostFunction;
    use crate::rational::frac;

    fn linear_inst(ps: &[i64]) -> GspInstance {
        let jobs = ps
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let vals: Vec<Rat> = (0..=40).map(|t| int(t * (i as i64 + 1))).collect();
                Job::new(i, p, 0, StepCostFunction::from_samples(&vals).unwrap())
            })
            .collect();
        GspInstance::from_jobs(jobs).unwrap()
    }

    #[test]
    fn single_slot_takes_job() {
        let g = IntervalGrid::new(2).unwrap();
        let inst = linear_inst(&[1]);
        let guess = Guess {
            first: 2,
            patterns: vec![Pattern { slots: vec![(0, 48)], window: None }],
        };
        let layout = build_slp(&g, &guess, &inst, &[int(1)], &[Rat::zero()]).unwrap().unwrap();
        let sol = solve_to_basic_optimum(&layout.lp).unwrap();
        assert!(sol.is_optimal());
        // step function sampled at integers: f(27/8) = f(3)
        assert_eq!(sol.objective, int(3));
        let r = round_slp(&layout, &sol.values).unwrap();
        assert_eq!(r.assignment.placement, vec![Placement::Slot(0)]);
    }

    #[test]
    fn unplaceable_job_gives_none() {
        let g = IntervalGrid::new(2).unwrap();
        let inst = linear_inst(&[5]);
        let guess = Guess { first: 0, patterns: vec![Pattern::full_window(48)] };
        // length 5 exceeds eps |I_0| = 1/4 and no slot exists
        assert!(build_slp(&g, &guess, &inst, &[int(5)], &[Rat::zero()]).unwrap().is_none());
        // a late release blocks the window too
        assert!(build_slp(&g, &guess, &inst, &[frac(1, 8)], &[int(2)]).unwrap().is_none());
    }

    #[test]
    fn two_small_jobs_share_window() {
        let g = IntervalGrid::new(2).unwrap();
        let inst = linear_inst(&[1, 1]);
        let guess = Guess { first: 4, patterns: vec![Pattern::full_window(48)] };
        // eps |I_4| = (1/4)(81/16) > 1/2; window rem = 81/32 >= p1 + p2
        let lens = [frac(1, 2), frac(1, 2)];
        let layout = build_slp(&g, &guess, &inst, &lens, &[Rat::zero(), Rat::zero()]).unwrap().unwrap();
        let sol = solve_to_basic_optimum(&layout.lp).unwrap();
        assert!(sol.values.iter().all(|v| v == &Rat::one()));
        let r = round_slp(&layout, &sol.values).unwrap();
        assert_eq!(r.assignment.placement, vec![Placement::Window(0), Placement::Window(0)]);
    }

    #[test]
    fn splits_fractional_window_load() {
        // jobs of lengths 4 and 2 (scaled), each half in one window with rem 3, half elsewhere
        let g = IntervalGrid::new(2).unwrap();
        let inst = linear_inst(&[4, 2]);
        let guess = Guess {
            first: 8,
            patterns: vec![Pattern::full_window(48), Pattern::full_window(48)],
        };
        let lens = [frac(1, 4), frac(1, 8)];
        let layout = build_slp(&g, &guess, &inst, &lens, &[Rat::zero(), Rat::zero()]).unwrap().unwrap();
        let mut x = vec![Rat::zero(); layout.vars.len()];
        for (v, var) in layout.vars.iter().enumerate() {
            if let SlpVar::Window { .. } = var {
                x[v] = frac(1, 2);
            }
        }
        assert!(layout.lp.is_feasible_point(&x));
        let r = round_slp(&layout, &x).unwrap();
        assert!(r.integral_cost <= r.fractional_cost);
        let over = r.assignment.overflow(&layout);
        for (o, s) in over.iter().zip(&layout.slack) {
            assert!(o <= s);
        }
    }

    #[test]
    fn integral_input_is_kept() {
        let g = IntervalGrid::new(2).unwrap();
        let inst = linear_inst(&[1, 1]);
        let guess = Guess {
            first: 4,
            patterns: vec![Pattern { slots: vec![(0, 24), (24, 48)], window: None }],
        };
        let lens = [int(1), int(1)];
        let layout = build_slp(&g, &guess, &inst, &lens, &[Rat::zero(), Rat::zero()]).unwrap().unwrap();
        let mut x = vec![Rat::zero(); layout.vars.len()];
        for (v, var) in layout.vars.iter().enumerate() {
            if matches!(var, SlpVar::Slot { slot, job } if slot == job) {
                x[v] = Rat::one();
            }
        }
        let r = round_slp(&layout, &x).unwrap();
        assert_eq!(r.assignment.placement, vec![Placement::Slot(0), Placement::Slot(1)]);
        assert_eq!(r.integral_cost, r.fractional_cost);
    }
}
