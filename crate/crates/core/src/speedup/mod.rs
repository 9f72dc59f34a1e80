//! Optimal-cost scheduling under speed augmentation for a common release date 0.
//!
//! Time is cut into intervals `I_t = [R_t, R_{t+1})`. A guess fixes a pattern per
//! interval (large-job slots and one small-job window); the slot LP then places all jobs
//! at cost `f_j(R_{t+1})` and is rounded by a matching that overfills each window by at
//! most `eps |I_t|`. The rounded placement is executed back to back in slot order.
//!
//! LP lengths are `p_j / (1+eps)^k`, where `k` is the smallest exponent for which every
//! unit-speed order induces a guess whose slots hold its jobs within the interval they
//! are charged to. Executing at `(1+eps)^(k+1)` absorbs the window overflow, so the
//! reported speed is `(1+eps)^c` with `c = k + 1`.

pub mod grid;
pub mod matching;
pub mod pattern;
pub mod slp;

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{check_vertex_property, count_fractional, solve_to_basic_optimum};
use crate::model::gsp::{is_non_overlapping, schedule_cost, GspInstance, Schedule};
use crate::model::step::Cost;
use crate::par::{self, Execution};
use crate::rational::{ceil_rat, int, powi, serialize_rat, Rat};
use grid::{artificial_release, round_completion, IntervalGrid};
use pattern::Pattern;
use slp::{build_slp, round_slp, Guess, Placement, SlpLayout};

pub const DEFAULT_ORDER_CAP: usize = 5040;
pub const DEFAULT_HORIZON_CAP: i64 = 4096;

#[derive(Debug, Clone)]
pub struct SpeedupConfig {
    /// `1 / eps`; at least 2.
    pub inv_eps: i64,
    /// Orders used to seed guesses; all orders are used when `n!` fits.
    pub order_cap: usize,
    pub seed: u64,
    /// Bound on `sum_j p_j`.
    pub horizon_cap: i64,
    pub exec: Execution,
}

impl SpeedupConfig {
    pub fn new(inv_eps: i64) -> Self {
        SpeedupConfig {
            inv_eps,
            order_cap: DEFAULT_ORDER_CAP,
            seed: 0,
            horizon_cap: DEFAULT_HORIZON_CAP,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpeedupSolution {
    pub schedule: Schedule,
    #[serde(serialize_with = "serialize_rat")]
    pub cost: Rat,
    /// Cost with every completion rounded up to a power of `1+eps`.
    #[serde(serialize_with = "serialize_rat")]
    pub rounded_cost: Rat,
    #[serde(serialize_with = "serialize_rat")]
    pub lp_cost: Rat,
    #[serde(serialize_with = "serialize_rat")]
    pub speed: Rat,
    pub exponent: i64,
    pub guess_exponent: i64,
    pub orders: usize,
    pub guesses: usize,
    pub cap_hit: bool,
    pub lp_solves: usize,
    pub max_fractional: usize,
    pub vertex_violations: usize,
    pub roundings: usize,
}

/// Smallest `k` such that `(1+eps)^2 / (1+eps)^k * (1/unit + 1/eps^2) + 1 <= units`, with
/// `unit = eps^4 / (4 (1+eps))`: the worst-case load of one interval in an order-induced guess.
pub fn guess_exponent(grid: &IntervalGrid) -> i64 {
    let eps = &grid.eps;
    let base = grid.base();
    let unit = powi(eps, 4) / (int(4) * base);
    let per = Rat::one() / &unit + Rat::one() / (eps * eps);
    let budget = int(grid.units() - 1);
    let mut k = 0;
    while powi(base, 2) / powi(base, k) * &per > budget {
        k += 1;
    }
    k
}

/// Lexicographic successor; `false` after the last order.
fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else { return false };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).expect("pivot has a successor");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// All orders when `n!` is at most `cap`, otherwise `cap` seeded random orders plus the
/// shortest-first order. The flag reports whether sampling was needed.
fn seed_orders(inst: &GspInstance, cap: usize, seed: u64) -> (Vec<Vec<usize>>, bool) {
    let n = inst.n();
    let fits = (1..=n).try_fold(1usize, |acc, k| acc.checked_mul(k).filter(|&v| v <= cap)).is_some();
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    if fits {
        loop {
            out.push(cur.clone());
            if !next_permutation(&mut cur) {
                break;
            }
        }
        return (out, false);
    }
    let mut spt = cur.clone();
    spt.sort_by_key(|&j| (inst.jobs[j].p, j));
    out.push(spt);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < cap.max(1) {
        cur.shuffle(&mut rng);
        out.push(cur.clone());
    }
    (out, true)
}

struct Setup {
    grid: IntervalGrid,
    first: i64,
    last: i64,
    lengths: Vec<Rat>,
    releases: Vec<Rat>,
}

/// The guess a unit-speed order induces: each job is charged to the interval `t` with
/// `R_{t+1} <= C_j < R_{t+2}`; there, small jobs share a window at the front and large
/// jobs get slots packed at the back, longest first.
fn induced_guess(inst: &GspInstance, setup: &Setup, order: &[usize]) -> Option<Guess> {
    let grid = &setup.grid;
    let k = (setup.last - setup.first + 1) as usize;
    let mut small_load = vec![Rat::zero(); k];
    let mut slots: Vec<Vec<i64>> = vec![Vec::new(); k];
    let mut c = 0i64;
    for &j in order {
        c += inst.jobs[j].p;
        let t = grid.interval_ending_before(&int(c));
        let i = (t - setup.first) as usize;
        let q = &setup.lengths[j];
        if q <= &(&grid.eps * grid.length(t)) && setup.releases[j] <= grid.r(t) {
            small_load[i] += q;
        } else {
            let u = ceil_rat(&(q / grid.unit(t)));
            let u: i64 = u.try_into().ok()?;
            slots[i].push(u.max(grid.min_slot_units()));
        }
    }
    let units = grid.units();
    let mut patterns = Vec::with_capacity(k);
    for i in 0..k {
        let t = setup.first + i as i64;
        let mut sizes = std::mem::take(&mut slots[i]);
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        let used: i64 = sizes.iter().sum();
        let window_units: i64 = ceil_rat(&(&small_load[i] / grid.unit(t))).try_into().ok()?;
        if used + window_units > units {
            return None;
        }
        let mut at = units - used;
        let mut pat = Pattern {
            slots: Vec::with_capacity(sizes.len()),
            window: (at > 0).then_some((0, at)),
        };
        for s in sizes {
            pat.slots.push((at, at + s));
            at += s;
        }
        pat.slots.sort_unstable();
        patterns.push(pat);
    }
    Some(Guess {
        first: setup.first,
        patterns,
    })
}

struct Attempt {
    schedule: Schedule,
    cost: Rat,
    rounded_cost: Rat,
    lp_cost: Rat,
    fractional: usize,
    vertex_ok: bool,
}

/// Runs the placement back to back, ordered by slot or window start, at `speed`.
fn realize(inst: &GspInstance, layout: &SlpLayout, guess: &Guess, placement: &[Placement], speed: &Rat, grid: &IntervalGrid) -> Result<Schedule> {
    let mut keyed: Vec<(Rat, usize)> = placement
        .iter()
        .enumerate()
        .map(|(j, p)| match p {
            Placement::Slot(s) => (layout.slots[*s].beg.clone(), j),
            Placement::Window(i) => (layout.window_start[*i].clone(), j),
        })
        .collect();
    keyed.sort();
    let order: Vec<usize> = keyed.iter().map(|&(_, j)| j).collect();
    let sched = Schedule::sequential(inst, &order, speed.clone());
    for e in &sched.entries {
        let i = match placement[e.job] {
            Placement::Slot(s) => layout.slots[s].interval,
            Placement::Window(i) => i,
        };
        let limit = grid.r(guess.interval(i) + 1);
        if sched.completion(inst, e) > limit {
            return Err(Error::Numeric(format!("job {} completes after its charged interval", e.job)));
        }
    }
    Ok(sched)
}

fn attempt(inst: &GspInstance, setup: &Setup, guess: &Guess, speed: &Rat) -> Result<Option<Attempt>> {
    let Some(layout) = build_slp(&setup.grid, guess, inst, &setup.lengths, &setup.releases)? else {
        return Ok(None);
    };
    let sol = solve_to_basic_optimum(&layout.lp)?;
    if !sol.is_optimal() {
        return Ok(None);
    }
    let vertex_ok = check_vertex_property(&layout.lp, &sol).is_ok();
    let rounded = round_slp(&layout, &sol.values)?;
    let schedule = realize(inst, &layout, guess, &rounded.assignment.placement, speed, &setup.grid)?;
    let cost = match schedule_cost(inst, &schedule) {
        Cost::Finite(c) => c,
        Cost::Infinite => return Ok(None),
    };
    let mut rounded_cost = Rat::zero();
    for e in &schedule.entries {
        let c = round_completion(&schedule.completion(inst, e), &setup.grid.eps)?;
        match inst.jobs[e.job].f.eval(&c) {
            Cost::Finite(v) => rounded_cost += v,
            Cost::Infinite => return Ok(None),
        }
    }
    Ok(Some(Attempt {
        schedule,
        cost,
        rounded_cost,
        lp_cost: rounded.fractional_cost,
        fractional: count_fractional(&sol),
        vertex_ok,
    }))
}

/// Cheapest schedule over all guesses induced by the seeded orders, feasible at the
/// returned speed.
pub fn solve_speedup(inst: &GspInstance, cfg: &SpeedupConfig) -> Result<SpeedupSolution> {
    if cfg.inv_eps < 2 {
        return Err(Error::Precondition("1/eps must be at least 2".into()));
    }
    inst.require_uniform_zero_release()?;
    let total = inst.total_processing();
    if total > cfg.horizon_cap {
        return Err(Error::Precondition(format!(
            "total processing {total} exceeds the horizon cap {}",
            cfg.horizon_cap
        )));
    }
    let grid = IntervalGrid::new(cfg.inv_eps)?;
    if inst.n() == 0 {
        return Ok(SpeedupSolution {
            schedule: Schedule::empty(),
            cost: Rat::zero(),
            rounded_cost: Rat::zero(),
            lp_cost: Rat::zero(),
            speed: Rat::one(),
            exponent: 0,
            guess_exponent: 0,
            orders: 0,
            guesses: 0,
            cap_hit: false,
            lp_solves: 0,
            max_fractional: 0,
            vertex_violations: 0,
            roundings: 0,
        });
    }
    let k = guess_exponent(&grid);
    let lp_speed = powi(grid.base(), k);
    let speed = &lp_speed * grid.base();
    let setup = Setup {
        first: grid.interval_ending_before(&Rat::one()),
        last: grid.interval_ending_before(&int(total)),
        lengths: inst.jobs.iter().map(|j| int(j.p) / &lp_speed).collect(),
        releases: inst
            .jobs
            .iter()
            .map(|j| artificial_release(j.p, &grid.eps))
            .collect::<Result<_>>()?,
        grid,
    };

    let (orders, cap_hit) = seed_orders(inst, cfg.order_cap, cfg.seed);
    let guesses: BTreeSet<Guess> = orders.iter().filter_map(|o| induced_guess(inst, &setup, o)).collect();
    let guesses: Vec<Guess> = guesses.into_iter().collect();
    let results = par::map(cfg.exec, &guesses, |g| attempt(inst, &setup, g, &speed));

    let mut best: Option<Attempt> = None;
    let (mut lp_solves, mut max_fractional, mut vertex_violations) = (0, 0, 0);
    for r in results {
        let Some(a) = r? else { continue };
        lp_solves += 1;
        max_fractional = max_fractional.max(a.fractional);
        vertex_violations += usize::from(!a.vertex_ok);
        if best.as_ref().map_or(true, |b| a.cost < b.cost) {
            best = Some(a);
        }
    }
    let best = best.ok_or_else(|| Error::Numeric("no guess produced a schedule".into()))?;
    Ok(SpeedupSolution {
        schedule: best.schedule,
        cost: best.cost,
        rounded_cost: best.rounded_cost,
        lp_cost: best.lp_cost,
        speed,
        exponent: k + 1,
        guess_exponent: k,
        orders: orders.len(),
        guesses: guesses.len(),
        cap_hit,
        lp_solves,
        max_fractional,
        vertex_violations,
        roundings: lp_solves,
    })
}

/// Every job once, no overlap with lengths `p_j / speed`, no start before the release date.
pub fn validate_speed_schedule(inst: &GspInstance, sched: &Schedule, speed: &Rat) -> bool {
    let mut seen = vec![false; inst.n()];
    for e in &sched.entries {
        if e.job >= inst.n() || std::mem::replace(&mut seen[e.job], true) {
            return false;
        }
    }
    seen.iter().all(|&s| s) && is_non_overlapping(inst, sched, speed, |j| int(inst.jobs[j].r))
}
