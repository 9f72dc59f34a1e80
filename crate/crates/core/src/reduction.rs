//! GSP with a common release date 0 reduced to UFP-cover by geometric rounding of
//! each job's cost function, and covers lifted back to schedules.
//!
//! Time point `i` in `1..=P` is the edge `(i-1, i)` and must be covered with
//! demand `P - i + 1`: the jobs due at `i` or later carry at least that much work.
//! A job's task spanning time points `[a, b]` uses the edges of points `max(a,1)..=b`.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::gsp::{schedule_cost, GspInstance, Schedule};
use crate::model::step::{Cost, StepCostFunction};
use crate::model::ufp::{is_feasible_cover, UfpCoverInstance, UfpTask};
use crate::oracles::exact_ufp_cover;
use crate::par::{self, Execution};
use crate::rational::{euler_approx, int, powi, serialize_rat, Rat};
use crate::ufp_qptas::{solve_qptas, QptasConfig};

#[derive(Debug, Clone)]
pub struct ReductionParams {
    pub gamma: Rat,
    pub alpha: Rat,
}

impl ReductionParams {
    pub fn new(gamma: Rat, alpha: Rat) -> Result<Self> {
        if gamma <= Rat::one() {
            return Err(Error::Precondition("gamma must exceed 1".into()));
        }
        if alpha.is_negative() || alpha >= Rat::one() {
            return Err(Error::Precondition("alpha must lie in [0, 1)".into()));
        }
        Ok(ReductionParams { gamma, alpha })
    }

    pub fn euler(alpha: Rat) -> Result<Self> {
        ReductionParams::new(euler_approx(), alpha)
    }
}

/// One generated task: job `job` finishing within time points `[start, end]` at `cost`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedTask {
    pub job: usize,
    pub start: i64,
    pub end: i64,
    pub cost: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionMap {
    /// Indexed like the tasks of the produced instance.
    pub tasks: Vec<ReducedTask>,
    /// Original path vertices kept after compression, ascending.
    pub vertices: Vec<i64>,
    /// Threshold times per job.
    pub thresholds: Vec<Vec<i64>>,
    pub horizon: i64,
}

/// Smallest positive finite value of `f` on `0..=horizon`.
fn positive_floor(f: &StepCostFunction, horizon: i64) -> Option<Rat> {
    (0..=horizon)
        .filter_map(|t| f.eval_int(t).finite().cloned())
        .filter(|v| v.is_positive())
        .min()
}

/// `v > scale * gamma^(e/g)` evaluated exactly as `v^g > scale^g * gamma^e`.
fn exceeds(v: &Cost, scale: &Rat, gamma: &Rat, e: i64, g: i64) -> bool {
    match v {
        Cost::Infinite => true,
        Cost::Finite(x) => powi(x, g) > powi(scale, g) * powi(gamma, e),
    }
}

/// `alpha` as `num / den` with a positive `den`.
fn alpha_parts(alpha: &Rat) -> Result<(i64, i64)> {
    let num = alpha.numer().to_i64();
    let den = alpha.denom().to_i64();
    match (num, den) {
        (Some(n), Some(d)) if d <= 4096 => Ok((n, d)),
        _ => Err(Error::Numeric("alpha denominator too large for exact thresholds".into())),
    }
}

/// Threshold times `0 = t_0 < t_1 < ... < t_k = P+1`: `t_i` is the first integer time
/// with `f(t) > s * gamma^(i-1+alpha)`, `s` the smallest positive value of `f` on
/// `[0, P]`. The first time `f` turns positive is added as an extra threshold when it
/// is at least 2, so that a zero-cost prefix becomes its own task.
pub fn threshold_times(f: &StepCostFunction, params: &ReductionParams, horizon: i64) -> Result<Vec<i64>> {
    let mut out = vec![0i64];
    let Some(scale) = positive_floor(f, horizon) else {
        out.push(horizon + 1);
        return Ok(out);
    };
    let (an, ad) = alpha_parts(&params.alpha)?;
    let values: Vec<Cost> = (0..=horizon).map(|t| f.eval_int(t)).collect();
    if let Some(z) = values.iter().position(|v| !matches!(v, Cost::Finite(x) if x.is_zero())) {
        if z >= 2 {
            out.push(z as i64);
        }
    }
    let mut i = 1i64;
    let mut t = 0usize;
    loop {
        let e = (i - 1) * ad + an;
        while t < values.len() && !exceeds(&values[t], &scale, &params.gamma, e, ad) {
            t += 1;
        }
        if t == values.len() {
            break;
        }
        if *out.last().expect("nonempty") < t as i64 {
            out.push(t as i64);
        }
        i += 1;
    }
    out.push(horizon + 1);
    Ok(out)
}

/// Builds the compressed UFP-cover instance. Requires every release date to be 0.
pub fn reduce_gsp_to_ufp(inst: &GspInstance, params: &ReductionParams) -> Result<(UfpCoverInstance, ReductionMap)> {
    inst.require_uniform_zero_release()?;
    let horizon = inst.total_processing();
    let mut tasks: Vec<ReducedTask> = Vec::new();
    let mut thresholds = Vec::with_capacity(inst.n());
    for (j, job) in inst.jobs.iter().enumerate() {
        let ts = threshold_times(&job.f, params, horizon)?;
        let before = tasks.len();
        for w in ts.windows(2) {
            let (a, b) = (w[0], w[1] - 1);
            if b < a.max(1) {
                continue;
            }
            if let Cost::Finite(c) = job.f.eval_int(b) {
                tasks.push(ReducedTask { job: j, start: a, end: b, cost: c });
            }
        }
        if tasks.len() == before {
            return Err(Error::InvalidInstance(format!("job {j} has no finite-cost completion window")));
        }
        thresholds.push(ts);
    }

    let mut vertices: Vec<i64> = vec![0, horizon];
    for t in &tasks {
        vertices.push(t.start.max(1) - 1);
        vertices.push(t.end);
    }
    vertices.sort_unstable();
    vertices.dedup();
    let index = |v: i64| vertices.binary_search(&v).expect("vertex kept");
    // Demand of edge (u, u+1) is P - u; along a merged stretch the first edge is the largest.
    let demands: Vec<i64> = vertices.windows(2).map(|w| horizon - w[0]).collect();
    let ufp_tasks = tasks
        .iter()
        .enumerate()
        .map(|(id, t)| UfpTask {
            id,
            s: index(t.start.max(1) - 1),
            t: index(t.end),
            p: inst.jobs[t.job].p,
            c: t.cost.clone(),
        })
        .collect();
    let ufp = if demands.is_empty() {
        // P = 0 only happens without jobs; keep a single slack edge.
        UfpCoverInstance::new(vec![0], vec![])?
    } else {
        UfpCoverInstance::new(demands, ufp_tasks)?
    };
    Ok((
        ufp,
        ReductionMap {
            tasks,
            vertices,
            thresholds,
            horizon,
        },
    ))
}

/// The same instance without compression: one edge per time point.
pub fn uncompressed_instance(inst: &GspInstance, map: &ReductionMap) -> Result<UfpCoverInstance> {
    let p = map.horizon;
    let demands = (1..=p).map(|i| p - i + 1).collect();
    let tasks = map
        .tasks
        .iter()
        .enumerate()
        .map(|(id, t)| UfpTask {
            id,
            s: (t.start.max(1) - 1) as usize,
            t: t.end as usize,
            p: inst.jobs[t.job].p,
            c: t.cost.clone(),
        })
        .collect();
    UfpCoverInstance::new(demands, tasks)
}

/// Due date per job from a cover: right end of the job's right-most chosen task.
pub fn cover_due_dates(cover: &[usize], map: &ReductionMap, n: usize) -> Result<Vec<i64>> {
    let mut due: Vec<Option<i64>> = vec![None; n];
    for &i in cover {
        let t = map
            .tasks
            .get(i)
            .ok_or_else(|| Error::InvalidCover(format!("unknown task {i}")))?;
        due[t.job] = Some(due[t.job].map_or(t.end, |d| d.max(t.end)));
    }
    due.into_iter()
        .enumerate()
        .map(|(j, d)| d.ok_or_else(|| Error::InvalidCover(format!("no task of job {j} chosen"))))
        .collect()
}

/// Turns a cover into an EDD schedule at unit speed meeting the cover's due dates.
pub fn lift_cover_to_schedule(cover: &[usize], map: &ReductionMap, inst: &GspInstance) -> Result<Schedule> {
    let due = cover_due_dates(cover, map, inst.n())?;
    let mut order: Vec<usize> = (0..inst.n()).collect();
    order.sort_by_key(|&j| (due[j], j));
    let sched = Schedule::sequential(inst, &order, Rat::one());
    for e in &sched.entries {
        if sched.completion(inst, e) > int(due[e.job]) {
            return Err(Error::InvalidCover(format!("job {} misses its due date {}", e.job, due[e.job])));
        }
    }
    Ok(sched)
}

/// All tasks whose window opens no later than the job's completion time.
pub fn schedule_to_cover(sched: &Schedule, map: &ReductionMap, inst: &GspInstance) -> Result<Vec<usize>> {
    let completion = sched.completions(inst);
    let mut out = Vec::new();
    for (i, t) in map.tasks.iter().enumerate() {
        let c = completion[t.job]
            .as_ref()
            .ok_or_else(|| Error::Precondition(format!("job {} not scheduled", t.job)))?;
        if &int(t.start) <= c {
            out.push(i);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub enum InnerSolver {
    Exact { cap: usize },
    Qptas(QptasConfig),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlphaRun {
    #[serde(serialize_with = "serialize_rat")]
    pub alpha: Rat,
    #[serde(serialize_with = "serialize_rat")]
    pub cover_cost: Rat,
    #[serde(serialize_with = "serialize_rat")]
    pub lifted_cost: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EApproxResult {
    pub schedule: Schedule,
    pub cost: Rat,
    pub alpha: Rat,
    pub runs: Vec<AlphaRun>,
    /// Upper bound on the grid factor `gamma^(1+1/G) / (G (gamma^(1/G) - 1))`.
    pub grid_factor: Rat,
}

/// Largest rational `y = k / 2^40` with `y^g <= gamma`.
fn root_lower_bound(gamma: &Rat, g: i64) -> Rat {
    let den = BigInt::from(1u64 << 40);
    let approx = crate::rational::to_f64(gamma).powf(1.0 / g as f64);
    let mut k = BigInt::from((approx * (1u64 << 40) as f64).floor() as u64);
    let y = |k: &BigInt| Rat::new(k.clone(), den.clone());
    while powi(&y(&k), g) > *gamma {
        k -= 1;
    }
    while powi(&y(&(&k + 1)), g) <= *gamma {
        k += 1;
    }
    y(&k)
}

/// Rational upper bound on `gamma^(1+1/G) / (G (gamma^(1/G) - 1))`, the factor by which the
/// best grid point can exceed an optimal schedule when covers are solved exactly.
pub fn grid_factor(gamma: &Rat, g: usize) -> Rat {
    let gi = g as i64;
    let y = root_lower_bound(gamma, gi);
    // y / (y - 1) decreases in y, so a lower bound on the root bounds the factor above.
    gamma * &y / (int(gi) * (&y - Rat::one()))
}

/// Reduces for each `alpha = g / G`, solves the cover with `inner`, lifts, and keeps the
/// cheapest schedule (ties to the smaller alpha).
pub fn solve_e_approx(inst: &GspInstance, grid: usize, inner: &InnerSolver, exec: Execution) -> Result<EApproxResult> {
    if grid == 0 {
        return Err(Error::Precondition("alpha grid needs at least one point".into()));
    }
    inst.require_uniform_zero_release()?;
    let gamma = euler_approx();
    let runs = par::map_range(exec, grid, |g| -> Result<(AlphaRun, Schedule)> {
        let alpha = Rat::new(BigInt::from(g), BigInt::from(grid));
        let params = ReductionParams::new(gamma.clone(), alpha.clone())?;
        let (ufp, map) = reduce_gsp_to_ufp(inst, &params)?;
        let (cover, cover_cost) = match inner {
            InnerSolver::Exact { cap } => {
                let o = exact_ufp_cover(&ufp, *cap, Execution::Sequential)?
                    .ok_or_else(|| Error::Numeric("reduced instance infeasible".into()))?;
                (o.tasks, o.cost)
            }
            InnerSolver::Qptas(cfg) => {
                let o = solve_qptas(&ufp, cfg)?.ok_or_else(|| Error::Numeric("reduced instance infeasible".into()))?;
                (o.tasks, o.cost)
            }
        };
        debug_assert!(is_feasible_cover(&ufp, &cover));
        let sched = lift_cover_to_schedule(&cover, &map, inst)?;
        let lifted = match schedule_cost(inst, &sched) {
            Cost::Finite(c) => c,
            Cost::Infinite => return Err(Error::Numeric("lifted schedule has infinite cost".into())),
        };
        if lifted > cover_cost {
            return Err(Error::Numeric(format!("lifted cost {lifted} exceeds cover cost {cover_cost}")));
        }
        Ok((AlphaRun { alpha, cover_cost, lifted_cost: lifted }, sched))
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let best = runs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .0.lifted_cost.cmp(&b.1 .0.lifted_cost).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .expect("grid is nonempty");
    Ok(EApproxResult {
        schedule: runs[best].1.clone(),
        cost: runs[best].0.lifted_cost.clone(),
        alpha: runs[best].0.alpha.clone(),
        runs: runs.into_iter().map(|r| r.0).collect(),
        grid_factor: grid_factor(&gamma, grid),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::gsp::fixtures::{g1, linear};
    use crate::model::gsp::Job;
    use crate::oracles::exact_gsp_uniform_release;
    use crate::rational::{frac, to_f64};
    use proptest::prelude::*;

    fn euler0() -> ReductionParams {
        ReductionParams::euler(Rat::zero()).unwrap()
    }

    #[test]
    fn thresholds_of_identity() {
        let f = linear(1, 8);
        assert_eq!(threshold_times(&f, &euler0(), 8).unwrap(), vec![0, 2, 3, 8, 9]);
    }

    #[test]
    fn thresholds_of_zero_and_single_jump() {
        assert_eq!(threshold_times(&StepCostFunction::zero(), &euler0(), 8).unwrap(), vec![0, 9]);
        let jump = StepCostFunction::new(vec![(int(5), int(100))], None).unwrap();
        assert_eq!(threshold_times(&jump, &euler0(), 8).unwrap(), vec![0, 5, 9]);
        let half = ReductionParams::euler(frac(1, 2)).unwrap();
        let ts = threshold_times(&linear(1, 20), &half, 20).unwrap();
        // thresholds e^0.5 ~ 1.65, e^1.5 ~ 4.48, e^2.5 ~ 12.18
        assert_eq!(ts, vec![0, 2, 5, 13, 21]);
    }

    #[test]
    fn single_job_tasks_span_horizon() {
        let inst = GspInstance::from_jobs(vec![Job::new(0, 2, 0, linear(1, 2))]).unwrap();
        let (ufp, map) = reduce_gsp_to_ufp(&inst, &euler0()).unwrap();
        let covered: Vec<i64> = map.tasks.iter().flat_map(|t| t.start..=t.end).collect();
        assert_eq!(covered, vec![0, 1, 2]);
        assert_eq!(ufp.demands.iter().max(), Some(&2));
    }

    #[test]
    fn zero_cost_jobs_cover_for_free() {
        let z = StepCostFunction::zero();
        let inst = GspInstance::from_jobs(vec![Job::new(0, 2, 0, z.clone()), Job::new(1, 3, 0, z)]).unwrap();
        let (ufp, _) = reduce_gsp_to_ufp(&inst, &euler0()).unwrap();
        let opt = exact_ufp_cover(&ufp, 20, Execution::Sequential).unwrap().unwrap();
        assert_eq!(opt.cost, int(0));
        let r = solve_e_approx(&inst, 4, &InnerSolver::Exact { cap: 20 }, Execution::Sequential).unwrap();
        assert_eq!(r.cost, int(0));
    }

    #[test]
    fn last_tasks_give_endpoint_costs() {
        let inst = g1();
        let (_, map) = reduce_gsp_to_ufp(&inst, &euler0()).unwrap();
        let last: Vec<usize> = (0..inst.n())
            .map(|j| (0..map.tasks.len()).filter(|&i| map.tasks[i].job == j).max().unwrap())
            .collect();
        let sched = lift_cover_to_schedule(&last, &map, &inst).unwrap();
        let expected: Rat = last.iter().map(|&i| map.tasks[i].cost.clone()).sum();
        assert!(schedule_cost(&inst, &sched) <= Cost::Finite(expected));
        assert!(lift_cover_to_schedule(&last[..1], &map, &inst).is_err());
    }

    #[test]
    fn optimal_g1_schedule_maps_to_cover() {
        let inst = g1();
        let (ufp, map) = reduce_gsp_to_ufp(&inst, &euler0()).unwrap();
        let opt = exact_gsp_uniform_release(&inst, 9, Execution::Sequential).unwrap().unwrap();
        let cover = schedule_to_cover(&opt.schedule, &map, &inst).unwrap();
        assert!(is_feasible_cover(&ufp, &cover));
        assert!(ufp.cost_of(&cover) <= opt.cost * int(3));
    }

    #[test]
    fn g1_within_grid_bound() {
        let inst = g1();
        let r = solve_e_approx(&inst, 8, &InnerSolver::Exact { cap: 20 }, Execution::Sequential).unwrap();
        assert!(r.cost <= &r.grid_factor * int(11));
        assert!(r.cost >= int(11));
        assert_eq!(r.runs.len(), 8);
        let f = to_f64(&r.grid_factor);
        assert!((f - 2.8917).abs() < 1e-3, "{f}");
    }

    #[test]
    fn single_job_close_to_its_cost() {
        let inst = GspInstance::from_jobs(vec![Job::new(0, 3, 0, linear(2, 3))]).unwrap();
        let r = solve_e_approx(&inst, 8, &InnerSolver::Exact { cap: 20 }, Execution::Sequential).unwrap();
        assert_eq!(r.cost, int(6));
    }

    #[test]
    fn grid_factor_decreases_in_grid() {
        let e = euler_approx();
        assert!(grid_factor(&e, 16) < grid_factor(&e, 8));
        assert!(to_f64(&grid_factor(&e, 64)) > std::f64::consts::E);
    }

    fn arb_jobs() -> impl Strategy<Value = GspInstance> {
        prop::collection::vec((1i64..4, prop::collection::vec(0i64..4, 14)), 1..4).prop_map(|spec| {
            let jobs = spec
                .into_iter()
                .enumerate()
                .map(|(i, (p, incs))| {
                    let mut acc = 0;
                    let vals: Vec<Rat> = incs
                        .iter()
                        .map(|d| {
                            acc += d;
                            int(acc)
                        })
                        .collect();
                    Job::new(i, p, 0, StepCostFunction::from_samples(&vals).unwrap())
                })
                .collect();
            GspInstance::from_jobs(jobs).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn thresholds_partition_horizon(inst in arb_jobs(), g in 0i64..8) {
            let params = ReductionParams::euler(frac(g, 8)).unwrap();
            let (_, map) = reduce_gsp_to_ufp(&inst, &params).unwrap();
            let p = inst.total_processing();
            for (j, ts) in map.thresholds.iter().enumerate() {
                prop_assert_eq!(ts[0], 0);
                prop_assert_eq!(*ts.last().unwrap(), p + 1);
                prop_assert!(ts.windows(2).all(|w| w[0] < w[1]));
                let mine: Vec<&ReducedTask> = map.tasks.iter().filter(|t| t.job == j).collect();
                prop_assert!(!mine.is_empty());
                prop_assert_eq!(mine.last().unwrap().end, p);
            }
        }

        #[test]
        fn compression_preserves_optimum(inst in arb_jobs(), g in 0i64..4) {
            let params = ReductionParams::euler(frac(g, 4)).unwrap();
            let (small, map) = reduce_gsp_to_ufp(&inst, &params).unwrap();
            let full = uncompressed_instance(&inst, &map).unwrap();
            let a = exact_ufp_cover(&small, 20, Execution::Sequential).unwrap().map(|o| o.cost);
            let b = exact_ufp_cover(&full, 20, Execution::Sequential).unwrap().map(|o| o.cost);
            prop_assert_eq!(a, b);
        }

        #[test]
        fn round_trip_never_increases_cost(inst in arb_jobs(), seed in 0u64..1000, g in 0i64..8) {
            use rand::{seq::SliceRandom, SeedableRng};
            let params = ReductionParams::euler(frac(g, 8)).unwrap();
            let (ufp, map) = reduce_gsp_to_ufp(&inst, &params).unwrap();
            let mut order: Vec<usize> = (0..inst.n()).collect();
            order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let sched = Schedule::sequential(&inst, &order, Rat::one());
            let cover = schedule_to_cover(&sched, &map, &inst).unwrap();
            prop_assert!(is_feasible_cover(&ufp, &cover));
            let lifted = lift_cover_to_schedule(&cover, &map, &inst).unwrap();
            prop_assert!(lifted.validate(&inst).is_ok());
            prop_assert!(schedule_cost(&inst, &lifted) <= Cost::Finite(ufp.cost_of(&cover)));
        }
    }
}
