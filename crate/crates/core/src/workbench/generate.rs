//! Seeded instance generators.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::gsp::{GspInstance, Job};
use crate::model::step::StepCostFunction;
use crate::model::ufp::{induced_heights, UfpCoverInstance, UfpTask};
use crate::rational::int;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UfpParams {
    pub n: usize,
    pub m: usize,
    pub demand: (i64, i64),
    pub size: (i64, i64),
    pub cost: (i64, i64),
}

impl Default for UfpParams {
    fn default() -> Self {
        UfpParams {
            n: 10,
            m: 6,
            demand: (1, 12),
            size: (1, 8),
            cost: (1, 20),
        }
    }
}

fn check_range(name: &str, (lo, hi): (i64, i64), min: i64) -> Result<()> {
    if lo < min || hi < lo {
        return Err(Error::Precondition(format!("{name} range {lo}..={hi} is invalid")));
    }
    Ok(())
}

/// A random instance together with the planted cover that makes it feasible.
pub fn generate_ufp_planted(seed: u64, params: &UfpParams) -> Result<(UfpCoverInstance, Vec<usize>)> {
    check_range("demand", params.demand, 1)?;
    check_range("size", params.size, 1)?;
    check_range("cost", params.cost, 0)?;
    if params.m == 0 {
        return Err(Error::Precondition("path needs at least one edge".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = params.m;
    let tasks: Vec<UfpTask> = (0..params.n)
        .map(|id| {
            let s = rng.gen_range(0..m);
            let t = rng.gen_range(s + 1..=m);
            UfpTask {
                id,
                s,
                t,
                p: rng.gen_range(params.size.0..=params.size.1),
                c: int(rng.gen_range(params.cost.0..=params.cost.1)),
            }
        })
        .collect();
    let mut planted: Vec<usize> = (0..params.n).filter(|_| rng.gen_bool(0.5)).collect();
    if planted.is_empty() && params.n > 0 {
        planted.push(rng.gen_range(0..params.n));
    }
    let profile = induced_heights(planted.iter().map(|&i| &tasks[i]), m)?;
    let demands = profile
        .iter()
        .map(|&h| rng.gen_range(params.demand.0..=params.demand.1).min(h))
        .collect();
    Ok((UfpCoverInstance::new(demands, tasks)?, planted))
}

pub fn generate_ufp(seed: u64, params: &UfpParams) -> Result<UfpCoverInstance> {
    Ok(generate_ufp_planted(seed, params)?.0)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GspParams {
    pub n: usize,
    /// Number of global cost functions.
    pub classes: usize,
    /// Release dates to draw from.
    pub releases: Vec<i64>,
    pub weight_bound: i64,
    pub processing: (i64, i64),
    /// Maximum number of steps per global function.
    pub steps: usize,
    /// Range of each step increment.
    pub increment: (i64, i64),
}

impl Default for GspParams {
    fn default() -> Self {
        GspParams {
            n: 6,
            classes: 2,
            releases: vec![0],
            weight_bound: 3,
            processing: (1, 5),
            steps: 4,
            increment: (1, 6),
        }
    }
}

/// Monotone step function with up to `steps` integer jumps inside `1..=horizon`.
fn random_step(rng: &mut ChaCha8Rng, horizon: i64, steps: usize, inc: (i64, i64)) -> Result<StepCostFunction> {
    let k = rng.gen_range(1..=steps.max(1));
    let mut times: Vec<i64> = (1..=horizon.max(1)).collect();
    times.shuffle(rng);
    times.truncate(k);
    times.sort_unstable();
    let mut v = 0;
    let bps = times
        .into_iter()
        .map(|t| {
            v += rng.gen_range(inc.0..=inc.1);
            (int(t), int(v))
        })
        .collect();
    StepCostFunction::new(bps, None)
}

/// Class-form instance: job `j` gets `f_j = w_j * g_u(j)`.
pub fn generate_gsp(seed: u64, params: &GspParams) -> Result<GspInstance> {
    if params.classes == 0 {
        return Err(Error::Precondition("need at least one cost class".into()));
    }
    if params.releases.is_empty() {
        return Err(Error::Precondition("need at least one release date".into()));
    }
    check_range("processing", params.processing, 1)?;
    check_range("increment", params.increment, 0)?;
    check_range("weight", (1, params.weight_bound), 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p: Vec<i64> = (0..params.n)
        .map(|_| rng.gen_range(params.processing.0..=params.processing.1))
        .collect();
    let horizon = params.releases.iter().max().copied().unwrap_or(0) + p.iter().sum::<i64>();
    let globals = (0..params.classes)
        .map(|_| random_step(&mut rng, horizon, params.steps, params.increment))
        .collect::<Result<Vec<_>>>()?;
    let jobs = (0..params.n)
        .map(|id| {
            let r = *params.releases.choose(&mut rng).expect("nonempty");
            let u = rng.gen_range(0..params.classes);
            let w = rng.gen_range(1..=params.weight_bound);
            Job::in_class(id, p[id], r, w, u, &globals[u])
        })
        .collect();
    GspInstance::new(jobs, globals, params.weight_bound)
}
