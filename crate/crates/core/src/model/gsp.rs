use std::collections::BTreeSet;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::step::{Cost, StepCostFunction};
use crate::error::{Error, Result};
use crate::rational::Rat;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Job {
    pub id: usize,
    pub p: i64,
    pub r: i64,
    pub f: StepCostFunction,
    /// Index into the instance's global functions, when the job is in class form.
    pub class: Option<usize>,
    pub weight: Option<i64>,
}

impl Job {
    pub fn new(id: usize, p: i64, r: i64, f: StepCostFunction) -> Self {
        Job {
            id,
            p,
            r,
            f,
            class: None,
            weight: None,
        }
    }

    /// A job with `f = w * g`.
    pub fn in_class(id: usize, p: i64, r: i64, w: i64, class: usize, g: &StepCostFunction) -> Self {
        Job {
            id,
            p,
            r,
            f: g.scaled(&Rat::from_integer(w.into())),
            class: Some(class),
            weight: Some(w),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GspInstance {
    pub jobs: Vec<Job>,
    pub global_functions: Vec<StepCostFunction>,
    pub weight_bound: i64,
}

impl GspInstance {
    pub fn new(
        jobs: Vec<Job>,
        global_functions: Vec<StepCostFunction>,
        weight_bound: i64,
    ) -> Result<Self> {
        let inst = GspInstance {
            jobs,
            global_functions,
            weight_bound,
        };
        inst.validate()?;
        Ok(inst)
    }

    /// Plain instance without class structure.
    pub fn from_jobs(jobs: Vec<Job>) -> Result<Self> {
        GspInstance::new(jobs, Vec::new(), 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.weight_bound < 1 {
            return Err(Error::InvalidInstance("weight bound must be positive".into()));
        }
        for (i, job) in self.jobs.iter().enumerate() {
            if job.id != i {
                return Err(Error::InvalidInstance(format!(
                    "job at position {i} has id {}",
                    job.id
                )));
            }
            if job.p < 1 {
                return Err(Error::InvalidInstance(format!("job {i} has p < 1")));
            }
            if job.r < 0 {
                return Err(Error::InvalidInstance(format!("job {i} has negative release")));
            }
            match (job.class, job.weight) {
                (None, None) => {}
                (Some(u), Some(w)) => {
                    let g = self.global_functions.get(u).ok_or_else(|| {
                        Error::InvalidInstance(format!("job {i} refers to missing class {u}"))
                    })?;
                    if w < 1 || w > self.weight_bound {
                        return Err(Error::InvalidInstance(format!(
                            "job {i} weight {w} outside 1..={}",
                            self.weight_bound
                        )));
                    }
                    if !job.f.same_as(&g.scaled(&Rat::from_integer(w.into()))) {
                        return Err(Error::InvalidInstance(format!(
                            "job {i} cost function is not w * g_u"
                        )));
                    }
                }
                _ => {
                    return Err(Error::InvalidInstance(format!(
                        "job {i} must give both class and weight or neither"
                    )))
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.jobs.len()
    }

    pub fn total_processing(&self) -> i64 {
        self.jobs.iter().map(|j| j.p).sum()
    }

    pub fn release_dates(&self) -> Vec<i64> {
        self.jobs
            .iter()
            .map(|j| j.r)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn has_uniform_release(&self) -> bool {
        self.release_dates().len() <= 1
    }

    pub fn is_class_form(&self) -> bool {
        !self.global_functions.is_empty() && self.jobs.iter().all(|j| j.class.is_some())
    }

    /// Latest completion time of any idle-free schedule.
    pub fn horizon(&self) -> i64 {
        self.jobs.iter().map(|j| j.r).max().unwrap_or(0) + self.total_processing()
    }

    pub fn require_uniform_zero_release(&self) -> Result<()> {
        if self.jobs.iter().any(|j| j.r != 0) {
            return Err(Error::Precondition(
                "solver requires all release dates equal to 0".into(),
            ));
        }
        Ok(())
    }
}

/// Nonpreemptive schedule: one start time per job, listed in execution order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub entries: Vec<ScheduledJob>,
    pub speed: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduledJob {
    pub job: usize,
    pub start: Rat,
}

impl Schedule {
    pub fn empty() -> Self {
        Schedule {
            entries: Vec::new(),
            speed: Rat::one(),
        }
    }

    /// Runs the jobs in `order` back to back at `speed`, never before their release.
    pub fn sequential(inst: &GspInstance, order: &[usize], speed: Rat) -> Self {
        let mut t = Rat::zero();
        let mut entries = Vec::with_capacity(order.len());
        for &j in order {
            let r = Rat::from_integer(inst.jobs[j].r.into());
            if r > t {
                t = r;
            }
            entries.push(ScheduledJob {
                job: j,
                start: t.clone(),
            });
            t += Rat::from_integer(inst.jobs[j].p.into()) / &speed;
        }
        Schedule { entries, speed }
    }

    pub fn order(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.job).collect()
    }

    pub fn completion(&self, inst: &GspInstance, entry: &ScheduledJob) -> Rat {
        &entry.start + Rat::from_integer(inst.jobs[entry.job].p.into()) / &self.speed
    }

    /// Completion time per job index.
    pub fn completions(&self, inst: &GspInstance) -> Vec<Option<Rat>> {
        let mut c = vec![None; inst.n()];
        for e in &self.entries {
            c[e.job] = Some(self.completion(inst, e));
        }
        c
    }

    /// Every job exactly once, no overlap at the schedule's speed, releases respected.
    pub fn validate(&self, inst: &GspInstance) -> Result<()> {
        let mut seen = vec![false; inst.n()];
        for e in &self.entries {
            if e.job >= inst.n() || seen[e.job] {
                return Err(Error::Precondition(format!("job {} scheduled twice or unknown", e.job)));
            }
            seen[e.job] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Precondition("schedule misses a job".into()));
        }
        if !is_non_overlapping(inst, self, &self.speed, |j| {
            Rat::from_integer(inst.jobs[j].r.into())
        }) {
            return Err(Error::Precondition("schedule overlaps or starts early".into()));
        }
        Ok(())
    }
}

/// `true` iff at `speed` no two jobs overlap and every start respects `release`.
pub(crate) fn is_non_overlapping(
    inst: &GspInstance,
    sched: &Schedule,
    speed: &Rat,
    release: impl Fn(usize) -> Rat,
) -> bool {
    let mut spans: Vec<(Rat, Rat)> = Vec::with_capacity(sched.entries.len());
    for e in &sched.entries {
        if e.job >= inst.n() || e.start < release(e.job) {
            return false;
        }
        let end = &e.start + Rat::from_integer(inst.jobs[e.job].p.into()) / speed;
        spans.push((e.start.clone(), end));
    }
    spans.sort();
    spans.windows(2).all(|w| w[0].1 <= w[1].0)
}

/// Total cost `sum_j f_j(C_j)`.
pub fn schedule_cost(inst: &GspInstance, sched: &Schedule) -> Cost {
    sched
        .entries
        .iter()
        .map(|e| inst.jobs[e.job].f.eval(&sched.completion(inst, e)))
        .sum()
}

/// Due date per job index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DueDateAssignment {
    pub due: Vec<i64>,
}

impl DueDateAssignment {
    pub fn cost(&self, inst: &GspInstance) -> Cost {
        inst.jobs
            .iter()
            .zip(&self.due)
            .map(|(j, &d)| j.f.eval_int(d))
            .sum()
    }
}
