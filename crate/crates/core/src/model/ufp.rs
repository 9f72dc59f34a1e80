use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rat;

/// A task on the path, covering the edges `s..t` (edge `e` joins vertices `e` and `e+1`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UfpTask {
    pub id: usize,
    pub s: usize,
    pub t: usize,
    pub p: i64,
    pub c: Rat,
}

impl UfpTask {
    pub fn uses(&self, edge: usize) -> bool {
        self.s <= edge && edge < self.t
    }

    pub fn within(&self, lo: usize, hi: usize) -> bool {
        lo <= self.s && self.t <= hi
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UfpCoverInstance {
    pub demands: Vec<i64>,
    pub tasks: Vec<UfpTask>,
}

impl UfpCoverInstance {
    /// Validates the instance. Task ids must equal their positions.
    pub fn new(demands: Vec<i64>, tasks: Vec<UfpTask>) -> Result<Self> {
        let inst = UfpCoverInstance { demands, tasks };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.demands.len();
        if m == 0 {
            return Err(Error::InvalidInstance("path needs at least one edge".into()));
        }
        if self.demands.iter().any(|&u| u < 0) {
            return Err(Error::InvalidInstance("demands must be nonnegative".into()));
        }
        for (i, task) in self.tasks.iter().enumerate() {
            if task.id != i {
                return Err(Error::InvalidInstance(format!(
                    "task at position {i} has id {}",
                    task.id
                )));
            }
            if task.s >= task.t || task.t > m {
                return Err(Error::TaskOutOfBounds {
                    task: task.id,
                    start: task.s,
                    end: task.t,
                    edges: m,
                });
            }
            if task.p < 1 {
                return Err(Error::InvalidInstance(format!("task {i} has size < 1")));
            }
            if task.c < Rat::zero() {
                return Err(Error::InvalidInstance(format!("task {i} has negative cost")));
            }
        }
        Ok(())
    }

    pub fn edge_count(&self) -> usize {
        self.demands.len()
    }

    pub fn cost_of(&self, chosen: &[usize]) -> Rat {
        chosen.iter().map(|&i| self.tasks[i].c.clone()).sum()
    }

    pub fn demand_profile(&self) -> DemandProfile {
        DemandProfile::from_ints(&self.demands)
    }
}

/// Per-edge heights.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DemandProfile {
    pub heights: Vec<Rat>,
}

impl DemandProfile {
    pub fn zeros(m: usize) -> Self {
        DemandProfile {
            heights: vec![Rat::zero(); m],
        }
    }

    pub fn from_ints(v: &[i64]) -> Self {
        DemandProfile {
            heights: v.iter().map(|&x| Rat::from_integer(x.into())).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.heights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heights.is_empty()
    }

    pub fn add(&self, other: &DemandProfile) -> Result<DemandProfile> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch(self.len(), other.len()));
        }
        Ok(DemandProfile {
            heights: self
                .heights
                .iter()
                .zip(&other.heights)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }
}

/// Profile induced by `tasks` on a path with `m` edges.
pub fn induced_profile<'a>(
    tasks: impl IntoIterator<Item = &'a UfpTask>,
    m: usize,
) -> Result<DemandProfile> {
    let ints = induced_heights(tasks, m)?;
    Ok(DemandProfile::from_ints(&ints))
}

/// Integer form of [`induced_profile`].
pub fn induced_heights<'a>(
    tasks: impl IntoIterator<Item = &'a UfpTask>,
    m: usize,
) -> Result<Vec<i64>> {
    let mut h = vec![0i64; m];
    for task in tasks {
        if task.s >= task.t || task.t > m {
            return Err(Error::TaskOutOfBounds {
                task: task.id,
                start: task.s,
                end: task.t,
                edges: m,
            });
        }
        for x in &mut h[task.s..task.t] {
            *x += task.p;
        }
    }
    Ok(h)
}

/// `true` iff `p1(e) >= p2(e)` on every edge.
pub fn dominates(p1: &DemandProfile, p2: &DemandProfile) -> Result<bool> {
    if p1.len() != p2.len() {
        return Err(Error::LengthMismatch(p1.len(), p2.len()));
    }
    Ok(p1.heights.iter().zip(&p2.heights).all(|(a, b)| a >= b))
}

pub fn is_feasible_cover(inst: &UfpCoverInstance, chosen: &[usize]) -> bool {
    let m = inst.edge_count();
    match induced_heights(chosen.iter().map(|&i| &inst.tasks[i]), m) {
        Ok(h) => h.iter().zip(&inst.demands).all(|(a, b)| a >= b),
        Err(_) => false,
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::rational::int;

    /// m=3, u=(2,3,1); a=[0,3] p1 c1, b=[0,2] p2 c2, c=[1,3] p2 c2, d=[1,2] p3 c4.
    pub fn u1() -> UfpCoverInstance {
        let t = |id, s, t, p, c| UfpTask {
            id,
            s,
            t,
            p,
            c: int(c),
        };
        UfpCoverInstance::new(
            vec![2, 3, 1],
            vec![t(0, 0, 3, 1, 1), t(1, 0, 2, 2, 2), t(2, 1, 3, 2, 2), t(3, 1, 2, 3, 4)],
        )
        .unwrap()
    }
}
