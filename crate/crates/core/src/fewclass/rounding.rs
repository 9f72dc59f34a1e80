//! Value rounding of the global cost functions for a budget `B`, and the due dates
//! worth considering afterwards.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::model::step::StepCostFunction;
use crate::rational::{ceil_log, ceil_rat, int, Rat};

/// Rounding parameters: values in `(0, eps B / (n W)]` become that floor, larger ones
/// the next power of `1+eps`, capped at `B`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundingParams {
    pub budget: Rat,
    pub weight_bound: i64,
    pub n: usize,
    pub eps: Rat,
}

impl RoundingParams {
    pub fn floor_value(&self) -> Rat {
        &self.eps * &self.budget / (int(self.n.max(1) as i64) * int(self.weight_bound))
    }

    pub fn round_value(&self, v: &Rat) -> Rat {
        if v.is_zero() {
            return Rat::zero();
        }
        let floor = self.floor_value();
        if v <= &floor {
            return floor;
        }
        let up = ceil_log(&(Rat::one() + &self.eps), v).1;
        up.min(self.budget.clone())
    }
}

/// The rounded copy of every global function.
pub fn round_class_functions(g: &[StepCostFunction], params: &RoundingParams) -> Result<Vec<StepCostFunction>> {
    if params.budget <= Rat::zero() || params.weight_bound < 1 || params.eps <= Rat::zero() {
        return Err(Error::Precondition("rounding needs B > 0, W >= 1 and eps > 0".into()));
    }
    Ok(g.iter().map(|f| f.map_values(|v| Some(params.round_value(v)))).collect())
}

/// Last integer time before `b`.
fn before(b: &Rat) -> i64 {
    let c: i64 = ceil_rat(b).try_into().unwrap_or(i64::MAX);
    c - 1
}

/// Latest integer times before each increase of any function, plus `horizon`, within `[0, horizon]`.
pub fn due_date_candidates(fns: &[StepCostFunction], horizon: i64) -> Vec<i64> {
    let mut out: Vec<i64> = fns
        .iter()
        .flat_map(|f| f.increase_points())
        .map(|b| before(&b))
        .filter(|&d| d >= 0 && d <= horizon)
        .collect();
    out.push(horizon);
    out.sort_unstable();
    out.dedup();
    out
}

/// Last integer time at which `g` is still at most `budget`, if `g` ever exceeds it.
pub fn budget_crossing(g: &StepCostFunction, budget: &Rat) -> Option<i64> {
    let over = g.breakpoints().iter().find(|(_, v)| v > budget).map(|(t, _)| t.clone());
    let unavailable = g.unavailable_from().cloned();
    let first = match (over, unavailable) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    }?;
    Some(before(&first))
}
