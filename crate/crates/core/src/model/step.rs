use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::Add;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rat;

/// A cost value; `Infinite` marks times at which a job may not complete.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cost {
    Finite(Rat),
    Infinite,
}

impl Cost {
    pub fn zero() -> Self {
        Cost::Finite(Rat::zero())
    }

    pub fn finite(&self) -> Option<&Rat> {
        match self {
            Cost::Finite(v) => Some(v),
            Cost::Infinite => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Cost::Finite(_))
    }

    pub fn scale(&self, w: &Rat) -> Cost {
        match self {
            Cost::Finite(v) => Cost::Finite(v * w),
            Cost::Infinite => Cost::Infinite,
        }
    }
}

impl Add for Cost {
    type Output = Cost;
    fn add(self, rhs: Cost) -> Cost {
        match (self, rhs) {
            (Cost::Finite(a), Cost::Finite(b)) => Cost::Finite(a + b),
            _ => Cost::Infinite,
        }
    }
}

impl<'a> Add<&'a Cost> for Cost {
    type Output = Cost;
    fn add(self, rhs: &'a Cost) -> Cost {
        match (self, rhs) {
            (Cost::Finite(a), Cost::Finite(b)) => Cost::Finite(a + b),
            _ => Cost::Infinite,
        }
    }
}

impl Sum for Cost {
    fn sum<I: Iterator<Item = Cost>>(iter: I) -> Cost {
        iter.fold(Cost::zero(), |a, b| a + b)
    }
}

impl PartialEq<Rat> for Cost {
    fn eq(&self, other: &Rat) -> bool {
        matches!(self, Cost::Finite(v) if v == other)
    }
}

impl PartialOrd<Rat> for Cost {
    fn partial_cmp(&self, other: &Rat) -> Option<Ordering> {
        Some(match self {
            Cost::Finite(v) => v.cmp(other),
            Cost::Infinite => Ordering::Greater,
        })
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::Finite(v) => write!(f, "{v}"),
            Cost::Infinite => write!(f, "inf"),
        }
    }
}

/// Right-continuous nondecreasing step function on `t >= 0`.
///
/// The value before the first breakpoint is 0. From `unavailable_from` on, the
/// function is infinite.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StepCostFunction {
    breakpoints: Vec<(Rat, Rat)>,
    unavailable_from: Option<Rat>,
}

impl StepCostFunction {
    pub fn new(breakpoints: Vec<(Rat, Rat)>, unavailable_from: Option<Rat>) -> Result<Self> {
        for w in breakpoints.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(Error::InvalidInstance(
                    "breakpoint times must strictly increase".into(),
                ));
            }
            if w[0].1 > w[1].1 {
                return Err(Error::InvalidInstance(
                    "step function values must be nondecreasing".into(),
                ));
            }
        }
        if breakpoints.iter().any(|(t, v)| t.is_negative() || v.is_negative()) {
            return Err(Error::InvalidInstance(
                "breakpoints must be nonnegative".into(),
            ));
        }
        if let Some(u) = &unavailable_from {
            if u.is_negative() {
                return Err(Error::InvalidInstance("negative unavailability time".into()));
            }
        }
        Ok(StepCostFunction {
            breakpoints,
            unavailable_from,
        })
    }

    pub fn zero() -> Self {
        StepCostFunction {
            breakpoints: Vec::new(),
            unavailable_from: None,
        }
    }

    /// Step function taking `values[t]` on `[t, t+1)` for integer `t`, and the last
    /// value afterwards. Redundant breakpoints are dropped.
    pub fn from_samples(values: &[Rat]) -> Result<Self> {
        let mut bps: Vec<(Rat, Rat)> = Vec::new();
        for (t, v) in values.iter().enumerate() {
            let prev = bps.last().map(|b| &b.1).cloned().unwrap_or_else(Rat::zero);
            if bps.is_empty() && v.is_zero() {
                continue;
            }
            if bps.is_empty() || *v != prev {
                bps.push((Rat::from_integer((t as i64).into()), v.clone()));
            }
        }
        StepCostFunction::new(bps, None)
    }

    pub fn breakpoints(&self) -> &[(Rat, Rat)] {
        &self.breakpoints
    }

    pub fn unavailable_from(&self) -> Option<&Rat> {
        self.unavailable_from.as_ref()
    }

    pub fn eval(&self, t: &Rat) -> Cost {
        if let Some(u) = &self.unavailable_from {
            if t >= u {
                return Cost::Infinite;
            }
        }
        let idx = self.breakpoints.partition_point(|(bt, _)| bt <= t);
        if idx == 0 {
            Cost::zero()
        } else {
            Cost::Finite(self.breakpoints[idx - 1].1.clone())
        }
    }

    pub fn eval_int(&self, t: i64) -> Cost {
        self.eval(&Rat::from_integer(t.into()))
    }

    /// Times at which the function strictly increases, including the jump to infinity.
    pub fn increase_points(&self) -> Vec<Rat> {
        let mut out = Vec::new();
        let mut prev = Rat::zero();
        for (t, v) in &self.breakpoints {
            if v > &prev {
                out.push(t.clone());
            }
            prev = v.clone();
        }
        if let Some(u) = &self.unavailable_from {
            out.retain(|t| t < u);
            out.push(u.clone());
        }
        out
    }

    /// Applies a monotone map to every value; `None` turns the function infinite from
    /// that breakpoint on.
    pub fn map_values(&self, mut f: impl FnMut(&Rat) -> Option<Rat>) -> StepCostFunction {
        let mut bps: Vec<(Rat, Rat)> = Vec::new();
        let mut unavailable = self.unavailable_from.clone();
        for (t, v) in &self.breakpoints {
            match f(v) {
                Some(nv) => {
                    let prev = bps.last().map(|b| b.1.clone()).unwrap_or_else(Rat::zero);
                    if nv != prev {
                        bps.push((t.clone(), nv));
                    }
                }
                None => {
                    unavailable = Some(match unavailable {
                        Some(u) if u < *t => u,
                        _ => t.clone(),
                    });
                    break;
                }
            }
        }
        if let Some(u) = &unavailable {
            bps.retain(|(t, _)| t < u);
        }
        StepCostFunction {
            breakpoints: bps,
            unavailable_from: unavailable,
        }
    }

    pub fn scaled(&self, w: &Rat) -> StepCostFunction {
        self.map_values(|v| Some(v * w))
    }

    /// Pointwise equality on every time where either function changes.
    pub fn same_as(&self, other: &StepCostFunction) -> bool {
        let mut times: Vec<Rat> = self
            .breakpoints
            .iter()
            .chain(other.breakpoints.iter())
            .map(|b| b.0.clone())
            .chain(self.unavailable_from.iter().cloned())
            .chain(other.unavailable_from.iter().cloned())
            .collect();
        times.push(Rat::zero());
        times.iter().all(|t| self.eval(t) == other.eval(t))
    }
}
