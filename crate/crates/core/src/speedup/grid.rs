//! Geometric time intervals `I_t = [R_t, R_{t+1})`, `R_t = (1+eps)^t`, and their fine grid.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{ceil_log, floor_log, int, powi, Rat};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalGrid {
    /// `1 / eps`.
    pub inv_eps: i64,
    pub eps: Rat,
    base: Rat,
}

impl IntervalGrid {
    /// `eps = 1 / inv_eps`; the fine grid is integral only for such values.
    pub fn new(inv_eps: i64) -> Result<Self> {
        if inv_eps < 1 {
            return Err(Error::Precondition("1/eps must be a positive integer".into()));
        }
        let eps = Rat::new(1.into(), inv_eps.into());
        Ok(IntervalGrid {
            inv_eps,
            base: Rat::one() + &eps,
            eps,
        })
    }

    pub fn base(&self) -> &Rat {
        &self.base
    }

    pub fn r(&self, t: i64) -> Rat {
        powi(&self.base, t)
    }

    pub fn length(&self, t: i64) -> Rat {
        &self.eps * self.r(t)
    }

    /// Fine subintervals per interval, `4 (1+eps) / eps^3`.
    pub fn units(&self) -> i64 {
        4 * (self.inv_eps + 1) * self.inv_eps * self.inv_eps
    }

    /// Length of one fine subinterval of `I_t`.
    pub fn unit(&self, t: i64) -> Rat {
        self.length(t) / int(self.units())
    }

    /// `R_{t,k} = (1 + k eps^4 / (4 (1+eps))) R_t`.
    pub fn fine_point(&self, t: i64, k: i64) -> Rat {
        self.r(t) + self.unit(t) * int(k)
    }

    /// Minimum large-slot length in units: a large job starting in `I_t` has `p >= eps^3 R_t`.
    pub fn min_slot_units(&self) -> i64 {
        4 * (self.inv_eps + 1)
    }

    /// Interval `t` with `c` in `(R_t, R_{t+1}]`, so that `R_{t+1}` is `c` rounded up.
    pub fn completion_interval(&self, c: &Rat) -> i64 {
        ceil_log(&self.base, c).0 - 1
    }

    /// Interval `t` with `R_{t+1} <= c < R_{t+2}`.
    pub fn interval_ending_before(&self, c: &Rat) -> i64 {
        floor_log(&self.base, c).0 - 1
    }
}

/// Largest power of `1+eps` not exceeding `eps p / (1+eps)`.
pub fn artificial_release(p: i64, eps: &Rat) -> Result<Rat> {
    if p < 1 || eps <= &Rat::zero() {
        return Err(Error::Precondition("artificial release needs p >= 1 and eps > 0".into()));
    }
    let base = Rat::one() + eps;
    Ok(floor_log(&base, &(eps * int(p) / &base)).1)
}

/// Smallest power of `1+eps` not below `c`.
pub fn round_completion(c: &Rat, eps: &Rat) -> Result<Rat> {
    if c <= &Rat::zero() || eps <= &Rat::zero() {
        return Err(Error::Precondition("rounding needs c > 0 and eps > 0".into()));
    }
    Ok(ceil_log(&(Rat::one() + eps), c).1)
}
