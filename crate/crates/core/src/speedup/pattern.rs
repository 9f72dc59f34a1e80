//! Per-interval layouts: disjoint large-job slots plus at most one small-job window,
//! all with endpoints on the fine grid (measured in units from `R_t`).

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Pattern {
    /// Half-open unit ranges, ascending.
    pub slots: Vec<(i64, i64)>,
    /// `None` is the empty window.
    pub window: Option<(i64, i64)>,
}

impl Pattern {
    /// The pattern without slots whose window is the whole interval.
    pub fn full_window(units: i64) -> Self {
        Pattern {
            slots: Vec::new(),
            window: Some((0, units)),
        }
    }

    pub fn window_units(&self) -> i64 {
        self.window.map_or(0, |(a, b)| b - a)
    }

    pub fn validate(&self, units: i64, min_slot: i64) -> Result<()> {
        let mut segs: Vec<(i64, i64)> = self.slots.clone();
        if self.slots.iter().any(|&(a, b)| b - a < min_slot) {
            return Err(Error::Precondition("slot shorter than the large-job minimum".into()));
        }
        if let Some(w) = self.window {
            if w.1 <= w.0 {
                return Err(Error::Precondition("empty window must be None".into()));
            }
            segs.push(w);
        }
        segs.sort_unstable();
        if segs.iter().any(|&(a, b)| a < 0 || b > units || a >= b) {
            return Err(Error::Precondition("segment outside the interval".into()));
        }
        if segs.windows(2).any(|w| w[0].1 > w[1].0) {
            return Err(Error::Precondition("segments overlap".into()));
        }
        if self.slots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Precondition("slots not ascending".into()));
        }
        Ok(())
    }
}

fn binom(n: i64, k: i64) -> BigUint {
    if k < 0 || n < k {
        return BigUint::zero();
    }
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc = acc * BigUint::from((n - i) as u64) / BigUint::from((i + 1) as u64);
    }
    acc
}

/// Number of patterns on `units` fine steps with slots of at least `min_slot` units.
///
/// `k` segments with minimum total length `L` leave `units - L` free units spread over
/// `2k + 1` slack variables (gaps and length surpluses).
pub fn pattern_count(units: i64, min_slot: i64) -> BigUint {
    let mut total = BigUint::zero();
    let mut s = 0i64;
    while s * min_slot <= units {
        let free = units - s * min_slot;
        total += binom(free + 2 * s, 2 * s);
        if free >= 1 {
            total += BigUint::from((s + 1) as u64) * binom(free - 1 + 2 * (s + 1), 2 * (s + 1));
        }
        s += 1;
    }
    total
}

/// All patterns, or `CapExceeded` when there are more than `cap`.
pub fn enumerate_patterns(units: i64, min_slot: i64, cap: usize) -> Result<Vec<Pattern>> {
    let needed = pattern_count(units, min_slot);
    if needed > BigUint::from(cap) {
        return Err(Error::CapExceeded {
            what: "interval patterns",
            needed: needed.to_u128().unwrap_or(u128::MAX),
            cap: cap as u128,
        });
    }
    let mut out = Vec::new();
    let mut cur = Pattern {
        slots: Vec::new(),
        window: None,
    };
    extend(units, min_slot.max(1), 0, &mut cur, &mut out);
    out.sort();
    Ok(out)
}

fn extend(units: i64, min_slot: i64, from: i64, cur: &mut Pattern, out: &mut Vec<Pattern>) {
    out.push(cur.clone());
    for a in from..units {
        for b in (a + min_slot)..=units {
            cur.slots.push((a, b));
            extend(units, min_slot, b, cur, out);
            cur.slots.pop();
        }
        if cur.window.is_none() {
            for b in (a + 1)..=units {
                cur.window = Some((a, b));
                extend(units, min_slot, b, cur, out);
                cur.window = None;
            }
        }
    }
}
