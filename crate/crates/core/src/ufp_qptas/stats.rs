use std::sync::atomic::{AtomicU64, Ordering};

use serde::Serialize;

/// Counters shared by the recursion; safe to update from parallel branches.
#[derive(Debug, Default)]
pub struct QptasStats {
    lp_solves: AtomicU64,
    max_fractional: AtomicU64,
    max_lp_rows: AtomicU64,
    vertex_violations: AtomicU64,
    rounding_violations: AtomicU64,
    fractional_over_rows: AtomicU64,
    cap_hits: AtomicU64,
    recursion_calls: AtomicU64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct StatsSnapshot {
    pub lp_solves: u64,
    pub max_fractional: u64,
    pub max_lp_rows: u64,
    pub vertex_violations: u64,
    pub rounding_violations: u64,
    pub fractional_over_rows: u64,
    pub cap_hits: u64,
    pub recursion_calls: u64,
}

impl QptasStats {
    pub(crate) fn record_lp(&self, fractional: usize, rows: usize, vertex_ok: bool) {
        self.lp_solves.fetch_add(1, Ordering::Relaxed);
        self.max_fractional.fetch_max(fractional as u64, Ordering::Relaxed);
        self.max_lp_rows.fetch_max(rows as u64, Ordering::Relaxed);
        if !vertex_ok {
            self.vertex_violations.fetch_add(1, Ordering::Relaxed);
        }
        if fractional > rows {
            self.fractional_over_rows.fetch_add(1, Ordering::Relaxed);
        }
    }

    pub(crate) fn record_rounding(&self, ok: bool) {
        if !ok {
            self.rounding_violations.fetch_add(1, Ordering::Relaxed);
        }
    }

    pub(crate) fn cap_hit(&self) {
        self.cap_hits.fetch_add(1, Ordering::Relaxed);
    }

    pub(crate) fn call(&self) {
        self.recursion_calls.fetch_add(1, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> StatsSnapshot {
        let g = |a: &AtomicU64| a.load(Ordering::Relaxed);
        StatsSnapshot {
            lp_solves: g(&self.lp_solves),
            max_fractional: g(&self.max_fractional),
            max_lp_rows: g(&self.max_lp_rows),
            vertex_violations: g(&self.vertex_violations),
            rounding_violations: g(&self.rounding_violations),
            fractional_over_rows: g(&self.fractional_over_rows),
            cap_hits: g(&self.cap_hits),
            recursion_calls: g(&self.recursion_calls),
        }
    }
}
