// SPDX-License-Identifier: Apache-2.0

//! Post-hoc drain times computed from the realized departure log.

use crate::units::{Bytes, Nanos, Rate};

/// Every packet that finished serialization, in departure order. Packets
/// dropped at dequeue are included because they occupied the link.
#[derive(Debug, Clone, Default)]
pub struct DepartureLog {
    times: Vec<Nanos>,
    /// `cumulative[i]` = bytes departed up to and including entry `i`.
    cumulative: Vec<Bytes>,
    /// Rate in force at the end of the run, for extrapolation.
    final_rate: Option<Rate>,
}

/// A realized drain time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleDrain {
    pub value: Nanos,
    /// The run ended before the backlog drained; the remainder was
    /// extrapolated at the final drain rate.
    pub extrapolated: bool,
}

impl DepartureLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, t: Nanos, size: Bytes) {
        debug_assert!(self.times.last().is_none_or(|&last| last <= t));
        let total = self.cumulative.last().copied().unwrap_or(0) + size;
        self.times.push(t);
        self.cumulative.push(total);
    }

    pub fn set_final_rate(&mut self, rate: Rate) {
        self.final_rate = Some(rate);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn total_bytes(&self) -> Bytes {
        self.cumulative.last().copied().unwrap_or(0)
    }

    /// Smallest `d` such that the bytes departing in `(at, at + d]` reach
    /// `backlog`.
    pub fn oracle_drain(&self, at: Nanos, backlog: Bytes) -> OracleDrain {
        if backlog == 0 {
            return OracleDrain {
                value: 0,
                extrapolated: false,
            };
        }
        // first departure strictly after `at`
        let first = self.times.partition_point(|&t| t <= at);
        let before = if first == 0 { 0 } else { self.cumulative[first - 1] };
        let needed = before + backlog;
        let hit = self.cumulative[first..].partition_point(|&c| c < needed) + first;
        if hit < self.times.len() {
            return OracleDrain {
                value: self.times[hit] - at,
                extrapolated: false,
            };
        }
        let remaining = needed - self.total_bytes();
        let from = self.times.last().copied().filter(|&t| t > at).unwrap_or(at);
        let tail = self
            .final_rate
            .map_or(Nanos::MAX, |r| r.serialization(remaining));
        OracleDrain {
            value: (from - at).saturating_add(tail),
            extrapolated: true,
        }
    }
}
