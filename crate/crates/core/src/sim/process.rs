// SPDX-License-Identifier: Apache-2.0

//! Arrival and drain processes.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use super::scenario::{ArrivalProcess, DrainProcess};
use crate::units::{Bytes, Nanos, Rate};

/// Yields arrival instants in increasing order, all below `end`.
#[derive(Debug, Clone)]
pub struct Arrivals {
    process: ArrivalProcess,
    size: Bytes,
    end: Nanos,
    rng: ChaCha8Rng,
    /// Start of the current on/off cycle.
    cycle_start: Nanos,
    /// Packets emitted so far in the current cycle (or overall for
    /// constant rate).
    index: u64,
    last: Option<Nanos>,
    done: bool,
}

impl Arrivals {
    pub fn new(process: ArrivalProcess, size: Bytes, end: Nanos, rng: ChaCha8Rng) -> Self {
        Arrivals {
            process,
            size,
            end,
            rng,
            cycle_start: 0,
            index: 0,
            last: None,
            done: false,
        }
    }

    fn advance(&mut self) -> Nanos {
        match self.process {
            ArrivalProcess::ConstantRate { rate } => {
                // same rounded per-packet gap as the drain, so equal nominal
                // rates stay in lockstep
                let t = self.index.saturating_mul(rate.serialization(self.size));
                self.index += 1;
                t
            }
            ArrivalProcess::Burst {
                rate_high,
                rate_low,
                period,
                duty,
            } => match self.last {
                None => 0,
                Some(t) => {
                    let high_len = (period as f64 * duty).round() as Nanos;
                    let rate = if t % period < high_len {
                        rate_high
                    } else {
                        rate_low
                    };
                    t.saturating_add(rate.serialization(self.size))
                }
            },
            ArrivalProcess::OnOff { rate, on, off } => {
                let mut offset = self.index.saturating_mul(rate.serialization(self.size));
                if offset >= on {
                    self.cycle_start = self.cycle_start.saturating_add(on + off);
                    self.index = 0;
                    offset = 0;
                }
                self.index += 1;
                self.cycle_start.saturating_add(offset)
            }
            ArrivalProcess::PoissonLike { mean_rate } => match self.last {
                None => 0,
                Some(t) => {
                    let mean_gap = mean_rate.serialization(self.size) as f64;
                    let gap = Exp::new(1.0 / mean_gap)
                        .expect("positive rate")
                        .sample(&mut self.rng);
                    t.saturating_add(gap.round() as Nanos)
                }
            },
        }
    }
}

impl Iterator for Arrivals {
    type Item = Nanos;

    fn next(&mut self) -> Option<Nanos> {
        if self.done {
            return None;
        }
        let t = self.advance();
        if t >= self.end {
            self.done = true;
            return None;
        }
        self.last = Some(t);
        Some(t)
    }
}

/// One packet's turn on the link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slot {
    pub start: Nanos,
    pub end: Nanos,
    pub rate: Rate,
}

#[derive(Debug, Clone)]
pub struct Drain {
    process: DrainProcess,
    rng: ChaCha8Rng,
    walk_bps: f64,
}

impl Drain {
    pub fn new(process: DrainProcess, rng: ChaCha8Rng) -> Self {
        let walk_bps = match process {
            DrainProcess::RandomWalk { mean_rate, .. } => mean_rate.bps() as f64,
            _ => 0.0,
        };
        Drain {
            process,
            rng,
            walk_bps,
        }
    }

    /// Rate that a slot starting at `t` would use, without advancing the
    /// random walk.
    pub fn rate_at(&self, t: Nanos) -> Rate {
        match self.process {
            DrainProcess::ConstantRate { rate } => rate,
            DrainProcess::StepChange {
                rate_before,
                rate_after,
                t_step,
            } => {
                if t < t_step {
                    rate_before
                } else {
                    rate_after
                }
            }
            DrainProcess::FitsAndStarts { rate, .. } => rate,
            DrainProcess::RandomWalk { .. } => Rate::from_bps(self.walk_bps.round() as u64),
        }
    }

    /// Schedules a packet of `size` bytes that is ready to go at `ready`.
    /// A stall defers the start; the rate is fixed for the whole slot.
    pub fn slot(&mut self, ready: Nanos, size: Bytes) -> Slot {
        let start = match self.process {
            DrainProcess::FitsAndStarts {
                stall_period,
                stall_len,
                ..
            } => {
                let phase = ready % stall_period;
                if phase >= stall_period - stall_len {
                    ready - phase + stall_period
                } else {
                    ready
                }
            }
            _ => ready,
        };
        let rate = self.rate_at(start);
        if let DrainProcess::RandomWalk {
            mean_rate,
            step_pct,
        } = self.process
        {
            let up: bool = self.rng.random();
            let factor = if up { 1.0 + step_pct / 100.0 } else { 1.0 - step_pct / 100.0 };
            let mean = mean_rate.bps() as f64;
            self.walk_bps = (self.walk_bps * factor).clamp(mean / 2.0, mean * 2.0);
        }
        Slot {
            start,
            end: start.saturating_add(rate.serialization(size)),
            rate,
        }
    }
}
