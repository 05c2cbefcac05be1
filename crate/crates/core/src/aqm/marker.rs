// SPDX-License-Identifier: Apache-2.0

//! Turns a signalling probability into per-packet marks.
//!
//! `RandomBernoulli` marks when a uniform draw falls below `p`.
//! `DeterministicInterval` adds `p` to an accumulator and marks each time it
//! reaches one, which spaces marks exactly `1/p` packets apart for constant
//! `p` and conserves the total for varying `p`.

use super::{Action, SignalKind};

/// Fixed-point scale of the deterministic accumulator (one part in 10^12).
/// Decimal so that probabilities such as 0.01 accumulate without drift.
const ONE: u64 = 1_000_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MarkerMode {
    RandomBernoulli,
    DeterministicInterval,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Marker {
    mode: MarkerMode,
    accumulator: u64,
    signal: SignalKind,
}

impl Marker {
    pub fn new(mode: MarkerMode, signal: SignalKind) -> Self {
        Marker {
            mode,
            accumulator: 0,
            signal,
        }
    }

    pub fn mode(&self) -> MarkerMode {
        self.mode
    }

    pub fn signal(&self) -> SignalKind {
        self.signal
    }

    /// Accumulator value in `[0, 1)`.
    pub fn accumulator(&self) -> f64 {
        self.accumulator as f64 / ONE as f64
    }

    /// Returns whether this packet carries a signal. `draw` is a uniform
    /// sample in `[0, 1)`; the deterministic mode ignores it.
    pub fn decide(&mut self, p: f64, draw: f64) -> bool {
        let p = if p.is_nan() { 0.0 } else { p.clamp(0.0, 1.0) };
        match self.mode {
            MarkerMode::RandomBernoulli => draw < p,
            MarkerMode::DeterministicInterval => {
                self.accumulator += (p * ONE as f64).round() as u64;
                if self.accumulator >= ONE {
                    self.accumulator -= ONE;
                    true
                } else {
                    false
                }
            }
        }
    }

    /// Like [`Marker::decide`] but returns the configured action.
    pub fn action(&mut self, p: f64, draw: f64) -> Action {
        if self.decide(p, draw) {
            self.signal.into()
        } else {
            Action::Pass
        }
    }
}
