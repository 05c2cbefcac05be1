// SPDX-License-Identifier: Apache-2.0

//! Congestion-signal generators fed by delay samples.
//!
//! [`Aqm`] wraps one algorithm (PI, CoDel or ramp) together with a [`Marker`]
//! and an application point. The simulator calls [`Aqm::observe`] on every
//! dequeue with the configured estimator's sample, [`Aqm::tick`] at each
//! controller update, and [`Aqm::decide`] at both enqueue and dequeue; only
//! the configured side gets a decision.

mod codel;
mod marker;
mod pi;
mod ramp;

use std::fmt;

pub use codel::{CodelConfig, CodelState};
pub use marker::{Marker, MarkerMode};
pub use pi::{PiConfig, PiState};
pub use ramp::RampState;

use crate::units::Nanos;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Pass,
    Mark,
    Drop,
}

impl Action {
    pub fn key(self) -> &'static str {
        match self {
            Action::Pass => "pass",
            Action::Mark => "mark",
            Action::Drop => "drop",
        }
    }

    pub fn is_signal(self) -> bool {
        self != Action::Pass
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignalKind {
    EcnMark,
    Drop,
}

impl From<SignalKind> for Action {
    fn from(s: SignalKind) -> Action {
        match s {
            SignalKind::EcnMark => Action::Mark,
            SignalKind::Drop => Action::Drop,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ApplyPoint {
    Enqueue,
    Dequeue,
}

impl ApplyPoint {
    pub fn key(self) -> &'static str {
        match self {
            ApplyPoint::Enqueue => "enqueue",
            ApplyPoint::Dequeue => "dequeue",
        }
    }
}

impl fmt::Display for ApplyPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkDecision {
    pub action: Action,
    pub p_at_decision: f64,
    pub applied_at: ApplyPoint,
}

impl MarkDecision {
    pub fn pass(applied_at: ApplyPoint) -> Self {
        MarkDecision {
            action: Action::Pass,
            p_at_decision: 0.0,
            applied_at,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    None,
    Pi(PiConfig),
    Codel(CodelConfig),
    Ramp(RampState),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AqmConfig {
    pub algorithm: Algorithm,
    pub apply: ApplyPoint,
    pub signal: SignalKind,
    pub marker: MarkerMode,
}

impl Default for AqmConfig {
    fn default() -> Self {
        AqmConfig {
            algorithm: Algorithm::None,
            apply: ApplyPoint::Dequeue,
            signal: SignalKind::EcnMark,
            marker: MarkerMode::RandomBernoulli,
        }
    }
}

#[derive(Debug, Clone)]
enum State {
    None,
    Pi(PiState),
    Codel(CodelState),
    Ramp(RampState),
}

#[derive(Debug, Clone)]
pub struct Aqm {
    state: State,
    marker: Marker,
    apply: ApplyPoint,
    /// Most recent dequeue sample of the configured estimator.
    latest: Nanos,
    /// CoDel signals not yet applied to a packet.
    codel_pending: u64,
}

impl Aqm {
    pub fn new(cfg: &AqmConfig) -> Self {
        let state = match cfg.algorithm {
            Algorithm::None => State::None,
            Algorithm::Pi(c) => State::Pi(PiState::new(&c)),
            Algorithm::Codel(c) => State::Codel(CodelState::new(&c)),
            Algorithm::Ramp(r) => State::Ramp(r),
        };
        Aqm {
            state,
            marker: Marker::new(cfg.marker, cfg.signal),
            apply: cfg.apply,
            latest: 0,
            codel_pending: 0,
        }
    }

    pub fn apply_point(&self) -> ApplyPoint {
        self.apply
    }

    pub fn pi(&self) -> Option<&PiState> {
        match &self.state {
            State::Pi(s) => Some(s),
            _ => None,
        }
    }

    pub fn codel(&self) -> Option<&CodelState> {
        match &self.state {
            State::Codel(s) => Some(s),
            _ => None,
        }
    }

    /// Next periodic controller update, if the algorithm has one.
    pub fn next_update(&self) -> Option<Nanos> {
        match &self.state {
            State::Pi(s) => Some(s.next_update()),
            _ => None,
        }
    }

    /// Runs the periodic update. An idle queue contributes a zero sample.
    pub fn tick(&mut self, now: Nanos, queue_empty: bool) {
        let sample = if queue_empty { 0 } else { self.latest };
        if let State::Pi(s) = &mut self.state {
            s.update(sample, now);
        }
    }

    /// Feeds the dequeue-time sample. `None` means the estimator has nothing
    /// to report yet; the previous sample is kept and CoDel is not clocked.
    pub fn observe(&mut self, sample: Option<Nanos>, now: Nanos) {
        let Some(q) = sample else { return };
        self.latest = q;
        if let State::Codel(s) = &mut self.state {
            if s.on_dequeue(q, now) {
                self.codel_pending += 1;
            }
        }
    }

    /// Called when a departure leaves the queue empty.
    pub fn queue_emptied(&mut self) {
        if let State::Codel(s) = &mut self.state {
            s.on_empty();
        }
    }

    /// Decision for a packet passing `point`, or `None` when the AQM is not
    /// applied there. `draw` is a uniform sample for the random marker.
    pub fn decide(&mut self, point: ApplyPoint, draw: f64) -> Option<MarkDecision> {
        if point != self.apply {
            return None;
        }
        let d = match &self.state {
            State::None => return None,
            State::Pi(s) => s.decide(&mut self.marker, s.last_qdelay, draw, point),
            State::Ramp(r) => {
                let p = r.prob(self.latest);
                MarkDecision {
                    action: self.marker.action(p, draw),
                    p_at_decision: p,
                    applied_at: point,
                }
            }
            State::Codel(_) => {
                if self.codel_pending > 0 {
                    self.codel_pending -= 1;
                    MarkDecision {
                        action: self.marker.signal().into(),
                        p_at_decision: 1.0,
                        applied_at: point,
                    }
                } else {
                    MarkDecision::pass(point)
                }
            }
        };
        Some(d)
    }
}
