// SPDX-License-Identifier: Apache-2.0

//! Proportional-integral probability controller in the PIE lineage.
//!
//! The controller samples queue delay every `t_update` and nudges `p` by
//! `alpha` times the error against `target` plus `beta` times the change
//! since the previous sample. Gains are per second of delay.

use super::{Action, ApplyPoint, MarkDecision, Marker};
use crate::units::{ms, Nanos, NANOS_PER_SEC};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiConfig {
    pub target: Nanos,
    pub t_update: Nanos,
    pub alpha: f64,
    pub beta: f64,
    pub burst_heuristic: bool,
}

impl Default for PiConfig {
    fn default() -> Self {
        PiConfig {
            target: ms(15),
            t_update: ms(16),
            alpha: 0.125,
            beta: 1.25,
            burst_heuristic: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiState {
    pub p: f64,
    pub target: Nanos,
    pub t_update: Nanos,
    pub alpha: f64,
    pub beta: f64,
    pub last_qdelay: Nanos,
    pub burst_heuristic_enabled: bool,
    last_update: Option<Nanos>,
}

fn secs_f64(t: Nanos) -> f64 {
    t as f64 / NANOS_PER_SEC as f64
}

impl PiState {
    pub fn new(cfg: &PiConfig) -> Self {
        PiState {
            p: 0.0,
            target: cfg.target,
            t_update: cfg.t_update,
            alpha: cfg.alpha,
            beta: cfg.beta,
            last_qdelay: 0,
            burst_heuristic_enabled: cfg.burst_heuristic,
            last_update: None,
        }
    }

    /// Time of the next scheduled update.
    pub fn next_update(&self) -> Nanos {
        match self.last_update {
            Some(t) => t.saturating_add(self.t_update),
            None => self.t_update,
        }
    }

    /// Applies one controller step with the delay sample `qdelay`.
    pub fn update(&mut self, qdelay: Nanos, now: Nanos) {
        debug_assert!(now >= self.next_update() || self.last_update.is_none());
        let error = secs_f64(qdelay) - secs_f64(self.target);
        let delta = secs_f64(qdelay) - secs_f64(self.last_qdelay);
        let p = self.p + self.alpha * error + self.beta * delta;
        self.p = p.clamp(0.0, 1.0);
        self.last_qdelay = qdelay;
        self.last_update = Some(now);
    }

    /// Per-packet decision. `burst_qdelay` is the delay sample the half-target
    /// heuristic looks at; it only matters when the heuristic is enabled.
    pub fn decide(
        &self,
        marker: &mut Marker,
        burst_qdelay: Nanos,
        draw: f64,
        applied_at: ApplyPoint,
    ) -> MarkDecision {
        if self.burst_heuristic_enabled && burst_qdelay < self.target / 2 {
            return MarkDecision {
                action: Action::Pass,
                p_at_decision: self.p,
                applied_at,
            };
        }
        MarkDecision {
            action: marker.action(self.p, draw),
            p_at_decision: self.p,
            applied_at,
        }
    }
}
