// SPDX-License-Identifier: Apache-2.0

//! Instantaneous-delay ramp and step. RED-shaped, but driven by the per-packet
//! delay sample rather than a smoothed queue length.

use crate::units::Nanos;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RampState {
    pub min_th: Nanos,
    pub max_th: Nanos,
    pub max_p: f64,
}

impl RampState {
    pub fn new(min_th: Nanos, max_th: Nanos, max_p: f64) -> Self {
        assert!(min_th <= max_th, "ramp min_th above max_th");
        assert!((0.0..=1.0).contains(&max_p), "ramp max_p outside [0, 1]");
        RampState {
            min_th,
            max_th,
            max_p,
        }
    }

    /// A step at `th`: zero below it, `max_p` at or above it.
    pub fn step(th: Nanos, max_p: f64) -> Self {
        Self::new(th, th, max_p)
    }

    pub fn prob(&self, qdelay: Nanos) -> f64 {
        if qdelay >= self.max_th {
            // checked first so the degenerate step returns max_p at the threshold
            self.max_p
        } else if qdelay <= self.min_th {
            0.0
        } else {
            let span = (self.max_th - self.min_th) as f64;
            self.max_p * (qdelay - self.min_th) as f64 / span
        }
    }
}

impl Default for RampState {
    fn default() -> Self {
        RampState::new(crate::units::ms(5), crate::units::ms(25), 0.1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::ms;

    #[test]
    fn boundaries_and_midpoint() {
        let r = RampState::new(ms(10), ms(30), 0.1);
        assert_eq!(r.prob(ms(10)), 0.0);
        assert_eq!(r.prob(ms(5)), 0.0);
        assert!((r.prob(ms(20)) - 0.05).abs() < 1e-15);
        assert_eq!(r.prob(ms(30)), 0.1);
        assert_eq!(r.prob(ms(300)), 0.1);
    }

    #[test]
    fn step_is_degenerate_ramp() {
        let r = RampState::step(ms(1), 1.0);
        assert_eq!(r.prob(ms(1)), 1.0);
        assert_eq!(r.prob(ms(1) - 1), 0.0);
    }

    #[test]
    #[should_panic]
    fn rejects_inverted_thresholds() {
        RampState::new(ms(2), ms(1), 0.5);
    }
}
