// SPDX-License-Identifier: Apache-2.0

//! CoDel control law driven by an arbitrary delay sample.
//!
//! The state machine follows the published pseudocode: delay must stay at or
//! above `target` for a whole `interval` before the first signal, subsequent
//! signals are spaced `interval / sqrt(count)` apart, and a sample below
//! target leaves the signalling state. The MTU exemption for nearly empty
//! queues is not modelled because the sample already reflects the backlog.

use crate::units::{ms, Nanos};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodelConfig {
    pub target: Nanos,
    pub interval: Nanos,
}

impl Default for CodelConfig {
    fn default() -> Self {
        CodelConfig {
            target: ms(5),
            interval: ms(100),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodelState {
    pub target: Nanos,
    pub interval: Nanos,
    /// Deadline at which a persistent excess becomes actionable; `None`
    /// while the delay is below target.
    pub first_above_time: Option<Nanos>,
    pub dropping: bool,
    pub count: u32,
    pub lastcount: u32,
    pub drop_next: Nanos,
}

impl CodelState {
    pub fn new(cfg: &CodelConfig) -> Self {
        CodelState {
            target: cfg.target,
            interval: cfg.interval,
            first_above_time: None,
            dropping: false,
            count: 0,
            lastcount: 0,
            drop_next: 0,
        }
    }

    fn control_law(&self, t: Nanos) -> Nanos {
        let step = self.interval as f64 / (self.count.max(1) as f64).sqrt();
        t.saturating_add(step.round() as Nanos)
    }

    /// Whether the excess has persisted for an interval.
    fn ok_to_signal(&mut self, qdelay: Nanos, now: Nanos) -> bool {
        if qdelay < self.target {
            self.first_above_time = None;
            return false;
        }
        match self.first_above_time {
            None => {
                self.first_above_time = Some(now.saturating_add(self.interval));
                false
            }
            Some(t) => now >= t,
        }
    }

    /// The queue ran empty: an idle queue has no standing delay, so the
    /// excess timer and the dropping state are both cleared.
    pub fn on_empty(&mut self) {
        self.first_above_time = None;
        self.dropping = false;
    }

    /// Feeds one dequeue sample and returns whether this packet is signalled.
    ///
    /// The reference pseudocode drops several packets in a loop when more
    /// than one deadline has passed; each call here signals at most the
    /// current packet and lets the next dequeue catch up.
    pub fn on_dequeue(&mut self, qdelay: Nanos, now: Nanos) -> bool {
        let ok = self.ok_to_signal(qdelay, now);
        if self.dropping {
            if !ok {
                self.dropping = false;
                return false;
            }
            if now >= self.drop_next {
                self.count += 1;
                self.drop_next = self.control_law(self.drop_next);
                return true;
            }
            false
        } else if ok {
            self.dropping = true;
            let delta = self.count.saturating_sub(self.lastcount);
            // resume near the previous rate if the last episode was recent
            self.count = if delta > 1 && now.saturating_sub(self.drop_next) < 16 * self.interval {
                delta
            } else {
                1
            };
            self.lastcount = self.count;
            self.drop_next = self.control_law(now);
            true
        } else {
            false
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn feed(s: &mut CodelState, samples: impl IntoIterator<Item = (Nanos, Nanos)>) -> Vec<Nanos> {
        samples
            .into_iter()
            .filter(|&(t, q)| s.on_dequeue(q, t))
            .map(|(t, _)| t)
            .collect()
    }

    #[test]
    fn below_target_never_signals() {
        let mut s = CodelState::new(&CodelConfig::default());
        let hits = feed(&mut s, (0..10_000).map(|i| (i * ms(1), ms(4))));
        assert!(hits.is_empty());
        assert!(!s.dropping);
    }

    #[test]
    fn first_signal_after_one_interval() {
        let mut s = CodelState::new(&CodelConfig::default());
        let hits = feed(&mut s, (0..300).map(|i| (i * ms(1), ms(10))));
        assert_eq!(hits[0], ms(100));
        // then interval/sqrt(count) spacing, sampled on the 1 ms grid
        assert_eq!(hits[1], ms(200));
        assert_eq!(hits[2], ms(271));
        assert!(s.dropping);
    }

    #[test]
    fn exits_when_sample_falls_below_target() {
        let mut s = CodelState::new(&CodelConfig::default());
        feed(&mut s, (0..150).map(|i| (i * ms(1), ms(10))));
        assert!(s.dropping);
        assert!(!s.on_dequeue(ms(1), ms(150)));
        assert!(!s.dropping);
        assert_eq!(s.first_above_time, None);
    }

    #[test]
    fn short_excursion_does_not_signal() {
        let mut s = CodelState::new(&CodelConfig::default());
        let mut samples: Vec<(Nanos, Nanos)> = (0..99).map(|i| (i * ms(1), ms(10))).collect();
        samples.push((ms(99), ms(1)));
        samples.extend((100..198).map(|i| (i * ms(1), ms(10))));
        assert!(feed(&mut s, samples).is_empty());
    }

    #[test]
    fn reentry_resumes_count() {
        let mut s = CodelState::new(&CodelConfig::default());
        feed(&mut s, (0..500).map(|i| (i * ms(1), ms(10))));
        let count = s.count;
        assert!(count > 2);
        s.on_dequeue(0, ms(500));
        let t0 = ms(501);
        feed(&mut s, (0..=100).map(|i| (t0 + i * ms(1), ms(10))));
        assert!(s.dropping);
        assert_eq!(s.count, count - 1);
    }

    #[test]
    fn empty_queue_leaves_dropping_state() {
        let mut s = CodelState::new(&CodelConfig::default());
        feed(&mut s, (0..=150).map(|i| (i * ms(1), ms(10))));
        assert!(s.dropping);
        s.on_empty();
        assert!(!s.dropping);
        // the excess timer restarts, so a full interval must pass again
        assert!(feed(&mut s, (151..=250).map(|i| (i * ms(1), ms(10)))).is_empty());
    }
}
