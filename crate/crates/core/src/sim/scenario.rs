// SPDX-License-Identifier: Apache-2.0

//! Scenario description and validation.

use thiserror::Error;

use crate::aqm::{Algorithm, AqmConfig};
use crate::estimators::{Estimator, DEFAULT_MIN_WINDOW_PACKETS};
use crate::units::{secs, Bytes, Nanos, Rate};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArrivalProcess {
    ConstantRate {
        rate: Rate,
    },
    /// Alternates `rate_high` for `duty * period` and `rate_low` for the
    /// rest of each period.
    Burst {
        rate_high: Rate,
        rate_low: Rate,
        period: Nanos,
        duty: f64,
    },
    /// `rate` during `on`, silent during `off`, starting with an on phase.
    OnOff {
        rate: Rate,
        on: Nanos,
        off: Nanos,
    },
    /// Exponential inter-arrival times with the given mean rate.
    PoissonLike {
        mean_rate: Rate,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DrainProcess {
    ConstantRate {
        rate: Rate,
    },
    StepChange {
        rate_before: Rate,
        rate_after: Rate,
        t_step: Nanos,
    },
    /// Serves at `rate` but stalls for the last `stall_len` of every
    /// `stall_period`.
    FitsAndStarts {
        rate: Rate,
        stall_period: Nanos,
        stall_len: Nanos,
    },
    /// Multiplicative random walk: each packet boundary moves the rate up or
    /// down by `step_pct` percent, kept within a factor of two of the mean.
    RandomWalk {
        mean_rate: Rate,
        step_pct: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub arrival: ArrivalProcess,
    /// No arrivals at or after this instant.
    pub arrival_stop: Option<Nanos>,
    /// Number of flows sharing the arrival process; each packet is assigned
    /// a flow uniformly at random.
    pub flows: u32,
    pub drain: DrainProcess,
    pub packet_size: Bytes,
    pub duration: Nanos,
    pub queue_capacity: Option<Bytes>,
    pub aqm: AqmConfig,
    pub estimator: Estimator,
    pub min_window_packets: u32,
    pub seed: u64,
}

impl Scenario {
    /// A scenario with the documented defaults: 1500 B packets, 1 s run,
    /// unbounded queue, no AQM, scaled sojourn, seed 1.
    pub fn new(arrival: ArrivalProcess, drain: DrainProcess) -> Self {
        Scenario {
            arrival,
            arrival_stop: None,
            flows: 1,
            drain,
            packet_size: 1500,
            duration: secs(1),
            queue_capacity: None,
            aqm: AqmConfig::default(),
            estimator: Estimator::ScaledExact,
            min_window_packets: DEFAULT_MIN_WINDOW_PACKETS,
            seed: 1,
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        use ScenarioError::*;
        if self.duration == 0 {
            return Err(ZeroDuration);
        }
        if self.packet_size == 0 {
            return Err(ZeroPacketSize);
        }
        if self.flows == 0 {
            return Err(Invalid("flows must be at least 1".into()));
        }
        if self.min_window_packets == 0 {
            return Err(Invalid("min_window_packets must be at least 1".into()));
        }
        if let Some(c) = self.queue_capacity {
            if c < self.packet_size {
                return Err(Invalid(format!(
                    "queue capacity {c} B cannot hold a {} B packet",
                    self.packet_size
                )));
            }
        }
        let positive = |name: &'static str, r: Rate| {
            if r.is_zero() {
                Err(ZeroRate(name))
            } else {
                Ok(())
            }
        };
        match self.arrival {
            ArrivalProcess::ConstantRate { rate } => positive("arrival.rate", rate)?,
            ArrivalProcess::Burst {
                rate_high,
                rate_low,
                period,
                duty,
            } => {
                positive("arrival.rate_high", rate_high)?;
                positive("arrival.rate_low", rate_low)?;
                if period == 0 {
                    return Err(Invalid("arrival.period must be positive".into()));
                }
                if !(duty > 0.0 && duty < 1.0) {
                    return Err(Invalid(format!("arrival.duty {duty} outside (0, 1)")));
                }
            }
            ArrivalProcess::OnOff { rate, on, .. } => {
                positive("arrival.rate", rate)?;
                if on == 0 {
                    return Err(Invalid("arrival.on must be positive".into()));
                }
            }
            ArrivalProcess::PoissonLike { mean_rate } => positive("arrival.rate", mean_rate)?,
        }
        match self.drain {
            DrainProcess::ConstantRate { rate } => positive("drain.rate", rate)?,
            DrainProcess::StepChange {
                rate_before,
                rate_after,
                ..
            } => {
                positive("drain.step.before", rate_before)?;
                positive("drain.step.after", rate_after)?;
            }
            DrainProcess::FitsAndStarts {
                rate,
                stall_period,
                stall_len,
            } => {
                positive("drain.rate", rate)?;
                if stall_len >= stall_period {
                    return Err(Invalid(
                        "drain.fits.stall_len must be shorter than drain.fits.stall_period".into(),
                    ));
                }
            }
            DrainProcess::RandomWalk {
                mean_rate,
                step_pct,
            } => {
                positive("drain.rate", mean_rate)?;
                if !(0.0..100.0).contains(&step_pct) {
                    return Err(Invalid(format!("drain.walk.step_pct {step_pct} outside [0, 100)")));
                }
            }
        }
        match self.aqm.algorithm {
            Algorithm::None => {}
            Algorithm::Pi(pi) => {
                if pi.t_update == 0 {
                    return Err(Invalid("aqm.pi.t_update must be positive".into()));
                }
                if !pi.alpha.is_finite() || !pi.beta.is_finite() {
                    return Err(Invalid("aqm.pi gains must be finite".into()));
                }
            }
            Algorithm::Codel(c) => {
                if c.interval == 0 {
                    return Err(Invalid("aqm.codel.interval must be positive".into()));
                }
            }
            Algorithm::Ramp(r) => {
                if r.min_th > r.max_th {
                    return Err(Invalid("aqm.ramp.min_th above aqm.ramp.max_th".into()));
                }
                if !(0.0..=1.0).contains(&r.max_p) {
                    return Err(Invalid(format!("aqm.ramp.max_p {} outside [0, 1]", r.max_p)));
                }
            }
        }
        Ok(())
    }

    /// End of the arrival window.
    pub fn arrivals_end(&self) -> Nanos {
        self.arrival_stop.map_or(self.duration, |s| s.min(self.duration))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("duration must be positive")]
    ZeroDuration,
    #[error("packet size must be positive")]
    ZeroPacketSize,
    #[error("{0} must be positive")]
    ZeroRate(&'static str),
    #[error("{0}")]
    Invalid(String),
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> Scenario {
        Scenario::new(
            ArrivalProcess::ConstantRate {
                rate: Rate::from_mbps(1),
            },
            DrainProcess::ConstantRate {
                rate: Rate::from_mbps(1),
            },
        )
    }

    #[test]
    fn defaults_validate() {
        assert_eq!(base().validate(), Ok(()));
    }

    #[test]
    fn rejects_zero_duration_and_rate() {
        let mut s = base();
        s.duration = 0;
        assert_eq!(s.validate(), Err(ScenarioError::ZeroDuration));
        let mut s = base();
        s.drain = DrainProcess::ConstantRate {
            rate: Rate::from_bps(0),
        };
        assert_eq!(s.validate(), Err(ScenarioError::ZeroRate("drain.rate")));
    }

    #[test]
    fn rejects_stall_longer_than_period() {
        let mut s = base();
        s.drain = DrainProcess::FitsAndStarts {
            rate: Rate::from_mbps(1),
            stall_period: 10,
            stall_len: 10,
        };
        assert!(s.validate().is_err());
    }

    #[test]
    fn arrival_window() {
        let mut s = base();
        assert_eq!(s.arrivals_end(), secs(1));
        s.arrival_stop = Some(secs(2));
        assert_eq!(s.arrivals_end(), secs(1));
        s.arrival_stop = Some(500);
        assert_eq!(s.arrivals_end(), 500);
    }
}
