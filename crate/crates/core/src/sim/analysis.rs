// SPDX-License-Identifier: Apache-2.0

//! Metrics extracted from trace records.

use thiserror::Error;

use super::trace::TraceRecord;
use crate::aqm::ApplyPoint;
use crate::estimators::Estimator;
use crate::units::Nanos;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum LagError {
    #[error("estimator {0} never reached the threshold")]
    NotCrossed(Estimator),
    #[error("oracle drain time never reached the threshold")]
    OracleNotCrossed,
    #[error("no packet arrived after the {0} estimate crossed the threshold")]
    NoLaterArrival(Estimator),
}

/// Result of one threshold-crossing measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepLag {
    /// Signal departure time minus oracle crossing time. Negative when the
    /// estimator fires before the true delay gets there.
    pub lag: i64,
    /// Departure of the first packet whose oracle drain time reached the
    /// threshold.
    pub t_oracle: Nanos,
    /// Dequeue instant at which the estimator first reached the threshold.
    pub t_detect: Nanos,
    /// Departure of the packet that carries the signal.
    pub t_signal: Nanos,
    /// Raw sojourn of the detecting packet.
    pub sojourn: Nanos,
    /// Drain-rate window behind the detecting packet's rate estimate.
    pub drain_window: Option<Nanos>,
}

/// Latency from the true delay crossing `threshold` to the departure of the
/// first packet that could carry a signal based on `estimator`.
///
/// At dequeue the signal rides on the detecting packet itself. At enqueue
/// it can only be applied to a packet arriving after detection, so it leaves
/// with the first such packet.
pub fn detect_step_lag(
    records: &[TraceRecord],
    threshold: Nanos,
    t_onset: Nanos,
    estimator: Estimator,
    point: ApplyPoint,
) -> Result<StepLag, LagError> {
    let after_onset = || records.iter().filter(move |r| r.t_deq >= t_onset);
    let t_oracle = after_onset()
        .find(|r| r.oracle_drain >= threshold)
        .ok_or(LagError::OracleNotCrossed)?
        .t_deq;
    let det = after_onset()
        .find(|r| r.estimate(estimator).is_some_and(|v| v >= threshold))
        .ok_or(LagError::NotCrossed(estimator))?;
    let t_signal = match point {
        ApplyPoint::Dequeue => det.t_deq,
        ApplyPoint::Enqueue => {
            records
                .iter()
                .find(|r| r.t_enq >= det.t_deq)
                .ok_or(LagError::NoLaterArrival(estimator))?
                .t_deq
        }
    };
    Ok(StepLag {
        lag: t_signal as i64 - t_oracle as i64,
        t_oracle,
        t_detect: det.t_deq,
        t_signal,
        sojourn: det.raw_sojourn,
        drain_window: det.drain_window,
    })
}

/// Techniques compared by the lag matrix.
pub const LAG_ESTIMATORS: [Estimator; 3] = [
    Estimator::RawSojourn,
    Estimator::ScaledExact,
    Estimator::BacklogOverDrainRate,
];

/// Idealized lag as `(coefficient of s, coefficient of r)`, where `s` is the
/// sojourn time and `r` the drain-rate measurement window.
pub fn expected_lag(point: ApplyPoint, estimator: Estimator) -> (f64, f64) {
    use ApplyPoint::*;
    use Estimator::*;
    match (point, estimator) {
        (Enqueue, BacklogOverDrainRate) => (1.0, 0.5),
        (Dequeue, BacklogOverDrainRate) => (0.0, 0.5),
        (Enqueue, RawSojourn) => (2.0, 0.0),
        (Dequeue, RawSojourn) => (1.0, 0.0),
        (Enqueue, _) => (1.5, 0.0),
        (Dequeue, _) => (0.5, 0.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagCell {
    pub point: ApplyPoint,
    pub estimator: Estimator,
    pub measured: Result<StepLag, LagError>,
}

impl LagCell {
    /// Idealized lag evaluated at the measured `s` and `r`.
    pub fn expected(&self) -> Option<f64> {
        let m = self.measured.as_ref().ok()?;
        let (cs, cr) = expected_lag(self.point, self.estimator);
        if cr != 0.0 && m.drain_window.is_none() {
            return None;
        }
        Some(cs * m.sojourn as f64 + cr * m.drain_window.unwrap_or(0) as f64)
    }

    /// Measured lag over expected lag.
    pub fn ratio(&self) -> Option<f64> {
        let m = self.measured.as_ref().ok()?;
        let e = self.expected()?;
        (e > 0.0).then(|| m.lag as f64 / e)
    }

    /// Measured lag in units of the detecting packet's sojourn.
    pub fn in_sojourns(&self) -> Option<f64> {
        let m = self.measured.as_ref().ok()?;
        (m.sojourn > 0).then(|| m.lag as f64 / m.sojourn as f64)
    }
}

/// Two application points by three techniques.
#[derive(Debug, Clone, PartialEq)]
pub struct LagMatrix {
    pub threshold: Nanos,
    pub onset: Nanos,
    /// Row-major: enqueue row first, then dequeue, each in
    /// [`LAG_ESTIMATORS`] order.
    pub cells: Vec<LagCell>,
}

impl LagMatrix {
    pub fn cell(&self, point: ApplyPoint, estimator: Estimator) -> Option<&LagCell> {
        self.cells
            .iter()
            .find(|c| c.point == point && c.estimator == estimator)
    }
}

pub fn lag_matrix(records: &[TraceRecord], threshold: Nanos, onset: Nanos) -> LagMatrix {
    let mut cells = Vec::with_capacity(6);
    for point in [ApplyPoint::Enqueue, ApplyPoint::Dequeue] {
        for estimator in LAG_ESTIMATORS {
            cells.push(LagCell {
                point,
                estimator,
                measured: detect_step_lag(records, threshold, onset, estimator, point),
            });
        }
    }
    LagMatrix {
        threshold,
        onset,
        cells,
    }
}

/// Estimator error against the oracle drain time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorStats {
    pub estimator: Estimator,
    pub samples: usize,
    /// Records skipped because the oracle was extrapolated or the estimator
    /// had no value.
    pub excluded: usize,
    pub mean_error: f64,
    pub rms_error: f64,
    pub max_abs_error: u64,
}

pub fn error_stats(records: &[TraceRecord], estimator: Estimator) -> ErrorStats {
    let mut samples = 0usize;
    let mut sum = 0f64;
    let mut sum_sq = 0f64;
    let mut max_abs = 0u64;
    for r in records {
        let Some(v) = r.estimate(estimator).filter(|_| !r.oracle_extrapolated) else {
            continue;
        };
        let e = v as f64 - r.oracle_drain as f64;
        samples += 1;
        sum += e;
        sum_sq += e * e;
        max_abs = max_abs.max(v.abs_diff(r.oracle_drain));
    }
    let n = samples.max(1) as f64;
    ErrorStats {
        estimator,
        samples,
        excluded: records.len() - samples,
        mean_error: sum / n,
        rms_error: (sum_sq / n).sqrt(),
        max_abs_error: max_abs,
    }
}

/// Signals on packets that left after the final arrival.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdleTail {
    pub last_arrival: Nanos,
    pub tail_packets: usize,
    pub tail_signals: usize,
    /// First tail departure whose estimate was below the target.
    pub crossing: Option<Nanos>,
    /// Signals on tail packets from the crossing onwards, inclusive.
    pub signals_after_crossing: usize,
}

/// `None` when nothing departed after the last arrival.
pub fn idle_tail(
    records: &[TraceRecord],
    last_arrival: Option<Nanos>,
    estimator: Estimator,
    target: Nanos,
) -> Option<IdleTail> {
    let last_arrival = last_arrival?;
    let tail: Vec<&TraceRecord> = records.iter().filter(|r| r.t_deq > last_arrival).collect();
    if tail.is_empty() {
        return None;
    }
    let crossing = tail
        .iter()
        .find(|r| r.estimate(estimator).is_some_and(|v| v < target))
        .map(|r| r.t_deq);
    let signals = |from: Nanos| {
        tail.iter()
            .filter(|r| r.t_deq >= from && r.mark_action.is_signal())
            .count()
    };
    Some(IdleTail {
        last_arrival,
        tail_packets: tail.len(),
        tail_signals: signals(0),
        crossing,
        signals_after_crossing: crossing.map_or(0, signals),
    })
}

/// Gaps (in packets) between successive signals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkSpacing {
    /// `None` for the aggregate over all flows.
    pub flow: Option<u32>,
    pub packets: usize,
    pub signals: usize,
    pub mean_gap: f64,
    pub gap_variance: f64,
}

fn spacing<'a>(flow: Option<u32>, records: impl Iterator<Item = &'a TraceRecord>) -> MarkSpacing {
    let mut packets = 0usize;
    let mut marks = Vec::new();
    for (i, r) in records.enumerate() {
        packets += 1;
        if r.mark_action.is_signal() {
            marks.push(i);
        }
    }
    let gaps: Vec<f64> = marks.windows(2).map(|w| (w[1] - w[0]) as f64).collect();
    let n = gaps.len().max(1) as f64;
    let mean = gaps.iter().sum::<f64>() / n;
    let var = gaps.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / n;
    MarkSpacing {
        flow,
        packets,
        signals: marks.len(),
        mean_gap: mean,
        gap_variance: var,
    }
}

/// Aggregate spacing followed by one entry per flow when there is more than
/// one. Only signals carried by dequeued packets are seen here.
pub fn mark_spacing(records: &[TraceRecord]) -> Vec<MarkSpacing> {
    let mut out = vec![spacing(None, records.iter())];
    let flows = records.iter().map(|r| r.flow).max().unwrap_or(0);
    if flows > 0 {
        for f in 0..=flows {
            out.push(spacing(Some(f), records.iter().filter(|r| r.flow == f)));
        }
    }
    out
}
