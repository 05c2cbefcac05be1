// SPDX-License-Identifier: Apache-2.0

//! Queue-delay estimators evaluated when a packet leaves the queue.
//!
//! * raw sojourn: dequeue time minus the packet's enqueue timestamp;
//! * scaled sojourn: the sojourn multiplied by `backlog_deq / backlog_enq`,
//!   either exactly or rounded to a power of two with a shift (`lg` rounds
//!   to the nearest power, `clz` truncates);
//! * backlog over a drain rate measured across a window of departures.
//!
//! Everything is integer arithmetic so traces are bit-reproducible.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::queue::Packet;
use crate::units::{Bytes, Nanos, NANOS_PER_SEC};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Estimator {
    RawSojourn,
    ScaledExact,
    ScaledLgShift,
    ScaledClzShift,
    BacklogOverDrainRate,
}

impl Estimator {
    pub const ALL: [Estimator; 5] = [
        Estimator::RawSojourn,
        Estimator::ScaledExact,
        Estimator::ScaledLgShift,
        Estimator::ScaledClzShift,
        Estimator::BacklogOverDrainRate,
    ];

    /// Short name used in scenario files and reports.
    pub fn key(self) -> &'static str {
        match self {
            Estimator::RawSojourn => "raw",
            Estimator::ScaledExact => "scaled",
            Estimator::ScaledLgShift => "lg",
            Estimator::ScaledClzShift => "clz",
            Estimator::BacklogOverDrainRate => "rate",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Estimator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Estimator::ALL
            .into_iter()
            .find(|e| e.key() == s)
            .ok_or_else(|| format!("unknown estimator `{s}` (expected raw, scaled, lg, clz or rate)"))
    }
}

/// One estimator output at a dequeue instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DelaySample {
    pub estimator: Estimator,
    pub value: Nanos,
    /// Dequeue instant.
    pub at: Nanos,
    pub packet_id: u64,
}

pub fn raw_sojourn(pkt: &Packet, now: Nanos) -> Nanos {
    now.saturating_sub(pkt.ts_enq)
}

/// `round(sojourn * backlog_deq / backlog_enq)`, computed in 128 bits.
pub fn scaled_sojourn_exact(pkt: &Packet, backlog_deq: Bytes, now: Nanos) -> Nanos {
    scale_exact(raw_sojourn(pkt, now), pkt.backlog_enq, backlog_deq)
}

/// Sojourn multiplied by the backlog ratio rounded to the nearest power of
/// two.
pub fn scaled_sojourn_lg_shift(pkt: &Packet, backlog_deq: Bytes, now: Nanos) -> Nanos {
    shift(
        raw_sojourn(pkt, now),
        lg_shift_exponent(pkt.backlog_enq, backlog_deq),
    )
}

/// Sojourn shifted by `clz32(backlog_enq) - clz32(backlog_deq)`.
pub fn scaled_sojourn_clz_shift(pkt: &Packet, backlog_deq: Bytes, now: Nanos) -> Nanos {
    shift(
        raw_sojourn(pkt, now),
        clz_shift_exponent(pkt.backlog_enq, backlog_deq),
    )
}

pub fn scale_exact(sojourn: Nanos, backlog_enq: Bytes, backlog_deq: Bytes) -> Nanos {
    debug_assert!(backlog_enq >= 1);
    let enq = backlog_enq.max(1) as u128;
    let num = sojourn as u128 * backlog_deq as u128;
    let rounded = (2 * num + enq) / (2 * enq);
    rounded.min(Nanos::MAX as u128) as Nanos
}

/// Multiplies by `2^exponent`: left shift for positive exponents (saturating),
/// truncating right shift for negative ones.
pub fn shift(value: Nanos, exponent: i32) -> Nanos {
    if exponent >= 0 {
        let k = exponent as u32;
        if k >= 64 || value.leading_zeros() < k {
            if value == 0 {
                0
            } else {
                Nanos::MAX
            }
        } else {
            value << k
        }
    } else {
        let k = exponent.unsigned_abs();
        if k >= 64 {
            0
        } else {
            value >> k
        }
    }
}

/// `floor(log2(x))` for `x >= 1`.
pub fn floor_lg(x: u64) -> i32 {
    debug_assert!(x >= 1);
    63 - x.max(1).leading_zeros() as i32
}

/// Leading zeros of a backlog as a 32-bit unsigned value. Values that do not
/// fit in 32 bits saturate to `u32::MAX` (clz 0); zero is treated as one.
pub fn clz32(x: Bytes) -> i32 {
    let x = u32::try_from(x).unwrap_or(u32::MAX).max(1);
    x.leading_zeros() as i32
}

pub fn clz_shift_exponent(backlog_enq: Bytes, backlog_deq: Bytes) -> i32 {
    clz32(backlog_enq) - clz32(backlog_deq)
}

/// `floor(lg(backlog_deq) - lg(backlog_enq) + 1/2)`, evaluated exactly.
///
/// The exponent `k` is the largest integer with
/// `backlog_deq / backlog_enq >= 2^(k - 1/2)`, which after squaring is
/// `2 * deq^2 >= enq^2 * 4^k`. The bit-length difference gives `k` to within
/// one, so at most three candidates are tested.
pub fn lg_shift_exponent(backlog_enq: Bytes, backlog_deq: Bytes) -> i32 {
    let (mut enq, mut deq) = (backlog_enq.max(1), backlog_deq.max(1));
    // keep squares (times a small power of two) inside u128
    while enq >= 1 << 62 || deq >= 1 << 62 {
        enq = (enq >> 1).max(1);
        deq = (deq >> 1).max(1);
    }
    let guess = floor_lg(deq) - floor_lg(enq);
    let d2 = deq as u128 * deq as u128;
    let e2 = enq as u128 * enq as u128;
    let at_least = |k: i32| -> bool {
        let (lhs_shift, rhs_shift) = if k >= 0 {
            (1, 2 * k as u32)
        } else {
            (1 + 2 * k.unsigned_abs(), 0)
        };
        match (shl_exact(d2, lhs_shift), shl_exact(e2, rhs_shift)) {
            (Some(l), Some(r)) => l >= r,
            (None, Some(_)) => true,
            _ => false,
        }
    };
    (guess - 1..=guess + 1)
        .rev()
        .find(|&k| at_least(k))
        .unwrap_or(guess - 1)
}

fn shl_exact(x: u128, s: u32) -> Option<u128> {
    if x != 0 && (s >= 128 || x.leading_zeros() < s) {
        None
    } else {
        Some(x.checked_shl(s).unwrap_or(0))
    }
}

/// All estimator outputs for one departing packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Estimates {
    pub raw: Nanos,
    pub scaled_exact: Nanos,
    pub scaled_lg: Nanos,
    pub scaled_clz: Nanos,
    pub backlog_over_rate: Option<Nanos>,
}

impl Estimates {
    pub fn evaluate(
        pkt: &Packet,
        backlog_deq: Bytes,
        now: Nanos,
        drain: &DrainRateEstimator,
    ) -> Self {
        Estimates {
            raw: raw_sojourn(pkt, now),
            scaled_exact: scaled_sojourn_exact(pkt, backlog_deq, now),
            scaled_lg: scaled_sojourn_lg_shift(pkt, backlog_deq, now),
            scaled_clz: scaled_sojourn_clz_shift(pkt, backlog_deq, now),
            backlog_over_rate: qdelay_from_backlog(backlog_deq, drain).ok(),
        }
    }

    pub fn get(&self, estimator: Estimator) -> Option<Nanos> {
        match estimator {
            Estimator::RawSojourn => Some(self.raw),
            Estimator::ScaledExact => Some(self.scaled_exact),
            Estimator::ScaledLgShift => Some(self.scaled_lg),
            Estimator::ScaledClzShift => Some(self.scaled_clz),
            Estimator::BacklogOverDrainRate => self.backlog_over_rate,
        }
    }
}

pub const DEFAULT_MIN_WINDOW_PACKETS: u32 = 16;

/// Departure-rate estimate over windows of at least `min_window_packets`
/// departures.
///
/// The rate is kept as the (bytes, duration) pair of the last completed
/// window so conversions back to time stay exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DrainRateEstimator {
    window_bytes: Bytes,
    window_packets: u32,
    window_start: Nanos,
    min_window_packets: u32,
    last_bytes: Bytes,
    last_duration: Nanos,
}

impl Default for DrainRateEstimator {
    fn default() -> Self {
        Self::new(DEFAULT_MIN_WINDOW_PACKETS, 0)
    }
}

impl DrainRateEstimator {
    pub fn new(min_window_packets: u32, window_start: Nanos) -> Self {
        DrainRateEstimator {
            window_bytes: 0,
            window_packets: 0,
            window_start,
            min_window_packets: min_window_packets.max(1),
            last_bytes: 0,
            last_duration: 0,
        }
    }

    pub fn min_window_packets(&self) -> u32 {
        self.min_window_packets
    }

    /// Accounts for one departure; closes the window once enough packets
    /// have left.
    pub fn update(&mut self, departed: &Packet, now: Nanos) {
        self.window_bytes += departed.size;
        self.window_packets += 1;
        if self.window_packets >= self.min_window_packets && now > self.window_start {
            self.last_bytes = self.window_bytes;
            self.last_duration = now - self.window_start;
            self.window_bytes = 0;
            self.window_packets = 0;
            self.window_start = now;
        }
    }

    /// Discards the partial window and starts a new one at `at`, keeping the
    /// last completed estimate. Used when the link resumes after idling.
    pub fn restart(&mut self, at: Nanos) {
        self.window_bytes = 0;
        self.window_packets = 0;
        self.window_start = at;
    }

    pub fn has_estimate(&self) -> bool {
        self.last_duration > 0
    }

    /// Bytes per second of the last completed window, 0 when none.
    pub fn rate(&self) -> f64 {
        if self.last_duration == 0 {
            0.0
        } else {
            self.last_bytes as f64 * NANOS_PER_SEC as f64 / self.last_duration as f64
        }
    }

    /// Duration of the window behind the current estimate (0 when none).
    pub fn window_duration(&self) -> Nanos {
        self.last_duration
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("no drain-rate estimate yet")]
pub struct NoEstimate;

/// `backlog / rate` using the last completed window, rounded to the nearest
/// nanosecond.
pub fn qdelay_from_backlog(backlog: Bytes, est: &DrainRateEstimator) -> Result<Nanos, NoEstimate> {
    if !est.has_estimate() || est.last_bytes == 0 {
        return Err(NoEstimate);
    }
    let num = backlog as u128 * est.last_duration as u128;
    let den = est.last_bytes as u128;
    Ok(((2 * num + den) / (2 * den)).min(Nanos::MAX as u128) as Nanos)
}
