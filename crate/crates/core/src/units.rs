// SPDX-License-Identifier: Apache-2.0

//! Integer time, byte and rate quantities shared by every module.

use std::fmt;

/// Simulation time or duration in integer nanoseconds.
pub type Nanos = u64;

/// A byte count.
pub type Bytes = u64;

pub const NANOS_PER_US: Nanos = 1_000;
pub const NANOS_PER_MS: Nanos = 1_000_000;
pub const NANOS_PER_SEC: Nanos = 1_000_000_000;

pub const fn us(n: u64) -> Nanos {
    n * NANOS_PER_US
}

pub const fn ms(n: u64) -> Nanos {
    n * NANOS_PER_MS
}

pub const fn secs(n: u64) -> Nanos {
    n * NANOS_PER_SEC
}

/// A link or source rate, stored as bits per second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rate(u64);

impl Rate {
    pub const fn from_bps(bits_per_sec: u64) -> Self {
        Rate(bits_per_sec)
    }

    pub const fn from_mbps(mbit_per_sec: u64) -> Self {
        Rate(mbit_per_sec * 1_000_000)
    }

    pub const fn from_bytes_per_sec(bytes_per_sec: u64) -> Self {
        Rate(bytes_per_sec * 8)
    }

    pub const fn bps(self) -> u64 {
        self.0
    }

    pub fn bytes_per_sec(self) -> f64 {
        self.0 as f64 / 8.0
    }

    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Time to serialize `bytes` at this rate, rounded to the nearest
    /// nanosecond. A zero rate never finishes.
    pub fn serialization(self, bytes: Bytes) -> Nanos {
        if self.0 == 0 {
            return Nanos::MAX;
        }
        let bits = bytes as u128 * 8 * NANOS_PER_SEC as u128;
        let r = self.0 as u128;
        let ns = (bits + r / 2) / r;
        ns.min(Nanos::MAX as u128) as Nanos
    }

    /// Scales the rate by `factor`, rounding to the nearest bit per second.
    pub fn scaled(self, factor: f64) -> Rate {
        Rate((self.0 as f64 * factor).round().max(0.0) as u64)
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}bit/s", self.0)
    }
}
