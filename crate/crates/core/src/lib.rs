// SPDX-License-Identifier: Apache-2.0

//! Queue-delay measurement and AQM signalling on a byte-counted FIFO.

pub mod aqm;
pub mod config;
pub mod counters;
pub mod estimators;
pub mod queue;
pub mod report;
pub mod sim;
pub mod units;
