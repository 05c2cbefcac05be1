// SPDX-License-Identifier: Apache-2.0

//! Per-dequeue trace rows and CSV export.
//!
//! Column order is the field order of [`TraceRecord`]. Optional values are
//! written as empty cells.

use std::io;

use serde::Serialize;

use crate::aqm::{Action, ApplyPoint};
use crate::estimators::Estimator;
use crate::units::{Bytes, Nanos};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub packet_id: u64,
    pub t_enq: Nanos,
    pub t_deq: Nanos,
    pub size: Bytes,
    pub backlog_enq: Bytes,
    pub backlog_deq: Bytes,
    pub raw_sojourn: Nanos,
    pub scaled_exact: Nanos,
    pub scaled_lg: Nanos,
    pub scaled_clz: Nanos,
    pub backlog_over_rate: Option<Nanos>,
    /// Realized time for `backlog_deq` to drain, measured from the start of
    /// this packet's serialization.
    pub oracle_drain: Nanos,
    #[serde(serialize_with = "ser_action")]
    pub mark_action: Action,
    pub p_at_decision: f64,
    pub oracle_extrapolated: bool,
    /// Duration of the departure window behind `backlog_over_rate`.
    pub drain_window: Option<Nanos>,
    #[serde(serialize_with = "ser_apply")]
    pub applied_at: Option<ApplyPoint>,
    pub flow: u32,
    /// Start of this packet's serialization on the link.
    pub t_start: Nanos,
}

/// CSV header in column order.
pub const COLUMNS: [&str; 19] = [
    "packet_id",
    "t_enq",
    "t_deq",
    "size",
    "backlog_enq",
    "backlog_deq",
    "raw_sojourn",
    "scaled_exact",
    "scaled_lg",
    "scaled_clz",
    "backlog_over_rate",
    "oracle_drain",
    "mark_action",
    "p_at_decision",
    "oracle_extrapolated",
    "drain_window",
    "applied_at",
    "flow",
    "t_start",
];

fn ser_action<S: serde::Serializer>(a: &Action, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(a.key())
}

fn ser_apply<S: serde::Serializer>(a: &Option<ApplyPoint>, s: S) -> Result<S::Ok, S::Error> {
    match a {
        Some(p) => s.serialize_str(p.key()),
        None => s.serialize_str(""),
    }
}

impl TraceRecord {
    /// Value of `estimator` for this packet, `None` when it had no estimate.
    pub fn estimate(&self, estimator: Estimator) -> Option<Nanos> {
        match estimator {
            Estimator::RawSojourn => Some(self.raw_sojourn),
            Estimator::ScaledExact => Some(self.scaled_exact),
            Estimator::ScaledLgShift => Some(self.scaled_lg),
            Estimator::ScaledClzShift => Some(self.scaled_clz),
            Estimator::BacklogOverDrainRate => self.backlog_over_rate,
        }
    }
}

/// Writes records as CSV. The header is always written, so an empty slice
/// yields a header-only file.
pub fn write_csv<W: io::Write>(records: &[TraceRecord], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(COLUMNS)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record() -> TraceRecord {
        TraceRecord {
            packet_id: 3,
            t_enq: 10,
            t_deq: 20,
            size: 1500,
            backlog_enq: 1500,
            backlog_deq: 3000,
            raw_sojourn: 10,
            scaled_exact: 20,
            scaled_lg: 20,
            scaled_clz: 20,
            backlog_over_rate: None,
            oracle_drain: 22,
            mark_action: Action::Mark,
            p_at_decision: 0.25,
            oracle_extrapolated: false,
            drain_window: Some(7),
            applied_at: Some(ApplyPoint::Dequeue),
            flow: 0,
            t_start: 12,
        }
    }

    #[test]
    fn empty_is_header_only() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), COLUMNS.join(",") + "\n");
    }

    #[test]
    fn row_layout() {
        let mut buf = Vec::new();
        write_csv(&[record()], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let row = text.lines().nth(1).unwrap();
        assert_eq!(row, "3,10,20,1500,1500,3000,10,20,20,20,,22,mark,0.25,false,7,dequeue,0,12");
        assert!(text.ends_with('\n'));
        assert_eq!(row.split(',').count(), COLUMNS.len());
    }
}
