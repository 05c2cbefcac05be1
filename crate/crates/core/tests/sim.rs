// SPDX-License-Identifier: Apache-2.0

use std::fs;

mod common;

use common::{rate, scenario};
use proptest::prelude::*;

use sojourn::config;
use sojourn::estimators::Estimator;
use sojourn::report;
use sojourn::sim::analysis;
use sojourn::sim::{self, ArrivalProcess, DrainProcess, Scenario};
use sojourn::units::Rate;

fn load(name: &str) -> Scenario {
    let path = format!("{}/scenarios/{name}", env!("CARGO_MANIFEST_DIR"));
    config::parse_scenario(&fs::read_to_string(path).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_scenarios_conserve_bytes_and_replay(sc in scenario()) {
        let out = sim::run(&sc).unwrap();
        let s = out.stats;
        prop_assert_eq!(s.conservation_residual(), 0);
        prop_assert_eq!(s.final_backlog, s.count_enq - s.count_deq);
        let mut last = 0;
        for r in &out.records {
            prop_assert!(r.t_deq >= last && r.t_deq <= sc.duration);
            prop_assert!(r.t_enq <= r.t_start && r.t_start < r.t_deq);
            prop_assert_eq!(r.raw_sojourn, r.t_deq - r.t_enq);
            prop_assert!(r.backlog_enq >= r.size && r.backlog_deq >= r.size);
            last = r.t_deq;
        }
        let again = sim::run(&sc).unwrap();
        prop_assert_eq!(out.records, again.records);
    }

    #[test]
    fn constant_drain_oracle_is_closed_form(sc in scenario(), r in rate()) {
        let mut sc = sc;
        sc.drain = DrainProcess::ConstantRate { rate: r };
        let out = sim::run(&sc).unwrap();
        // extrapolated values round the unserved remainder as one block
        for rec in out.records.iter().filter(|r| !r.oracle_extrapolated) {
            prop_assert_eq!(rec.oracle_drain, r.serialization(rec.size) * (rec.backlog_deq / rec.size));
        }
    }
}

#[test]
fn scaled_sojourn_tracks_the_oracle_better_on_burst_and_step() {
    for name in ["burst.scn", "step.scn"] {
        let out = sim::run(&load(name)).unwrap();
        let raw = analysis::error_stats(&out.records, Estimator::RawSojourn);
        let scaled = analysis::error_stats(&out.records, Estimator::ScaledExact);
        assert!(raw.samples > 100);
        assert!(
            scaled.rms_error < raw.rms_error,
            "{name}: scaled rms {} vs raw rms {}",
            scaled.rms_error,
            raw.rms_error
        );
    }
}

#[test]
fn arrivals_running_to_the_end_leave_an_empty_tail() {
    let sc = load("steady.scn");
    for run in report::idle_tail_runs(&sc).unwrap() {
        assert_eq!(run.tail, None, "{:?}", run.estimator);
    }
}

#[test]
fn overload_backlog_matches_the_rate_difference() {
    let sc = Scenario::new(
        ArrivalProcess::ConstantRate {
            rate: Rate::from_mbps(2),
        },
        DrainProcess::ConstantRate {
            rate: Rate::from_mbps(1),
        },
    );
    let out = sim::run(&sc).unwrap();
    // (2 - 1) Mb/s for 1 s is 125000 B; packets land in whole 1500 B units
    assert!(out.stats.final_backlog.abs_diff(125_000) <= 1500, "{}", out.stats.final_backlog);
    assert_eq!(out.stats.final_backlog, out.stats.count_enq - out.stats.count_deq);
}
