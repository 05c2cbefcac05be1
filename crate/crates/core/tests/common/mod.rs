// SPDX-License-Identifier: Apache-2.0

//! Scenario generators shared by the property tests.

use proptest::prelude::*;

use sojourn::aqm::{Algorithm, AqmConfig, ApplyPoint, CodelConfig, MarkerMode, PiConfig, RampState, SignalKind};
use sojourn::estimators::Estimator;
use sojourn::sim::{ArrivalProcess, DrainProcess, Scenario};
use sojourn::units::{ms, Rate};

pub fn rate() -> impl Strategy<Value = Rate> {
    (1u64..=40).prop_map(Rate::from_mbps)
}

pub fn arrival() -> impl Strategy<Value = ArrivalProcess> {
    prop_oneof![
        rate().prop_map(|rate| ArrivalProcess::ConstantRate { rate }),
        (rate(), rate(), 10u64..200, 0.05f64..0.95).prop_map(|(rate_high, rate_low, p, duty)| ArrivalProcess::Burst {
            rate_high,
            rate_low,
            period: ms(p),
            duty,
        }),
        (rate(), 1u64..100, 1u64..100).prop_map(|(rate, on, off)| ArrivalProcess::OnOff {
            rate,
            on: ms(on),
            off: ms(off),
        }),
        rate().prop_map(|mean_rate| ArrivalProcess::PoissonLike { mean_rate }),
    ]
}

pub fn drain() -> impl Strategy<Value = DrainProcess> {
    prop_oneof![
        rate().prop_map(|rate| DrainProcess::ConstantRate { rate }),
        (rate(), rate(), 0u64..300).prop_map(|(rate_before, rate_after, t)| DrainProcess::StepChange {
            rate_before,
            rate_after,
            t_step: ms(t),
        }),
        (rate(), 2u64..50).prop_flat_map(|(rate, period)| (Just(rate), Just(period), 1..period)).prop_map(
            |(rate, period, len)| DrainProcess::FitsAndStarts {
                rate,
                stall_period: ms(period),
                stall_len: ms(len),
            }
        ),
        (rate(), 0.0f64..20.0).prop_map(|(mean_rate, step_pct)| DrainProcess::RandomWalk { mean_rate, step_pct }),
    ]
}

pub fn aqm() -> impl Strategy<Value = AqmConfig> {
    let algorithm = prop_oneof![
        Just(Algorithm::None),
        (1u64..40, 1u64..40, 0.0f64..1.0, 0.0f64..4.0, any::<bool>()).prop_map(|(target, t_update, alpha, beta, burst_heuristic)| {
            Algorithm::Pi(PiConfig {
                target: ms(target),
                t_update: ms(t_update),
                alpha,
                beta,
                burst_heuristic,
            })
        }),
        (1u64..20, 20u64..200).prop_map(|(target, interval)| Algorithm::Codel(CodelConfig {
            target: ms(target),
            interval: ms(interval),
        })),
        (0u64..20, 0u64..20, 0.0f64..=1.0).prop_map(|(lo, span, max_p)| Algorithm::Ramp(RampState::new(ms(lo), ms(lo + span), max_p))),
    ];
    (
        algorithm,
        prop_oneof![Just(ApplyPoint::Enqueue), Just(ApplyPoint::Dequeue)],
        prop_oneof![Just(SignalKind::EcnMark), Just(SignalKind::Drop)],
        prop_oneof![Just(MarkerMode::RandomBernoulli), Just(MarkerMode::DeterministicInterval)],
    )
        .prop_map(|(algorithm, apply, signal, marker)| AqmConfig {
            algorithm,
            apply,
            signal,
            marker,
        })
}

pub fn scenario() -> impl Strategy<Value = Scenario> {
    (
        arrival(),
        drain(),
        aqm(),
        prop::option::of(20_000u64..200_000),
        prop::option::of(10u64..300),
        prop::sample::select(Estimator::ALL.to_vec()),
        (64u64..=1500, 1u32..4, any::<u64>()),
    )
        .prop_map(|(a, d, aqm, capacity, stop, estimator, (size, flows, seed))| {
            let mut sc = Scenario::new(a, d);
            sc.duration = ms(300);
            sc.packet_size = size;
            sc.queue_capacity = capacity;
            sc.arrival_stop = stop.map(ms);
            sc.aqm = aqm;
            sc.estimator = estimator;
            sc.flows = flows;
            sc.seed = seed;
            sc
        })
}
