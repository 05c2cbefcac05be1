// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sojourn::estimators::{
    clz_shift_exponent, lg_shift_exponent, raw_sojourn, scaled_sojourn_clz_shift, scaled_sojourn_exact,
    scaled_sojourn_lg_shift,
};
use sojourn::queue::{Packet, QueueCore};
use sojourn::sim::{self, ArrivalProcess, DrainProcess, Scenario};
use sojourn::units::{ms, secs, Rate};

fn pkt(backlog_enq: u64) -> Packet {
    Packet {
        id: 0,
        size: 1,
        ts_enq: 0,
        backlog_enq,
    }
}

proptest! {
    #[test]
    fn ratio_identity_on_random_traces(
        steps in prop::collection::vec((any::<bool>(), 40u64..=9000, 0u64..5_000_000), 1..300)
    ) {
        let mut q = QueueCore::new();
        let mut snaps = std::collections::VecDeque::new();
        let mut now = 0;
        for (enqueue, size, gap) in steps {
            now += gap;
            if enqueue || q.is_empty() {
                q.enqueue(size, now).unwrap();
                snaps.push_back((q.count_enq(), q.count_deq()));
            } else {
                let (e0, d0) = snaps.pop_front().unwrap();
                let (e1, d1) = (q.count_enq(), q.count_deq());
                let d = q.dequeue(now).unwrap();
                let s = raw_sojourn(&d.packet, now);
                if s == 0 {
                    continue;
                }
                // mean arrival and departure rates over the sojourn, including
                // the packet itself on both sides
                let r_a = (e1 - e0 + d.packet.size) as f64 / s as f64;
                let r_d = (d1 - d0 + d.packet.size) as f64 / s as f64;
                let predicted = s as f64 * r_a / r_d;
                let got = scaled_sojourn_exact(&d.packet, d.backlog_deq, now) as f64;
                prop_assert!((got - predicted).abs() <= 1.0, "{got} vs {predicted}");
            }
        }
    }

    #[test]
    fn clz_within_a_factor_of_two(enq in 1u64..1 << 32, deq in 1u64..1 << 32) {
        let real = (1u64 << 32) as f64 * deq as f64 / enq as f64;
        let r = scaled_sojourn_clz_shift(&pkt(enq), deq, 1 << 32) as f64 / real;
        prop_assert!(r > 0.5 && r < 2.0, "ratio {r}");
    }
}

#[test]
fn lg_shift_is_unbiased_on_average() {
    // log-uniform ratios over several octaves: the mean log error is ~0
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 100_000;
    let mut sum_log = 0.0;
    for _ in 0..n {
        let enq = rng.random_range(1u64 << 10..1 << 20);
        let deq = ((enq as f64) * 2f64.powf(rng.random_range(-8.0..8.0))).round().max(1.0) as u64;
        let ratio = deq as f64 / enq as f64;
        sum_log += lg_shift_exponent(enq, deq) as f64 - ratio.log2();
    }
    let mean = sum_log / n as f64;
    // geometric mean of the error factor
    let factor = 2f64.powf(mean);
    assert!((factor - 1.0).abs() < 0.01, "geometric mean error factor {factor}");
}

#[test]
fn clz_shift_mirrors_the_worked_example() {
    // enq=30000, deq=3000: clz 17 and 20, shift -3; the exact ratio is 1/10
    let p = Packet {
        backlog_enq: 30_000,
        ..pkt(30_000)
    };
    assert_eq!(clz_shift_exponent(30_000, 3000), -3);
    let clz = scaled_sojourn_clz_shift(&p, 3000, ms(10));
    assert_eq!(clz, 1_250_000);
    let exact = scaled_sojourn_exact(&p, 3000, ms(10)) as f64;
    let r = clz as f64 / exact;
    assert!(r > 0.5 && r < 2.0);
    assert_eq!(scaled_sojourn_lg_shift(&p, 3000, ms(10)), 1_250_000);
}

#[test]
fn last_packet_collapses_to_its_own_share() {
    let mut sc = Scenario::new(
        ArrivalProcess::ConstantRate {
            rate: Rate::from_mbps(20),
        },
        DrainProcess::ConstantRate {
            rate: Rate::from_mbps(10),
        },
    );
    sc.arrival_stop = Some(ms(100));
    sc.duration = secs(1);
    let out = sim::run(&sc).unwrap();
    let q = out.records.last().unwrap();
    assert!(q.t_enq < ms(100) && q.backlog_enq > 40 * q.size);
    assert_eq!(q.backlog_deq, q.size);
    let expected = (q.raw_sojourn as f64 * q.size as f64 / q.backlog_enq as f64).round() as u64;
    assert_eq!(q.scaled_exact, expected);
    assert!(q.raw_sojourn > 40 * q.scaled_exact);
}

#[test]
fn doubled_backlog_doubles_the_estimate() {
    let mut q = QueueCore::new();
    for _ in 0..10 {
        q.enqueue(1500, 0).unwrap();
    }
    let head_of_burst = q.iter().last().unwrap().id;
    let mut now = 0;
    // nine packets ahead leave while nineteen arrive behind
    for _ in 0..9 {
        now += 1_200_000;
        q.dequeue(now).unwrap();
        q.enqueue(1500, now).unwrap();
        q.enqueue(1500, now).unwrap();
    }
    q.enqueue(1500, now).unwrap();
    now += 1_200_000;
    let d = q.dequeue(now).unwrap();
    assert_eq!(d.packet.id, head_of_burst);
    assert_eq!(d.backlog_deq, 2 * d.packet.backlog_enq);
    assert_eq!(
        scaled_sojourn_exact(&d.packet, d.backlog_deq, now),
        2 * raw_sojourn(&d.packet, now)
    );
}

#[test]
fn raw_sojourn_matches_oracle_with_a_standing_queue_at_constant_rates() {
    // a 12 ms burst leaves a standing queue; afterwards arrivals match the drain
    let mut sc = Scenario::new(
        ArrivalProcess::Burst {
            rate_high: Rate::from_mbps(20),
            rate_low: Rate::from_mbps(10),
            period: secs(10),
            duty: 0.0012,
        },
        DrainProcess::ConstantRate {
            rate: Rate::from_mbps(10),
        },
    );
    sc.duration = secs(1);
    let out = sim::run(&sc).unwrap();
    let steady: Vec<_> = out
        .records
        .iter()
        .filter(|r| r.t_enq > ms(30) && !r.oracle_extrapolated)
        .collect();
    assert!(steady.len() > 500);
    for r in steady {
        assert!(r.backlog_deq > r.size);
        assert_eq!(r.raw_sojourn, r.oracle_drain, "packet {}", r.packet_id);
    }
}
