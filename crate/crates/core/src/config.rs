// SPDX-License-Identifier: Apache-2.0

//! Scenario files: flat `key=value` lines with dotted section prefixes.
//!
//! ```text
//! # comment
//! duration=2s
//! packet_size=1500B
//! arrival=poisson
//! arrival.rate=15Mb/s
//! drain=constant
//! drain.rate=10Mb/s
//! aqm=pi
//! aqm.pi.target=15ms
//! ```
//!
//! Parsing is strict. Unknown keys, duplicate keys and keys that the chosen
//! processes do not use are all errors, and every quantity needs a unit.
//! Decimal quantities are converted exactly; `1.5ms` is 1500000 ns and
//! `1.0000000001ms` is rejected because it is not a whole nanosecond.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::aqm::{Algorithm, ApplyPoint, AqmConfig, CodelConfig, MarkerMode, PiConfig, RampState, SignalKind};
use crate::estimators::Estimator;
use crate::sim::{ArrivalProcess, DrainProcess, Scenario};
use crate::units::{Bytes, Nanos, Rate};

/// Every key the format knows about.
pub const KNOWN_KEYS: &[&str] = &[
    "duration",
    "seed",
    "packet_size",
    "queue.capacity",
    "arrival",
    "arrival.rate",
    "arrival.rate_high",
    "arrival.rate_low",
    "arrival.period",
    "arrival.duty",
    "arrival.on",
    "arrival.off",
    "arrival.stop",
    "arrival.flows",
    "drain",
    "drain.rate",
    "drain.step.before",
    "drain.step.after",
    "drain.step.t",
    "drain.fits.stall_period",
    "drain.fits.stall_len",
    "drain.walk.step_pct",
    "estimator",
    "estimator.min_window_packets",
    "aqm",
    "aqm.apply",
    "aqm.signal",
    "aqm.marker",
    "aqm.pi.target",
    "aqm.pi.t_update",
    "aqm.pi.alpha",
    "aqm.pi.beta",
    "aqm.pi.burst_heuristic",
    "aqm.codel.target",
    "aqm.codel.interval",
    "aqm.ramp.min_th",
    "aqm.ramp.max_th",
    "aqm.ramp.max_p",
];

/// Where a setting came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Override,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Override => f.write_str("override"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ConfigError {
    pub origin: Option<Origin>,
    pub key: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn new(origin: Option<Origin>, key: Option<&str>, message: impl Into<String>) -> Self {
        ConfigError {
            origin,
            key: key.map(str::to_owned),
            message: message.into(),
        }
    }

    /// Line number for errors that point into the file.
    pub fn line(&self) -> Option<usize> {
        match self.origin {
            Some(Origin::Line(n)) => Some(n),
            _ => None,
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(o) = self.origin {
            write!(f, "{o}: ")?;
        }
        if let Some(k) = &self.key {
            write!(f, "`{k}`: ")?;
        }
        f.write_str(&self.message)
    }
}

#[derive(Debug, Clone)]
struct Entry {
    origin: Origin,
    value: String,
}

/// Key/value pairs not yet consumed by the builder.
#[derive(Debug, Default)]
struct Entries(BTreeMap<String, Entry>);

impl Entries {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map: BTreeMap<String, Entry> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let origin = Origin::Line(i + 1);
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError::new(Some(origin), None, format!("expected key=value, got `{line}`")));
            };
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(ConfigError::new(Some(origin), None, "empty key"));
            }
            if v.is_empty() {
                return Err(ConfigError::new(Some(origin), Some(k), "empty value"));
            }
            if let Some(prev) = map.get(k) {
                return Err(ConfigError::new(
                    Some(origin),
                    Some(k),
                    format!("duplicate key (first set on {})", prev.origin),
                ));
            }
            map.insert(
                k.to_owned(),
                Entry {
                    origin,
                    value: v.to_owned(),
                },
            );
        }
        Ok(Entries(map))
    }

    fn set(&mut self, key: &str, value: &str) {
        self.0.insert(
            key.to_owned(),
            Entry {
                origin: Origin::Override,
                value: value.trim().to_owned(),
            },
        );
    }

    fn take(&mut self, key: &str) -> Option<(Entry, &'static str)> {
        let k = KNOWN_KEYS.iter().find(|&&k| k == key).expect("builder asked for an unlisted key");
        self.0.remove(key).map(|e| (e, *k))
    }

    fn optional<T>(
        &mut self,
        key: &str,
        parse: impl FnOnce(&str) -> Result<T, String>,
    ) -> Result<Option<T>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some((e, k)) => parse(&e.value)
                .map(Some)
                .map_err(|m| ConfigError::new(Some(e.origin), Some(k), m)),
        }
    }

    fn or<T>(
        &mut self,
        key: &str,
        default: T,
        parse: impl FnOnce(&str) -> Result<T, String>,
    ) -> Result<T, ConfigError> {
        Ok(self.optional(key, parse)?.unwrap_or(default))
    }

    fn required<T>(
        &mut self,
        key: &str,
        parse: impl FnOnce(&str) -> Result<T, String>,
    ) -> Result<T, ConfigError> {
        self.optional(key, parse)?
            .ok_or_else(|| ConfigError::new(None, Some(key), "missing required key"))
    }

    /// Errors on the first leftover key in file order.
    fn finish(self) -> Result<(), ConfigError> {
        let first = self.0.into_iter().min_by_key(|(_, e)| match e.origin {
            Origin::Line(n) => n,
            Origin::Override => usize::MAX,
        });
        match first {
            None => Ok(()),
            Some((k, e)) => {
                let msg = if KNOWN_KEYS.contains(&k.as_str()) {
                    "key does not apply to the selected configuration"
                } else {
                    "unknown key"
                };
                Err(ConfigError::new(Some(e.origin), Some(&k), msg))
            }
        }
    }
}

fn split_unit(s: &str) -> (&str, &str) {
    let idx = s
        .find(|c: char| !(c.is_ascii_digit() || c == '.'))
        .unwrap_or(s.len());
    (s[..idx].trim(), s[idx..].trim())
}

/// Exact `number * scale` for a non-negative decimal number.
fn decimal_times(num: &str, scale: u128) -> Result<u64, String> {
    let (int, frac) = num.split_once('.').unwrap_or((num, ""));
    let digits_ok = |d: &str| d.bytes().all(|b| b.is_ascii_digit());
    if (int.is_empty() && frac.is_empty()) || !digits_ok(int) || !digits_ok(frac) {
        return Err(format!("`{num}` is not a number"));
    }
    let frac = frac.trim_end_matches('0');
    if frac.len() > 30 || int.len() > 30 {
        return Err(format!("`{num}` is out of range"));
    }
    let int_v: u128 = if int.is_empty() { 0 } else { int.parse().map_err(|_| format!("`{num}` is out of range"))? };
    let frac_v: u128 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| format!("`{num}` is out of range"))? };
    let denom = 10u128.pow(frac.len() as u32);
    let frac_scaled = frac_v
        .checked_mul(scale)
        .ok_or_else(|| format!("`{num}` is out of range"))?;
    if frac_scaled % denom != 0 {
        return Err(format!("`{num}` is finer than the base unit"));
    }
    let total = int_v
        .checked_mul(scale)
        .and_then(|v| v.checked_add(frac_scaled / denom))
        .ok_or_else(|| format!("`{num}` is out of range"))?;
    u64::try_from(total).map_err(|_| format!("`{num}` is out of range"))
}

fn with_unit(s: &str, what: &str, units: &[(&str, u128)]) -> Result<u64, String> {
    let (num, unit) = split_unit(s);
    if unit.is_empty() {
        let names: Vec<_> = units.iter().map(|u| u.0).collect();
        return Err(format!("{what} `{s}` needs a unit ({})", names.join(", ")));
    }
    let scale = units
        .iter()
        .find(|u| u.0 == unit)
        .map(|u| u.1)
        .ok_or_else(|| format!("unknown {what} unit `{unit}`"))?;
    decimal_times(num, scale)
}

const TIME_UNITS: &[(&str, u128)] = &[("ns", 1), ("us", 1_000), ("ms", 1_000_000), ("s", 1_000_000_000)];
const RATE_UNITS: &[(&str, u128)] = &[
    ("bit/s", 1),
    ("kb/s", 1_000),
    ("Mb/s", 1_000_000),
    ("Gb/s", 1_000_000_000),
    ("B/s", 8),
    ("kB/s", 8_000),
    ("MB/s", 8_000_000),
];
const BYTE_UNITS: &[(&str, u128)] = &[("B", 1), ("kB", 1_000), ("MB", 1_000_000)];

pub fn parse_time(s: &str) -> Result<Nanos, String> {
    with_unit(s, "time", TIME_UNITS)
}

pub fn parse_rate(s: &str) -> Result<Rate, String> {
    with_unit(s, "rate", RATE_UNITS).map(Rate::from_bps)
}

pub fn parse_bytes(s: &str) -> Result<Bytes, String> {
    with_unit(s, "size", BYTE_UNITS)
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn parse_u64(s: &str) -> Result<u64, String> {
    s.parse().map_err(|_| format!("`{s}` is not a non-negative integer"))
}

fn parse_u32(s: &str) -> Result<u32, String> {
    s.parse().map_err(|_| format!("`{s}` is not a non-negative integer"))
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "on" | "true" => Ok(true),
        "off" | "false" => Ok(false),
        _ => Err(format!("`{s}` is not on/off")),
    }
}

fn choice<'a>(s: &str, options: &[&'a str]) -> Result<&'a str, String> {
    options
        .iter()
        .find(|&&o| o == s)
        .copied()
        .ok_or_else(|| format!("`{s}` is not one of {}", options.join(", ")))
}

/// Parses a scenario file.
pub fn parse_scenario(text: &str) -> Result<Scenario, ConfigError> {
    parse_scenario_with(text, &[])
}

/// Parses a scenario file with `key=value` overrides applied on top.
pub fn parse_scenario_with(text: &str, overrides: &[(String, String)]) -> Result<Scenario, ConfigError> {
    let mut e = Entries::parse(text)?;
    for (k, v) in overrides {
        if !KNOWN_KEYS.contains(&k.as_str()) {
            return Err(ConfigError::new(Some(Origin::Override), Some(k), "unknown key"));
        }
        e.set(k, v);
    }
    let sc = build(&mut e)?;
    e.finish()?;
    sc.validate()
        .map_err(|err| ConfigError::new(None, None, err.to_string()))?;
    Ok(sc)
}

/// Splits `key=value` as given on the command line.
pub fn parse_override(s: &str) -> Result<(String, String), ConfigError> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| ConfigError::new(Some(Origin::Override), None, format!("expected key=value, got `{s}`")))?;
    Ok((k.trim().to_owned(), v.trim().to_owned()))
}

fn build(e: &mut Entries) -> Result<Scenario, ConfigError> {
    let duration = e.required("duration", parse_time)?;
    let packet_size = e.required("packet_size", parse_bytes)?;
    let seed = e.or("seed", 1, parse_u64)?;
    let queue_capacity = e.optional("queue.capacity", parse_bytes)?;

    let kind = e.required("arrival", |s| choice(s, &["constant", "burst", "onoff", "poisson"]))?;
    let arrival = match kind {
        "constant" => ArrivalProcess::ConstantRate {
            rate: e.required("arrival.rate", parse_rate)?,
        },
        "burst" => ArrivalProcess::Burst {
            rate_high: e.required("arrival.rate_high", parse_rate)?,
            rate_low: e.required("arrival.rate_low", parse_rate)?,
            period: e.required("arrival.period", parse_time)?,
            duty: e.required("arrival.duty", parse_f64)?,
        },
        "onoff" => ArrivalProcess::OnOff {
            rate: e.required("arrival.rate", parse_rate)?,
            on: e.required("arrival.on", parse_time)?,
            off: e.required("arrival.off", parse_time)?,
        },
        _ => ArrivalProcess::PoissonLike {
            mean_rate: e.required("arrival.rate", parse_rate)?,
        },
    };
    let arrival_stop = e.optional("arrival.stop", parse_time)?;
    let flows = e.or("arrival.flows", 1, parse_u32)?;

    let kind = e.required("drain", |s| choice(s, &["constant", "step", "fits", "walk"]))?;
    let drain = match kind {
        "constant" => DrainProcess::ConstantRate {
            rate: e.required("drain.rate", parse_rate)?,
        },
        "step" => DrainProcess::StepChange {
            rate_before: e.required("drain.step.before", parse_rate)?,
            rate_after: e.required("drain.step.after", parse_rate)?,
            t_step: e.required("drain.step.t", parse_time)?,
        },
        "fits" => DrainProcess::FitsAndStarts {
            rate: e.required("drain.rate", parse_rate)?,
            stall_period: e.required("drain.fits.stall_period", parse_time)?,
            stall_len: e.required("drain.fits.stall_len", parse_time)?,
        },
        _ => DrainProcess::RandomWalk {
            mean_rate: e.required("drain.rate", parse_rate)?,
            step_pct: e.required("drain.walk.step_pct", parse_f64)?,
        },
    };

    let estimator = e.or("estimator", Estimator::ScaledExact, |s| s.parse())?;
    let min_window_packets = e.or(
        "estimator.min_window_packets",
        crate::estimators::DEFAULT_MIN_WINDOW_PACKETS,
        parse_u32,
    )?;

    let kind = e.or("aqm", "none", |s| choice(s, &["none", "pi", "codel", "ramp"]))?;
    let algorithm = match kind {
        "none" => Algorithm::None,
        "pi" => {
            let d = PiConfig::default();
            Algorithm::Pi(PiConfig {
                target: e.or("aqm.pi.target", d.target, parse_time)?,
                t_update: e.or("aqm.pi.t_update", d.t_update, parse_time)?,
                alpha: e.or("aqm.pi.alpha", d.alpha, parse_f64)?,
                beta: e.or("aqm.pi.beta", d.beta, parse_f64)?,
                burst_heuristic: e.or("aqm.pi.burst_heuristic", d.burst_heuristic, parse_bool)?,
            })
        }
        "codel" => {
            let d = CodelConfig::default();
            Algorithm::Codel(CodelConfig {
                target: e.or("aqm.codel.target", d.target, parse_time)?,
                interval: e.or("aqm.codel.interval", d.interval, parse_time)?,
            })
        }
        _ => {
            let d = RampState::default();
            Algorithm::Ramp(RampState {
                min_th: e.or("aqm.ramp.min_th", d.min_th, parse_time)?,
                max_th: e.or("aqm.ramp.max_th", d.max_th, parse_time)?,
                max_p: e.or("aqm.ramp.max_p", d.max_p, parse_f64)?,
            })
        }
    };
    let mut aqm = AqmConfig {
        algorithm,
        ..AqmConfig::default()
    };
    if algorithm != Algorithm::None {
        aqm.apply = e.or("aqm.apply", aqm.apply, |s| {
            Ok(match choice(s, &["enqueue", "dequeue"])? {
                "enqueue" => ApplyPoint::Enqueue,
                _ => ApplyPoint::Dequeue,
            })
        })?;
        aqm.signal = e.or("aqm.signal", aqm.signal, |s| {
            Ok(match choice(s, &["ecn", "drop"])? {
                "ecn" => SignalKind::EcnMark,
                _ => SignalKind::Drop,
            })
        })?;
        aqm.marker = e.or("aqm.marker", aqm.marker, |s| {
            Ok(match choice(s, &["random", "deterministic"])? {
                "random" => MarkerMode::RandomBernoulli,
                _ => MarkerMode::DeterministicInterval,
            })
        })?;
    }

    Ok(Scenario {
        arrival,
        arrival_stop,
        flows,
        drain,
        packet_size,
        duration,
        queue_capacity,
        aqm,
        estimator,
        min_window_packets,
        seed,
    })
}

fn best_unit(v: u64, units: &[(&'static str, u128)]) -> String {
    let (name, scale) = units
        .iter()
        .rev()
        .find(|u| (v as u128).is_multiple_of(u.1) && v != 0)
        .copied()
        .unwrap_or(units[0]);
    format!("{}{name}", v as u128 / scale)
}

pub fn render_time(t: Nanos) -> String {
    best_unit(t, TIME_UNITS)
}

pub fn render_rate(r: Rate) -> String {
    // bit-based units only, so a rate always renders the same way
    best_unit(r.bps(), &RATE_UNITS[..4])
}

pub fn render_bytes(b: Bytes) -> String {
    format!("{b}B")
}

/// Renders a scenario with every key spelled out, defaults included.
pub fn render(sc: &Scenario) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k}={v}");
    };
    kv("duration", render_time(sc.duration));
    kv("seed", sc.seed.to_string());
    kv("packet_size", render_bytes(sc.packet_size));
    if let Some(c) = sc.queue_capacity {
        kv("queue.capacity", render_bytes(c));
    }
    match sc.arrival {
        ArrivalProcess::ConstantRate { rate } => {
            kv("arrival", "constant".into());
            kv("arrival.rate", render_rate(rate));
        }
        ArrivalProcess::Burst {
            rate_high,
            rate_low,
            period,
            duty,
        } => {
            kv("arrival", "burst".into());
            kv("arrival.rate_high", render_rate(rate_high));
            kv("arrival.rate_low", render_rate(rate_low));
            kv("arrival.period", render_time(period));
            kv("arrival.duty", duty.to_string());
        }
        ArrivalProcess::OnOff { rate, on, off } => {
            kv("arrival", "onoff".into());
            kv("arrival.rate", render_rate(rate));
            kv("arrival.on", render_time(on));
            kv("arrival.off", render_time(off));
        }
        ArrivalProcess::PoissonLike { mean_rate } => {
            kv("arrival", "poisson".into());
            kv("arrival.rate", render_rate(mean_rate));
        }
    }
    if let Some(t) = sc.arrival_stop {
        kv("arrival.stop", render_time(t));
    }
    kv("arrival.flows", sc.flows.to_string());
    match sc.drain {
        DrainProcess::ConstantRate { rate } => {
            kv("drain", "constant".into());
            kv("drain.rate", render_rate(rate));
        }
        DrainProcess::StepChange {
            rate_before,
            rate_after,
            t_step,
        } => {
            kv("drain", "step".into());
            kv("drain.step.before", render_rate(rate_before));
            kv("drain.step.after", render_rate(rate_after));
            kv("drain.step.t", render_time(t_step));
        }
        DrainProcess::FitsAndStarts {
            rate,
            stall_period,
            stall_len,
        } => {
            kv("drain", "fits".into());
            kv("drain.rate", render_rate(rate));
            kv("drain.fits.stall_period", render_time(stall_period));
            kv("drain.fits.stall_len", render_time(stall_len));
        }
        DrainProcess::RandomWalk {
            mean_rate,
            step_pct,
        } => {
            kv("drain", "walk".into());
            kv("drain.rate", render_rate(mean_rate));
            kv("drain.walk.step_pct", step_pct.to_string());
        }
    }
    kv("estimator", sc.estimator.key().into());
    kv("estimator.min_window_packets", sc.min_window_packets.to_string());
    match sc.aqm.algorithm {
        Algorithm::None => kv("aqm", "none".into()),
        Algorithm::Pi(p) => {
            kv("aqm", "pi".into());
            kv("aqm.pi.target", render_time(p.target));
            kv("aqm.pi.t_update", render_time(p.t_update));
            kv("aqm.pi.alpha", p.alpha.to_string());
            kv("aqm.pi.beta", p.beta.to_string());
            kv("aqm.pi.burst_heuristic", if p.burst_heuristic { "on" } else { "off" }.into());
        }
        Algorithm::Codel(c) => {
            kv("aqm", "codel".into());
            kv("aqm.codel.target", render_time(c.target));
            kv("aqm.codel.interval", render_time(c.interval));
        }
        Algorithm::Ramp(r) => {
            kv("aqm", "ramp".into());
            kv("aqm.ramp.min_th", render_time(r.min_th));
            kv("aqm.ramp.max_th", render_time(r.max_th));
            kv("aqm.ramp.max_p", r.max_p.to_string());
        }
    }
    if sc.aqm.algorithm != Algorithm::None {
        kv("aqm.apply", sc.aqm.apply.key().into());
        kv(
            "aqm.signal",
            match sc.aqm.signal {
                SignalKind::EcnMark => "ecn",
                SignalKind::Drop => "drop",
            }
            .into(),
        );
        kv(
            "aqm.marker",
            match sc.aqm.marker {
                MarkerMode::RandomBernoulli => "random",
                MarkerMode::DeterministicInterval => "deterministic",
            }
            .into(),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{ms, secs, us};

    const MINIMAL: &str = "arrival=constant\narrival.rate=1Mb/s\ndrain=constant\ndrain.rate=1Mb/s\nduration=1s\npacket_size=1500B\n";

    #[test]
    fn minimal_file_gets_defaults() {
        let sc = parse_scenario(MINIMAL).unwrap();
        assert_eq!(sc.duration, secs(1));
        assert_eq!(sc.packet_size, 1500);
        assert_eq!(sc.seed, 1);
        assert_eq!(sc.estimator, Estimator::ScaledExact);
        assert_eq!(sc.aqm, AqmConfig::default());
        assert_eq!(sc.queue_capacity, None);
    }

    #[test]
    fn unknown_key_is_named_with_its_line() {
        let text = format!("{MINIMAL}aqm=pi\naqm.pi.targett=5ms\n");
        let err = parse_scenario(&text).unwrap_err();
        assert_eq!(err.key.as_deref(), Some("aqm.pi.targett"));
        assert_eq!(err.line(), Some(8));
        assert!(err.to_string().contains("unknown key"));
    }

    #[test]
    fn rate_units_agree() {
        assert_eq!(parse_rate("1Mb/s"), parse_rate("125000B/s"));
        assert_eq!(parse_rate("1.5Gb/s").unwrap(), Rate::from_mbps(1500));
        assert_eq!(parse_rate("12kB/s").unwrap().bps(), 96_000);
    }

    #[test]
    fn decimal_times_are_exact() {
        assert_eq!(parse_time("1.5ms"), Ok(us(1500)));
        assert_eq!(parse_time("0.000000001s"), Ok(1));
        assert_eq!(parse_time(".5us"), Ok(500));
        assert!(parse_time("1.0000000001ms").is_err());
        assert!(parse_time("15").unwrap_err().contains("unit"));
        assert!(parse_time("15 weeks").is_err());
        assert!(parse_time("-1ms").is_err());
        assert!(parse_time("1.2.3ms").is_err());
    }

    #[test]
    fn duplicate_keys_rejected() {
        let text = format!("{MINIMAL}seed=3\nseed=4\n");
        let err = parse_scenario(&text).unwrap_err();
        assert_eq!((err.line(), err.key.as_deref()), (Some(8), Some("seed")));
    }

    #[test]
    fn irrelevant_key_rejected() {
        let text = format!("{MINIMAL}drain.step.t=5ms\n");
        let err = parse_scenario(&text).unwrap_err();
        assert_eq!(err.key.as_deref(), Some("drain.step.t"));
        assert!(err.message.contains("does not apply"));
        let text = format!("{MINIMAL}aqm.apply=enqueue\n");
        assert!(parse_scenario(&text).is_err());
    }

    #[test]
    fn missing_key_named() {
        let err = parse_scenario("arrival=constant\n").unwrap_err();
        assert_eq!(err.key.as_deref(), Some("duration"));
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = format!("# header\n\n{MINIMAL}seed=9 # trailing\n");
        assert_eq!(parse_scenario(&text).unwrap().seed, 9);
    }

    #[test]
    fn overrides_replace_values() {
        let ov = vec![parse_override("drain.rate=2Mb/s").unwrap(), parse_override("seed=5").unwrap()];
        let sc = parse_scenario_with(MINIMAL, &ov).unwrap();
        assert_eq!(sc.seed, 5);
        assert_eq!(
            sc.drain,
            DrainProcess::ConstantRate {
                rate: Rate::from_mbps(2)
            }
        );
        let bad = vec![parse_override("nope=1").unwrap()];
        let err = parse_scenario_with(MINIMAL, &bad).unwrap_err();
        assert_eq!(err.origin, Some(Origin::Override));
    }

    #[test]
    fn validation_errors_surface() {
        let text = MINIMAL.replace("duration=1s", "duration=0s");
        assert!(parse_scenario(&text).is_err());
    }

    #[test]
    fn full_file_round_trip() {
        let text = "duration=2s\npacket_size=1500B\nseed=7\nqueue.capacity=150kB\narrival=burst\narrival.rate_high=20Mb/s\narrival.rate_low=2Mb/s\narrival.period=100ms\narrival.duty=0.3\narrival.stop=1.5s\ndrain=fits\ndrain.rate=10Mb/s\ndrain.fits.stall_period=20ms\ndrain.fits.stall_len=4ms\nestimator=lg\naqm=pi\naqm.pi.alpha=0.25\naqm.apply=enqueue\naqm.marker=deterministic\n";
        let sc = parse_scenario(text).unwrap();
        assert_eq!(sc.queue_capacity, Some(150_000));
        assert_eq!(sc.arrival_stop, Some(ms(1500)));
        assert_eq!(parse_scenario(&render(&sc)).unwrap(), sc);
    }

    #[test]
    fn rendering_picks_coarsest_exact_unit() {
        assert_eq!(render_time(ms(15)), "15ms");
        assert_eq!(render_time(us(1500)), "1500us");
        assert_eq!(render_time(0), "0ns");
        assert_eq!(render_rate(Rate::from_mbps(10)), "10Mb/s");
        assert_eq!(render_rate(Rate::from_bps(1234)), "1234bit/s");
    }
}
