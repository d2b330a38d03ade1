// SPDX-License-Identifier: Apache-2.0

//! Pulse trains, generators and rate measurement.
//!
//! Time is measured in picoseconds and rates in GHz throughout the crate.
//! One GHz is one pulse per 1000 ps.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{invalid, Error, Result};

/// Flux quantum, mV·ps.
pub const PHI0_MV_PS: f64 = 2.07;
/// Energy dissipated by one 2π junction switch, J.
pub const E_SWITCH_J: f64 = 2e-19;
/// Rate used to normalise figure axes, GHz.
pub const RATE_NORM_GHZ: f64 = 33.3;

/// Converts a rate in GHz to pulses per picosecond.
#[inline]
pub fn ghz_to_per_ps(rate_ghz: f64) -> f64 {
    rate_ghz * 1e-3
}

#[inline]
pub fn per_ps_to_ghz(rate: f64) -> f64 {
    rate * 1e3
}

/// The physical constants shared by all device models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub phi0_mv_ps: f64,
    pub e_switch_j: f64,
}

pub const CONSTANTS: PhysicalConstants = PhysicalConstants {
    phi0_mv_ps: PHI0_MV_PS,
    e_switch_j: E_SWITCH_J,
};

/// Strictly increasing sequence of non-negative event times in ps.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PulseTrain {
    events: Vec<f64>,
}

impl PulseTrain {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a train, checking ordering and sign.
    pub fn from_times(events: Vec<f64>) -> Result<Self> {
        for (i, &t) in events.iter().enumerate() {
            if !t.is_finite() || t < 0.0 {
                return Err(invalid(format!("event {i} has invalid time {t}")));
            }
            if i > 0 && t <= events[i - 1] {
                return Err(invalid(format!(
                    "event {i} at {t} ps does not follow {} ps",
                    events[i - 1]
                )));
            }
        }
        Ok(Self { events })
    }

    /// Caller guarantees the ordering invariant.
    pub(crate) fn from_sorted_unchecked(events: Vec<f64>) -> Self {
        debug_assert!(events.windows(2).all(|w| w[0] < w[1]));
        Self { events }
    }

    pub fn times(&self) -> &[f64] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.events.iter().copied()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.events
    }

    /// Every event lies in `[0, duration]`.
    pub fn within(&self, duration: f64) -> bool {
        self.events.iter().all(|&t| (0.0..=duration).contains(&t))
    }

    /// Number of events in `[start, end)`.
    pub fn count_in(&self, start: f64, end: f64) -> usize {
        let lo = self.events.partition_point(|&t| t < start);
        let hi = self.events.partition_point(|&t| t < end);
        hi.saturating_sub(lo)
    }

    /// CSV with a `t_ps` header and one timestamp per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_ps\n");
        for t in &self.events {
            let _ = writeln!(out, "{t}");
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim() == "t_ps" => {}
            Some(h) => return Err(Error::Parse(format!("expected header `t_ps`, found `{h}`"))),
            None => return Ok(Self::new()),
        }
        let events = lines
            .enumerate()
            .map(|(i, l)| {
                l.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {}: {e}", i + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_times(events)
    }
}

/// Average rate over a window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateMeasurement {
    pub rate_ghz: f64,
    pub start_ps: f64,
    pub end_ps: f64,
    pub count: usize,
}

fn check_rate_and_duration(rate_ghz: f64, duration_ps: f64) -> Result<()> {
    if !(rate_ghz >= 0.0) || !rate_ghz.is_finite() {
        return Err(invalid(format!("rate must be finite and >= 0, got {rate_ghz}")));
    }
    if !(duration_ps > 0.0) || !duration_ps.is_finite() {
        return Err(invalid(format!("duration must be finite and > 0, got {duration_ps}")));
    }
    Ok(())
}

/// Periodic train with pulses at `phase + k / rate` inside `[0, duration)`.
pub fn regular_train(rate_ghz: f64, duration_ps: f64, phase_ps: f64) -> Result<PulseTrain> {
    check_rate_and_duration(rate_ghz, duration_ps)?;
    if rate_ghz == 0.0 {
        return Ok(PulseTrain::new());
    }
    let period = 1.0 / ghz_to_per_ps(rate_ghz);
    if !(0.0..period).contains(&phase_ps) {
        return Err(invalid(format!(
            "phase {phase_ps} ps must lie in [0, {period}) for {rate_ghz} GHz"
        )));
    }
    let mut events = Vec::with_capacity((duration_ps / period).ceil() as usize + 1);
    let mut k = 0u64;
    loop {
        // multiply rather than accumulate so long trains do not drift
        let t = phase_ps + k as f64 * period;
        if t >= duration_ps {
            break;
        }
        events.push(t);
        k += 1;
    }
    Ok(PulseTrain::from_sorted_unchecked(events))
}

/// Poisson train with exponential inter-arrival times, reproducible per seed.
pub fn poisson_train(rate_ghz: f64, duration_ps: f64, seed: u64) -> Result<PulseTrain> {
    check_rate_and_duration(rate_ghz, duration_ps)?;
    if rate_ghz == 0.0 {
        return Ok(PulseTrain::new());
    }
    let exp = Exp::new(ghz_to_per_ps(rate_ghz)).map_err(|e| invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut events = Vec::new();
    let mut t = 0.0;
    loop {
        t += exp.sample(&mut rng);
        if t >= duration_ps {
            break;
        }
        // a zero-length gap is possible in principle; collapse it
        if events.last().is_some_and(|&last| t <= last) {
            continue;
        }
        events.push(t);
    }
    Ok(PulseTrain::from_sorted_unchecked(events))
}

/// Count of events in `[start, end)` over the window length, in GHz.
pub fn measure_rate(train: &PulseTrain, start_ps: f64, end_ps: f64) -> Result<RateMeasurement> {
    if !(end_ps > start_ps) || !start_ps.is_finite() || !end_ps.is_finite() {
        return Err(invalid(format!("degenerate window [{start_ps}, {end_ps})")));
    }
    let count = train.count_in(start_ps, end_ps);
    Ok(RateMeasurement {
        rate_ghz: per_ps_to_ghz(count as f64 / (end_ps - start_ps)),
        start_ps,
        end_ps,
        count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_rate_is_empty() {
        assert!(regular_train(0.0, 1000.0, 0.0).unwrap().is_empty());
        assert!(poisson_train(0.0, 1000.0, 3).unwrap().is_empty());
    }

    #[test]
    fn fifty_ghz_over_100ps() {
        let t = regular_train(50.0, 100.0, 0.0).unwrap();
        let expected = [0.0, 20.0, 40.0, 60.0, 80.0];
        assert_eq!(t.len(), 5);
        for (a, b) in t.iter().zip(expected) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn count_matches_enumeration() {
        // brute-force: walk k until k/rate leaves the window
        let (rate, dur) = (33.3, 1000.0);
        let period = 1000.0 / rate;
        let mut n = 0;
        while (n as f64) * period < dur {
            n += 1;
        }
        assert_eq!(n, 34);
        let t = regular_train(rate, dur, 0.0).unwrap();
        assert_eq!(t.len(), n);
        assert!((t.times()[1] - t.times()[0] - 30.03).abs() < 0.01);
    }

    #[test]
    fn negative_arguments_rejected() {
        assert!(regular_train(-1.0, 100.0, 0.0).is_err());
        assert!(regular_train(1.0, -100.0, 0.0).is_err());
        assert!(regular_train(1.0, 0.0, 0.0).is_err());
        assert!(regular_train(50.0, 100.0, 20.0).is_err());
        assert!(poisson_train(-1.0, 100.0, 0).is_err());
    }

    #[test]
    fn poisson_count_statistics() {
        // 10 GHz over 1e5 ps: mean 1000 pulses, sd sqrt(1000)
        let t = poisson_train(10.0, 1e5, 7).unwrap();
        let dev = (t.len() as f64 - 1000.0).abs();
        assert!(dev <= 3.0 * 1000f64.sqrt(), "count {}", t.len());
    }

    #[test]
    fn poisson_same_seed_same_train() {
        assert_eq!(
            poisson_train(20.0, 5000.0, 11).unwrap(),
            poisson_train(20.0, 5000.0, 11).unwrap()
        );
        assert_ne!(
            poisson_train(20.0, 5000.0, 11).unwrap(),
            poisson_train(20.0, 5000.0, 12).unwrap()
        );
    }

    #[test]
    fn measure_examples() {
        let empty = PulseTrain::new();
        assert_eq!(measure_rate(&empty, 0.0, 100.0).unwrap().rate_ghz, 0.0);
        let t = regular_train(50.0, 1000.0, 0.0).unwrap();
        let full = measure_rate(&t, 0.0, 1000.0).unwrap();
        assert!((full.rate_ghz - 50.0).abs() < 1e-9);
        assert_eq!(full.count, 50);
        let half = measure_rate(&t, 0.0, 500.0).unwrap();
        assert!((half.rate_ghz - 50.0).abs() <= 2.0);
        assert!(measure_rate(&t, 10.0, 10.0).is_err());
        assert!(measure_rate(&t, 10.0, 5.0).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let t = regular_train(7.0, 2000.0, 3.5).unwrap();
        let back = PulseTrain::from_csv(&t.to_csv()).unwrap();
        assert_eq!(t, back);
        assert!(PulseTrain::from_csv("t\n1\n").is_err());
        assert!(PulseTrain::from_csv("t_ps\n2\n1\n").is_err());
    }

    proptest! {
        #[test]
        fn regular_round_trip_rate(rate in 0.1f64..80.0, dur in 500.0f64..20_000.0) {
            let t = regular_train(rate, dur, 0.0).unwrap();
            prop_assert!(t.times().windows(2).all(|w| w[0] < w[1]));
            prop_assert!(t.within(dur));
            let m = measure_rate(&t, 0.0, dur).unwrap();
            // one pulse of quantisation over the window
            prop_assert!((m.rate_ghz - rate).abs() <= per_ps_to_ghz(1.0 / dur) + 1e-9);
        }

        #[test]
        fn poisson_trains_are_ordered(rate in 0.0f64..80.0, dur in 1.0f64..5000.0, seed: u64) {
            let t = poisson_train(rate, dur, seed).unwrap();
            prop_assert!(t.times().windows(2).all(|w| w[0] < w[1]));
            prop_assert!(t.within(dur));
        }
    }
}
