//! Shared oracles for the integration suite: deliberately slow, independent
//! reimplementations written from the documented definitions. The fast
//! library code must agree with these.
#![allow(dead_code)]

pub mod naive_learn;
pub mod naive_ts;
pub mod naive_walk;

use rand::Rng;
use satlab::seeding;

/// An AR(1)-flavored random series for oracle comparisons.
pub fn random_series(seed: u64, len: usize) -> Vec<f64> {
    let mut rng = seeding::rng(seed, "test/series", 0);
    let mut v = 0.0;
    (0..len)
        .map(|_| {
            v = 0.8 * v + rng.gen_range(-1.0..1.0);
            v
        })
        .collect()
}

/// A mixed corpus of series shapes: smooth tones, noisy tones, rough walks,
/// heavy-tailed data, and tie-heavy rounded data.
pub fn series_corpus(count: usize) -> Vec<Vec<f64>> {
    let lengths = [3, 5, 9, 16, 40, 101, 256, 333, 700, 1000];
    (0..count)
        .map(|i| {
            let len = lengths[i % lengths.len()].max(3);
            let base = random_series(i as u64, len);
            match i % 5 {
                0 => base,
                1 => {
                    (0..len).map(|t| (2.0 * std::f64::consts::PI * t as f64 / 24.0).sin()).collect()
                }
                2 => base
                    .iter()
                    .enumerate()
                    .map(|(t, &v)| v + (2.0 * std::f64::consts::PI * t as f64 / 16.0).sin())
                    .collect(),
                3 => base.iter().map(|&v| (v.abs() + 0.1).ln() * v.signum()).collect(),
                // Tie-heavy: round to two decimals.
                _ => base.iter().map(|&v| (v * 100.0).round() / 100.0).collect(),
            }
        })
        .collect()
}
