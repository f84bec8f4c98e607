#![allow(dead_code)]

use mdep_core::WindowModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Strictly positive weights normalized to sum to 1.
pub fn random_dist<R: Rng>(rng: &mut R, s: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..s).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// A window model with random alphabet size, range, table density and law.
pub fn random_window_model<R: Rng>(
    rng: &mut R,
    alphabets: &[usize],
    ranges: &[usize],
    horizon: std::ops::RangeInclusive<usize>,
) -> WindowModel {
    let s = alphabets[rng.random_range(0..alphabets.len())];
    let m = ranges[rng.random_range(0..ranges.len())];
    let n = rng.random_range(horizon);
    let dist = random_dist(rng, s);
    let density: f64 = rng.random_range(0.02..0.6);
    let len = s.pow(m as u32 + 1);
    let table: Vec<bool> = (0..len).map(|_| rng.random_bool(density)).collect();
    WindowModel::new(s, dist, m, table, n).expect("generated model is valid")
}

/// The property corpus: s in {2, 3}, m in {1, 2, 3}, N <= 200.
pub fn corpus(count: usize, seed: u64) -> Vec<WindowModel> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| random_window_model(&mut r, &[2, 3], &[1, 2, 3], 0..=200))
        .collect()
}

/// Fair coin, event k fires on three consecutive heads starting at flip k.
pub fn w1(n: usize) -> WindowModel {
    WindowModel::run(2, vec![0.5, 0.5], 2, 1, n).unwrap()
}
