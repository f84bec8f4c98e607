//! Seeded Monte Carlo estimates of union probabilities for window models.
//!
//! Trial `t` draws its symbols from a ChaCha8 stream keyed by `(seed, t)`, and
//! trials are counted in fixed-size chunks, so the result does not depend on
//! how many threads run them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EventFamily, Interval, Probability, WindowModel};

/// Two-sided 95% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

const CHUNK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: Probability,
    pub ci_low: Probability,
    pub ci_high: Probability,
    pub trials: u64,
    pub seed: u64,
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let low = if successes == 0 { 0.0 } else { center - half };
    let high = if successes == trials { 1.0 } else { center + half };
    (low.clamp(0.0, 1.0), high.clamp(0.0, 1.0))
}

struct Sampler<'a> {
    model: &'a WindowModel,
    cdf: Vec<f64>,
    fallback: usize,
    top_stride: usize,
}

impl<'a> Sampler<'a> {
    fn new(model: &'a WindowModel) -> Self {
        let mut acc = 0.0;
        let cdf = model
            .symbol_dist()
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        let fallback = model
            .symbol_dist()
            .iter()
            .rposition(|&p| p > 0.0)
            .unwrap_or(0);
        let top_stride = model.predicate_table().len() / model.alphabet_size();
        Sampler {
            model,
            cdf,
            fallback,
            top_stride,
        }
    }

    fn symbol(&self, rng: &mut ChaCha8Rng) -> usize {
        let u: f64 = rng.random();
        self.cdf.iter().position(|&c| u < c).unwrap_or(self.fallback)
    }

    /// Whether any window `k` in `range` fires on one simulated string.
    fn trial(&self, range: Interval, seed: u64, index: u64) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let s = self.model.alphabet_size();
        let m = self.model.window_len() - 1;
        // code holds the current window with the earliest symbol least significant.
        let mut code = 0usize;
        for _ in 0..m {
            code = code / s + self.symbol(&mut rng) * self.top_stride;
        }
        for _ in range.iter() {
            code = code / s + self.symbol(&mut rng) * self.top_stride;
            if self.model.fires(code) {
                return true;
            }
        }
        false
    }
}

fn count_hits(model: &WindowModel, range: Interval, trials: u64, seed: u64) -> u64 {
    let sampler = Sampler::new(model);
    let chunks = trials.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(trials);
            (start..end)
                .filter(|&t| sampler.trial(range, seed, t))
                .count() as u64
        })
        .sum()
}

/// Estimates `P(∪_{k in range} A_k)` from `trials` simulated strings, with a 95% Wilson interval.
pub fn estimate_union(
    model: &WindowModel,
    range: Interval,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    range.check_within(model.len())?;
    if range.is_empty() {
        return Ok(McEstimate {
            estimate: Probability::ZERO,
            ci_low: Probability::ZERO,
            ci_high: Probability::ZERO,
            trials,
            seed,
        });
    }
    let hits = count_hits(model, range, trials, seed);
    let (low, high) = wilson_interval(hits, trials, Z_95);
    Ok(McEstimate {
        estimate: Probability::saturating(hits as f64 / trials as f64),
        ci_low: Probability::saturating(low),
        ci_high: Probability::saturating(high),
        trials,
        seed,
    })
}

/// [`estimate_union`] on a dedicated pool of `threads` workers.
pub fn estimate_union_with_threads(
    model: &WindowModel,
    range: Interval,
    trials: u64,
    seed: u64,
    threads: usize,
) -> Result<McEstimate> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| estimate_union(model, range, trials, seed))
}
