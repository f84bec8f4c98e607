//! Exact union and complement-intersection probabilities.
//!
//! Explicit families are swept outcome by outcome. Window models use a forward
//! dynamic program whose state is the distribution of the last `m` symbols:
//! each step appends one symbol and, when the completed window belongs to a
//! constrained index, keeps only the mass consistent with the constraint.
//! Constrained windows that share no symbols with earlier ones start a fresh
//! program, and the pieces multiply.

use crate::error::{Error, Result};
use crate::model::{compensated_sum, EventFamily, ExplicitEventFamily, Interval, WindowModel};

/// Largest outcome space [`expand_window_model`] will build.
pub const MAX_EXPANDED_OUTCOMES: usize = 1 << 20;

/// `P(A_first ∪ ... ∪ A_last)`; zero for an empty range.
pub fn union_prob<F: EventFamily + ?Sized>(family: &F, range: Interval) -> Result<f64> {
    family.union_range_prob(range)
}

/// `P(∩ A_k^c)` over `indices` (1-based, any order). The empty set gives 1.
pub fn complement_intersection_prob<F: EventFamily + ?Sized>(
    family: &F,
    indices: &[usize],
) -> Result<f64> {
    let pattern: Vec<(usize, bool)> = indices.iter().map(|&k| (k, false)).collect();
    family.pattern_prob(&pattern)
}

/// Probability of the block event `B = ∪_{k ∈ block} A_k`.
pub fn block_event_prob<F: EventFamily + ?Sized>(family: &F, block: Interval) -> Result<f64> {
    family.union_range_prob(block)
}

/// Sorts and deduplicates a pattern. `None` means two entries contradict.
fn normalize_pattern(n: usize, pattern: &[(usize, bool)]) -> Result<Option<Vec<(usize, bool)>>> {
    let mut sorted = pattern.to_vec();
    for &(k, _) in &sorted {
        if k == 0 || k > n {
            return Err(Error::IndexOutOfRange { index: k, n });
        }
    }
    sorted.sort_unstable();
    let mut out: Vec<(usize, bool)> = Vec::with_capacity(sorted.len());
    for (k, f) in sorted {
        match out.last() {
            Some(&(pk, pf)) if pk == k => {
                if pf != f {
                    return Ok(None);
                }
            }
            _ => out.push((k, f)),
        }
    }
    Ok(Some(out))
}

impl EventFamily for ExplicitEventFamily {
    fn len(&self) -> usize {
        self.events().len()
    }

    fn dependence_range(&self) -> usize {
        self.claimed_range()
    }

    fn event_prob(&self, k: usize) -> Result<f64> {
        self.check_index(k)?;
        let w = self.outcome_weights();
        Ok(compensated_sum(self.events()[k - 1].iter().map(|&o| w[o])).clamp(0.0, 1.0))
    }

    fn pattern_prob(&self, pattern: &[(usize, bool)]) -> Result<f64> {
        let Some(pattern) = normalize_pattern(self.len(), pattern)? else {
            return Ok(0.0);
        };
        let total = compensated_sum(
            self.outcome_weights()
                .iter()
                .enumerate()
                .filter(|&(o, _)| pattern.iter().all(|&(k, f)| self.mask(k).contains(o) == f))
                .map(|(_, &w)| w),
        );
        Ok(total.clamp(0.0, 1.0))
    }

    fn union_range_prob(&self, range: Interval) -> Result<f64> {
        range.check_within(self.len())?;
        if range.is_empty() {
            return Ok(0.0);
        }
        let total = compensated_sum(
            self.outcome_weights()
                .iter()
                .enumerate()
                .filter(|&(o, _)| range.iter().any(|k| self.mask(k).contains(o)))
                .map(|(_, &w)| w),
        );
        Ok(total.clamp(0.0, 1.0))
    }
}

/// Forward program over the distribution of the last `m` symbols.
struct WindowDp<'a> {
    model: &'a WindowModel,
    state_count: usize,
    mass: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'a> WindowDp<'a> {
    /// Product law of `m` fresh symbols: the state just before the first window completes.
    fn fresh(model: &'a WindowModel) -> Self {
        let s = model.alphabet_size();
        let dist = model.symbol_dist();
        let mut mass = vec![1.0];
        let mut stride = 1;
        for _ in 0..model.window_len() - 1 {
            let mut next = vec![0.0; mass.len() * s];
            for (x, &px) in dist.iter().enumerate() {
                for (code, &p) in mass.iter().enumerate() {
                    next[code + x * stride] = p * px;
                }
            }
            mass = next;
            stride *= s;
        }
        let state_count = mass.len();
        WindowDp {
            model,
            state_count,
            scratch: vec![0.0; state_count],
            mass,
        }
    }

    /// Appends one symbol. With `Some(f)`, the window completed by this symbol
    /// must fire iff `f`.
    fn step(&mut self, constraint: Option<bool>) {
        let s = self.model.alphabet_size();
        let dist = self.model.symbol_dist();
        let table = self.model.predicate_table();
        self.scratch.iter_mut().for_each(|v| *v = 0.0);
        for (state, &p) in self.mass.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (x, &px) in dist.iter().enumerate() {
                let code = state + x * self.state_count;
                if let Some(f) = constraint {
                    if table[code] != f {
                        continue;
                    }
                }
                self.scratch[code / s] += p * px;
            }
        }
        std::mem::swap(&mut self.mass, &mut self.scratch);
        for v in self.mass.iter_mut() {
            *v = v.clamp(0.0, 1.0);
        }
    }

    fn total(&self) -> f64 {
        self.mass.iter().sum::<f64>().clamp(0.0, 1.0)
    }
}

impl WindowModel {
    /// Probability of one run of overlapping constraints, sorted by index, where
    /// each window shares at least one symbol with the previous one.
    pub(crate) fn cluster_prob(&self, cluster: &[(usize, bool)]) -> f64 {
        let m = self.window_len() - 1;
        let mut dp = WindowDp::fresh(self);
        // Index of the last symbol absorbed so far.
        let mut pos = cluster[0].0 + m - 1;
        for &(k, f) in cluster {
            while pos + 1 < k + m {
                dp.step(None);
                pos += 1;
            }
            dp.step(Some(f));
            pos += 1;
        }
        dp.total()
    }

    fn sorted_pattern_prob(&self, pattern: &[(usize, bool)]) -> f64 {
        let m = self.window_len() - 1;
        let mut result = 1.0;
        let mut start = 0;
        for idx in 1..=pattern.len() {
            let split = idx == pattern.len() || pattern[idx].0 > pattern[idx - 1].0 + m;
            if split {
                result *= self.cluster_prob(&pattern[start..idx]);
                start = idx;
                if result == 0.0 {
                    break;
                }
            }
        }
        result.clamp(0.0, 1.0)
    }
}

impl EventFamily for WindowModel {
    fn len(&self) -> usize {
        self.horizon()
    }

    fn dependence_range(&self) -> usize {
        self.window_len() - 1
    }

    fn event_prob(&self, k: usize) -> Result<f64> {
        self.check_index(k)?;
        Ok(self.fire_prob())
    }

    fn pattern_prob(&self, pattern: &[(usize, bool)]) -> Result<f64> {
        let Some(pattern) = normalize_pattern(self.len(), pattern)? else {
            return Ok(0.0);
        };
        if pattern.is_empty() {
            return Ok(1.0);
        }
        Ok(self.sorted_pattern_prob(&pattern))
    }

    fn union_range_prob(&self, range: Interval) -> Result<f64> {
        range.check_within(self.len())?;
        if range.is_empty() {
            return Ok(0.0);
        }
        let pattern: Vec<(usize, bool)> = range.iter().map(|k| (k, false)).collect();
        Ok((1.0 - self.sorted_pattern_prob(&pattern)).clamp(0.0, 1.0))
    }

    fn pair_prob(&self, i: usize, j: usize) -> Result<f64> {
        self.check_index(i)?;
        self.check_index(j)?;
        if i == j {
            return Ok(self.fire_prob());
        }
        Ok(self.gap_pair_prob(i.abs_diff(j)))
    }

    fn partial_sum_s(&self, upto: usize) -> Result<f64> {
        if upto > self.len() {
            return Err(Error::IndexOutOfRange {
                index: upto,
                n: self.len(),
            });
        }
        let p = self.fire_prob();
        Ok((0..upto).fold(0.0, |acc, _| acc + p))
    }

    fn t_local(&self) -> Result<f64> {
        let m = self.dependence_range();
        if m == 0 {
            return Err(Error::InvalidArgument(
                "local overlap T_{m-1} requires m >= 1".into(),
            ));
        }
        let n = self.len();
        // Stationary: P(A_i ∩ A_{i+d}) depends on d only.
        let by_gap: Vec<f64> = (1..m).map(|d| self.gap_pair_prob(d)).collect();
        let mut total = 0.0;
        for i in 1..=n {
            for j in (i + 1)..=(i + m - 1).min(n) {
                total += by_gap[j - i - 1];
            }
        }
        Ok(total)
    }
}

impl WindowModel {
    /// `P(A_i ∩ A_{i+gap})` for `gap >= 1`, independent of `i`.
    pub fn gap_pair_prob(&self, gap: usize) -> f64 {
        self.sorted_pattern_prob(&[(1, true), (1 + gap, true)])
    }
}

/// Expands a window model into an explicit family over all `s^(N+m)` symbol
/// strings. Outcome `ω` encodes `X_1, X_2, ...` as base-`s` digits with `X_1`
/// least significant, so event `k` fires on outcome `ω` iff the predicate holds
/// at window code `(ω / s^(k-1)) mod s^(m+1)`.
pub fn expand_window_model(model: &WindowModel) -> Result<ExplicitEventFamily> {
    let s = model.alphabet_size();
    let m = model.window_len() - 1;
    let n = model.horizon();
    let length = n + m;
    let mut outcomes: usize = 1;
    for _ in 0..length {
        outcomes = outcomes
            .checked_mul(s)
            .filter(|&c| c <= MAX_EXPANDED_OUTCOMES)
            .ok_or_else(|| {
                Error::SizeCap(format!(
                    "{s}^{length} outcomes exceed the expansion cap {MAX_EXPANDED_OUTCOMES}"
                ))
            })?;
    }
    let dist = model.symbol_dist();
    let weights: Vec<f64> = (0..outcomes)
        .map(|mut code| {
            let mut w = 1.0;
            for _ in 0..length {
                w *= dist[code % s];
                code /= s;
            }
            w
        })
        .collect();
    let table_len = model.predicate_table().len();
    let mut events = vec![Vec::new(); n];
    let mut shift = 1usize;
    for event in events.iter_mut() {
        for (o, _) in weights.iter().enumerate() {
            if model.fires((o / shift) % table_len) {
                event.push(o);
            }
        }
        shift *= s;
    }
    // Weights of a product law sum to 1 up to rounding; renormalize to stay within tolerance.
    let total = compensated_sum(weights.iter().copied());
    let weights = weights.into_iter().map(|w| w / total).collect();
    ExplicitEventFamily::new(weights, events, m)
}
