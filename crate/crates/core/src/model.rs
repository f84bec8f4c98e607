//! Event-family representations and the elementary probability queries.
//!
//! Two representations are provided:
//!
//! * [`ExplicitEventFamily`]: a finite outcome space with explicit weights and
//!   each event given as a set of outcome indices. Any claimed dependence range
//!   is unchecked until [`crate::dependence::check_m_dependence`] runs.
//! * [`WindowModel`]: an i.i.d. symbol stream `X_1, X_2, ...` and a predicate on
//!   windows of `m + 1` consecutive symbols. Event `k` fires when the predicate
//!   holds on `X_k..=X_{k+m}`, which makes the family m-dependent.
//!
//! Event indices are 1-based throughout, matching `A_1..A_N`.

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for a floating-point probability straying outside `[0, 1]`.
pub const PROB_TOL: f64 = 1e-12;

/// Neumaier-compensated sum; outcome sweeps add up to millions of small weights.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Tolerance on the total mass of a weight vector.
pub const MASS_TOL: f64 = 1e-9;

/// A probability value in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Probability(f64);

impl Probability {
    pub const ZERO: Probability = Probability(0.0);
    pub const ONE: Probability = Probability(1.0);

    /// Accepts values within [`PROB_TOL`] of the unit interval and clamps them into it.
    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() || !(-PROB_TOL..=1.0 + PROB_TOL).contains(&value) {
            return Err(Error::InvalidArgument(format!(
                "{value} is not a probability"
            )));
        }
        Ok(Probability(value.clamp(0.0, 1.0)))
    }

    /// Clamps arbitrary finite values into `[0, 1]`.
    pub fn saturating(value: f64) -> Self {
        Probability(value.clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

/// A 1-based inclusive interval of event indices. Empty when `first > last`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub first: usize,
    pub last: usize,
}

impl Interval {
    pub fn new(first: usize, last: usize) -> Self {
        Interval { first, last }
    }

    pub fn empty() -> Self {
        Interval { first: 1, last: 0 }
    }

    pub fn is_empty(&self) -> bool {
        self.first > self.last
    }

    pub fn len(&self) -> usize {
        if self.is_empty() {
            0
        } else {
            self.last - self.first + 1
        }
    }

    pub fn contains(&self, k: usize) -> bool {
        self.first <= k && k <= self.last
    }

    pub fn iter(&self) -> std::ops::RangeInclusive<usize> {
        self.first..=self.last
    }

    pub(crate) fn check_within(&self, n: usize) -> Result<()> {
        if self.is_empty() {
            return Ok(());
        }
        if self.first == 0 {
            return Err(Error::IndexOutOfRange { index: 0, n });
        }
        if self.last > n {
            return Err(Error::IndexOutOfRange {
                index: self.last,
                n,
            });
        }
        Ok(())
    }
}

/// Query interface shared by both representations.
///
/// `pattern_prob` is the primitive: given `(k, fires)` pairs it returns the
/// probability that each listed `A_k` occurs exactly when `fires` is true.
/// Every atom of the algebra generated by finitely many events is such a
/// pattern, so dependence checks and the oracle both reduce to it.
pub trait EventFamily: Sync {
    /// Number of events `N`.
    fn len(&self) -> usize;

    /// Claimed dependence range `m`.
    fn dependence_range(&self) -> usize;

    fn event_prob(&self, k: usize) -> Result<f64>;

    fn pattern_prob(&self, pattern: &[(usize, bool)]) -> Result<f64>;

    /// Exact probability of `A_first ∪ ... ∪ A_last`.
    fn union_range_prob(&self, range: Interval) -> Result<f64>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn check_index(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.len() {
            Err(Error::IndexOutOfRange {
                index: k,
                n: self.len(),
            })
        } else {
            Ok(())
        }
    }

    fn pair_prob(&self, i: usize, j: usize) -> Result<f64> {
        self.check_index(i)?;
        self.check_index(j)?;
        if i == j {
            return self.event_prob(i);
        }
        self.pattern_prob(&[(i, true), (j, true)])
    }

    /// `S_upto = P(A_1) + ... + P(A_upto)`, summed left to right.
    fn partial_sum_s(&self, upto: usize) -> Result<f64> {
        if upto > self.len() {
            return Err(Error::IndexOutOfRange {
                index: upto,
                n: self.len(),
            });
        }
        let mut total = 0.0;
        for k in 1..=upto {
            total += self.event_prob(k)?;
        }
        Ok(total)
    }

    fn s_n(&self) -> f64 {
        self.partial_sum_s(self.len()).unwrap_or(0.0)
    }

    /// Local overlap mass: the sum of `P(A_i ∩ A_j)` over `i < j` with
    /// `j - i <= m - 1`. Undefined for `m = 0`.
    fn t_local(&self) -> Result<f64> {
        let m = self.dependence_range();
        if m == 0 {
            return Err(Error::InvalidArgument(
                "local overlap T_{m-1} requires m >= 1".into(),
            ));
        }
        let n = self.len();
        let mut total = 0.0;
        for i in 1..=n {
            for j in (i + 1)..=(i + m - 1).min(n) {
                total += self.pair_prob(i, j)?;
            }
        }
        Ok(total)
    }
}

/// A finite probability space with events given as outcome sets.
#[derive(Debug, Clone)]
pub struct ExplicitEventFamily {
    outcome_weights: Vec<f64>,
    events: Vec<Vec<usize>>,
    masks: Vec<FixedBitSet>,
    m: usize,
}

impl ExplicitEventFamily {
    pub fn new(outcome_weights: Vec<f64>, events: Vec<Vec<usize>>, m: usize) -> Result<Self> {
        if outcome_weights.is_empty() {
            return Err(Error::InvalidModel("outcome_weights is empty".into()));
        }
        if let Some((i, w)) = outcome_weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < 0.0)
        {
            return Err(Error::InvalidModel(format!(
                "outcome_weights[{i}] = {w} is not a nonnegative number"
            )));
        }
        let total = compensated_sum(outcome_weights.iter().copied());
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidModel(format!(
                "outcome_weights sum to {total}, expected 1"
            )));
        }
        let size = outcome_weights.len();
        let mut masks = Vec::with_capacity(events.len());
        let mut sorted_events = Vec::with_capacity(events.len());
        for (k, mut event) in events.into_iter().enumerate() {
            event.sort_unstable();
            event.dedup();
            let mut mask = FixedBitSet::with_capacity(size);
            for &w in &event {
                if w >= size {
                    return Err(Error::InvalidModel(format!(
                        "event {} references outcome {w}, but there are only {size} outcomes",
                        k + 1
                    )));
                }
                mask.insert(w);
            }
            masks.push(mask);
            sorted_events.push(event);
        }
        Ok(ExplicitEventFamily {
            outcome_weights,
            events: sorted_events,
            masks,
            m,
        })
    }

    /// `outcomes` equally likely outcomes.
    pub fn uniform(outcomes: usize, events: Vec<Vec<usize>>, m: usize) -> Result<Self> {
        if outcomes == 0 {
            return Err(Error::InvalidModel("no outcomes".into()));
        }
        Self::new(vec![1.0 / outcomes as f64; outcomes], events, m)
    }

    pub fn outcome_weights(&self) -> &[f64] {
        &self.outcome_weights
    }

    pub fn events(&self) -> &[Vec<usize>] {
        &self.events
    }

    pub fn claimed_range(&self) -> usize {
        self.m
    }

    pub fn outcomes(&self) -> usize {
        self.outcome_weights.len()
    }

    /// Same outcome space and events under a different claimed range.
    pub fn with_dependence_range(&self, m: usize) -> Self {
        ExplicitEventFamily {
            m,
            ..self.clone()
        }
    }

    pub(crate) fn mask(&self, k: usize) -> &FixedBitSet {
        &self.masks[k - 1]
    }
}

/// I.i.d. symbols with a predicate on windows of length `m + 1`.
///
/// Window index convention: the window `(x_0, ..., x_m)` (offset 0 is the
/// earliest symbol) maps to `x_0 + x_1 s + ... + x_m s^m`.
#[derive(Debug, Clone)]
pub struct WindowModel {
    alphabet_size: usize,
    symbol_dist: Vec<f64>,
    m: usize,
    predicate_table: Vec<bool>,
    horizon: usize,
    fire_prob: f64,
}

/// Largest predicate table accepted (`s^(m+1)`).
pub const MAX_TABLE_LEN: usize = 1 << 24;

impl WindowModel {
    pub fn new(
        alphabet_size: usize,
        symbol_dist: Vec<f64>,
        m: usize,
        predicate_table: Vec<bool>,
        horizon: usize,
    ) -> Result<Self> {
        if alphabet_size < 2 {
            return Err(Error::InvalidModel(format!(
                "alphabet_size must be at least 2, got {alphabet_size}"
            )));
        }
        if symbol_dist.len() != alphabet_size {
            return Err(Error::InvalidModel(format!(
                "symbol_dist has {} entries, expected alphabet_size = {alphabet_size}",
                symbol_dist.len()
            )));
        }
        if let Some((i, p)) = symbol_dist
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::InvalidModel(format!(
                "symbol_dist[{i}] = {p} is not a nonnegative number"
            )));
        }
        let total: f64 = symbol_dist.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidModel(format!(
                "symbol_dist sums to {total}, expected 1"
            )));
        }
        let expected = table_len(alphabet_size, m).ok_or_else(|| {
            Error::SizeCap(format!(
                "predicate table {alphabet_size}^{} exceeds {MAX_TABLE_LEN} entries",
                m + 1
            ))
        })?;
        if predicate_table.len() != expected {
            return Err(Error::InvalidModel(format!(
                "predicate_table has {} entries, expected {alphabet_size}^{} = {expected}",
                predicate_table.len(),
                m + 1
            )));
        }
        let mut model = WindowModel {
            alphabet_size,
            symbol_dist,
            m,
            predicate_table,
            horizon,
            fire_prob: 0.0,
        };
        model.fire_prob = model.cluster_prob(&[(1, true)]);
        Ok(model)
    }

    /// Builds the table by evaluating `predicate` on every window (earliest symbol first).
    pub fn from_predicate<F>(
        alphabet_size: usize,
        symbol_dist: Vec<f64>,
        m: usize,
        horizon: usize,
        predicate: F,
    ) -> Result<Self>
    where
        F: Fn(&[usize]) -> bool,
    {
        let len = table_len(alphabet_size.max(2), m)
            .ok_or_else(|| Error::SizeCap("predicate table too large".into()))?;
        let mut window = vec![0usize; m + 1];
        let table = (0..len)
            .map(|code| {
                decode_window(code, alphabet_size.max(2), &mut window);
                predicate(&window)
            })
            .collect();
        Self::new(alphabet_size, symbol_dist, m, table, horizon)
    }

    /// Event `k` fires when `X_k = ... = X_{k+m} = symbol`.
    pub fn run(
        alphabet_size: usize,
        symbol_dist: Vec<f64>,
        m: usize,
        symbol: usize,
        horizon: usize,
    ) -> Result<Self> {
        Self::from_predicate(alphabet_size, symbol_dist, m, horizon, |w| {
            w.iter().all(|&x| x == symbol)
        })
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn symbol_dist(&self) -> &[f64] {
        &self.symbol_dist
    }

    pub fn predicate_table(&self) -> &[bool] {
        &self.predicate_table
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn window_len(&self) -> usize {
        self.m + 1
    }

    /// Probability that a single window fires (the same for every `k`).
    pub fn fire_prob(&self) -> f64 {
        self.fire_prob
    }

    pub fn fires(&self, window_code: usize) -> bool {
        self.predicate_table[window_code]
    }

    pub fn with_horizon(&self, horizon: usize) -> Self {
        WindowModel {
            horizon,
            ..self.clone()
        }
    }
}

/// `s^(m+1)`, or `None` above [`MAX_TABLE_LEN`].
pub fn table_len(alphabet_size: usize, m: usize) -> Option<usize> {
    let mut len: usize = 1;
    for _ in 0..=m {
        len = len.checked_mul(alphabet_size)?;
        if len > MAX_TABLE_LEN {
            return None;
        }
    }
    Some(len)
}

/// Writes the base-`s` digits of `code`, least significant first.
pub fn decode_window(mut code: usize, s: usize, out: &mut [usize]) {
    for digit in out.iter_mut() {
        *digit = code % s;
        code /= s;
    }
}

/// Inverse of [`decode_window`].
pub fn encode_window(window: &[usize], s: usize) -> usize {
    window.iter().rev().fold(0, |acc, &x| acc * s + x)
}

/// Either representation, as loaded from a model file.
#[derive(Debug, Clone)]
pub enum Model {
    Explicit(ExplicitEventFamily),
    Window(WindowModel),
}

impl Model {
    pub fn as_family(&self) -> &dyn EventFamily {
        match self {
            Model::Explicit(f) => f,
            Model::Window(w) => w,
        }
    }
}

impl EventFamily for Model {
    fn len(&self) -> usize {
        self.as_family().len()
    }
    fn dependence_range(&self) -> usize {
        self.as_family().dependence_range()
    }
    fn event_prob(&self, k: usize) -> Result<f64> {
        self.as_family().event_prob(k)
    }
    fn pattern_prob(&self, pattern: &[(usize, bool)]) -> Result<f64> {
        self.as_family().pattern_prob(pattern)
    }
    fn union_range_prob(&self, range: Interval) -> Result<f64> {
        self.as_family().union_range_prob(range)
    }
    fn partial_sum_s(&self, upto: usize) -> Result<f64> {
        self.as_family().partial_sum_s(upto)
    }
    fn t_local(&self) -> Result<f64> {
        self.as_family().t_local()
    }
}

impl From<ExplicitEventFamily> for Model {
    fn from(f: ExplicitEventFamily) -> Self {
        Model::Explicit(f)
    }
}

impl From<WindowModel> for Model {
    fn from(w: WindowModel) -> Self {
        Model::Window(w)
    }
}
