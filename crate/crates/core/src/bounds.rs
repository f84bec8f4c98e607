//! Closed-form union lower bounds and the finite-window threshold construction.
//!
//! * residue-class bound: `P(∪ A_k) >= 1 - exp(-S_N / (m+1))`
//! * local-intersection bound: `P(∪ A_k) >= 1 - exp(-(S_N - T_{m-1}) / 2)`, for `m >= 1`
//! * finite-window bound: `P(∪_{k=i+1}^{φ(i+n)} A_k) >= 1 - exp(-n / (m+1))`

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EventFamily, Interval, Probability};
use crate::montecarlo::McEstimate;
use crate::oracle::union_prob;

/// Slack allowed when comparing an exact probability against a bound.
pub const BOUND_TOL: f64 = 1e-9;

/// Slack allowed when a prefix sum is compared with an integer threshold.
pub const PHI_TOL: f64 = 1e-12;

fn one_minus_exp_neg(x: f64) -> f64 {
    (-(-x).exp_m1()).clamp(0.0, 1.0)
}

/// `S_N / (m+1)`.
pub fn thm1_exponent(s_n: f64, m: usize) -> f64 {
    s_n / (m as f64 + 1.0)
}

/// `1 - exp(-S_N / (m+1))`. With `m = 0` this is the independent-case bound `1 - exp(-S_N)`.
pub fn thm1_bound(s_n: f64, m: usize) -> Result<Probability> {
    if !s_n.is_finite() || s_n < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "event mass must be a nonnegative number, got {s_n}"
        )));
    }
    Ok(Probability::saturating(one_minus_exp_neg(thm1_exponent(
        s_n, m,
    ))))
}

/// Exponent `(S_N - T_{m-1}) / 2` and the bound `1 - exp(-exponent)`, clamped
/// to 0 when the exponent is negative.
pub fn thm2_bound(s_n: f64, t: f64, m: usize) -> Result<(f64, Probability)> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "the local-intersection bound needs m >= 1".into(),
        ));
    }
    if !s_n.is_finite() || !t.is_finite() || s_n < 0.0 || t < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "S_N and T must be nonnegative numbers, got {s_n} and {t}"
        )));
    }
    let exponent = (s_n - t) / 2.0;
    let bound = if exponent >= 0.0 {
        one_minus_exp_neg(exponent)
    } else {
        0.0
    };
    Ok((exponent, Probability::saturating(bound)))
}

/// True iff `T < (m-1)/(m+1) · S_N`, i.e. the local-intersection exponent
/// strictly exceeds the residue-class one. Ties are false.
pub fn thm2_sharper(s_n: f64, t: f64, m: usize) -> Result<bool> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "the comparison needs m >= 1".into(),
        ));
    }
    let m = m as f64;
    Ok(t < (m - 1.0) / (m + 1.0) * s_n)
}

/// Minimal nondecreasing `φ` with `P(A_1) + ... + P(A_φ(n)) >= n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdFunction {
    /// `values[n - 1] = φ(n)`; `φ` is defined for `1 <= n <= values.len()`.
    values: Vec<usize>,
    total_mass: f64,
}

impl ThresholdFunction {
    pub fn get(&self, n: usize) -> Option<usize> {
        n.checked_sub(1).and_then(|i| self.values.get(i).copied())
    }

    /// Largest `n` with `φ(n)` defined; 0 when `S_N < 1`.
    pub fn max_defined(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }
}

pub fn build_phi<F: EventFamily + ?Sized>(family: &F) -> Result<ThresholdFunction> {
    let mut values = Vec::new();
    let mut prefix = 0.0;
    for t in 1..=family.len() {
        prefix += family.event_prob(t)?;
        while prefix + PHI_TOL >= (values.len() + 1) as f64 {
            values.push(t);
        }
    }
    Ok(ThresholdFunction {
        values,
        total_mass: prefix,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorollaryWindow {
    pub i: usize,
    pub window_n: usize,
    /// `{i+1, ..., φ(i + window_n)}`.
    pub indices: Interval,
    /// `1 - exp(-window_n / (m+1))`.
    pub bound: Probability,
    /// `Σ_{k in indices} P(A_k)`.
    pub window_mass: f64,
    /// Whether `window_mass >= window_n` (within [`BOUND_TOL`]).
    pub mass_check: bool,
}

pub fn corollary_window<F: EventFamily + ?Sized>(
    family: &F,
    phi: &ThresholdFunction,
    i: usize,
    window_n: usize,
) -> Result<CorollaryWindow> {
    if window_n == 0 {
        return Err(Error::InvalidArgument("window_n must be at least 1".into()));
    }
    let needed = i + window_n;
    let end = phi.get(needed).ok_or(Error::ThresholdUndefined {
        needed,
        available: phi.total_mass(),
        deficit: needed as f64 - phi.total_mass(),
    })?;
    let indices = Interval::new(i + 1, end);
    let mut window_mass = 0.0;
    for k in indices.iter() {
        window_mass += family.event_prob(k)?;
    }
    let m = family.dependence_range();
    Ok(CorollaryWindow {
        i,
        window_n,
        indices,
        bound: Probability::saturating(one_minus_exp_neg(window_n as f64 / (m as f64 + 1.0))),
        window_mass,
        mass_check: window_mass >= window_n as f64 - BOUND_TOL,
    })
}

/// Summary of a family's mass, overlap and both lower bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: usize,
    pub m: usize,
    pub s_n: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_local: Option<f64>,
    pub thm1_exponent: f64,
    pub thm1_bound: Probability,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thm2_exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thm2_bound: Option<Probability>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thm2_sharper: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_union: Option<Probability>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_union: Option<McEstimate>,
}

impl BoundReport {
    /// Mass, overlap and closed-form bounds; no oracle calls beyond pair probabilities.
    pub fn new<F: EventFamily + ?Sized>(family: &F) -> Result<Self> {
        let n = family.len();
        let m = family.dependence_range();
        let s_n = family.partial_sum_s(n)?;
        let thm1 = thm1_bound(s_n, m)?;
        let (t_local, thm2_exponent, thm2, sharper) = if m >= 1 {
            let t = family.t_local()?;
            let (exponent, bound) = thm2_bound(s_n, t, m)?;
            (Some(t), Some(exponent), Some(bound), Some(thm2_sharper(s_n, t, m)?))
        } else {
            (None, None, None, None)
        };
        Ok(BoundReport {
            n,
            m,
            s_n,
            t_local,
            thm1_exponent: thm1_exponent(s_n, m),
            thm1_bound: thm1,
            thm2_exponent,
            thm2_bound: thm2,
            thm2_sharper: sharper,
            exact_union: None,
            mc_union: None,
        })
    }

    /// Adds `P(A_1 ∪ ... ∪ A_N)` from the exact oracle.
    pub fn with_exact<F: EventFamily + ?Sized>(mut self, family: &F) -> Result<Self> {
        let u = union_prob(family, Interval::new(1, family.len()))?;
        self.exact_union = Some(Probability::saturating(u));
        Ok(self)
    }

    pub fn with_mc(mut self, estimate: McEstimate) -> Self {
        self.mc_union = Some(estimate);
        self
    }

    /// Exact union minus each bound; `None` without an exact value.
    pub fn slacks(&self) -> Option<(f64, Option<f64>)> {
        let u = self.exact_union?.value();
        Some((
            u - self.thm1_bound.value(),
            self.thm2_bound.map(|b| u - b.value()),
        ))
    }
}
