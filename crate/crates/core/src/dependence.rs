//! Exact validation of a claimed dependence range.
//!
//! For index sets `I`, `J` with `dist(I, J) > m` and `|I| + |J| <= max_subset`,
//! every atom `E_I` of the algebra generated by `{A_i : i in I}` and every atom
//! `E_J` must satisfy `P(E_I ∩ E_J) = P(E_I) P(E_J)`. Atoms are sign patterns
//! (each event or its complement). For each union `K = I ∪ J` the `2^|K|` joint
//! atoms are computed once and the marginals are their partial sums.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{EventFamily, Model};
use crate::verify::{binomial, for_each_combination, CheckRecord, Tally, VerificationReport};

pub const DEFAULT_MAX_SUBSET: usize = 4;
pub const DEFAULT_TOL: f64 = 1e-9;

/// Cap on the number of candidate sets `K` examined.
pub const MAX_DEPENDENCE_SETS: u128 = 2_000_000;

/// Largest `max_subset` accepted (atoms per set grow as `2^max_subset`).
pub const MAX_SUBSET_LIMIT: usize = 12;

/// Checks the claimed range `m` of `model`, adding a structural certificate for window models.
pub fn check_m_dependence(
    model: &Model,
    m: usize,
    max_subset: usize,
    tol: f64,
) -> Result<VerificationReport> {
    let mut checks = Vec::new();
    if let Model::Window(w) = model {
        let window_m = w.window_len() - 1;
        let mut structural = Tally::new(
            "dep.structural",
            format!(
                "window model: events more than {window_m} apart read disjoint symbols"
            ),
        );
        // Slack m - window_m: nonnegative iff the construction certifies range m.
        structural.ge(m as f64, window_m as f64, || {
            format!("claimed m = {m}, window m = {window_m}")
        });
        checks.push(structural.finish(0.0));
    }
    let numeric = check_family(model, m, max_subset, tol)?;
    checks.extend(numeric);
    Ok(VerificationReport::new(tol, checks))
}

/// Numerical atom-factorization check for any family.
pub fn check_family<F: EventFamily + ?Sized>(
    family: &F,
    m: usize,
    max_subset: usize,
    tol: f64,
) -> Result<Vec<CheckRecord>> {
    if max_subset < 2 {
        return Err(Error::InvalidArgument(format!(
            "max_subset must be at least 2, got {max_subset}"
        )));
    }
    if max_subset > MAX_SUBSET_LIMIT {
        return Err(Error::SizeCap(format!(
            "max_subset {max_subset} exceeds {MAX_SUBSET_LIMIT}"
        )));
    }
    let n = family.len();
    let sets: u128 = (2..=max_subset).map(|k| binomial(n, k)).sum();
    if sets > MAX_DEPENDENCE_SETS {
        return Err(Error::SizeCap(format!(
            "{sets} index sets of size 2..={max_subset} among {n} events exceed {MAX_DEPENDENCE_SETS}; lower max_subset"
        )));
    }

    // Work is split by the smallest index of K; results are merged in index order.
    let per_first: Vec<Result<Tally>> = (1..=n)
        .into_par_iter()
        .map(|first| {
            let mut tally = Tally::new(
                "dep.atom_factorization",
                format!(
                    "P(E_I ∩ E_J) = P(E_I) P(E_J) for dist(I, J) > {m}, |I| + |J| <= {max_subset}"
                ),
            );
            let rest: Vec<usize> = ((first + 1)..=n).collect();
            for extra in 1..max_subset {
                let mut err = None;
                for_each_combination(rest.len(), extra, |pos| {
                    if err.is_some() {
                        return;
                    }
                    let mut set = Vec::with_capacity(extra + 1);
                    set.push(first);
                    set.extend(pos.iter().map(|&q| rest[q]));
                    if let Err(e) = check_set(family, &set, m, &mut tally) {
                        err = Some(e);
                    }
                });
                if let Some(e) = err {
                    return Err(e);
                }
            }
            Ok(tally)
        })
        .collect();

    let mut merged = Tally::new(
        "dep.atom_factorization",
        format!("P(E_I ∩ E_J) = P(E_I) P(E_J) for dist(I, J) > {m}, |I| + |J| <= {max_subset}"),
    );
    for tally in per_first {
        merged.absorb(tally?);
    }
    Ok(vec![merged.finish(tol)])
}

/// Splits of `set` into `(I, J)` with `set[0] in I` and `dist(I, J) > m`, as bit masks for `I`.
fn qualifying_splits(set: &[usize], m: usize) -> Vec<u32> {
    let size = set.len();
    let full = (1u32 << size) - 1;
    (1..full)
        .filter(|mask| mask & 1 == 1)
        .filter(|&mask| {
            let mut dist = usize::MAX;
            for a in 0..size {
                if mask >> a & 1 == 0 {
                    continue;
                }
                for b in 0..size {
                    if mask >> b & 1 == 1 {
                        continue;
                    }
                    dist = dist.min(set[a].abs_diff(set[b]));
                }
            }
            dist > m
        })
        .collect()
}

fn check_set<F: EventFamily + ?Sized>(
    family: &F,
    set: &[usize],
    m: usize,
    tally: &mut Tally,
) -> Result<()> {
    if set[set.len() - 1] - set[0] <= m {
        return Ok(());
    }
    let splits = qualifying_splits(set, m);
    if splits.is_empty() {
        return Ok(());
    }
    let size = set.len();
    // joint[sigma]: bit a of sigma says whether A_{set[a]} occurs.
    let mut joint = vec![0.0; 1 << size];
    let mut pattern = vec![(0usize, false); size];
    for (sigma, slot) in joint.iter_mut().enumerate() {
        for (a, entry) in pattern.iter_mut().enumerate() {
            *entry = (set[a], sigma >> a & 1 == 1);
        }
        *slot = family.pattern_prob(&pattern)?;
    }
    let full = (1usize << size) - 1;
    for mask in splits {
        let mask = mask as usize;
        let mut marginal_i = vec![0.0; 1 << size];
        let mut marginal_j = vec![0.0; 1 << size];
        for (sigma, &q) in joint.iter().enumerate() {
            marginal_i[sigma & mask] += q;
            marginal_j[sigma & !mask & full] += q;
        }
        for (sigma, &q) in joint.iter().enumerate() {
            let product = marginal_i[sigma & mask] * marginal_j[sigma & !mask & full];
            tally.eq(q, product, || describe(set, mask, sigma));
        }
    }
    Ok(())
}

fn describe(set: &[usize], mask: usize, sigma: usize) -> String {
    let side = |want: bool| -> String {
        let items: Vec<String> = set
            .iter()
            .enumerate()
            .filter(|(a, _)| (mask >> a & 1 == 1) == want)
            .map(|(a, k)| {
                if sigma >> a & 1 == 1 {
                    format!("A{k}")
                } else {
                    format!("A{k}^c")
                }
            })
            .collect();
        items.join(" ∩ ")
    };
    format!("I-atom {} | J-atom {}", side(true), side(false))
}
