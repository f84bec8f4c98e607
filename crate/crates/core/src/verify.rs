//! Exact verification of every intermediate inequality behind the bounds.
//!
//! Every check is phrased as `lhs >= rhs` and records the signed slack
//! `lhs - rhs`; equalities record `-|lhs - rhs|`. A check passes when its worst
//! slack is at least `-tol`.
//!
//! Steps:
//! * (a) events inside one residue class factorize (pairs and small subsets);
//! * (b) residue-class product-to-exponential chain and the mass pigeonhole;
//! * (c) block events of each shifted partition are 1-dependent;
//! * (d) second-order Bonferroni inside each block, and its average over shifts;
//! * (e) shift counting `m - d` for every pair, and the resulting overlap bound;
//! * (f) parity splitting, `min{e^-x, e^-y} <= e^-(x+y)/2`, and the max-over-shifts step;
//! * (g) the exact union against both closed-form bounds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{thm1_bound, thm2_bound, BOUND_TOL};
use crate::error::{Error, Result};
use crate::model::{EventFamily, Interval, Model};
use crate::oracle::{block_event_prob, complement_intersection_prob, union_prob};
use crate::partition::{pair_shift_count, residue_classes, shifted_blocks, ShiftedBlockPartition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub id: String,
    pub description: String,
    pub instances: usize,
    /// Smallest `lhs - rhs` seen; absent when nothing was evaluated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worst_slack: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worst_at: Option<String>,
    pub status: CheckStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub tol: f64,
    pub passed: bool,
    pub checks: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn new(tol: f64, checks: Vec<CheckRecord>) -> Self {
        let passed = checks.iter().all(|c| c.status != CheckStatus::Fail);
        VerificationReport {
            tol,
            passed,
            checks,
        }
    }

    pub fn check(&self, id: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }

    /// Concatenates two reports; the tolerance of `self` is kept.
    pub fn merge(mut self, other: VerificationReport) -> Self {
        self.checks.extend(other.checks);
        self.passed = self.passed && other.passed;
        self
    }
}

/// Running minimum of slacks for one check.
pub(crate) struct Tally {
    id: &'static str,
    description: String,
    instances: usize,
    worst: Option<(f64, String)>,
}

impl Tally {
    pub(crate) fn new(id: &'static str, description: impl Into<String>) -> Self {
        Tally {
            id,
            description: description.into(),
            instances: 0,
            worst: None,
        }
    }

    pub(crate) fn record(&mut self, slack: f64, at: impl FnOnce() -> String) {
        self.instances += 1;
        let worse = match &self.worst {
            None => true,
            Some((w, _)) => slack < *w || slack.is_nan(),
        };
        if worse {
            self.worst = Some((slack, at()));
        }
    }

    /// Folds in a tally covering later instances; ties keep the earlier location.
    pub(crate) fn absorb(&mut self, other: Tally) {
        self.instances += other.instances;
        if let Some((w, at)) = other.worst {
            let worse = match &self.worst {
                None => true,
                Some((mine, _)) => w < *mine || w.is_nan(),
            };
            if worse {
                self.worst = Some((w, at));
            }
        }
    }

    pub(crate) fn ge(&mut self, lhs: f64, rhs: f64, at: impl FnOnce() -> String) {
        self.record(lhs - rhs, at);
    }

    pub(crate) fn eq(&mut self, lhs: f64, rhs: f64, at: impl FnOnce() -> String) {
        self.record(-(lhs - rhs).abs(), at);
    }

    pub(crate) fn finish(self, tol: f64) -> CheckRecord {
        let status = match &self.worst {
            Some((w, _)) if w.is_nan() || *w < -tol => CheckStatus::Fail,
            _ => CheckStatus::Pass,
        };
        let (worst_slack, worst_at) = match self.worst {
            Some((w, at)) => (Some(w), Some(at)),
            None => (None, None),
        };
        CheckRecord {
            id: self.id.to_string(),
            description: self.description,
            instances: self.instances,
            worst_slack,
            worst_at,
            status,
        }
    }

    pub(crate) fn skipped(id: &'static str, description: impl Into<String>) -> CheckRecord {
        CheckRecord {
            id: id.to_string(),
            description: description.into(),
            instances: 0,
            worst_slack: None,
            worst_at: None,
            status: CheckStatus::Skipped,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProofCheckConfig {
    pub tol: f64,
    /// Largest subset of one residue class whose factorization is checked.
    pub max_subset: usize,
    /// Cap on the number of residue-class subsets examined in step (a).
    pub max_subsets_checked: usize,
}

impl Default for ProofCheckConfig {
    fn default() -> Self {
        ProofCheckConfig {
            tol: BOUND_TOL,
            max_subset: 3,
            max_subsets_checked: 5_000_000,
        }
    }
}

/// Window models: `s^(m+1) <= 2^16` and `N <= 10^4`. Explicit families: at most `2^20` outcomes.
pub const MAX_VERIFY_TABLE: usize = 1 << 16;
pub const MAX_VERIFY_HORIZON: usize = 10_000;
pub const MAX_VERIFY_OUTCOMES: usize = 1 << 20;

fn check_size(model: &Model) -> Result<()> {
    match model {
        Model::Window(w) => {
            if w.predicate_table().len() > MAX_VERIFY_TABLE {
                return Err(Error::SizeCap(format!(
                    "predicate table of {} entries exceeds {MAX_VERIFY_TABLE}",
                    w.predicate_table().len()
                )));
            }
            if w.horizon() > MAX_VERIFY_HORIZON {
                return Err(Error::SizeCap(format!(
                    "horizon {} exceeds {MAX_VERIFY_HORIZON}",
                    w.horizon()
                )));
            }
        }
        Model::Explicit(e) => {
            if e.outcomes() > MAX_VERIFY_OUTCOMES {
                return Err(Error::SizeCap(format!(
                    "{} outcomes exceed {MAX_VERIFY_OUTCOMES}",
                    e.outcomes()
                )));
            }
        }
    }
    Ok(())
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Calls `f` on every `size`-subset of `items` (as index positions into `items`), in lexicographic order.
pub(crate) fn for_each_combination(len: usize, size: usize, mut f: impl FnMut(&[usize])) {
    if size == 0 || size > len {
        return;
    }
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        f(&idx);
        let mut i = size;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] < len - size + i {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for t in i + 1..size {
            idx[t] = idx[t - 1] + 1;
        }
    }
}

fn fmt_set(items: &[usize]) -> String {
    let body: Vec<String> = items.iter().map(usize::to_string).collect();
    format!("{{{}}}", body.join(","))
}

/// Runs steps (a) through (g) with exact oracles.
pub fn verify_proof_steps(model: &Model, config: &ProofCheckConfig) -> Result<VerificationReport> {
    check_size(model)?;
    verify_family(model, config)
}

/// [`verify_proof_steps`] without the model-size guard.
pub fn verify_family<F: EventFamily + ?Sized>(
    family: &F,
    config: &ProofCheckConfig,
) -> Result<VerificationReport> {
    let tol = config.tol;
    let n = family.len();
    let m = family.dependence_range();
    let probs: Vec<f64> = (1..=n)
        .map(|k| family.event_prob(k))
        .collect::<Result<_>>()?;
    let s_n: f64 = probs.iter().sum();
    let p = |k: usize| probs[k - 1];

    let none_fire = 1.0 - union_prob(family, Interval::new(1, n))?;
    let union = union_prob(family, Interval::new(1, n))?;

    let mut checks = Vec::new();
    let residues = residue_classes(n, m);

    // (a)
    let subset_count: u128 = residues
        .classes
        .iter()
        .map(|c| (2..=config.max_subset).map(|k| binomial(c.len(), k)).sum::<u128>())
        .sum();
    if subset_count > config.max_subsets_checked as u128 {
        return Err(Error::SizeCap(format!(
            "{subset_count} residue-class subsets exceed the cap {}",
            config.max_subsets_checked
        )));
    }
    let mut a = Tally::new(
        "a.residue_independence",
        format!(
            "P(∩ A_k^c) = Π (1 - P(A_k)) over subsets of size 2..={} of each residue class",
            config.max_subset
        ),
    );
    for (r, class) in residues.classes.iter().enumerate() {
        let mut subsets: Vec<Vec<usize>> = Vec::new();
        for size in 2..=config.max_subset {
            for_each_combination(class.len(), size, |pos| {
                subsets.push(pos.iter().map(|&q| class[q]).collect());
            });
        }
        let results: Vec<Result<(f64, f64)>> = subsets
            .par_iter()
            .map(|set| {
                let joint = complement_intersection_prob(family, set)?;
                let product: f64 = set.iter().map(|&k| 1.0 - p(k)).product();
                Ok((joint, product))
            })
            .collect();
        for (set, res) in subsets.iter().zip(results) {
            let (joint, product) = res?;
            a.eq(joint, product, || format!("J_{} subset {}", r + 1, fmt_set(set)));
        }
    }
    checks.push(a.finish(tol));

    // (b)
    let mut b_prod = Tally::new(
        "b.class_product",
        "Π_{J_r} (1 - P(A_k)) >= P(∩_{J_r} A_k^c)",
    );
    let mut b_exp = Tally::new(
        "b.product_to_exponential",
        "exp(-Σ_{J_r} P(A_k)) >= Π_{J_r} (1 - P(A_k))",
    );
    let mut b_min = Tally::new(
        "b.min_over_classes",
        "min_r P(∩_{J_r} A_k^c) >= P(∩_{k<=N} A_k^c)",
    );
    let mut b_pigeon = Tally::new(
        "b.mass_pigeonhole",
        "max_r Σ_{J_r} P(A_k) >= S_N / (m+1)",
    );
    let mut min_class = 1.0f64;
    let mut max_mass = 0.0f64;
    for (r, class) in residues.classes.iter().enumerate() {
        let joint = complement_intersection_prob(family, class)?;
        let product: f64 = class.iter().map(|&k| 1.0 - p(k)).product();
        let mass: f64 = class.iter().map(|&k| p(k)).sum();
        b_prod.ge(product, joint, || format!("J_{}", r + 1));
        b_exp.ge((-mass).exp(), product, || format!("J_{}", r + 1));
        min_class = min_class.min(joint);
        max_mass = max_mass.max(mass);
    }
    b_min.ge(min_class, none_fire, || "all classes".into());
    b_pigeon.ge(max_mass, s_n / (m as f64 + 1.0), || "all classes".into());
    checks.extend([
        b_prod.finish(tol),
        b_exp.finish(tol),
        b_min.finish(tol),
        b_pigeon.finish(tol),
    ]);

    let ids_cf = [
        ("c.block_one_dependence", "P(B_j^c ∩ B_j'^c) = P(B_j^c) P(B_j'^c) for |j - j'| >= 2"),
        ("d.block_bonferroni", "P(B_j) >= Σ_{I_j} P(A_i) - Σ_{pairs in I_j} P(A_i ∩ A_l)"),
        ("d.shift_average", "(1/m) Σ_r X_r >= S_N - (1/m) Σ_r Σ_j Σ_{pairs in I_j} P(A_i ∩ A_l)"),
        ("e.pair_shift_count", "#{r : i, l share a block} = max(m - (l - i), 0)"),
        ("e.overlap_average", "T_{m-1} >= (1/m) Σ_r Σ_j Σ_{pairs in I_j} P(A_i ∩ A_l)"),
        ("e.block_sum_lower_bound", "(1/m) Σ_r X_r >= S_N - T_{m-1}"),
        ("f.parity_factorization", "P(∩_{j in parity} B_j^c) = Π_{j in parity} (1 - P(B_j))"),
        ("f.parity_bound", "min(Π_odd, Π_even) >= P(∩ A_k^c)"),
        ("f.parity_exponential", "exp(-X_parity) >= Π_{j in parity} (1 - P(B_j))"),
        ("f.min_average", "exp(-X_r / 2) >= min(exp(-X_odd), exp(-X_even))"),
        ("f.per_shift_bound", "P(∪ A_k) >= 1 - exp(-X_r / 2)"),
        ("f.max_over_shifts", "1 - exp(-max_r X_r / 2) >= 1 - exp(-(1/m) Σ_r X_r / 2)"),
    ];

    if m == 0 {
        checks.extend(
            ids_cf
                .iter()
                .map(|(id, desc)| Tally::skipped(id, format!("{desc} (needs m >= 1)"))),
        );
    } else {
        checks.extend(shifted_block_checks(family, &probs, none_fire, union, tol)?);
    }

    // (g)
    let mut g1 = Tally::new("g.thm1_bound", "P(∪ A_k) >= 1 - exp(-S_N / (m+1))");
    g1.ge(union, thm1_bound(s_n, m)?.value(), || format!("N = {n}, m = {m}"));
    checks.push(g1.finish(tol));
    if m >= 1 {
        let t = family.t_local()?;
        let (_, bound) = thm2_bound(s_n, t, m)?;
        let mut g2 = Tally::new("g.thm2_bound", "P(∪ A_k) >= 1 - exp(-(S_N - T_{m-1}) / 2)");
        g2.ge(union, bound.value(), || format!("N = {n}, m = {m}"));
        checks.push(g2.finish(tol));
    } else {
        checks.push(Tally::skipped(
            "g.thm2_bound",
            "local-intersection bound (needs m >= 1)",
        ));
    }

    Ok(VerificationReport::new(tol, checks))
}

fn shifted_block_checks<F: EventFamily + ?Sized>(
    family: &F,
    probs: &[f64],
    none_fire: f64,
    union: f64,
    tol: f64,
) -> Result<Vec<CheckRecord>> {
    let n = family.len();
    let m = family.dependence_range();
    let s_n: f64 = probs.iter().sum();
    let p = |k: usize| probs[k - 1];
    let mf = m as f64;

    let mut c = Tally::new(
        "c.block_one_dependence",
        "P(B_j^c ∩ B_j'^c) = P(B_j^c) P(B_j'^c) for |j - j'| >= 2",
    );
    let mut d = Tally::new(
        "d.block_bonferroni",
        "P(B_j) >= Σ_{I_j} P(A_i) - Σ_{pairs in I_j} P(A_i ∩ A_l)",
    );
    let mut d_avg = Tally::new(
        "d.shift_average",
        "(1/m) Σ_r X_r >= S_N - (1/m) Σ_r Σ_j Σ_{pairs in I_j} P(A_i ∩ A_l)",
    );
    let mut e = Tally::new(
        "e.pair_shift_count",
        "#{r : i, l share a block} = max(m - (l - i), 0)",
    );
    let mut e_avg = Tally::new(
        "e.overlap_average",
        "T_{m-1} >= (1/m) Σ_r Σ_j Σ_{pairs in I_j} P(A_i ∩ A_l)",
    );
    let mut e_lb = Tally::new("e.block_sum_lower_bound", "(1/m) Σ_r X_r >= S_N - T_{m-1}");
    let mut f_fact = Tally::new(
        "f.parity_factorization",
        "P(∩_{j in parity} B_j^c) = Π_{j in parity} (1 - P(B_j))",
    );
    let mut f_par = Tally::new("f.parity_bound", "min(Π_odd, Π_even) >= P(∩ A_k^c)");
    let mut f_exp = Tally::new(
        "f.parity_exponential",
        "exp(-X_parity) >= Π_{j in parity} (1 - P(B_j))",
    );
    let mut f_min = Tally::new(
        "f.min_average",
        "exp(-X_r / 2) >= min(exp(-X_odd), exp(-X_even))",
    );
    let mut f_shift = Tally::new("f.per_shift_bound", "P(∪ A_k) >= 1 - exp(-X_r / 2)");
    let mut f_max = Tally::new(
        "f.max_over_shifts",
        "1 - exp(-max_r X_r / 2) >= 1 - exp(-(1/m) Σ_r X_r / 2)",
    );

    // Pair probabilities at gap < m, keyed by (i, gap).
    let mut local_pairs = vec![0.0; n * m.max(1)];
    for i in 1..=n {
        for gap in 1..m {
            if i + gap <= n {
                local_pairs[(i - 1) * m + gap] = family.pair_prob(i, i + gap)?;
            }
        }
    }
    let pair = |i: usize, l: usize| local_pairs[(i - 1) * m + (l - i)];
    let t_local: f64 = (1..=n)
        .flat_map(|i| (1..m).filter(move |g| i + g <= n).map(move |g| (i, i + g)))
        .map(|(i, l)| pair(i, l))
        .sum();

    let partitions: Vec<ShiftedBlockPartition> = (0..m)
        .map(|r| shifted_blocks(n, m, r))
        .collect::<Result<_>>()?;

    let mut x_sum = 0.0;
    let mut x_max = 0.0f64;
    let mut in_block_overlap_sum = 0.0;
    for part in &partitions {
        let r = part.shift;
        let block_probs: Vec<f64> = part
            .blocks
            .iter()
            .map(|b| block_event_prob(family, b.indices))
            .collect::<Result<_>>()?;

        // (c)
        let far_pairs: Vec<(usize, usize)> = (0..part.blocks.len())
            .flat_map(|a| (a + 1..part.blocks.len()).map(move |b| (a, b)))
            .filter(|&(a, b)| part.blocks[b].j >= part.blocks[a].j + 2)
            .collect();
        let joint: Vec<Result<f64>> = far_pairs
            .par_iter()
            .map(|&(a, b)| {
                let idx: Vec<usize> = part.blocks[a]
                    .indices
                    .iter()
                    .chain(part.blocks[b].indices.iter())
                    .collect();
                complement_intersection_prob(family, &idx)
            })
            .collect();
        for (&(a, b), q) in far_pairs.iter().zip(joint) {
            let q = q?;
            c.eq(q, (1.0 - block_probs[a]) * (1.0 - block_probs[b]), || {
                format!("r = {r}, blocks j = {}, {}", part.blocks[a].j, part.blocks[b].j)
            });
        }

        // (d)
        let mut x_r = 0.0;
        let mut overlap_r = 0.0;
        for (block, &pb) in part.blocks.iter().zip(&block_probs) {
            let mass: f64 = block.indices.iter().map(p).sum();
            let mut overlap = 0.0;
            for i in block.indices.iter() {
                for l in (i + 1)..=block.indices.last {
                    overlap += pair(i, l);
                }
            }
            d.ge(pb, mass - overlap, || {
                format!(
                    "r = {r}, block j = {} [{}, {}]",
                    block.j, block.indices.first, block.indices.last
                )
            });
            x_r += pb;
            overlap_r += overlap;
        }
        x_sum += x_r;
        x_max = x_max.max(x_r);
        in_block_overlap_sum += overlap_r;

        // (f)
        let mut parity_x = [0.0f64; 2];
        let mut parity_prod = [1.0f64; 2];
        let mut parity_idx: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
        for (block, &pb) in part.blocks.iter().zip(&block_probs) {
            let side = block.j % 2;
            parity_x[side] += pb;
            parity_prod[side] *= 1.0 - pb;
            parity_idx[side].extend(block.indices.iter());
        }
        for side in 0..2 {
            let name = if side == 0 { "even" } else { "odd" };
            let joint = complement_intersection_prob(family, &parity_idx[side])?;
            f_fact.eq(joint, parity_prod[side], || format!("r = {r}, {name} blocks"));
            f_exp.ge((-parity_x[side]).exp(), parity_prod[side], || {
                format!("r = {r}, {name} blocks")
            });
        }
        f_par.ge(parity_prod[0].min(parity_prod[1]), none_fire, || {
            format!("r = {r}")
        });
        f_min.ge(
            (-x_r / 2.0).exp(),
            (-parity_x[0]).exp().min((-parity_x[1]).exp()),
            || format!("r = {r}"),
        );
        f_shift.ge(union, -(-x_r / 2.0).exp_m1(), || format!("r = {r}"));
    }

    let x_avg = x_sum / mf;
    let overlap_avg = in_block_overlap_sum / mf;
    d_avg.ge(x_avg, s_n - overlap_avg, || "all shifts".into());
    e_avg.ge(t_local, overlap_avg, || "all shifts".into());
    e_lb.ge(x_avg, s_n - t_local, || "all shifts".into());
    f_max.ge(-(-x_max / 2.0).exp_m1(), -(-x_avg / 2.0).exp_m1(), || {
        "all shifts".into()
    });

    // (e): membership lookups per shift.
    let membership: Vec<Vec<usize>> = partitions
        .iter()
        .map(|part| {
            let mut of = vec![usize::MAX; n + 1];
            for block in &part.blocks {
                for k in block.indices.iter() {
                    of[k] = block.j;
                }
            }
            of
        })
        .collect();
    for i in 1..=n {
        for l in (i + 1)..=n {
            let count = membership.iter().filter(|of| of[i] == of[l]).count();
            let expected = pair_shift_count(i, l, m)?;
            e.eq(count as f64, expected as f64, || format!("pair ({i}, {l})"));
        }
    }

    Ok(vec![
        c.finish(tol),
        d.finish(tol),
        d_avg.finish(tol),
        e.finish(0.0),
        e_avg.finish(tol),
        e_lb.finish(tol),
        f_fact.finish(tol),
        f_par.finish(tol),
        f_exp.finish(tol),
        f_min.finish(tol),
        f_shift.finish(tol),
        f_max.finish(tol),
    ])
}
