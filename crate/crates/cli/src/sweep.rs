use std::str::FromStr;

use anyhow::{anyhow, bail, ensure, Context, Result};
use mdep_core::{estimate_union, BoundReport, EventFamily, Interval, WindowModel};

use crate::output::round;

pub const HEADER: [&str; 12] = [
    "param",
    "n",
    "m",
    "s_n",
    "t_local",
    "thm1_bound",
    "thm2_bound",
    "thm2_sharper",
    "exact_union",
    "mc_estimate",
    "mc_ci_low",
    "mc_ci_high",
];

/// Real ranges without an explicit step use this one.
const DEFAULT_REAL_STEP: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub enum Param {
    Horizon,
    M,
    /// Probability of the given symbol; the others keep their proportions.
    Prob(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Points {
    Int(Vec<usize>),
    Real(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: Param,
    pub points: Points,
}

impl FromStr for SweepSpec {
    type Err = anyhow::Error;

    fn from_str(text: &str) -> Result<Self> {
        let (name, range) = text
            .split_once('=')
            .ok_or_else(|| anyhow!("sweep spec `{text}` is not PARAM=START..END[:STEP]"))?;
        let (bounds, step) = match range.split_once(':') {
            Some((b, s)) => (b, Some(s)),
            None => (range, None),
        };
        let (start, end) = bounds
            .split_once("..")
            .ok_or_else(|| anyhow!("sweep range `{range}` is not START..END[:STEP]"))?;
        let param = match name.trim() {
            "horizon" => Param::Horizon,
            "m" => Param::M,
            p if p.starts_with('p') => Param::Prob(
                p[1..]
                    .parse()
                    .map_err(|_| anyhow!("`{p}` is not p<symbol>, e.g. p1"))?,
            ),
            other => bail!("unknown sweep parameter `{other}`; expected horizon, m or p<symbol>"),
        };
        let points = match param {
            Param::Horizon | Param::M => {
                let parse = |s: &str| -> Result<usize> {
                    s.trim()
                        .parse()
                        .with_context(|| format!("`{s}` is not a nonnegative integer"))
                };
                let (start, end) = (parse(start)?, parse(end)?);
                let step = step.map(parse).transpose()?.unwrap_or(1);
                ensure!(step >= 1, "sweep step must be positive");
                Points::Int(if start > end {
                    Vec::new()
                } else {
                    (start..=end).step_by(step).collect()
                })
            }
            Param::Prob(_) => {
                let parse = |s: &str| -> Result<f64> {
                    let x: f64 = s
                        .trim()
                        .parse()
                        .with_context(|| format!("`{s}` is not a number"))?;
                    ensure!(x.is_finite(), "`{s}` is not finite");
                    Ok(x)
                };
                let (start, end) = (parse(start)?, parse(end)?);
                let step = step.map(parse).transpose()?.unwrap_or(DEFAULT_REAL_STEP);
                ensure!(step > 0.0, "sweep step must be positive");
                let count = if end < start {
                    0
                } else {
                    ((end - start) / step + 1e-9).floor() as usize + 1
                };
                Points::Real((0..count).map(|k| round(start + k as f64 * step)).collect())
            }
        };
        Ok(SweepSpec { param, points })
    }
}

/// The symbol `c` if `table` fires exactly on the all-`c` window.
fn run_symbol(model: &WindowModel) -> Option<usize> {
    let s = model.alphabet_size();
    let len = model.predicate_table().len();
    let repunit = (len - 1) / (s - 1);
    let mut fired = model
        .predicate_table()
        .iter()
        .enumerate()
        .filter(|(_, &f)| f)
        .map(|(code, _)| code);
    match (fired.next(), fired.next()) {
        (Some(code), None) if code % repunit == 0 => Some(code / repunit),
        _ => None,
    }
}

fn with_prob(model: &WindowModel, symbol: usize, p: f64) -> Result<WindowModel> {
    let s = model.alphabet_size();
    ensure!(symbol < s, "symbol {symbol} is outside the alphabet 0..{s}");
    ensure!((0.0..=1.0).contains(&p), "probability {p} is outside [0, 1]");
    let old = model.symbol_dist();
    let rest: f64 = old
        .iter()
        .enumerate()
        .filter(|&(x, _)| x != symbol)
        .map(|(_, &q)| q)
        .sum();
    let dist: Vec<f64> = old
        .iter()
        .enumerate()
        .map(|(x, &q)| {
            if x == symbol {
                p
            } else if rest > 0.0 {
                q / rest * (1.0 - p)
            } else {
                (1.0 - p) / (s - 1) as f64
            }
        })
        .collect();
    Ok(WindowModel::new(
        s,
        dist,
        model.window_len() - 1,
        model.predicate_table().to_vec(),
        model.horizon(),
    )?)
}

fn number(x: f64) -> String {
    round(x).to_string()
}

fn row(
    param: String,
    model: &WindowModel,
    exact: bool,
    mc: Option<(u64, u64)>,
) -> Result<Vec<String>> {
    let mut report = BoundReport::new(model)?;
    if exact {
        report = report.with_exact(model)?;
    }
    if let Some((trials, seed)) = mc {
        report = report.with_mc(estimate_union(
            model,
            Interval::new(1, model.len()),
            trials,
            seed,
        )?);
    }
    let opt = |x: Option<f64>| x.map(number).unwrap_or_default();
    Ok(vec![
        param,
        report.n.to_string(),
        report.m.to_string(),
        number(report.s_n),
        opt(report.t_local),
        number(report.thm1_bound.value()),
        opt(report.thm2_bound.map(|b| b.value())),
        report.thm2_sharper.map(|b| b.to_string()).unwrap_or_default(),
        opt(report.exact_union.map(|u| u.value())),
        opt(report.mc_union.map(|e| e.estimate.value())),
        opt(report.mc_union.map(|e| e.ci_low.value())),
        opt(report.mc_union.map(|e| e.ci_high.value())),
    ])
}

/// Evaluates every sweep point in order.
pub fn run(
    template: &WindowModel,
    spec: &SweepSpec,
    exact: bool,
    mc: Option<(u64, u64)>,
) -> Result<Vec<Vec<String>>> {
    match (&spec.param, &spec.points) {
        (Param::Horizon, Points::Int(points)) => points
            .iter()
            .map(|&h| row(h.to_string(), &template.with_horizon(h), exact, mc))
            .collect(),
        (Param::M, Points::Int(points)) => {
            if points.is_empty() {
                return Ok(Vec::new());
            }
            let symbol = run_symbol(template).ok_or_else(|| {
                anyhow!("sweeping m needs a template whose predicate is a run of one symbol")
            })?;
            points
                .iter()
                .map(|&m| {
                    let model = WindowModel::run(
                        template.alphabet_size(),
                        template.symbol_dist().to_vec(),
                        m,
                        symbol,
                        template.horizon(),
                    )
                    .with_context(|| format!("m = {m}"))?;
                    row(m.to_string(), &model, exact, mc)
                })
                .collect()
        }
        (Param::Prob(symbol), Points::Real(points)) => points
            .iter()
            .map(|&p| {
                let model = with_prob(template, *symbol, p).with_context(|| format!("p{symbol} = {p}"))?;
                row(number(p), &model, exact, mc)
            })
            .collect(),
        _ => unreachable!("parser pairs integer params with integer points"),
    }
}
