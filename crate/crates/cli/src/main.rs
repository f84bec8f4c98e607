mod output;
mod sweep;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use mdep_core::dependence::{DEFAULT_MAX_SUBSET, DEFAULT_TOL};
use mdep_core::{
    build_phi, check_m_dependence, corollary_window, estimate_union, union_prob,
    verify_proof_steps, BoundReport, CorollaryWindow, EventFamily, Interval, McEstimate, Model,
    Probability, ProofCheckConfig, WindowModel,
};
use serde::Serialize;

use crate::output::Output;

/// Lower bounds, exact oracles and Monte Carlo estimates for unions of m-dependent events.
#[derive(Parser, Debug)]
#[command(name = "mdep", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct McFlag {
    /// Add a Monte Carlo estimate over all N events (window models only)
    #[arg(long = "mc", num_args = 2, value_names = ["TRIALS", "SEED"])]
    mc: Option<Vec<u64>>,
}

impl McFlag {
    fn get(&self) -> Option<(u64, u64)> {
        self.mc.as_ref().map(|v| (v[0], v[1]))
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// S_N, T_{m-1}, both bounds and the comparison verdict
    Report {
        model: PathBuf,
        /// Add the exact union probability
        #[arg(long)]
        exact: bool,
        #[command(flatten)]
        mc: McFlag,
        #[command(flatten)]
        out: Output,
    },
    /// Numerically check every inequality behind the bounds, plus the dependence range
    Verify {
        model: PathBuf,
        /// Largest |I| + |J| in the dependence check
        #[arg(long, default_value_t = DEFAULT_MAX_SUBSET)]
        max_subset: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[command(flatten)]
        out: Output,
    },
    /// One CSV row per value of a swept parameter: horizon, m, or p<symbol>
    Sweep {
        template: PathBuf,
        /// PARAM=START..END[:STEP], e.g. horizon=8..64 or p1=0.1..0.9:0.1
        spec: String,
        #[arg(long)]
        exact: bool,
        #[command(flatten)]
        mc: McFlag,
        #[command(flatten)]
        out: Output,
    },
    /// Finite-window bound over {i+1, ..., φ(i + window_n)}
    Window {
        model: PathBuf,
        i: usize,
        window_n: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Monte Carlo estimate of the union over a range of events
    Mc {
        model: PathBuf,
        trials: u64,
        seed: u64,
        /// First and last event index (default: all)
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        range: Option<Vec<usize>>,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Serialize)]
struct WindowReport {
    #[serde(flatten)]
    window: CorollaryWindow,
    exact_union: Probability,
}

#[derive(Serialize)]
struct McReport {
    range: Interval,
    #[serde(flatten)]
    estimate: McEstimate,
}

fn load(path: &Path) -> Result<Model> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Model::from_json(&text).with_context(|| format!("{}", path.display()))
}

fn window_only<'a>(model: &'a Model, what: &str) -> Result<&'a WindowModel> {
    match model {
        Model::Window(w) => Ok(w),
        Model::Explicit(_) => bail!("{what} needs a window model; explicit families are exact"),
    }
}

fn full_range(family: &dyn EventFamily) -> Interval {
    Interval::new(1, family.len())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Report {
            model,
            exact,
            mc,
            out,
        } => {
            let model = load(&model)?;
            let mut report = BoundReport::new(&model)?;
            if exact {
                report = report.with_exact(&model)?;
            }
            if let Some((trials, seed)) = mc.get() {
                let w = window_only(&model, "--mc")?;
                report = report.with_mc(estimate_union(w, full_range(w), trials, seed)?);
            }
            out.json(&report)?;
        }
        Command::Verify {
            model,
            max_subset,
            tol,
            out,
        } => {
            let model = load(&model)?;
            let config = ProofCheckConfig {
                tol,
                ..ProofCheckConfig::default()
            };
            let steps = verify_proof_steps(&model, &config)?;
            let dependence =
                check_m_dependence(&model, model.dependence_range(), max_subset, tol)?;
            let report = steps.merge(dependence);
            out.json(&report)?;
            if !report.passed {
                for check in report.failures() {
                    eprintln!(
                        "FAIL {}: {} (worst slack {:e} at {})",
                        check.id,
                        check.description,
                        check.worst_slack.unwrap_or(f64::NAN),
                        check.worst_at.as_deref().unwrap_or("?")
                    );
                }
                return Ok(ExitCode::from(1));
            }
        }
        Command::Sweep {
            template,
            spec,
            exact,
            mc,
            out,
        } => {
            let model = load(&template)?;
            let template = window_only(&model, "sweep")?;
            let spec: sweep::SweepSpec = spec.parse()?;
            let rows = sweep::run(template, &spec, exact, mc.get())?;
            out.csv(&sweep::HEADER, &rows)?;
        }
        Command::Window {
            model,
            i,
            window_n,
            out,
        } => {
            let model = load(&model)?;
            let phi = build_phi(&model)?;
            let window = corollary_window(&model, &phi, i, window_n)?;
            let exact = union_prob(&model, window.indices)?;
            out.json(&WindowReport {
                window,
                exact_union: Probability::saturating(exact),
            })?;
        }
        Command::Mc {
            model,
            trials,
            seed,
            range,
            out,
        } => {
            let model = load(&model)?;
            let w = window_only(&model, "mc")?;
            let range = match range {
                Some(r) => Interval::new(r[0], r[1]),
                None => full_range(w),
            };
            let estimate = estimate_union(w, range, trials, seed)?;
            out.json(&McReport { range, estimate })?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
