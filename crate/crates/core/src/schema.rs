//! JSON model files.
//!
//! ```json
//! {"type":"explicit","m":1,"outcome_weights":[0.25,0.25,0.25,0.25],"events":[[0,1],[1,2]]}
//! {"type":"window","m":2,"alphabet_size":2,"symbol_dist":[0.5,0.5],
//!  "predicate_table":[false,false,false,false,false,false,false,true],"horizon":24}
//! ```
//!
//! `predicate_table[x_0 + x_1 s + ... + x_m s^m]` is the predicate on the window
//! whose earliest symbol is `x_0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ExplicitEventFamily, Model, WindowModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", try_from = "RawSpec")]
pub enum ModelSpec {
    Explicit {
        m: usize,
        outcome_weights: Vec<f64>,
        events: Vec<Vec<usize>>,
    },
    Window {
        m: usize,
        alphabet_size: usize,
        symbol_dist: Vec<f64>,
        predicate_table: Vec<bool>,
        horizon: usize,
    },
}

/// Flat view of either kind. Deserializing a plain struct keeps serde_json's
/// line and column information on type errors.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    #[serde(rename = "type")]
    kind: String,
    m: usize,
    outcome_weights: Option<Vec<f64>>,
    events: Option<Vec<Vec<usize>>>,
    alphabet_size: Option<usize>,
    symbol_dist: Option<Vec<f64>>,
    predicate_table: Option<Vec<bool>>,
    horizon: Option<usize>,
}

fn required<T>(value: Option<T>, kind: &str, field: &str) -> std::result::Result<T, String> {
    value.ok_or_else(|| format!("missing field `{field}` for a {kind} model"))
}

fn forbid<T>(value: &Option<T>, kind: &str, field: &str) -> std::result::Result<(), String> {
    match value {
        Some(_) => Err(format!("field `{field}` is not allowed in a {kind} model")),
        None => Ok(()),
    }
}

impl TryFrom<RawSpec> for ModelSpec {
    type Error = String;

    fn try_from(raw: RawSpec) -> std::result::Result<Self, String> {
        match raw.kind.as_str() {
            "explicit" => {
                forbid(&raw.alphabet_size, "explicit", "alphabet_size")?;
                forbid(&raw.symbol_dist, "explicit", "symbol_dist")?;
                forbid(&raw.predicate_table, "explicit", "predicate_table")?;
                forbid(&raw.horizon, "explicit", "horizon")?;
                Ok(ModelSpec::Explicit {
                    m: raw.m,
                    outcome_weights: required(raw.outcome_weights, "explicit", "outcome_weights")?,
                    events: required(raw.events, "explicit", "events")?,
                })
            }
            "window" => {
                forbid(&raw.outcome_weights, "window", "outcome_weights")?;
                forbid(&raw.events, "window", "events")?;
                Ok(ModelSpec::Window {
                    m: raw.m,
                    alphabet_size: required(raw.alphabet_size, "window", "alphabet_size")?,
                    symbol_dist: required(raw.symbol_dist, "window", "symbol_dist")?,
                    predicate_table: required(raw.predicate_table, "window", "predicate_table")?,
                    horizon: required(raw.horizon, "window", "horizon")?,
                })
            }
            other => Err(format!(
                "unknown model type `{other}`, expected `explicit` or `window`"
            )),
        }
    }
}

impl ModelSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidModel(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model spec serializes")
    }

    pub fn build(&self) -> Result<Model> {
        Ok(match self.clone() {
            ModelSpec::Explicit {
                m,
                outcome_weights,
                events,
            } => Model::Explicit(ExplicitEventFamily::new(outcome_weights, events, m)?),
            ModelSpec::Window {
                m,
                alphabet_size,
                symbol_dist,
                predicate_table,
                horizon,
            } => Model::Window(WindowModel::new(
                alphabet_size,
                symbol_dist,
                m,
                predicate_table,
                horizon,
            )?),
        })
    }
}

impl From<&Model> for ModelSpec {
    fn from(model: &Model) -> Self {
        match model {
            Model::Explicit(f) => ModelSpec::Explicit {
                m: f.claimed_range(),
                outcome_weights: f.outcome_weights().to_vec(),
                events: f.events().to_vec(),
            },
            Model::Window(w) => ModelSpec::Window {
                m: w.window_len() - 1,
                alphabet_size: w.alphabet_size(),
                symbol_dist: w.symbol_dist().to_vec(),
                predicate_table: w.predicate_table().to_vec(),
                horizon: w.horizon(),
            },
        }
    }
}

impl Model {
    /// Parses and validates a model file.
    pub fn from_json(text: &str) -> Result<Self> {
        ModelSpec::from_json(text)?.build()
    }

    pub fn to_json(&self) -> String {
        ModelSpec::from(self).to_json()
    }
}
