// SPDX-License-Identifier: Apache-2.0
use std::path::{Path, PathBuf};

use cellprobe::forest::format;
use cellprobe::{DecisionForest, Mode, Symbol, DEFAULT_SET_BUDGET, DEFAULT_STATE_BUDGET, DEFAULT_TRIALS};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::failure::Failure;

pub const LEDGER_ENV: &str = "CELLPROBE_LEDGER";
pub const DEFAULT_LEDGER: &str = "cellprobe-ledger.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Exact,
    #[value(alias = "monte_carlo")]
    MonteCarlo,
}

/// Instance parameters shared by every command. A config document with the
/// same keys may supply any of them; explicit flags take precedence.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Params {
    /// Number of cards, permutation size, or outcome alphabet size.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Number of input cells.
    #[arg(long, global = true)]
    pub s: Option<usize>,
    /// Input alphabet size.
    #[arg(long, global = true)]
    pub lambda: Option<Symbol>,
    /// Output alphabet size.
    #[arg(long, global = true)]
    pub sigma: Option<Symbol>,
    /// Number of output trees.
    #[arg(long, global = true)]
    pub m: Option<usize>,
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    #[arg(long, global = true)]
    pub rounds: Option<usize>,
    #[arg(long, global = true)]
    pub log2n: Option<u32>,
    #[arg(long, global = true)]
    pub mu: Option<f64>,
    /// One or more comma-separated values.
    #[arg(long, global = true, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Entropy threshold or neighborhood radius.
    #[arg(long, global = true)]
    pub k: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Forest file.
    #[arg(long, global = true)]
    pub forest: Option<PathBuf>,
    /// `uniform-perm` or a forest file.
    #[arg(long, global = true)]
    pub target: Option<String>,
    #[arg(short = 'o', long, global = true)]
    pub out: Option<PathBuf>,
    /// CSV ledger; defaults to $CELLPROBE_LEDGER, then ./cellprobe-ledger.csv.
    #[arg(long, global = true)]
    pub ledger: Option<PathBuf>,
    /// Start a new ledger instead of appending.
    #[arg(long, global = true)]
    pub fresh: bool,
    #[arg(long, global = true)]
    pub budget_states: Option<u64>,
    #[arg(long, global = true)]
    pub budget_set: Option<u64>,
    #[arg(long, global = true)]
    pub calib_coupling_c: Option<f64>,

    /// Event probabilities.
    #[arg(long, global = true, value_delimiter = ',')]
    pub q: Option<Vec<f64>>,
    /// A probability vector.
    #[arg(long, global = true, value_delimiter = ',')]
    pub p: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub c: Option<f64>,
    /// Cells to condition on or to fix.
    #[arg(long, global = true, value_delimiter = ',')]
    pub cells: Option<Vec<usize>>,
    #[arg(long, global = true)]
    pub cell: Option<usize>,
    /// Input tuple for `eval`.
    #[arg(long, global = true, value_delimiter = ',')]
    pub input: Option<Vec<Symbol>>,
    /// `empty` or a file with one comma-separated tuple per line.
    #[arg(long, global = true)]
    pub set: Option<String>,
    /// Number of contiguous buckets.
    #[arg(long, global = true)]
    pub buckets: Option<usize>,
    /// Tree index within the forest.
    #[arg(long, global = true)]
    pub tree: Option<usize>,
    /// JSON file with the rows of an independent ensemble (last entry is ⊥).
    #[arg(long, global = true)]
    pub ensemble: Option<PathBuf>,
    #[arg(long, global = true)]
    pub stop_prob: Option<f64>,
    #[arg(long, global = true)]
    pub bot_prob: Option<f64>,
    #[arg(long, global = true)]
    pub nonadaptive: bool,
    #[arg(long, global = true)]
    pub max_influence: Option<usize>,
    #[arg(long, global = true)]
    pub max_locality: Option<usize>,
    /// Grid resolution for numeric checks.
    #[arg(long, global = true)]
    pub steps: Option<usize>,

    /// JSON config document merged under the flags.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

/// `flags` over the config document at `flags.config`, if any.
pub fn merge(flags: Params) -> Result<Params, Failure> {
    let Some(path) = flags.config.clone() else {
        return Ok(flags);
    };
    let mut base: Value = serde_json::from_str(&read(&path)?)
        .map_err(|e| Failure::new("config", format!("{}: {e}", path.display())))?;
    let Some(obj) = base.as_object_mut() else {
        return Err(Failure::new("config", "config must be a JSON object"));
    };
    let over = serde_json::to_value(&flags).expect("params serialize");
    for (key, v) in over.as_object().expect("params are an object") {
        if !v.is_null() && *v != Value::Bool(false) {
            obj.insert(key.clone(), v.clone());
        }
    }
    let mut merged: Params =
        serde_json::from_value(base).map_err(|e| Failure::new("config", e.to_string()))?;
    merged.config = Some(path);
    Ok(merged)
}

pub fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::new("io", format!("{}: {e}", path.display())))
}

fn missing(flag: &str) -> Failure {
    Failure::new("missing-argument", format!("--{flag} is required"))
}

impl Params {
    pub fn states(&self) -> u64 {
        self.budget_states.unwrap_or(DEFAULT_STATE_BUDGET)
    }

    pub fn set_budget(&self) -> u64 {
        self.budget_set.unwrap_or(DEFAULT_SET_BUDGET)
    }

    pub fn seed(&self) -> Result<u64, Failure> {
        self.seed.ok_or_else(|| Failure::new("missing-seed", "this command is randomized and needs --seed"))
    }

    pub fn trials_or(&self, default: u64) -> u64 {
        self.trials.unwrap_or(default)
    }

    pub fn mode(&self) -> Result<Mode, Failure> {
        match self.mode.unwrap_or(ModeArg::Exact) {
            ModeArg::Exact => Ok(Mode::Exact),
            ModeArg::MonteCarlo => Ok(Mode::monte_carlo(self.trials_or(DEFAULT_TRIALS), self.seed()?)),
        }
    }

    pub fn need<T: Clone>(&self, v: &Option<T>, flag: &str) -> Result<T, Failure> {
        v.clone().ok_or_else(|| missing(flag))
    }

    pub fn forest(&self) -> Result<DecisionForest, Failure> {
        let path = self.forest.as_ref().ok_or_else(|| missing("forest"))?;
        load_forest(path)
    }

    /// First `--eps` value.
    pub fn eps(&self) -> Result<f64, Failure> {
        self.eps.as_ref().and_then(|e| e.first().copied()).ok_or_else(|| missing("eps"))
    }

    /// `--k` as a nonnegative integer radius.
    pub fn radius(&self) -> Result<usize, Failure> {
        let k = self.need(&self.k, "k")?;
        if k < 0.0 || k.fract() != 0.0 {
            return Err(Failure::new("invalid-input", format!("--k must be a nonnegative integer here, got {k}")));
        }
        Ok(k as usize)
    }

    pub fn ledger_path(&self) -> PathBuf {
        self.ledger
            .clone()
            .or_else(|| std::env::var_os(LEDGER_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_LEDGER))
    }
}

pub fn load_forest(path: &Path) -> Result<DecisionForest, Failure> {
    Ok(format::from_json(&read(path)?)?)
}
