//! TOML experiment configuration.
//!
//! ```toml
//! [[experiment]]
//! name = "error-desk"
//! protocol = "error"
//! k = 8
//! eps = "1/10"
//! mode = "desk"
//! c = 4
//! r = 4
//! adversaries = ["random:p=0.1", "midpoint"]
//! seeds = 100
//! budget = "below:1/10"
//! checkers = ["correctness", "soundness"]
//! ```

use std::path::PathBuf;

use serde::Deserialize;

use crate::channel::BudgetMode;
use crate::error::HarnessError;
use crate::protocols::{DeskOverrides, Mode, ProtocolKind};
use crate::ratio::{ceil_mul, floor_mul, parse_ratio, Rational};

use super::checks::Checker;

/// Adversary budget relative to `|FC|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BudgetSpec {
    Unbounded,
    Bits(usize),
    /// `floor(f |FC|)`.
    Fraction(Rational),
    /// The largest integer strictly below `f |FC|`.
    Below(Rational),
}

impl BudgetSpec {
    pub fn parse(s: &str) -> Result<Self, HarnessError> {
        let s = s.trim();
        let ratio = |v: &str| {
            parse_ratio(v).map_err(|e| HarnessError::Config(format!("budget {s:?}: {e}")))
        };
        if s == "inf" {
            Ok(BudgetSpec::Unbounded)
        } else if let Some(v) = s.strip_prefix("frac:") {
            Ok(BudgetSpec::Fraction(ratio(v)?))
        } else if let Some(v) = s.strip_prefix("below:") {
            Ok(BudgetSpec::Below(ratio(v)?))
        } else {
            s.parse().map(BudgetSpec::Bits).map_err(|_| {
                HarnessError::Config(format!(
                    "budget {s:?}: expected inf, N, frac:a/b or below:a/b"
                ))
            })
        }
    }

    /// Limit for a protocol that sends `n` bits.
    pub fn limit(self, n: usize) -> Option<usize> {
        match self {
            BudgetSpec::Unbounded => None,
            BudgetSpec::Bits(b) => Some(b),
            BudgetSpec::Fraction(f) => Some(floor_mul(f, n).max(0) as usize),
            BudgetSpec::Below(f) => Some((ceil_mul(f, n) - 1).max(0) as usize),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub name: String,
    pub protocol: ProtocolKind,
    pub k: usize,
    pub eps: Rational,
    pub mode: Mode,
    pub overrides: DeskOverrides,
    /// Adversary specs, `name[:key=value,...]`.
    pub adversaries: Vec<String>,
    /// Sessions per adversary.
    pub seeds: usize,
    pub seed_start: u64,
    pub budget: BudgetSpec,
    pub budget_mode: BudgetMode,
    pub checkers: Vec<Checker>,
    /// Random coins added to the soundness probe set.
    pub random_probes: usize,
    /// Directory for transcripts and summaries.
    pub out_dir: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    name: String,
    protocol: String,
    k: usize,
    eps: String,
    mode: Option<String>,
    c: Option<usize>,
    r: Option<usize>,
    l: Option<usize>,
    t: Option<usize>,
    adversaries: Vec<String>,
    seeds: usize,
    seed_start: Option<u64>,
    budget: Option<String>,
    budget_mode: Option<String>,
    checkers: Option<Vec<String>>,
    probes: Option<usize>,
    out_dir: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBattery {
    out_dir: Option<PathBuf>,
    #[serde(default)]
    experiment: Vec<RawExperiment>,
}

impl RawExperiment {
    fn resolve(self, default_out: Option<&PathBuf>) -> Result<ExperimentConfig, HarnessError> {
        let budget_mode = match self.budget_mode.as_deref() {
            None | Some("strict") => BudgetMode::Strict,
            Some("lenient") => BudgetMode::Lenient,
            Some(other) => return Err(HarnessError::Config(format!("budget_mode {other:?}"))),
        };
        let checkers = match self.checkers {
            Some(names) => names.iter().map(|n| n.parse()).collect::<Result<_, _>>()?,
            None => vec![Checker::Correctness, Checker::Accounting],
        };
        Ok(ExperimentConfig {
            protocol: self.protocol.parse()?,
            k: self.k,
            eps: parse_ratio(&self.eps)?,
            mode: self.mode.as_deref().map_or(Ok(Mode::Desk), str::parse)?,
            overrides: DeskOverrides {
                c: self.c,
                r: self.r,
                l: self.l,
                t: self.t,
            },
            adversaries: self.adversaries,
            seeds: self.seeds,
            seed_start: self.seed_start.unwrap_or(0),
            budget: self
                .budget
                .as_deref()
                .map_or(Ok(BudgetSpec::Unbounded), BudgetSpec::parse)?,
            budget_mode,
            checkers,
            random_probes: self.probes.unwrap_or(64),
            out_dir: self
                .out_dir
                .or_else(|| default_out.map(|d| d.join(&self.name))),
            name: self.name,
        })
    }
}

/// Parses a battery file: an optional top-level `out_dir` and a list of
/// `[[experiment]]` tables.
pub fn parse_battery(text: &str) -> Result<Vec<ExperimentConfig>, HarnessError> {
    let raw: RawBattery = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
    let out = raw.out_dir;
    raw.experiment
        .into_iter()
        .map(|e| e.resolve(out.as_ref()))
        .collect()
}
