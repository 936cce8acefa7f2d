//! Experiment batteries: configuration, parallel session runs, checkers and
//! summary tables.
//!
//! A battery runs every (adversary, seed) pair of an experiment, checks each
//! transcript as soon as it is produced and merges the reports in seed
//! order, so parallel and sequential runs print identical summaries.

pub mod checks;
mod config;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::Message;
use crate::channel::{parse_adversary, AdversaryBudget, Channel};
use crate::error::HarnessError;
use crate::par::{map_slice, with_workers, worker_cap, Execution};
use crate::protocols::{build_protocol, FeedbackProtocol, SessionTranscript};
use crate::ratio::format_ratio;

pub use checks::{
    check_accounting, check_advance, check_correctness, check_minigame, check_progress,
    check_soundness, probe_set, ratio_f64, run_checker, CheckReport, Checker, Slack,
};
pub use config::{parse_battery, BudgetSpec, ExperimentConfig};

/// Alice's input for a session, drawn from the seed.
pub fn session_input(k: usize, seed: u64) -> Message {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if k >= 64 {
        rng.gen()
    } else {
        rng.gen_range(0..1u64 << k)
    }
}

/// Runs one session of `protocol` against the adversary `spec`.
pub fn run_session(
    protocol: &dyn FeedbackProtocol,
    adversary: &str,
    budget: BudgetSpec,
    budget_mode: crate::channel::BudgetMode,
    input: Message,
    seed: u64,
) -> Result<SessionTranscript, HarnessError> {
    let kind = protocol.corruption_kind();
    let adv = parse_adversary(adversary, kind, protocol.params().k, seed)?;
    let budget = match budget.limit(protocol.alice_bits()) {
        Some(limit) => AdversaryBudget::new(kind, limit),
        None => AdversaryBudget::unbounded(kind),
    };
    let mut channel = Channel::new(adv, budget, budget_mode);
    let mut t = protocol.run(input, &mut channel, seed)?;
    t.adversary = adversary.to_string();
    Ok(t)
}

/// Aggregates for one adversary.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub adversary: String,
    pub sessions: usize,
    pub correct: usize,
    /// Sessions that ended in a protocol error.
    pub errors: usize,
    pub max_fraction: f64,
    /// Smallest slack over every checked inequality, in bits.
    pub min_slack: Option<f64>,
    pub violations: usize,
}

impl SummaryRow {
    pub fn correct_rate(&self) -> f64 {
        if self.sessions == 0 {
            1.0
        } else {
            self.correct as f64 / self.sessions as f64
        }
    }
}

#[derive(Clone, Debug)]
pub struct BatteryResult {
    pub name: String,
    /// Protocol parameter line.
    pub params: String,
    pub rows: Vec<SummaryRow>,
    /// One merged report per configured checker.
    pub reports: Vec<CheckReport>,
    /// `adversary seed: message` for sessions that errored.
    pub errors: Vec<String>,
}

impl BatteryResult {
    pub fn sessions(&self) -> usize {
        self.rows.iter().map(|r| r.sessions).sum()
    }

    pub fn report(&self, checker: Checker) -> Option<&CheckReport> {
        self.reports.iter().find(|r| r.checker == checker)
    }

    /// No errors and no violations.
    pub fn clean(&self) -> bool {
        self.errors.is_empty() && self.reports.iter().all(CheckReport::passed)
    }

    /// Aligned table followed by the checker reports.
    pub fn to_table(&self) -> String {
        let mut s = format!("experiment {}\n{}\n", self.name, self.params);
        let width = self
            .rows
            .iter()
            .map(|r| r.adversary.len())
            .max()
            .unwrap_or(9)
            .max(9);
        let _ = writeln!(
            s,
            "{:<width$}  {:>8}  {:>8}  {:>6}  {:>9}  {:>10}  {:>10}",
            "adversary", "sessions", "correct", "errors", "max_frac", "min_slack", "violations"
        );
        for r in &self.rows {
            let slack = r.min_slack.map_or("-".to_string(), |v| format!("{v:.2}"));
            let _ = writeln!(
                s,
                "{:<width$}  {:>8}  {:>8.4}  {:>6}  {:>9.4}  {:>10}  {:>10}",
                r.adversary,
                r.sessions,
                r.correct_rate(),
                r.errors,
                r.max_fraction,
                slack,
                r.violations
            );
        }
        for rep in &self.reports {
            s.push_str(&rep.to_text());
        }
        for e in &self.errors {
            let _ = writeln!(s, "error: {e}");
        }
        s
    }

    /// One `key=value` line per row, for scripts.
    pub fn to_key_values(&self) -> String {
        let mut s = String::new();
        for r in &self.rows {
            let _ = writeln!(
                s,
                "experiment={} adversary={} sessions={} correct_rate={:.6} errors={} max_fraction={:.6} min_slack={} violations={}",
                self.name,
                r.adversary,
                r.sessions,
                r.correct_rate(),
                r.errors,
                r.max_fraction,
                r.min_slack.map_or("none".to_string(), |v| format!("{v:.6}")),
                r.violations
            );
        }
        for rep in &self.reports {
            let _ = writeln!(
                s,
                "experiment={} checker={} trials={} checks={} violations={} skipped={} min_slack={}",
                self.name,
                rep.checker,
                rep.trials,
                rep.checks,
                rep.violations,
                rep.skipped,
                rep.min_slack().map_or("none".to_string(), format_ratio)
            );
        }
        s
    }
}

struct SessionOutcome {
    adversary: usize,
    seed: u64,
    result: Result<(SessionTranscript, Vec<CheckReport>), String>,
}

fn check_session(
    protocol: &dyn FeedbackProtocol,
    config: &ExperimentConfig,
    adversary: &str,
    seed: u64,
) -> Result<(SessionTranscript, Vec<CheckReport>), HarnessError> {
    let input = session_input(protocol.params().k, seed);
    let t = run_session(
        protocol,
        adversary,
        config.budget,
        config.budget_mode,
        input,
        seed,
    )?;
    let reports = config
        .checkers
        .iter()
        .map(|&c| run_checker(c, &t, protocol, config.random_probes))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((t, reports))
}

/// Builds the experiment's protocol once.
pub fn build_experiment_protocol(
    config: &ExperimentConfig,
) -> Result<Arc<dyn FeedbackProtocol>, HarnessError> {
    Ok(build_protocol(
        config.protocol,
        config.k,
        config.eps,
        config.mode,
        &config.overrides,
    )?)
}

/// Runs every session of `config` and merges the reports. Worker threads
/// are capped by `FECC_WORKERS` when set.
pub fn run_battery(
    config: &ExperimentConfig,
    exec: Execution,
) -> Result<BatteryResult, HarnessError> {
    let protocol = build_experiment_protocol(config)?;
    run_battery_with(config, protocol.as_ref(), exec)
}

/// [`run_battery`] on an already built protocol.
pub fn run_battery_with(
    config: &ExperimentConfig,
    protocol: &dyn FeedbackProtocol,
    exec: Execution,
) -> Result<BatteryResult, HarnessError> {
    let jobs: Vec<(usize, u64)> = (0..config.adversaries.len())
        .flat_map(|a| (0..config.seeds as u64).map(move |s| (a, config.seed_start + s)))
        .collect();
    let outcomes: Vec<SessionOutcome> = with_workers(worker_cap(), || {
        map_slice(exec, &jobs, |&(a, seed)| SessionOutcome {
            adversary: a,
            seed,
            result: check_session(protocol, config, &config.adversaries[a], seed)
                .map_err(|e| e.to_string()),
        })
    });

    if let Some(dir) = &config.out_dir {
        fs::create_dir_all(dir)?;
    }
    let mut reports: Vec<CheckReport> = config
        .checkers
        .iter()
        .map(|&c| CheckReport::new(c))
        .collect();
    let mut per_adversary: BTreeMap<usize, (SummaryRow, Vec<CheckReport>)> = BTreeMap::new();
    let mut errors = Vec::new();
    for o in &outcomes {
        let name = &config.adversaries[o.adversary];
        let (row, adv_reports) = per_adversary.entry(o.adversary).or_insert_with(|| {
            (
                SummaryRow {
                    adversary: name.clone(),
                    sessions: 0,
                    correct: 0,
                    errors: 0,
                    max_fraction: 0.0,
                    min_slack: None,
                    violations: 0,
                },
                config
                    .checkers
                    .iter()
                    .map(|&c| CheckReport::new(c))
                    .collect(),
            )
        });
        row.sessions += 1;
        match &o.result {
            Ok((t, session_reports)) => {
                row.correct += usize::from(t.correct);
                row.max_fraction = row.max_fraction.max(t.corruption_fraction());
                for ((total, adv), rep) in reports
                    .iter_mut()
                    .zip(adv_reports.iter_mut())
                    .zip(session_reports)
                {
                    total.merge(rep);
                    adv.merge(rep);
                }
                if let Some(dir) = &config.out_dir {
                    write_transcript(dir, &config.name, name, o.seed, t)?;
                }
            }
            Err(e) => {
                row.errors += 1;
                errors.push(format!("{name} seed={}: {e}", o.seed));
            }
        }
    }
    let rows = per_adversary
        .into_values()
        .map(|(mut row, adv_reports)| {
            row.violations = adv_reports.iter().map(|r| r.violations).sum();
            row.min_slack = adv_reports
                .iter()
                .filter_map(CheckReport::min_slack)
                .min()
                .map(ratio_f64);
            row
        })
        .collect();
    let result = BatteryResult {
        name: config.name.clone(),
        params: protocol.params().to_string(),
        rows,
        reports,
        errors,
    };
    if let Some(dir) = &config.out_dir {
        fs::write(
            dir.join(format!("{}.summary.txt", config.name)),
            result.to_table(),
        )?;
        fs::write(
            dir.join(format!("{}.summary.kv", config.name)),
            result.to_key_values(),
        )?;
    }
    Ok(result)
}

fn file_safe(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn write_transcript(
    dir: &Path,
    experiment: &str,
    adversary: &str,
    seed: u64,
    t: &SessionTranscript,
) -> Result<(), HarnessError> {
    let path = dir.join(format!(
        "{}.{}.{seed}.txt",
        file_safe(experiment),
        file_safe(adversary)
    ));
    fs::write(path, t.to_text())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::BudgetMode;
    use crate::protocols::{DeskOverrides, Mode, ProtocolKind};
    use crate::ratio::rat;

    fn config(
        protocol: ProtocolKind,
        k: usize,
        adversaries: &[&str],
        seeds: usize,
    ) -> ExperimentConfig {
        ExperimentConfig {
            name: "unit".into(),
            protocol,
            k,
            eps: rat(1, 4),
            mode: Mode::Desk,
            overrides: DeskOverrides::default(),
            adversaries: adversaries.iter().map(|s| s.to_string()).collect(),
            seeds,
            seed_start: 0,
            budget: BudgetSpec::Unbounded,
            budget_mode: BudgetMode::Strict,
            checkers: vec![Checker::Correctness, Checker::Accounting],
            random_probes: 8,
            out_dir: None,
        }
    }

    #[test]
    fn empty_battery() {
        let r = run_battery(
            &config(ProtocolKind::Plain, 4, &[], 5),
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(r.sessions(), 0);
        assert!(r.clean());
        assert!(r.rows.is_empty());
    }

    #[test]
    fn passthrough_is_always_correct() {
        let r = run_battery(
            &config(ProtocolKind::Erasure, 4, &["none"], 20),
            Execution::Parallel,
        )
        .unwrap();
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.rows[0].correct_rate(), 1.0);
        assert_eq!(r.rows[0].max_fraction, 0.0);
        assert!(r.clean(), "{}", r.to_table());
    }

    #[test]
    fn parallel_matches_sequential() {
        let c = config(ProtocolKind::Plain, 4, &["random:p=0.2", "none"], 12);
        let a = run_battery(&c, Execution::Sequential).unwrap();
        let b = run_battery(&c, Execution::Parallel).unwrap();
        assert_eq!(a.to_key_values(), b.to_key_values());
        assert_eq!(a.to_table(), b.to_table());
    }

    #[test]
    fn sessions_replay_identically() {
        let p = build_experiment_protocol(&config(ProtocolKind::Plain, 5, &[], 0)).unwrap();
        let run = || {
            run_session(
                p.as_ref(),
                "random:p=0.3",
                BudgetSpec::Unbounded,
                BudgetMode::Strict,
                17,
                99,
            )
            .unwrap()
            .to_text()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn protocol_errors_are_collected() {
        // Erase-only adversary on a flip channel.
        let r = run_battery(
            &config(ProtocolKind::Plain, 4, &["erase-densest"], 2),
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(r.errors.len(), 2);
        assert_eq!(r.rows[0].errors, 2);
        assert!(!r.clean());
    }

    #[test]
    fn writes_transcripts_and_summary() {
        let dir = std::env::temp_dir().join(format!("fecc-harness-{}", std::process::id()));
        let mut c = config(ProtocolKind::Plain, 4, &["random:p=0.1"], 3);
        c.out_dir = Some(dir.clone());
        run_battery(&c, Execution::Sequential).unwrap();
        let names: Vec<String> = fs::read_dir(&dir)
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .collect();
        assert!(names.iter().any(|n| n == "unit.summary.txt"));
        assert_eq!(
            names
                .iter()
                .filter(|n| n.starts_with("unit.random_p_0.1."))
                .count(),
            3
        );
        let text = fs::read_to_string(dir.join("unit.random_p_0.1.0.txt")).unwrap();
        let back: SessionTranscript = text.parse().unwrap();
        assert_eq!(back.seed, 0);
        fs::remove_dir_all(dir).unwrap();
    }
}
