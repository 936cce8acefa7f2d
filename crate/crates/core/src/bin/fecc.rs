//! `fecc`: run single sessions, lower-bound attacks and experiment
//! batteries from the command line.

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use feedback_ecc::attacks::{
    berlekamp_protocol_attack, pairwise_erasure_attack, pairwise_error_attack, round_attack_early,
    round_attack_late, AttackOutcome,
};
use feedback_ecc::bits::{message_from_hex, message_hex};
use feedback_ecc::channel::{BudgetMode, CorruptionKind};
use feedback_ecc::harness::{parse_battery, run_battery, run_session, session_input, BudgetSpec};
use feedback_ecc::par::Execution;
use feedback_ecc::protocols::{
    build_protocol, DeskOverrides, ErasureProtocol, ErrorProtocol, FeedbackProtocol, Mode,
    PlainProtocol, ProtocolKind, RewindProtocol,
};
use feedback_ecc::ratio::{parse_ratio, Rational};
use feedback_ecc::BitString;

#[derive(Parser)]
#[command(name = "fecc", version, about = "Feedback ECC simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum AttackName {
    PairwiseError,
    PairwiseErasure,
    Berlekamp3,
    RoundEarly,
    RoundLate,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExecArg {
    Sequential,
    Parallel,
}

#[derive(Subcommand)]
enum Command {
    /// Run one session and write its transcript.
    Run {
        #[arg(long)]
        protocol: ProtocolKind,
        #[arg(long)]
        k: usize,
        /// `num/den`.
        #[arg(long, value_parser = parse_ratio)]
        eps: Rational,
        #[arg(long, default_value = "desk")]
        mode: Mode,
        /// `name[:key=value,...]`.
        #[arg(long, default_value = "none")]
        adversary: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Alice's input in hex; drawn from the seed when absent.
        #[arg(long)]
        input: Option<String>,
        /// `inf`, a bit count, `frac:a/b` or `below:a/b`.
        #[arg(long, default_value = "inf", value_parser = BudgetSpec::parse)]
        budget: BudgetSpec,
        #[arg(long)]
        lenient: bool,
        #[arg(long)]
        c: Option<usize>,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        l: Option<usize>,
        #[arg(long)]
        t: Option<usize>,
        /// Transcript path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a lower-bound attack and write its outcome.
    Attack {
        #[arg(long, value_enum)]
        name: AttackName,
        /// `kind:k=..,eps=..[,mode=..,c=..,r=..,l=..,t=..,channel=flip|erase]`.
        #[arg(long)]
        protocol: String,
        /// Attack parameters, `key=value,...`: `x`, `y` and `delta` for the
        /// pair attacks, `inputs=a+b+c` and `prefix` for berlekamp3, `b` and
        /// `delta` for round-early, `delta` for round-late. Messages in hex.
        #[arg(long, default_value = "")]
        params: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every experiment of a TOML battery file.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "parallel")]
        exec: ExecArg,
        /// Print `key=value` lines instead of tables.
        #[arg(long)]
        kv: bool,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run {
            protocol,
            k,
            eps,
            mode,
            adversary,
            seed,
            input,
            budget,
            lenient,
            c,
            r,
            l,
            t,
            out,
        } => {
            let p = build_protocol(protocol, k, eps, mode, &DeskOverrides { c, r, l, t })?;
            let x = match input {
                Some(hex) => message_from_hex(&hex, k)?,
                None => session_input(k, seed),
            };
            let budget_mode = if lenient {
                BudgetMode::Lenient
            } else {
                BudgetMode::Strict
            };
            let transcript = run_session(p.as_ref(), &adversary, budget, budget_mode, x, seed)?;
            emit(out.as_ref(), &transcript.to_text())?;
            eprintln!(
                "input={} output={} correct={} corruption={}/{} ({:.4}) feedback_bits={} slots={}",
                message_hex(transcript.input, k),
                message_hex(transcript.output, k),
                transcript.correct,
                transcript.total_corruption(),
                transcript.alice_bits(),
                transcript.corruption_fraction(),
                transcript.zeta(),
                transcript.rho()
            );
        }
        Command::Attack {
            name,
            protocol,
            params,
            out,
        } => {
            let p = parse_protocol_spec(&protocol)?;
            let kv = KeyValues::parse(&params)?;
            let k = p.params().k;
            let outcome = run_attack(name, p.as_ref(), &kv)?;
            emit(out.as_ref(), &outcome.to_text(k))?;
            eprintln!(
                "succeeded={} max_cost={}",
                outcome.succeeded,
                outcome.max_cost()
            );
        }
        Command::Bench { config, exec, kv } => {
            let text = fs::read_to_string(&config)
                .with_context(|| format!("reading {}", config.display()))?;
            let exec = match exec {
                ExecArg::Sequential => Execution::Sequential,
                ExecArg::Parallel => Execution::Parallel,
            };
            for experiment in parse_battery(&text)? {
                let start = Instant::now();
                let result = run_battery(&experiment, exec)?;
                if kv {
                    print!("{}", result.to_key_values());
                } else {
                    print!("{}", result.to_table());
                    println!("elapsed {:.2}s\n", start.elapsed().as_secs_f64());
                }
            }
        }
    }
    Ok(())
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

struct KeyValues(Vec<(String, String)>);

impl KeyValues {
    fn parse(s: &str) -> Result<Self> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let Some((key, value)) = part.split_once('=') else {
                bail!("expected key=value, got {part:?}");
            };
            out.push((key.trim().to_string(), value.trim().to_string()));
        }
        Ok(Self(out))
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.0
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .with_context(|| format!("missing parameter {key}"))
    }

    fn usize(&self, key: &str) -> Result<Option<usize>> {
        self.get(key)
            .map(|v| {
                v.parse()
                    .with_context(|| format!("{key}={v} is not a number"))
            })
            .transpose()
    }

    fn ratio(&self, key: &str) -> Result<Rational> {
        Ok(parse_ratio(self.require(key)?)?)
    }
}

/// Builds a protocol from `kind:key=value,...`.
fn parse_protocol_spec(spec: &str) -> Result<Box<dyn FeedbackProtocol>> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let kind: ProtocolKind = kind.trim().parse()?;
    let kv = KeyValues::parse(rest)?;
    let k = kv.usize("k")?.context("missing parameter k")?;
    let eps = kv.ratio("eps")?;
    let mode: Mode = kv.get("mode").unwrap_or("desk").parse()?;
    let overrides = DeskOverrides {
        c: kv.usize("c")?,
        r: kv.usize("r")?,
        l: kv.usize("l")?,
        t: kv.usize("t")?,
    };
    Ok(match kind {
        ProtocolKind::Plain => {
            let channel = match kv.get("channel").unwrap_or("flip") {
                "flip" => CorruptionKind::Flip,
                "erase" => CorruptionKind::Erase,
                other => bail!("unknown channel {other:?}"),
            };
            Box::new(PlainProtocol::new(k, eps, channel)?)
        }
        ProtocolKind::Erasure => Box::new(ErasureProtocol::new(k, eps, mode, &overrides)?),
        ProtocolKind::Error => Box::new(ErrorProtocol::new(k, eps, mode, &overrides)?),
        ProtocolKind::Rewind => Box::new(RewindProtocol::new(k, eps)?),
    })
}

fn run_attack(name: AttackName, p: &dyn FeedbackProtocol, kv: &KeyValues) -> Result<AttackOutcome> {
    let k = p.params().k;
    let msg = |key: &str| -> Result<u64> { Ok(message_from_hex(kv.require(key)?, k)?) };
    Ok(match name {
        AttackName::PairwiseError => {
            pairwise_error_attack(p, msg("x")?, msg("y")?, kv.ratio("delta")?)?
        }
        AttackName::PairwiseErasure => pairwise_erasure_attack(p, msg("x")?, msg("y")?)?,
        AttackName::Berlekamp3 => {
            let inputs: Vec<u64> = kv
                .require("inputs")?
                .split('+')
                .map(|h| message_from_hex(h, k))
                .collect::<Result<_, _>>()?;
            let Ok(inputs) = <[u64; 3]>::try_from(inputs) else {
                bail!("inputs needs exactly three messages joined by +");
            };
            let prefix = match kv.get("prefix") {
                Some(bits) => BitString::parse_binary(bits)?,
                None => BitString::new(),
            };
            berlekamp_protocol_attack(p, inputs, &prefix, kv.usize("budget")?)?
        }
        AttackName::RoundEarly => {
            let b = kv.usize("b")?.context("missing parameter b")?;
            round_attack_early(p, b, kv.ratio("delta")?)?
        }
        AttackName::RoundLate => round_attack_late(p, kv.ratio("delta")?)?,
    })
}
