//! Invariant checkers over persisted transcripts.
//!
//! Each checker compares integer quantities read or replayed from a
//! transcript against rational bounds and records the slack `lhs - rhs` of
//! every instance. A negative slack is a violation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::Message;
use crate::channel::CorruptionKind;
use crate::coin_game::{CoinGameState, CoinSpace, RankPolicy, ORACLE_SPACE_LIMIT};
use crate::error::HarnessError;
use crate::protocols::error::closed_form_zeta;
use crate::protocols::{FeedbackProtocol, ProtocolKind, SessionTranscript};
use crate::ratio::{format_ratio, rat, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Checker {
    /// Bob's output equals Alice's input.
    Correctness,
    /// Main-game positions never exceed the replayed corruption.
    Soundness,
    /// Per-round pair rule and end-of-chunk pair and triple bounds of the
    /// minigame.
    Minigame,
    /// Running sums of the lowest main-game positions and the Case-1 count
    /// complement.
    Progress,
    /// Per-chunk advance of the lowest main-game positions by case.
    Advance,
    /// Feedback and message bit counts against closed forms.
    Accounting,
}

impl Checker {
    pub const ALL: [Checker; 6] = [
        Checker::Correctness,
        Checker::Soundness,
        Checker::Minigame,
        Checker::Progress,
        Checker::Advance,
        Checker::Accounting,
    ];
}

impl fmt::Display for Checker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Checker::Correctness => "correctness",
            Checker::Soundness => "soundness",
            Checker::Minigame => "minigame",
            Checker::Progress => "progress",
            Checker::Advance => "advance",
            Checker::Accounting => "accounting",
        })
    }
}

impl FromStr for Checker {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Checker::ALL
            .into_iter()
            .find(|c| c.to_string() == s)
            .ok_or_else(|| HarnessError::UnknownChecker(s.to_string()))
    }
}

/// Smallest slack seen for one inequality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slack {
    pub min: Rational,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub checker: Checker,
    /// Sessions examined.
    pub trials: usize,
    /// Inequality instances evaluated.
    pub checks: usize,
    pub violations: usize,
    /// Session reference and detail of the first violation.
    pub first_violation: Option<String>,
    /// Minimum slack per inequality.
    pub slack: BTreeMap<String, Slack>,
    /// Instances that could not be evaluated, such as ranks past the coin
    /// space.
    pub skipped: usize,
}

impl CheckReport {
    pub fn new(checker: Checker) -> Self {
        Self {
            checker,
            trials: 0,
            checks: 0,
            violations: 0,
            first_violation: None,
            slack: BTreeMap::new(),
            skipped: 0,
        }
    }

    /// Records `lhs >= rhs`.
    pub fn at_least(&mut self, name: &str, lhs: Rational, rhs: Rational, at: &str) {
        let slack = lhs - rhs;
        self.checks += 1;
        let entry = self.slack.entry(name.to_string()).or_insert(Slack {
            min: slack,
            count: 0,
        });
        entry.count += 1;
        if slack < entry.min {
            entry.min = slack;
        }
        if slack < Rational::from_integer(0) {
            self.violate(format!(
                "{at}: {name}: {} < {}",
                format_ratio(lhs),
                format_ratio(rhs)
            ));
        }
    }

    /// Records `lhs == rhs` with slack `-|lhs - rhs|`.
    pub fn equal(&mut self, name: &str, lhs: i64, rhs: i64, at: &str) {
        let d = Rational::from_integer(-(lhs - rhs).abs());
        self.checks += 1;
        let entry = self
            .slack
            .entry(name.to_string())
            .or_insert(Slack { min: d, count: 0 });
        entry.count += 1;
        if d < entry.min {
            entry.min = d;
        }
        if lhs != rhs {
            self.violate(format!("{at}: {name}: {lhs} != {rhs}"));
        }
    }

    fn violate(&mut self, detail: String) {
        self.violations += 1;
        if self.first_violation.is_none() {
            self.first_violation = Some(detail);
        }
    }

    pub fn merge(&mut self, other: &CheckReport) {
        self.trials += other.trials;
        self.checks += other.checks;
        self.violations += other.violations;
        self.skipped += other.skipped;
        if self.first_violation.is_none() {
            self.first_violation.clone_from(&other.first_violation);
        }
        for (name, s) in &other.slack {
            match self.slack.get_mut(name) {
                Some(e) => {
                    e.count += s.count;
                    e.min = e.min.min(s.min);
                }
                None => {
                    self.slack.insert(name.clone(), s.clone());
                }
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub fn min_slack(&self) -> Option<Rational> {
        self.slack.values().map(|s| s.min).min()
    }

    /// One line per inequality: name, instances, min slack.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{} trials={} checks={} violations={} skipped={}\n",
            self.checker, self.trials, self.checks, self.violations, self.skipped
        );
        for (name, sl) in &self.slack {
            s.push_str(&format!(
                "  {name}: n={} min_slack={} ({:.3})\n",
                sl.count,
                format_ratio(sl.min),
                ratio_f64(sl.min)
            ));
        }
        if let Some(v) = &self.first_violation {
            s.push_str(&format!("  first violation: {v}\n"));
        }
        s
    }
}

pub fn ratio_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn int(v: u64) -> Rational {
    Rational::from_integer(v as i64)
}

/// Session reference used in violation messages.
pub fn session_ref(t: &SessionTranscript) -> String {
    format!("{} seed={} input={}", t.adversary, t.seed, t.input)
}

pub fn check_correctness(t: &SessionTranscript) -> CheckReport {
    let mut r = CheckReport::new(Checker::Correctness);
    r.trials = 1;
    r.equal(
        "output=input",
        i64::from(t.output == t.input),
        1,
        &session_ref(t),
    );
    r
}

/// Probe set: the input, every coin named in a main update and
/// `random` seeded coins.
pub fn probe_set(t: &SessionTranscript, random: usize) -> Vec<Message> {
    let mut set: BTreeSet<Message> = BTreeSet::new();
    set.insert(t.input);
    if let Some(d) = &t.error_details {
        for rec in &d.main_log {
            set.extend(rec.entries.iter().map(|&(y, _)| y));
        }
    }
    let k = t.params.k;
    let mut rng = ChaCha8Rng::seed_from_u64(t.seed ^ 0x9e37_79b9_7f4a_7c15);
    for _ in 0..random {
        set.insert(if k >= 64 {
            rng.gen()
        } else {
            rng.gen_range(0..1u64 << k)
        });
    }
    set.into_iter().collect()
}

/// Replays Alice on every probe against the recorded feedback and received
/// words, and checks `pos_main(y; t)` is at most the corruption a run on `y`
/// would have needed through chunk `t`.
pub fn check_soundness(
    t: &SessionTranscript,
    protocol: &dyn FeedbackProtocol,
    probes: &[Message],
) -> Result<CheckReport, HarnessError> {
    let mut r = CheckReport::new(Checker::Soundness);
    r.trials = 1;
    let Some(details) = &t.error_details else {
        r.skipped += 1;
        return Ok(r);
    };
    if t.corruption_kind != CorruptionKind::Flip {
        r.skipped += 1;
        return Ok(r);
    }
    let at = session_ref(t);
    let rounds_per_chunk = t.params.r;
    let cap = details
        .main_log
        .iter()
        .map(|u| u.entries.len())
        .max()
        .unwrap_or(1)
        .max(1);
    let mut main = CoinGameState::new(CoinSpace::Binary(t.params.k), cap)
        .map_err(crate::ProtocolError::from)?;
    let mut cost = vec![0u64; probes.len()];
    for (chunk, rec) in details.main_log.iter().enumerate() {
        for i in chunk * rounds_per_chunk..(chunk + 1) * rounds_per_chunk {
            let round = &t.rounds[i];
            let view = protocol.alice_view(&t.feedback_before(i));
            for (c, &y) in cost.iter_mut().zip(probes) {
                *c += view.message(y).distance(round.received.values()) as u64;
            }
        }
        let list: Vec<(u64, i64)> = rec.entries.iter().map(|&(y, v)| (y, v as i64)).collect();
        main.update(&list, rec.default as i64)
            .map_err(crate::ProtocolError::from)?;
        for (&y, &c) in probes.iter().zip(&cost) {
            let pos = main.pos(y).map_err(crate::ProtocolError::from)?;
            r.at_least(
                "replayed corruption >= main position",
                int(c),
                int(pos),
                &format!("{at} chunk={} probe={y}", chunk + 1),
            );
        }
    }
    Ok(r)
}

/// Minigame bounds: in every round, `v(i) + v(j) >= (2/3 - eps) M` for sets
/// of different classes; at the end of the chunk the two lowest final
/// positions sum to at least `(2/3 - eps) RM - 3 eps RM` and the three
/// lowest to at least `(1 - 6 eps) RM`.
pub fn check_minigame(t: &SessionTranscript) -> CheckReport {
    let mut r = CheckReport::new(Checker::Minigame);
    r.trials = 1;
    let Some(details) = &t.error_details else {
        r.skipped += 1;
        return r;
    };
    let p = &t.params;
    let eps = p.eps;
    let m = Rational::from_integer(p.m as i64);
    let rm = Rational::from_integer((p.r * p.m) as i64);
    let at = session_ref(t);
    for chunk in details.chunks.iter().filter(|c| c.case == 3) {
        for (tau, round) in chunk.mini.iter().enumerate() {
            let mut low: BTreeMap<u8, u64> = BTreeMap::new();
            for (&class, &v) in round.f.iter().zip(&round.v) {
                let e = low.entry(class).or_insert(v);
                *e = (*e).min(v);
            }
            let classes: Vec<(u8, u64)> = low.into_iter().collect();
            for (i, &(ci, vi)) in classes.iter().enumerate() {
                for &(cj, vj) in &classes[i + 1..] {
                    r.at_least(
                        "cross-class pair increment",
                        int(vi + vj),
                        (rat(2, 3) - eps) * m,
                        &format!(
                            "{at} chunk={} round={} classes={ci},{cj}",
                            chunk.chunk,
                            tau + 1
                        ),
                    );
                }
            }
        }
        let mut finals = chunk.mini_final.clone();
        finals.sort_unstable();
        let here = format!("{at} chunk={}", chunk.chunk);
        if finals.len() >= 2 {
            r.at_least(
                "end-of-chunk lowest pair",
                int(finals[0] + finals[1]),
                (rat(2, 3) - eps) * rm - eps * 3 * rm,
                &here,
            );
        } else {
            r.skipped += 1;
        }
        if finals.len() >= 3 {
            r.at_least(
                "end-of-chunk lowest triple",
                int(finals[0] + finals[1] + finals[2]),
                (Rational::from_integer(1) - eps * 6) * rm,
                &here,
            );
        } else {
            r.skipped += 1;
        }
    }
    r
}

/// Rebuilds the main game after each chunk with exact ranking.
fn main_states(t: &SessionTranscript) -> Option<Vec<CoinGameState>> {
    let details = t.error_details.as_ref()?;
    let space = CoinSpace::Binary(t.params.k);
    if space.size() > ORACLE_SPACE_LIMIT {
        return None;
    }
    let cap = details
        .main_log
        .iter()
        .map(|u| u.entries.len())
        .max()
        .unwrap_or(1)
        .max(1);
    let mut g = CoinGameState::new(space, cap)
        .ok()?
        .with_rank_policy(RankPolicy::Oracle);
    let mut out = vec![g.clone()];
    for rec in &details.main_log {
        let list: Vec<(u64, i64)> = rec.entries.iter().map(|&(y, v)| (y, v as i64)).collect();
        g.update(&list, rec.default as i64).ok()?;
        out.push(g.clone());
    }
    Some(out)
}

fn posx(g: &CoinGameState, i: usize) -> Option<u64> {
    g.posx(i).ok()
}

/// For every chunk `t <= C'` (the chunk before the first Case-1 chunk):
/// `posx(1) + posx(2) + posx(tRL + 1) >= tRM - 8 eps tRM` and
/// `posx(1) + posx(2) + posx(3) >= tRM - 8 eps tRM - 2 eps CRM`; and
/// `b1 + b2 = RM` in every Case-1 chunk.
pub fn check_progress(t: &SessionTranscript) -> CheckReport {
    let mut r = CheckReport::new(Checker::Progress);
    r.trials = 1;
    let Some(details) = &t.error_details else {
        r.skipped += 1;
        return r;
    };
    let p = &t.params;
    let at = session_ref(t);
    let rm = (p.r * p.m) as i64;
    for chunk in details.chunks.iter().filter(|c| c.case == 1) {
        let (b1, b2) = chunk.b.unwrap_or((0, 0));
        r.equal(
            "case-1 counts sum to RM",
            (b1 + b2) as i64,
            rm,
            &format!("{at} chunk={}", chunk.chunk),
        );
    }
    let Some(states) = main_states(t) else {
        r.skipped += 1;
        return r;
    };
    let c_prime = details
        .chunks
        .iter()
        .position(|c| c.case == 1)
        .unwrap_or(details.chunks.len());
    let eps = p.eps;
    let crm = Rational::from_integer(p.c as i64 * rm);
    for (tt, g) in states.iter().enumerate().take(c_prime + 1).skip(1) {
        let trm = Rational::from_integer(tt as i64 * rm);
        let base = trm - eps * 8 * trm;
        let here = format!("{at} chunk={tt}");
        let (Some(p1), Some(p2), Some(p3)) = (posx(g, 1), posx(g, 2), posx(g, 3)) else {
            r.skipped += 2;
            continue;
        };
        match posx(g, tt * p.r * p.l + 1) {
            Some(pd) => r.at_least("lowest two plus rank tRL+1", int(p1 + p2 + pd), base, &here),
            None => r.skipped += 1,
        }
        r.at_least(
            "lowest three",
            int(p1 + p2 + p3),
            base - eps * 2 * crm,
            &here,
        );
    }
    r
}

/// Per-chunk advance of `posx(1) + posx(2)` (and of the lowest three in
/// minigame chunks) against the per-case bounds: `RM` in Case 1 while
/// `posx(2)` is below `(1/3 - eps) CRM`, `(1/2 - 2eps) RM` in Case 2, and
/// `(2/3 - 4eps) RM` and `(1 - 6eps) RM` in Case 3.
pub fn check_advance(t: &SessionTranscript) -> CheckReport {
    let mut r = CheckReport::new(Checker::Advance);
    r.trials = 1;
    let (Some(details), Some(states)) = (&t.error_details, main_states(t)) else {
        r.skipped += 1;
        return r;
    };
    let p = &t.params;
    let eps = p.eps;
    let rm = Rational::from_integer((p.r * p.m) as i64);
    let crm = rm * p.c as i64;
    let at = session_ref(t);
    for (i, chunk) in details.chunks.iter().enumerate() {
        let (before, after) = (&states[i], &states[i + 1]);
        let sum =
            |g: &CoinGameState, n: usize| -> Option<u64> { (1..=n).map(|j| posx(g, j)).sum() };
        let here = format!("{at} chunk={}", chunk.chunk);
        let (Some(b2), Some(a2)) = (sum(before, 2), sum(after, 2)) else {
            r.skipped += 1;
            continue;
        };
        let gain2 = Rational::from_integer(a2 as i64 - b2 as i64);
        match chunk.case {
            1 => {
                let p2 = posx(before, 2).unwrap_or(0);
                if int(p2) < (rat(1, 3) - eps) * crm {
                    r.at_least("case-1 lowest-two advance", gain2, rm, &here);
                }
            }
            2 => r.at_least(
                "case-2 lowest-two advance",
                gain2,
                (rat(1, 2) - eps * 2) * rm,
                &here,
            ),
            _ => {
                r.at_least(
                    "case-3 lowest-two advance",
                    gain2,
                    (rat(2, 3) - eps * 4) * rm,
                    &here,
                );
                if let (Some(b3), Some(a3)) = (sum(before, 3), sum(after, 3)) {
                    let gain3 = Rational::from_integer(a3 as i64 - b3 as i64);
                    r.at_least(
                        "case-3 lowest-three advance",
                        gain3,
                        (Rational::from_integer(1) - eps * 6) * rm,
                        &here,
                    );
                }
            }
        }
    }
    r
}

/// `zeta`, `rho` and `|FC|` against the protocol's closed forms; for the
/// error protocol also `|FC| = CRM` and the explicit `zeta` formula.
pub fn check_accounting(t: &SessionTranscript, protocol: &dyn FeedbackProtocol) -> CheckReport {
    let mut r = CheckReport::new(Checker::Accounting);
    r.trials = 1;
    let at = session_ref(t);
    r.equal(
        "feedback bits",
        t.zeta() as i64,
        protocol.feedback_bits() as i64,
        &at,
    );
    r.equal(
        "feedback slots",
        t.rho() as i64,
        protocol.feedback_slots() as i64,
        &at,
    );
    r.equal(
        "alice bits",
        t.alice_bits() as i64,
        protocol.alice_bits() as i64,
        &at,
    );
    let p = &t.params;
    if p.kind == ProtocolKind::Error {
        r.equal(
            "alice bits = CRM",
            t.alice_bits() as i64,
            (p.c * p.r * p.m) as i64,
            &at,
        );
        r.equal(
            "feedback bits closed form",
            t.zeta() as i64,
            closed_form_zeta(p.k, p.c, p.r, p.l) as i64,
            &at,
        );
        r.equal(
            "feedback slots = C + CR",
            t.rho() as i64,
            (p.c + p.c * p.r) as i64,
            &at,
        );
    }
    r
}

/// Runs one checker on one transcript.
pub fn run_checker(
    checker: Checker,
    t: &SessionTranscript,
    protocol: &dyn FeedbackProtocol,
    random_probes: usize,
) -> Result<CheckReport, HarnessError> {
    Ok(match checker {
        Checker::Correctness => check_correctness(t),
        Checker::Soundness => check_soundness(t, protocol, &probe_set(t, random_probes))?,
        Checker::Minigame => check_minigame(t),
        Checker::Progress => check_progress(t),
        Checker::Advance => check_advance(t),
        Checker::Accounting => check_accounting(t, protocol),
    })
}
