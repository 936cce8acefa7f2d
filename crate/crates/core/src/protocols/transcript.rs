//! Session transcripts and their line-oriented text form.
//!
//! ```text
//! FECC protocol=error k=8 ... adversary=none seed=0 input=a5 budget=inf spent=0 truncated=0
//! 0|9:1f0,24:000000|375:...|...|0
//! ...
//! 24|-|||0
//! CORRUPT 0||flip
//! CHUNK ...
//! MINI ...
//! MAIN t|V|y:v,...
//! FLAG text
//! OUTPUT a5 CORRECT 1
//! ```
//!
//! Round lines are `round|feedback|alice_sent|bob_received|corrupt_count`.
//! The feedback field lists the slots Bob sent just before the round as
//! comma-separated `len:hex`, or `-`. A final round line with empty message
//! fields carries feedback sent after the last round.

use std::fmt;
use std::str::FromStr;

use crate::bits::{message_from_hex, message_hex, BitString, Message, TriBitString};
use crate::channel::{CorruptionKind, CorruptionRecord};
use crate::coin_game::UpdateRecord;
use crate::error::ParseError;

use super::params::ProtocolParams;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundRecord {
    /// Feedback slots Bob sent just before this round.
    pub feedback: Vec<BitString>,
    pub sent: BitString,
    pub received: TriBitString,
    pub corruption: usize,
}

/// One minigame round of an error-protocol chunk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MiniRound {
    /// `f(i)` for sets `1..=D`.
    pub f: Vec<u8>,
    /// Class-1 messages within the class-1 radius, with distances.
    pub lambda: Vec<(Message, usize)>,
    pub d2: usize,
    pub d3: usize,
    /// Increment of every set.
    pub v: Vec<u64>,
}

/// Bob's record of one error-protocol chunk.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ChunkRecord {
    /// 1-based chunk index.
    pub chunk: usize,
    /// 1, 2 or 3.
    pub case: u8,
    /// Case 1: the differing index and the two counts.
    pub a: Option<usize>,
    pub b: Option<(u64, u64)>,
    /// Case 2: the decoded list with distances.
    pub list: Vec<(Message, usize)>,
    /// Case 3: the ranked coins `x_main(1..D)`.
    pub ranked: Vec<Message>,
    pub mini: Vec<MiniRound>,
    /// Case 3: final minigame position of every set.
    pub mini_final: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ErrorDetails {
    pub chunks: Vec<ChunkRecord>,
    /// Main coin game updates, one per chunk.
    pub main_log: Vec<UpdateRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SessionTranscript {
    pub params: ProtocolParams,
    pub adversary: String,
    pub seed: u64,
    pub input: Message,
    pub rounds: Vec<RoundRecord>,
    /// Feedback slots sent after the last round.
    pub trailing_feedback: Vec<BitString>,
    pub output: Message,
    pub correct: bool,
    pub corruption_kind: CorruptionKind,
    pub corruption_log: Vec<CorruptionRecord>,
    /// `None` for an unbounded adversary.
    pub budget_limit: Option<usize>,
    pub budget_spent: usize,
    /// Whether lenient budget mode cut any round short.
    pub truncated: bool,
    /// Protocol anomalies, such as an undecodable erasure round.
    pub flags: Vec<String>,
    pub error_details: Option<ErrorDetails>,
}

impl SessionTranscript {
    /// Every feedback slot in order.
    pub fn feedback_slots(&self) -> impl Iterator<Item = &BitString> {
        self.rounds
            .iter()
            .flat_map(|r| r.feedback.iter())
            .chain(self.trailing_feedback.iter())
    }

    /// `ζ`, total feedback bits.
    pub fn zeta(&self) -> usize {
        self.feedback_slots().map(|s| s.len()).sum()
    }

    /// `ρ`, number of feedback slots.
    pub fn rho(&self) -> usize {
        self.feedback_slots().count()
    }

    /// `|FC|`, total bits Alice sent.
    pub fn alice_bits(&self) -> usize {
        self.rounds.iter().map(|r| r.sent.len()).sum()
    }

    pub fn total_corruption(&self) -> usize {
        self.rounds.iter().map(|r| r.corruption).sum()
    }

    /// Corrupted fraction of Alice's bits.
    pub fn corruption_fraction(&self) -> f64 {
        let n = self.alice_bits();
        if n == 0 {
            0.0
        } else {
            self.total_corruption() as f64 / n as f64
        }
    }

    /// Feedback slots sent before round `round`.
    pub fn feedback_before(&self, round: usize) -> Vec<BitString> {
        self.rounds[..round]
            .iter()
            .flat_map(|r| r.feedback.iter().cloned())
            .chain(self.rounds[round].feedback.iter().cloned())
            .collect()
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

fn feedback_field(slots: &[BitString]) -> String {
    if slots.is_empty() {
        "-".into()
    } else {
        slots
            .iter()
            .map(|s| s.to_framed_hex())
            .collect::<Vec<_>>()
            .join(",")
    }
}

fn parse_feedback(field: &str) -> Result<Vec<BitString>, ParseError> {
    if field == "-" || field.is_empty() {
        return Ok(Vec::new());
    }
    field.split(',').map(BitString::from_framed_hex).collect()
}

fn pairs<T: fmt::Display, U: fmt::Display>(items: &[(T, U)]) -> String {
    items
        .iter()
        .map(|(a, b)| format!("{a}:{b}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn list<T: fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|a| a.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_num<T: FromStr>(s: &str) -> Result<T, ParseError> {
    s.trim()
        .parse()
        .map_err(|_| ParseError::BadNumber(s.to_string()))
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, ParseError> {
    s.split(',')
        .filter(|t| !t.is_empty())
        .map(parse_num)
        .collect()
}

fn parse_pairs<T: FromStr, U: FromStr>(s: &str) -> Result<Vec<(T, U)>, ParseError> {
    s.split(',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            let (a, b) = t.split_once(':').ok_or(ParseError::MissingField("a:b"))?;
            Ok((parse_num(a)?, parse_num(b)?))
        })
        .collect()
}

impl fmt::Display for SessionTranscript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let budget = self
            .budget_limit
            .map_or("inf".to_string(), |b| b.to_string());
        writeln!(
            f,
            "FECC {} adversary={} seed={} input={} kind={} budget={} spent={} truncated={}",
            self.params,
            self.adversary.replace(char::is_whitespace, "_"),
            self.seed,
            message_hex(self.input, self.params.k),
            self.corruption_kind,
            budget,
            self.budget_spent,
            u8::from(self.truncated)
        )?;
        for (i, r) in self.rounds.iter().enumerate() {
            writeln!(
                f,
                "{}|{}|{}|{}|{}",
                i,
                feedback_field(&r.feedback),
                r.sent.to_framed_hex(),
                r.received.to_hex(),
                r.corruption
            )?;
        }
        if !self.trailing_feedback.is_empty() {
            writeln!(
                f,
                "{}|{}|||0",
                self.rounds.len(),
                feedback_field(&self.trailing_feedback)
            )?;
        }
        for c in &self.corruption_log {
            writeln!(f, "CORRUPT {c}")?;
        }
        if let Some(d) = &self.error_details {
            for c in &d.chunks {
                let a = c.a.map_or("-".to_string(), |a| a.to_string());
                let b = c.b.map_or("-".to_string(), |(b1, b2)| format!("{b1},{b2}"));
                writeln!(
                    f,
                    "CHUNK {}|{}|{}|{}|{}|{}|{}",
                    c.chunk,
                    c.case,
                    a,
                    b,
                    pairs(&c.list),
                    list(&c.ranked),
                    list(&c.mini_final)
                )?;
                for (tau, m) in c.mini.iter().enumerate() {
                    let classes: String = m.f.iter().map(|c| char::from(b'0' + c)).collect();
                    writeln!(
                        f,
                        "MINI {}|{}|{}|{}|{}|{}|{}",
                        c.chunk,
                        tau,
                        classes,
                        pairs(&m.lambda),
                        m.d2,
                        m.d3,
                        list(&m.v)
                    )?;
                }
            }
            for u in &d.main_log {
                writeln!(f, "MAIN {u}")?;
            }
        }
        for flag in &self.flags {
            writeln!(f, "FLAG {flag}")?;
        }
        writeln!(
            f,
            "OUTPUT {} CORRECT {}",
            message_hex(self.output, self.params.k),
            u8::from(self.correct)
        )
    }
}

fn bad(line: usize, reason: impl Into<String>) -> ParseError {
    ParseError::BadLine {
        line: line + 1,
        reason: reason.into(),
    }
}

fn parse_chunk(body: &str) -> Result<ChunkRecord, ParseError> {
    let f: Vec<&str> = body.split('|').collect();
    if f.len() != 7 {
        return Err(ParseError::MissingField("chunk fields"));
    }
    let b = match f[3] {
        "-" => None,
        s => {
            let v: Vec<u64> = parse_list(s)?;
            if v.len() != 2 {
                return Err(ParseError::MissingField("b1,b2"));
            }
            Some((v[0], v[1]))
        }
    };
    Ok(ChunkRecord {
        chunk: parse_num(f[0])?,
        case: parse_num(f[1])?,
        a: if f[2] == "-" {
            None
        } else {
            Some(parse_num(f[2])?)
        },
        b,
        list: parse_pairs(f[4])?,
        ranked: parse_list(f[5])?,
        mini: Vec::new(),
        mini_final: parse_list(f[6])?,
    })
}

fn parse_mini(body: &str) -> Result<(usize, MiniRound), ParseError> {
    let f: Vec<&str> = body.split('|').collect();
    if f.len() != 7 {
        return Err(ParseError::MissingField("mini fields"));
    }
    let classes = f[2]
        .chars()
        .map(|c| match c {
            '1'..='3' => Ok(c as u8 - b'0'),
            other => Err(ParseError::BadDigit(other)),
        })
        .collect::<Result<_, _>>()?;
    Ok((
        parse_num(f[0])?,
        MiniRound {
            f: classes,
            lambda: parse_pairs(f[3])?,
            d2: parse_num(f[4])?,
            d3: parse_num(f[5])?,
            v: parse_list(f[6])?,
        },
    ))
}

impl FromStr for SessionTranscript {
    type Err = ParseError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(ParseError::MissingField("header"))?;
        let header = header
            .strip_prefix("FECC ")
            .ok_or(bad(0, "missing FECC header"))?;
        let params: ProtocolParams = header.parse()?;
        let field = |key: &str| -> Result<&str, ParseError> {
            header
                .split_whitespace()
                .find_map(|t| t.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
                .ok_or(ParseError::MissingField("header field"))
        };
        let adversary = field("adversary")?.to_string();
        let seed = parse_num(field("seed")?)?;
        let input = message_from_hex(field("input")?, params.k)?;
        let corruption_kind = match field("kind")? {
            "flip" => CorruptionKind::Flip,
            "erase" => CorruptionKind::Erase,
            other => return Err(ParseError::UnknownName(other.to_string())),
        };
        let budget_limit = match field("budget")? {
            "inf" => None,
            v => Some(parse_num(v)?),
        };
        let budget_spent = parse_num(field("spent")?)?;
        let truncated = field("truncated")? == "1";

        let mut t = SessionTranscript {
            params,
            adversary,
            seed,
            input,
            rounds: Vec::new(),
            trailing_feedback: Vec::new(),
            output: 0,
            correct: false,
            corruption_kind,
            corruption_log: Vec::new(),
            budget_limit,
            budget_spent,
            truncated,
            flags: Vec::new(),
            error_details: None,
        };
        let mut saw_output = false;
        for (n, line) in lines {
            if line.is_empty() {
                continue;
            }
            let (tag, body) = line.split_once(' ').unwrap_or((line, ""));
            match tag {
                "CORRUPT" => {
                    let f: Vec<&str> = body.split('|').collect();
                    if f.len() != 3 {
                        return Err(bad(n, "corruption record"));
                    }
                    t.corruption_log.push(CorruptionRecord {
                        round: parse_num(f[0])?,
                        positions: parse_list(f[1])?,
                        kind: if f[2] == "erase" {
                            CorruptionKind::Erase
                        } else {
                            CorruptionKind::Flip
                        },
                    });
                }
                "CHUNK" => {
                    let c = parse_chunk(body).map_err(|e| bad(n, e.to_string()))?;
                    t.error_details
                        .get_or_insert_with(Default::default)
                        .chunks
                        .push(c);
                }
                "MINI" => {
                    let (chunk, m) = parse_mini(body).map_err(|e| bad(n, e.to_string()))?;
                    let d = t.error_details.get_or_insert_with(Default::default);
                    let c = d
                        .chunks
                        .iter_mut()
                        .find(|c| c.chunk == chunk)
                        .ok_or(bad(n, "minigame round before its chunk"))?;
                    c.mini.push(m);
                }
                "MAIN" => {
                    let u: UpdateRecord = body.parse()?;
                    t.error_details
                        .get_or_insert_with(Default::default)
                        .main_log
                        .push(u);
                }
                "FLAG" => t.flags.push(body.to_string()),
                "OUTPUT" => {
                    let f: Vec<&str> = body.split_whitespace().collect();
                    if f.len() != 3 || f[1] != "CORRECT" {
                        return Err(bad(n, "output line"));
                    }
                    t.output = message_from_hex(f[0], t.params.k)?;
                    t.correct = f[2] == "1";
                    saw_output = true;
                }
                _ => {
                    let f: Vec<&str> = line.split('|').collect();
                    if f.len() != 5 {
                        return Err(bad(n, "round line"));
                    }
                    let feedback = parse_feedback(f[1])?;
                    if f[2].is_empty() {
                        t.trailing_feedback = feedback;
                        continue;
                    }
                    let sent = BitString::from_framed_hex(f[2])?;
                    let received = TriBitString::from_hex(f[3], sent.len())?;
                    t.rounds.push(RoundRecord {
                        feedback,
                        sent,
                        received,
                        corruption: parse_num(f[4])?,
                    });
                }
            }
        }
        if !saw_output {
            return Err(ParseError::MissingField("OUTPUT"));
        }
        Ok(t)
    }
}
