//! Protocol parameters shared by the CLI, transcripts and the harness.

use std::fmt;
use std::str::FromStr;

use crate::error::ParseError;
use crate::ratio::{format_ratio, parse_ratio, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProtocolKind {
    Erasure,
    Error,
    Rewind,
    Plain,
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProtocolKind::Erasure => "erasure",
            ProtocolKind::Error => "error",
            ProtocolKind::Rewind => "rewind",
            ProtocolKind::Plain => "plain",
        })
    }
}

impl FromStr for ProtocolKind {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "erasure" => Ok(ProtocolKind::Erasure),
            "error" => Ok(ProtocolKind::Error),
            "rewind" => Ok(ProtocolKind::Rewind),
            "plain" => Ok(ProtocolKind::Plain),
            other => Err(ParseError::UnknownName(other.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    /// Constants from the protocol statements.
    Paper,
    /// Chunk, round and list parameters chosen by the caller.
    #[default]
    Desk,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Paper => "paper",
            Mode::Desk => "desk",
        })
    }
}

impl FromStr for Mode {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(Mode::Paper),
            "desk" => Ok(Mode::Desk),
            other => Err(ParseError::UnknownName(other.to_string())),
        }
    }
}

/// Desk-mode choices; `None` falls back to the derived default.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DeskOverrides {
    pub c: Option<usize>,
    pub r: Option<usize>,
    pub l: Option<usize>,
    pub t: Option<usize>,
}

/// Parameters of one protocol instance. Fields a protocol does not use are 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProtocolParams {
    pub kind: ProtocolKind,
    pub k: usize,
    pub eps: Rational,
    pub mode: Mode,
    /// Chunks.
    pub c: usize,
    /// Rounds per chunk.
    pub r: usize,
    /// Round message length in bits.
    pub m: usize,
    /// List bound `L_eps`.
    pub l: usize,
    /// Erasure-protocol rounds, or rewind rounds `k/eps`.
    pub t: usize,
    /// Erasure feedback length per round.
    pub beta: usize,
    /// Block length of the underlying code.
    pub n0: usize,
}

impl ProtocolParams {
    pub fn new(kind: ProtocolKind, k: usize, eps: Rational, mode: Mode) -> Self {
        Self {
            kind,
            k,
            eps,
            mode,
            c: 0,
            r: 0,
            m: 0,
            l: 0,
            t: 0,
            beta: 0,
            n0: 0,
        }
    }
}

impl fmt::Display for ProtocolParams {
    /// `key=value` pairs separated by spaces.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "protocol={} k={} eps={} mode={} C={} R={} M={} L={} T={} beta={} n0={}",
            self.kind,
            self.k,
            format_ratio(self.eps),
            self.mode,
            self.c,
            self.r,
            self.m,
            self.l,
            self.t,
            self.beta,
            self.n0
        )
    }
}

impl FromStr for ProtocolParams {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = ProtocolParams::new(
            ProtocolKind::Plain,
            0,
            Rational::from_integer(0),
            Mode::Desk,
        );
        let mut seen_kind = false;
        for token in s.split_whitespace() {
            let Some((key, value)) = token.split_once('=') else {
                continue;
            };
            let num = || {
                value
                    .parse::<usize>()
                    .map_err(|_| ParseError::BadNumber(value.to_string()))
            };
            match key {
                "protocol" => {
                    p.kind = value.parse()?;
                    seen_kind = true;
                }
                "k" => p.k = num()?,
                "eps" => p.eps = parse_ratio(value)?,
                "mode" => p.mode = value.parse()?,
                "C" => p.c = num()?,
                "R" => p.r = num()?,
                "M" => p.m = num()?,
                "L" => p.l = num()?,
                "T" => p.t = num()?,
                "beta" => p.beta = num()?,
                "n0" => p.n0 = num()?,
                _ => {}
            }
        }
        if !seen_kind {
            return Err(ParseError::MissingField("protocol"));
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::rat;

    #[test]
    fn params_round_trip() {
        let mut p = ProtocolParams::new(ProtocolKind::Error, 8, rat(1, 10), Mode::Desk);
        p.c = 3;
        p.r = 4;
        p.m = 1125;
        p.l = 4;
        p.n0 = 375;
        let back: ProtocolParams = p.to_string().parse().unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn names() {
        for k in [
            ProtocolKind::Erasure,
            ProtocolKind::Error,
            ProtocolKind::Rewind,
            ProtocolKind::Plain,
        ] {
            assert_eq!(k.to_string().parse::<ProtocolKind>().unwrap(), k);
        }
        assert!("x".parse::<Mode>().is_err());
    }
}
