//! Sparse coin-position tracker.
//!
//! Every coin of an ordered set `S` has a non-negative position. The state
//! keeps explicit positions only for coins ever named in an update and a
//! single default position shared by all others, so `S` may be `{0,1}^k`
//! without materializing it. Coins are `u64` values ordered numerically.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{CoinGameError, ParseError};

/// Spaces up to this size may be ranked beyond the structural bound.
pub const ORACLE_SPACE_LIMIT: u64 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoinSpace {
    /// `{0,1}^bits`, as the integers `0..2^bits`.
    Binary(usize),
    /// `[n]`, as the integers `0..n`.
    Range(u64),
}

impl CoinSpace {
    pub fn size(self) -> u64 {
        match self {
            CoinSpace::Binary(bits) if bits >= 64 => u64::MAX,
            CoinSpace::Binary(bits) => 1u64 << bits,
            CoinSpace::Range(n) => n,
        }
    }

    pub fn contains(self, y: u64) -> bool {
        match self {
            CoinSpace::Binary(bits) if bits >= 64 => true,
            _ => y < self.size(),
        }
    }
}

/// How far rank queries may reach.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankPolicy {
    /// Ranks up to `t * K + margin`, never enumerating more non-exception
    /// coins than that.
    Bounded { margin: usize },
    /// Any rank in a space of at most [`ORACLE_SPACE_LIMIT`] coins.
    Oracle,
}

/// One applied update: the time it produced, the default increment and the
/// explicit increments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UpdateRecord {
    pub t: usize,
    pub default: u64,
    pub entries: Vec<(u64, u64)>,
}

impl fmt::Display for UpdateRecord {
    /// `t|V|y1:v1,y2:v2,...`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}|", self.t, self.default)?;
        for (i, (y, v)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{y}:{v}")?;
        }
        Ok(())
    }
}

impl FromStr for UpdateRecord {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let num = |t: &str| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| ParseError::BadNumber(t.to_string()))
        };
        let mut parts = s.trim().splitn(3, '|');
        let t = num(parts.next().ok_or(ParseError::MissingField("t"))?)? as usize;
        let default = num(parts.next().ok_or(ParseError::MissingField("V"))?)?;
        let list = parts.next().ok_or(ParseError::MissingField("entries"))?;
        let entries = list
            .split(',')
            .filter(|e| !e.trim().is_empty())
            .map(|e| {
                let (y, v) = e.split_once(':').ok_or(ParseError::MissingField("y:v"))?;
                Ok((num(y)?, num(v)?))
            })
            .collect::<Result<_, ParseError>>()?;
        Ok(Self {
            t,
            default,
            entries,
        })
    }
}

#[derive(Clone, Debug)]
pub struct CoinGameState {
    space: CoinSpace,
    cap_k: usize,
    t: usize,
    exceptions: BTreeMap<u64, u64>,
    default_pos: u64,
    increment_cap: Option<u64>,
    policy: RankPolicy,
    log: Option<Vec<UpdateRecord>>,
}

impl CoinGameState {
    /// A game at time 0 with every coin at position 0.
    pub fn new(space: CoinSpace, cap_k: usize) -> Result<Self, CoinGameError> {
        if cap_k == 0 {
            return Err(CoinGameError::ZeroCapacity);
        }
        if space.size() == 0 {
            return Err(CoinGameError::EmptySpace);
        }
        Ok(Self {
            space,
            cap_k,
            t: 0,
            exceptions: BTreeMap::new(),
            default_pos: 0,
            increment_cap: None,
            policy: RankPolicy::Bounded { margin: 0 },
            log: None,
        })
    }

    /// Rejects increments above `cap` in later updates.
    pub fn with_increment_cap(mut self, cap: u64) -> Self {
        self.increment_cap = Some(cap);
        self
    }

    pub fn with_rank_policy(mut self, policy: RankPolicy) -> Self {
        self.policy = policy;
        self
    }

    /// Keeps every update for later serialization.
    pub fn with_log(mut self) -> Self {
        self.log = Some(Vec::new());
        self
    }

    pub fn space(&self) -> CoinSpace {
        self.space
    }

    pub fn capacity(&self) -> usize {
        self.cap_k
    }

    pub fn time(&self) -> usize {
        self.t
    }

    pub fn default_position(&self) -> u64 {
        self.default_pos
    }

    pub fn exception_count(&self) -> usize {
        self.exceptions.len()
    }

    pub fn exceptions(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.exceptions.iter().map(|(&y, &p)| (y, p))
    }

    pub fn log(&self) -> Option<&[UpdateRecord]> {
        self.log.as_deref()
    }

    /// Current position of `y`.
    pub fn pos(&self, y: u64) -> Result<u64, CoinGameError> {
        if !self.space.contains(y) {
            return Err(CoinGameError::CoinOutsideSpace(y));
        }
        Ok(self.exceptions.get(&y).copied().unwrap_or(self.default_pos))
    }

    /// Largest rank the current policy answers.
    pub fn rank_limit(&self) -> usize {
        let size = self.space.size();
        let bound = match self.policy {
            RankPolicy::Bounded { margin } => (self.t * self.cap_k).saturating_add(margin) as u64,
            RankPolicy::Oracle if size <= ORACLE_SPACE_LIMIT => size,
            RankPolicy::Oracle => (self.t * self.cap_k) as u64,
        };
        bound.min(size) as usize
    }

    /// The `m` lowest coins with their positions, ordered by position and
    /// then by coin. Enumerates at most `m` coins outside the exceptions.
    pub fn lowest(&self, m: usize) -> Result<Vec<(u64, u64)>, CoinGameError> {
        let limit = self.rank_limit();
        if m > limit {
            return Err(CoinGameError::RankOutOfRange { rank: m, limit });
        }
        let mut merged: Vec<(u64, u64)> = self.exceptions.iter().map(|(&y, &p)| (p, y)).collect();
        let mut taken = 0;
        let mut y = 0u64;
        while taken < m && self.space.contains(y) && y < self.space.size() {
            if !self.exceptions.contains_key(&y) {
                merged.push((self.default_pos, y));
                taken += 1;
            }
            match y.checked_add(1) {
                Some(next) => y = next,
                None => break,
            }
        }
        merged.sort_unstable();
        merged.truncate(m);
        Ok(merged.into_iter().map(|(p, y)| (y, p)).collect())
    }

    /// The coin of rank `i` (1-based).
    pub fn xth(&self, i: usize) -> Result<u64, CoinGameError> {
        Ok(self.ranked(i)?.0)
    }

    /// Position of the coin of rank `i` (1-based).
    pub fn posx(&self, i: usize) -> Result<u64, CoinGameError> {
        Ok(self.ranked(i)?.1)
    }

    fn ranked(&self, i: usize) -> Result<(u64, u64), CoinGameError> {
        let limit = self.rank_limit();
        if i == 0 || i > limit {
            return Err(CoinGameError::RankOutOfRange { rank: i, limit });
        }
        Ok(self.lowest(i)?[i - 1])
    }

    /// Advances every listed coin by its increment and every other coin by
    /// `default`. Returns the new time.
    pub fn update(&mut self, list: &[(u64, i64)], default: i64) -> Result<usize, CoinGameError> {
        if list.len() > self.cap_k {
            return Err(CoinGameError::UpdateTooLarge {
                len: list.len(),
                cap: self.cap_k,
            });
        }
        let check = |v: i64| -> Result<u64, CoinGameError> {
            if v < 0 {
                return Err(CoinGameError::NegativeIncrement(v));
            }
            if let Some(cap) = self.increment_cap {
                if v as u64 > cap {
                    return Err(CoinGameError::IncrementAboveCap {
                        value: v,
                        cap: cap as i64,
                    });
                }
            }
            Ok(v as u64)
        };
        let default = check(default)?;
        let mut entries: BTreeMap<u64, u64> = BTreeMap::new();
        for &(y, v) in list {
            if !self.space.contains(y) {
                return Err(CoinGameError::CoinOutsideSpace(y));
            }
            if entries.insert(y, check(v)?).is_some() {
                return Err(CoinGameError::DuplicateCoin(y));
            }
        }
        for (y, p) in self.exceptions.iter_mut() {
            *p += entries.get(y).copied().unwrap_or(default);
        }
        for (&y, &v) in &entries {
            self.exceptions.entry(y).or_insert(self.default_pos + v);
        }
        self.default_pos += default;
        self.t += 1;
        debug_assert!(self.exceptions.len() <= self.t * self.cap_k);
        if let Some(log) = &mut self.log {
            log.push(UpdateRecord {
                t: self.t,
                default,
                entries: list.iter().map(|&(y, v)| (y, v as u64)).collect(),
            });
        }
        Ok(self.t)
    }

    /// Rebuilds a game by applying logged updates in order.
    pub fn replay(
        space: CoinSpace,
        cap_k: usize,
        records: &[UpdateRecord],
    ) -> Result<Self, CoinGameError> {
        let mut g = Self::new(space, cap_k)?.with_rank_policy(RankPolicy::Oracle);
        for r in records {
            let list: Vec<(u64, i64)> = r.entries.iter().map(|&(y, v)| (y, v as i64)).collect();
            g.update(&list, r.default as i64)?;
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn game(n: u64, k: usize) -> CoinGameState {
        CoinGameState::new(CoinSpace::Range(n), k)
            .unwrap()
            .with_rank_policy(RankPolicy::Oracle)
    }

    #[test]
    fn starts_at_zero() {
        let g = game(10, 3);
        assert!((0..10).all(|y| g.pos(y).unwrap() == 0));
        assert_eq!(g.xth(1).unwrap(), 0);
        assert_eq!(g.posx(1).unwrap(), 0);
        let big = CoinGameState::new(CoinSpace::Binary(20), 2).unwrap();
        assert_eq!(big.pos(123_456).unwrap(), 0);
        assert_eq!(
            CoinGameState::new(CoinSpace::Range(4), 0).unwrap_err(),
            CoinGameError::ZeroCapacity
        );
    }

    #[test]
    fn default_and_explicit_increments() {
        let mut g = game(10, 3);
        for _ in 0..3 {
            g.update(&[], 1).unwrap();
        }
        assert!((0..10).all(|y| g.pos(y).unwrap() == 3));
        let mut g = game(10, 3);
        g.update(&[(4, 0)], 1).unwrap();
        assert_eq!(g.pos(4).unwrap(), 0);
        assert_eq!(g.pos(5).unwrap(), 1);
        assert_eq!(g.xth(1).unwrap(), 4);
    }

    #[test]
    fn explicit_then_default() {
        let mut g = game(10, 3);
        g.update(&[(7, 2)], 0).unwrap();
        g.update(&[], 5).unwrap();
        assert_eq!(g.pos(7).unwrap(), 7);
    }

    #[test]
    fn posx_after_mixed_update() {
        let mut g = game(10, 3);
        g.update(&[(6, 2)], 5).unwrap();
        assert_eq!(g.posx(1).unwrap(), 2);
        assert_eq!(g.xth(1).unwrap(), 6);
        assert_eq!(g.xth(2).unwrap(), 0);
        let all: Vec<u64> = (1..=10).map(|i| g.posx(i).unwrap()).collect();
        assert!(all.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn ties_follow_coin_order() {
        let mut g = game(8, 2);
        g.update(&[(5, 1), (2, 1)], 1).unwrap();
        let order: Vec<u64> = (1..=8).map(|i| g.xth(i).unwrap()).collect();
        assert_eq!(order, (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn rejects_bad_updates() {
        let mut g = game(10, 2);
        assert_eq!(
            g.update(&[(1, 1), (2, 1), (3, 1)], 0),
            Err(CoinGameError::UpdateTooLarge { len: 3, cap: 2 })
        );
        assert_eq!(
            g.update(&[(1, 1), (1, 2)], 0),
            Err(CoinGameError::DuplicateCoin(1))
        );
        assert_eq!(
            g.update(&[(1, -1)], 0),
            Err(CoinGameError::NegativeIncrement(-1))
        );
        assert_eq!(
            g.update(&[(11, 1)], 0),
            Err(CoinGameError::CoinOutsideSpace(11))
        );
        assert_eq!(g.pos(10), Err(CoinGameError::CoinOutsideSpace(10)));
        let mut capped = game(10, 2).with_increment_cap(4);
        assert!(matches!(
            capped.update(&[], 5),
            Err(CoinGameError::IncrementAboveCap { .. })
        ));
        assert_eq!(g.time(), 0);
    }

    #[test]
    fn bounded_ranks() {
        let mut g = CoinGameState::new(CoinSpace::Binary(30), 2).unwrap();
        assert!(g.xth(1).is_err());
        g.update(&[(9, 0)], 3).unwrap();
        assert_eq!(g.rank_limit(), 2);
        assert_eq!(g.xth(1).unwrap(), 9);
        assert_eq!(g.xth(2).unwrap(), 0);
        assert!(g.xth(3).is_err());
    }

    #[test]
    fn log_round_trip() {
        let mut g = game(16, 2).with_log();
        g.update(&[(3, 4), (1, 0)], 2).unwrap();
        g.update(&[], 1).unwrap();
        let lines: Vec<String> = g.log().unwrap().iter().map(|r| r.to_string()).collect();
        assert_eq!(lines, vec!["1|2|3:4,1:0".to_string(), "2|1|".to_string()]);
        let parsed: Vec<UpdateRecord> = lines.iter().map(|l| l.parse().unwrap()).collect();
        let back = CoinGameState::replay(CoinSpace::Range(16), 2, &parsed).unwrap();
        for y in 0..16 {
            assert_eq!(back.pos(y).unwrap(), g.pos(y).unwrap());
        }
    }
}
