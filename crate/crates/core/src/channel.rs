//! The adversarial forward channel.
//!
//! Each round Alice's message passes through an adversary that may flip or
//! erase symbols under a global budget. Adversaries see Alice's input, every
//! feedback string so far and can ask what Alice would send this round for
//! any other input. Feedback never passes through this module.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::{message_from_hex, BitString, Message, TriBitString};
use crate::error::ChannelError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorruptionKind {
    Flip,
    Erase,
}

impl fmt::Display for CorruptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorruptionKind::Flip => "flip",
            CorruptionKind::Erase => "erase",
        })
    }
}

/// Global corruption allowance for one session.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AdversaryBudget {
    pub kind: CorruptionKind,
    pub limit: usize,
    pub spent: usize,
}

impl AdversaryBudget {
    pub fn new(kind: CorruptionKind, limit: usize) -> Self {
        Self {
            kind,
            limit,
            spent: 0,
        }
    }

    pub fn unbounded(kind: CorruptionKind) -> Self {
        Self::new(kind, usize::MAX)
    }

    pub fn remaining(&self) -> usize {
        self.limit - self.spent
    }
}

/// What happens when an adversary asks for more than the remaining budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BudgetMode {
    #[default]
    Strict,
    /// Keep the first positions in the adversary's priority order and raise
    /// a flag.
    Lenient,
}

/// Everything an adversary may look at before corrupting one round.
pub struct RoundContext<'a> {
    pub round: usize,
    pub k: usize,
    pub alice_input: Message,
    pub sent: &'a BitString,
    /// Every feedback string Bob has sent so far, in order.
    pub feedback: &'a [BitString],
    /// Alice's message this round had her input been the argument.
    pub alice: &'a (dyn Fn(Message) -> BitString + Sync),
}

pub trait Adversary: Send {
    fn kind(&self) -> CorruptionKind;

    /// Positions to corrupt this round, most important first. `remaining` is
    /// the budget left; well-behaved strategies stay within it.
    fn choose(&mut self, ctx: &RoundContext<'_>, remaining: usize) -> Vec<usize>;

    fn name(&self) -> String;
}

/// One round as seen on the channel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChannelView {
    pub round: usize,
    pub alice_sent: BitString,
    pub bob_received: TriBitString,
    pub corruption: usize,
}

/// Per-round corruption record, serialized as `round|positions|kind`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorruptionRecord {
    pub round: usize,
    pub positions: Vec<usize>,
    pub kind: CorruptionKind,
}

impl fmt::Display for CorruptionRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pos: Vec<String> = self.positions.iter().map(|p| p.to_string()).collect();
        write!(f, "{}|{}|{}", self.round, pos.join(","), self.kind)
    }
}

/// Result of one transmission.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transmission {
    pub received: TriBitString,
    /// Corrupted positions in the adversary's order.
    pub positions: Vec<usize>,
    /// Whether lenient mode cut the adversary's request short.
    pub truncated: bool,
}

/// Applies the adversary's choice to `sent` and charges the budget.
pub fn transmit(
    ctx: &RoundContext<'_>,
    adversary: &mut dyn Adversary,
    budget: &mut AdversaryBudget,
    mode: BudgetMode,
) -> Result<Transmission, ChannelError> {
    if adversary.kind() != budget.kind {
        return Err(ChannelError::BadParameters(format!(
            "{} adversary on a {} budget",
            adversary.kind(),
            budget.kind
        )));
    }
    let sent = ctx.sent;
    let mut positions = adversary.choose(ctx, budget.remaining());
    let mut seen = vec![false; sent.len()];
    let mut distinct = Vec::with_capacity(positions.len());
    for p in positions.drain(..) {
        if p >= sent.len() {
            return Err(ChannelError::BadPosition {
                position: p,
                len: sent.len(),
            });
        }
        if !seen[p] {
            seen[p] = true;
            distinct.push(p);
        }
    }
    let mut truncated = false;
    if distinct.len() > budget.remaining() {
        match mode {
            BudgetMode::Strict => {
                return Err(ChannelError::BudgetExceeded {
                    requested: distinct.len(),
                    remaining: budget.remaining(),
                })
            }
            BudgetMode::Lenient => {
                distinct.truncate(budget.remaining());
                truncated = true;
            }
        }
    }
    let mut received = TriBitString::from_bits(sent.clone());
    for &p in &distinct {
        match budget.kind {
            CorruptionKind::Flip => received.flip(p),
            CorruptionKind::Erase => received.erase(p),
        }
    }
    budget.spent += distinct.len();
    Ok(Transmission {
        received,
        positions: distinct,
        truncated,
    })
}

/// A channel bound to one adversary and budget, with its corruption log.
pub struct Channel {
    adversary: Box<dyn Adversary>,
    budget: AdversaryBudget,
    mode: BudgetMode,
    log: Vec<CorruptionRecord>,
    truncated: bool,
}

impl Channel {
    pub fn new(adversary: Box<dyn Adversary>, budget: AdversaryBudget, mode: BudgetMode) -> Self {
        Self {
            adversary,
            budget,
            mode,
            log: Vec::new(),
            truncated: false,
        }
    }

    pub fn kind(&self) -> CorruptionKind {
        self.budget.kind
    }

    pub fn budget(&self) -> &AdversaryBudget {
        &self.budget
    }

    pub fn adversary_name(&self) -> String {
        self.adversary.name()
    }

    pub fn log(&self) -> &[CorruptionRecord] {
        &self.log
    }

    /// Whether any round was truncated in lenient mode.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn transmit(&mut self, ctx: &RoundContext<'_>) -> Result<ChannelView, ChannelError> {
        let t = transmit(ctx, self.adversary.as_mut(), &mut self.budget, self.mode)?;
        self.truncated |= t.truncated;
        let corruption = t.positions.len();
        self.log.push(CorruptionRecord {
            round: ctx.round,
            positions: t.positions,
            kind: self.budget.kind,
        });
        Ok(ChannelView {
            round: ctx.round,
            alice_sent: ctx.sent.clone(),
            bob_received: t.received,
            corruption,
        })
    }
}

/// Leaves every round untouched.
pub struct Passthrough(pub CorruptionKind);

impl Adversary for Passthrough {
    fn kind(&self) -> CorruptionKind {
        self.0
    }

    fn choose(&mut self, _: &RoundContext<'_>, _: usize) -> Vec<usize> {
        Vec::new()
    }

    fn name(&self) -> String {
        "none".into()
    }
}

/// Corrupts each symbol independently with probability `p`, within budget.
pub struct RandomAdversary {
    kind: CorruptionKind,
    p: f64,
    rng: ChaCha8Rng,
}

pub fn adversary_random(
    kind: CorruptionKind,
    p: f64,
    seed: u64,
) -> Result<RandomAdversary, ChannelError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ChannelError::BadParameters(format!(
            "probability {p} outside [0,1]"
        )));
    }
    Ok(RandomAdversary {
        kind,
        p,
        rng: ChaCha8Rng::seed_from_u64(seed),
    })
}

impl Adversary for RandomAdversary {
    fn kind(&self) -> CorruptionKind {
        self.kind
    }

    fn choose(&mut self, ctx: &RoundContext<'_>, remaining: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for i in 0..ctx.sent.len() {
            if self.rng.gen_bool(self.p) && out.len() < remaining {
                out.push(i);
            }
        }
        out
    }

    fn name(&self) -> String {
        format!("random:p={}", self.p)
    }
}

/// Corrupts every symbol of every round, ignoring the budget.
pub struct AllAdversary(pub CorruptionKind);

impl Adversary for AllAdversary {
    fn kind(&self) -> CorruptionKind {
        self.0
    }

    fn choose(&mut self, ctx: &RoundContext<'_>, _: usize) -> Vec<usize> {
        (0..ctx.sent.len()).collect()
    }

    fn name(&self) -> String {
        match self.0 {
            CorruptionKind::Flip => "flip-all".into(),
            CorruptionKind::Erase => "erase-all".into(),
        }
    }
}

/// Flips Alice's symbols to those she would send with `target` as input,
/// tracking the cumulative cost.
pub struct Impersonate {
    target: Message,
    cost: usize,
}

pub fn adversary_impersonate(target: Message) -> Impersonate {
    Impersonate { target, cost: 0 }
}

impl Impersonate {
    /// Flips spent so far.
    pub fn cost(&self) -> usize {
        self.cost
    }
}

impl Adversary for Impersonate {
    fn kind(&self) -> CorruptionKind {
        CorruptionKind::Flip
    }

    fn choose(&mut self, ctx: &RoundContext<'_>, remaining: usize) -> Vec<usize> {
        let want = (ctx.alice)(self.target);
        let out: Vec<usize> = differing(ctx.sent, &want).take(remaining).collect();
        self.cost += out.len();
        out
    }

    fn name(&self) -> String {
        format!("impersonate:target={}", self.target)
    }
}

/// Each round, moves the received word toward the message shared by the most
/// probe inputs among those that differ from what Alice sent. In a minigame
/// round that is one of the class words; in a single-bit round it is the
/// opposite bit.
pub struct ClassFlood {
    probes: Vec<Message>,
    seed: u64,
    probe_count: usize,
}

impl ClassFlood {
    pub fn new(probe_count: usize, seed: u64) -> Self {
        Self {
            probes: Vec::new(),
            seed,
            probe_count,
        }
    }
}

impl Adversary for ClassFlood {
    fn kind(&self) -> CorruptionKind {
        CorruptionKind::Flip
    }

    fn choose(&mut self, ctx: &RoundContext<'_>, remaining: usize) -> Vec<usize> {
        if self.probes.is_empty() {
            self.probes = probe_inputs(ctx.k, ctx.alice_input, self.probe_count, self.seed);
        }
        let mut counts: Vec<(BitString, usize)> = Vec::new();
        for &y in &self.probes {
            let w = (ctx.alice)(y);
            if w == *ctx.sent {
                continue;
            }
            match counts.iter_mut().find(|(c, _)| *c == w) {
                Some((_, n)) => *n += 1,
                None => counts.push((w, 1)),
            }
        }
        let Some(target) = counts
            .into_iter()
            .max_by(|a, b| {
                a.1.cmp(&b.1)
                    .then_with(|| b.0.distance(ctx.sent).cmp(&a.0.distance(ctx.sent)))
            })
            .map(|(w, _)| w)
        else {
            return Vec::new();
        };
        differing(ctx.sent, &target).take(remaining).collect()
    }

    fn name(&self) -> String {
        format!("class-flood:probes={}", self.probe_count)
    }
}

/// Each round, flips half of the positions where Alice's message differs
/// from the nearest probe input's message, so the received word sits at the
/// midpoint of the two.
pub struct Midpoint {
    probes: Vec<Message>,
    seed: u64,
    probe_count: usize,
}

impl Midpoint {
    pub fn new(probe_count: usize, seed: u64) -> Self {
        Self {
            probes: Vec::new(),
            seed,
            probe_count,
        }
    }
}

impl Adversary for Midpoint {
    fn kind(&self) -> CorruptionKind {
        CorruptionKind::Flip
    }

    fn choose(&mut self, ctx: &RoundContext<'_>, remaining: usize) -> Vec<usize> {
        if self.probes.is_empty() {
            self.probes = probe_inputs(ctx.k, ctx.alice_input, self.probe_count, self.seed);
        }
        let nearest = self
            .probes
            .iter()
            .map(|&y| (ctx.alice)(y))
            .filter(|w| w != ctx.sent)
            .min_by_key(|w| w.distance(ctx.sent));
        let Some(w) = nearest else {
            return Vec::new();
        };
        let diff: Vec<usize> = differing(ctx.sent, &w).collect();
        let half = diff.len() / 2;
        diff.into_iter().take(half.min(remaining)).collect()
    }

    fn name(&self) -> String {
        format!("midpoint:probes={}", self.probe_count)
    }
}

/// Picks two other inputs once per session and each round delivers the
/// bitwise majority of the three messages, keeping all three candidates
/// equally plausible.
pub struct TripleMix {
    others: Vec<Message>,
    seed: u64,
}

impl TripleMix {
    pub fn new(seed: u64) -> Self {
        Self {
            others: Vec::new(),
            seed,
        }
    }
}

impl Adversary for TripleMix {
    fn kind(&self) -> CorruptionKind {
        CorruptionKind::Flip
    }

    fn choose(&mut self, ctx: &RoundContext<'_>, remaining: usize) -> Vec<usize> {
        if self.others.is_empty() {
            self.others = probe_inputs(ctx.k, ctx.alice_input, 2, self.seed);
        }
        let words: Vec<BitString> = self.others.iter().map(|&y| (ctx.alice)(y)).collect();
        let sent = ctx.sent;
        (0..sent.len())
            .filter(|&i| {
                let ones = usize::from(sent.get(i)) + words.iter().filter(|w| w.get(i)).count();
                (2 * ones > words.len() + 1) != sent.get(i)
            })
            .take(remaining)
            .collect()
    }

    fn name(&self) -> String {
        "triple-mix".into()
    }
}

/// Erases whole rounds from the first one on while the budget allows, then
/// spends what is left on the next round.
pub struct EraseDensest;

impl Adversary for EraseDensest {
    fn kind(&self) -> CorruptionKind {
        CorruptionKind::Erase
    }

    fn choose(&mut self, ctx: &RoundContext<'_>, remaining: usize) -> Vec<usize> {
        (0..ctx.sent.len().min(remaining)).collect()
    }

    fn name(&self) -> String {
        "erase-densest".into()
    }
}

/// Corrupts a contiguous block of Alice's overall stream, counting symbols
/// across rounds.
pub struct Burst {
    kind: CorruptionKind,
    start: usize,
    len: usize,
    offset: usize,
}

impl Adversary for Burst {
    fn kind(&self) -> CorruptionKind {
        self.kind
    }

    fn choose(&mut self, ctx: &RoundContext<'_>, remaining: usize) -> Vec<usize> {
        let n = ctx.sent.len();
        let lo = self.start.max(self.offset);
        let hi = (self.start + self.len).min(self.offset + n);
        let out: Vec<usize> = (lo..hi.max(lo))
            .map(|g| g - self.offset)
            .take(remaining)
            .collect();
        self.offset += n;
        out
    }

    fn name(&self) -> String {
        format!("burst:start={},len={}", self.start, self.len)
    }
}

fn differing<'a>(a: &'a BitString, b: &'a BitString) -> impl Iterator<Item = usize> + 'a {
    (0..a.len()).filter(move |&i| a.get(i) != b.get(i))
}

/// Up to `count` distinct inputs other than `x`, seeded; all of them when
/// the space is that small.
pub fn probe_inputs(k: usize, x: Message, count: usize, seed: u64) -> Vec<Message> {
    let space = if k >= 64 { u64::MAX } else { 1u64 << k };
    if space - 1 <= count as u64 {
        return (0..space).filter(|&y| y != x).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ x.rotate_left(17));
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let y = if k >= 64 {
            rng.gen()
        } else {
            rng.gen_range(0..space)
        };
        if y != x && !out.contains(&y) {
            out.push(y);
        }
    }
    out
}

/// Builds an adversary from `name[:key=value,...]`. `kind` is the channel
/// kind of the protocol; `seed` feeds randomized strategies.
pub fn parse_adversary(
    spec: &str,
    kind: CorruptionKind,
    k: usize,
    seed: u64,
) -> Result<Box<dyn Adversary>, ChannelError> {
    let (name, params) = spec.split_once(':').unwrap_or((spec, ""));
    let mut kv: Vec<(&str, &str)> = Vec::new();
    for part in params.split(',').filter(|p| !p.trim().is_empty()) {
        let (key, value) = part.split_once('=').ok_or_else(|| {
            ChannelError::BadParameters(format!("expected key=value, got {part:?}"))
        })?;
        kv.push((key.trim(), value.trim()));
    }
    let get = |key: &str| kv.iter().find(|(k, _)| *k == key).map(|(_, v)| *v);
    let num = |key: &str, default: usize| -> Result<usize, ChannelError> {
        get(key).map_or(Ok(default), |v| {
            v.parse()
                .map_err(|_| ChannelError::BadParameters(format!("{key}={v} is not a number")))
        })
    };
    let flip_only = |adv: Box<dyn Adversary>| {
        if kind == CorruptionKind::Flip {
            Ok(adv)
        } else {
            Err(ChannelError::BadParameters(format!(
                "{name} only flips bits"
            )))
        }
    };
    match name.trim() {
        "none" | "passthrough" => Ok(Box::new(Passthrough(kind))),
        "random" => {
            let p: f64 = get("p")
                .unwrap_or("0.1")
                .parse()
                .map_err(|_| ChannelError::BadParameters("p is not a number".into()))?;
            Ok(Box::new(adversary_random(kind, p, seed)?))
        }
        "flip-all" => flip_only(Box::new(AllAdversary(CorruptionKind::Flip))),
        "erase-all" if kind == CorruptionKind::Erase => Ok(Box::new(AllAdversary(kind))),
        "erase-densest" if kind == CorruptionKind::Erase => Ok(Box::new(EraseDensest)),
        "impersonate" => {
            let target = match get("target") {
                Some(hex) => message_from_hex(hex, k)
                    .map_err(|e| ChannelError::BadParameters(e.to_string()))?,
                None => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    if k >= 64 {
                        rng.gen()
                    } else {
                        rng.gen_range(0..1u64 << k)
                    }
                }
            };
            flip_only(Box::new(adversary_impersonate(target)))
        }
        "class-flood" => flip_only(Box::new(ClassFlood::new(num("probes", 32)?, seed))),
        "midpoint" => flip_only(Box::new(Midpoint::new(num("probes", 32)?, seed))),
        "triple-mix" => flip_only(Box::new(TripleMix::new(seed))),
        "burst" => Ok(Box::new(Burst {
            kind,
            start: num("start", 0)?,
            len: num("len", 0)?,
            offset: 0,
        })),
        other => Err(ChannelError::UnknownAdversary(other.to_string())),
    }
}
