//! Two-input confusion attacks against a deterministic protocol.

use crate::bits::{BitString, Message};
use crate::channel::{Adversary, CorruptionKind, RoundContext};
use crate::error::AttackError;
use crate::protocols::FeedbackProtocol;
use crate::ratio::{floor_mul_nonneg, rat, Rational};

use super::{attacked_run, AttackOutcome, BobView};

/// What the pair adversary does to Alice's first `prefix` bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Prefix {
    /// Flip every prefix bit to 0, or erase it.
    Blank,
    /// Leave the prefix alone.
    Keep,
}

/// Makes the runs on `x` and `y` look identical to Bob.
///
/// Flips: the received word follows `x`'s stream until the flips a run on
/// `y` would need reach `theta`, then follows `y`'s. Erasures: every
/// position where the two streams differ is erased. Both decisions depend
/// only on the two streams, so the adversary behaves the same whichever of
/// the pair Alice holds.
pub(crate) struct PairAdversary {
    kind: CorruptionKind,
    x: Message,
    y: Message,
    theta: usize,
    prefix_len: usize,
    prefix: Prefix,
    /// Erase every position from here on.
    tail_from: usize,
    y_cost: usize,
    offset: usize,
}

impl PairAdversary {
    pub fn new(kind: CorruptionKind, x: Message, y: Message, theta: usize) -> Self {
        Self {
            kind,
            x,
            y,
            theta,
            prefix_len: 0,
            prefix: Prefix::Keep,
            tail_from: usize::MAX,
            y_cost: 0,
            offset: 0,
        }
    }

    pub fn with_prefix(mut self, len: usize, prefix: Prefix) -> Self {
        self.prefix_len = len;
        self.prefix = prefix;
        self
    }

    /// Erase everything from bit `from` on; erasure channels only.
    pub fn with_tail_blank(mut self, from: usize) -> Self {
        self.tail_from = from;
        self
    }
}

impl Adversary for PairAdversary {
    fn kind(&self) -> CorruptionKind {
        self.kind
    }

    fn choose(&mut self, ctx: &RoundContext<'_>, _remaining: usize) -> Vec<usize> {
        let ax = (ctx.alice)(self.x);
        let ay = (ctx.alice)(self.y);
        let mut out = Vec::new();
        for p in 0..ctx.sent.len() {
            let g = self.offset + p;
            let in_prefix = g < self.prefix_len && self.prefix == Prefix::Blank;
            match self.kind {
                CorruptionKind::Erase => {
                    if in_prefix || g >= self.tail_from || ax.get(p) != ay.get(p) {
                        out.push(p);
                    }
                }
                CorruptionKind::Flip => {
                    let target = if in_prefix {
                        false
                    } else if g < self.prefix_len {
                        ctx.sent.get(p)
                    } else if self.y_cost < self.theta {
                        if ax.get(p) != ay.get(p) {
                            self.y_cost += 1;
                        }
                        ax.get(p)
                    } else {
                        ay.get(p)
                    };
                    if ctx.sent.get(p) != target {
                        out.push(p);
                    }
                }
            }
        }
        self.offset += ctx.sent.len();
        out
    }

    fn name(&self) -> String {
        format!("pair:x={},y={},theta={}", self.x, self.y, self.theta)
    }
}

/// Runs the pair adversary once per input and collects the outcome.
pub(crate) fn run_pair(
    protocol: &dyn FeedbackProtocol,
    name: String,
    x: Message,
    y: Message,
    make: &dyn Fn() -> PairAdversary,
    budget: Option<usize>,
) -> Result<AttackOutcome, AttackError> {
    let mut costs = Vec::new();
    let mut views = Vec::new();
    let mut outputs = Vec::new();
    for input in [x, y] {
        let t = attacked_run(protocol, input, Box::new(make()))?;
        costs.push(t.total_corruption());
        views.push(BobView::from_transcript(&t));
        outputs.push(Some(t.output));
    }
    Ok(AttackOutcome::assemble(
        name,
        vec![x, y],
        costs,
        views,
        outputs,
        budget,
        protocol.alice_bits(),
    ))
}

/// Impersonates `x` until a run on `y` would have cost
/// `theta = floor((1/4 + delta/2) |FC|)` flips, then impersonates `y`.
/// Succeeds when both runs give Bob the same view within `theta` flips each.
pub fn pairwise_error_attack(
    protocol: &dyn FeedbackProtocol,
    x: Message,
    y: Message,
    delta: Rational,
) -> Result<AttackOutcome, AttackError> {
    if protocol.corruption_kind() != CorruptionKind::Flip {
        return Err(AttackError::InvalidInput(
            "pairwise error attack needs a flip channel".into(),
        ));
    }
    if delta < Rational::from_integer(0) {
        return Err(AttackError::InvalidInput(
            "delta must be non-negative".into(),
        ));
    }
    let n = protocol.alice_bits();
    let theta = floor_mul_nonneg(rat(1, 4) + delta / 2, n) as usize;
    run_pair(
        protocol,
        "pairwise-error".into(),
        x,
        y,
        &|| PairAdversary::new(CorruptionKind::Flip, x, y, theta),
        Some(theta),
    )
}

/// Erases every position where Alice's streams on `x` and `y` differ. The
/// views always coincide; the cost is the realized distance, the same for
/// both inputs.
pub fn pairwise_erasure_attack(
    protocol: &dyn FeedbackProtocol,
    x: Message,
    y: Message,
) -> Result<AttackOutcome, AttackError> {
    if protocol.corruption_kind() != CorruptionKind::Erase {
        return Err(AttackError::InvalidInput(
            "pairwise erasure attack needs an erasure channel".into(),
        ));
    }
    run_pair(
        protocol,
        "pairwise-erasure".into(),
        x,
        y,
        &|| PairAdversary::new(CorruptionKind::Erase, x, y, 0),
        None,
    )
}

/// Distance between Alice's streams on `x` and `y` along a transcript's
/// feedback, computed by replaying her round by round.
pub fn realized_distance(
    protocol: &dyn FeedbackProtocol,
    t: &crate::protocols::SessionTranscript,
    x: Message,
    y: Message,
) -> usize {
    (0..t.rounds.len())
        .map(|i| {
            let fb: Vec<BitString> = t.feedback_before(i);
            let view = protocol.alice_view(&fb);
            view.message(x).distance(&view.message(y))
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::binary_codes::CodeHandle;
    use crate::protocols::PlainProtocol;

    fn plain(words: &[&str], kind: CorruptionKind) -> PlainProtocol {
        let words = words
            .iter()
            .map(|w| BitString::parse_binary(w).unwrap())
            .collect();
        let code = CodeHandle::from_codebook(1, rat(1, 4), words, 2).unwrap();
        PlainProtocol::from_code(Arc::new(code), kind)
    }

    #[test]
    fn repetition_pair_confused_at_half() {
        let p = plain(&["00000000", "11111111"], CorruptionKind::Flip);
        let o = pairwise_error_attack(&p, 0, 1, rat(1, 2)).unwrap();
        assert!(o.succeeded);
        assert_eq!(o.per_input_cost, vec![4, 4]);
        assert!(o.some_output_wrong());
    }

    #[test]
    fn distant_pair_overruns() {
        let p = plain(&["00000000", "11111111"], CorruptionKind::Flip);
        let o = pairwise_error_attack(&p, 0, 1, Rational::from_integer(0)).unwrap();
        assert!(o.views_identical());
        assert!(!o.succeeded);
        assert_eq!(o.per_input_cost, vec![6, 2]);
    }

    #[test]
    fn same_input_costs_nothing() {
        let p = plain(&["0011", "1100"], CorruptionKind::Flip);
        let o = pairwise_error_attack(&p, 1, 1, rat(1, 10)).unwrap();
        assert_eq!(o.per_input_cost, vec![0, 0]);
        assert!(o.succeeded);
        let p = plain(&["0011", "1100"], CorruptionKind::Erase);
        let o = pairwise_erasure_attack(&p, 0, 0).unwrap();
        assert_eq!(o.per_input_cost, vec![0, 0]);
    }

    #[test]
    fn erasure_cost_is_distance() {
        let p = plain(&["000111", "011011"], CorruptionKind::Erase);
        let o = pairwise_erasure_attack(&p, 0, 1).unwrap();
        assert!(o.succeeded);
        assert_eq!(o.per_input_cost, vec![3, 3]);
    }

    #[test]
    fn kind_checked() {
        let p = plain(&["0011", "1100"], CorruptionKind::Erase);
        assert!(pairwise_error_attack(&p, 0, 1, rat(1, 10)).is_err());
    }
}
