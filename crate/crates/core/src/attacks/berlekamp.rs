//! The three-input majority attack against full-feedback protocols.
//!
//! Phase 1 delivers the majority of the three candidate bits, charging the
//! input that disagrees. It stops at the first bit after which the
//! second-largest charge equals `floor(n/3)` and the largest exceeds it.
//! Phase 2 delivers the bits of the second-ranked input, so a run on the
//! third-ranked input looks the same to Bob as a run on the second.
//!
//! Charges grow by one input and one unit per bit, so the second-largest
//! charge cannot pass `floor(n/3)` without the stop firing. When it never
//! fires, the two least-charged inputs are confused by Phase 1 alone.

use std::sync::{Arc, Mutex};

use crate::bits::{BitString, Message};
use crate::channel::{Adversary, CorruptionKind, RoundContext};
use crate::error::AttackError;
use crate::protocols::{FeedbackProtocol, RewindProtocol};

use super::{attacked_run, AttackOutcome, BobView};

/// A protocol on three inputs where Bob echoes every bit he receives, so
/// Alice's next bit is a function of her input and the received prefix.
pub trait ThreeInputProtocol {
    /// Bits Alice sends.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Alice's next bit on input `which` (0, 1 or 2) after Bob received
    /// `received`.
    fn next_bit(&self, which: usize, received: &[bool]) -> bool;

    /// Message labels for the three inputs.
    fn inputs(&self) -> [Message; 3] {
        [0, 1, 2]
    }

    fn name(&self) -> String;
}

/// Phase-1 bookkeeping and the role assignment at the stop point.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub(crate) struct MajorityTracker {
    n: usize,
    pub counts: [usize; 3],
    pub t: usize,
    /// `(a, b, c)`: a is charged in Phase 2, b is impersonated, c had the
    /// largest Phase-1 charge.
    pub roles: Option<(usize, usize, usize)>,
    /// Bits delivered when Phase 1 stopped.
    pub stop: Option<usize>,
}

impl MajorityTracker {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            ..Self::default()
        }
    }

    /// The bit to deliver given the three candidates' bits.
    pub fn deliver(&mut self, bits: [bool; 3]) -> bool {
        self.t += 1;
        if let Some((_, b, _)) = self.roles {
            return bits[b];
        }
        let ones = bits.iter().filter(|&&b| b).count();
        let maj = ones >= 2;
        for (i, &b) in bits.iter().enumerate() {
            if b != maj {
                self.counts[i] += 1;
            }
        }
        let mut order = [0usize, 1, 2];
        order.sort_by(|&i, &j| self.counts[j].cmp(&self.counts[i]).then(i.cmp(&j)));
        let [c, b, a] = order;
        if self.counts[b] == self.n / 3 && self.counts[c] > self.counts[b] {
            assert!(
                self.t >= self.counts.iter().sum::<usize>(),
                "each delivered bit charges at most one input"
            );
            self.roles = Some((a, b, c));
            self.stop = Some(self.t);
        }
        maj
    }

    /// The confused pair: the Phase-2 pair, or the two least-charged inputs
    /// when Phase 1 ran to the end.
    pub fn confused(&self) -> (usize, usize) {
        if let Some((a, b, _)) = self.roles {
            return (a, b);
        }
        let mut order = [0usize, 1, 2];
        order.sort_by(|&i, &j| self.counts[i].cmp(&self.counts[j]).then(i.cmp(&j)));
        (order[0], order[1])
    }

    pub fn describe(&self) -> String {
        match self.stop {
            Some(s) => format!(
                "phase 1 stopped after {s} bits with charges {:?}",
                self.counts
            ),
            None => format!("phase 1 never stopped; final charges {:?}", self.counts),
        }
    }
}

/// Runs the attack on a full-feedback three-input protocol. Costs are
/// recomputed by replaying each confused input against the final received
/// string; the per-input budget is `floor(n/3) + 1`.
pub fn berlekamp_three_input_attack(
    p: &dyn ThreeInputProtocol,
) -> Result<AttackOutcome, AttackError> {
    let n = p.len();
    let mut tracker = MajorityTracker::new(n);
    let mut received: Vec<bool> = Vec::with_capacity(n);
    for _ in 0..n {
        let bits = [0, 1, 2].map(|i| p.next_bit(i, &received));
        received.push(tracker.deliver(bits));
    }
    if n == 0 {
        return Err(AttackError::DegenerateProtocol { n });
    }
    let (a, b) = tracker.confused();
    let inputs = p.inputs();
    let costs: Vec<usize> = [a, b]
        .iter()
        .map(|&i| {
            (0..n)
                .filter(|&t| p.next_bit(i, &received[..t]) != received[t])
                .count()
        })
        .collect();
    let view = BobView::echo(&BitString::from_bits(received.iter().copied()));
    let mut out = AttackOutcome::assemble(
        format!("berlekamp3:{}", p.name()),
        vec![inputs[a], inputs[b]],
        costs,
        vec![view.clone(), view],
        vec![None, None],
        Some(n / 3 + 1),
        n,
    );
    out.note = tracker.describe();
    Ok(out)
}

/// Three fixed streams: all zeros, all ones, alternating from 0.
pub struct ConstantSenders {
    pub n: usize,
}

impl ThreeInputProtocol for ConstantSenders {
    fn len(&self) -> usize {
        self.n
    }

    fn next_bit(&self, which: usize, received: &[bool]) -> bool {
        match which {
            0 => false,
            1 => true,
            _ => received.len() % 2 == 1,
        }
    }

    fn name(&self) -> String {
        format!("constant-senders:n={}", self.n)
    }
}

/// Three codewords sent without looking at the feedback.
pub struct CodewordSenders {
    pub words: [BitString; 3],
    pub inputs: [Message; 3],
}

impl CodewordSenders {
    /// Messages `inputs` of a `k`-bit message space, each bit repeated
    /// `times` times.
    pub fn repetition(k: usize, inputs: [Message; 3], times: usize) -> Self {
        let words = inputs.map(|x| {
            BitString::from_bits(
                (0..k).flat_map(|i| std::iter::repeat_n(crate::bits::msg_bit(x, k, i), times)),
            )
        });
        Self { words, inputs }
    }
}

impl ThreeInputProtocol for CodewordSenders {
    fn len(&self) -> usize {
        self.words[0].len()
    }

    fn next_bit(&self, which: usize, received: &[bool]) -> bool {
        self.words[which].get(received.len())
    }

    fn inputs(&self) -> [Message; 3] {
        self.inputs
    }

    fn name(&self) -> String {
        format!("codewords:n={}", self.len())
    }
}

/// Rewind-if-error on three inputs. Alice's triple depends on Bob's guess,
/// which she recomputes from the echoed bits.
pub struct RewindRestricted<'a> {
    pub protocol: &'a RewindProtocol,
    pub inputs: [Message; 3],
}

impl ThreeInputProtocol for RewindRestricted<'_> {
    fn len(&self) -> usize {
        3 * self.protocol.rounds()
    }

    fn next_bit(&self, which: usize, received: &[bool]) -> bool {
        let mut guess = Vec::new();
        for triple in received.chunks_exact(3) {
            self.protocol
                .apply(&mut guess, [triple[0], triple[1], triple[2]]);
        }
        self.protocol
            .instruction(self.inputs[which], &guess)
            .bits()
            .get(received.len() % 3)
    }

    fn inputs(&self) -> [Message; 3] {
        self.inputs
    }

    fn name(&self) -> String {
        format!("rewind-restricted:n={}", self.len())
    }
}

/// The majority attack as a channel adversary against a round-based
/// protocol. Bits before `prefix.len()` are flipped to `prefix`; the attack
/// proper runs on the remaining bits.
pub(crate) struct MajorityAdversary {
    inputs: [Message; 3],
    prefix: BitString,
    offset: usize,
    tracker: Arc<Mutex<MajorityTracker>>,
}

impl Adversary for MajorityAdversary {
    fn kind(&self) -> CorruptionKind {
        CorruptionKind::Flip
    }

    fn choose(&mut self, ctx: &RoundContext<'_>, _remaining: usize) -> Vec<usize> {
        let words = self.inputs.map(|x| (ctx.alice)(x));
        let mut tracker = self.tracker.lock().expect("tracker");
        let mut out = Vec::new();
        for p in 0..ctx.sent.len() {
            let g = self.offset + p;
            let deliver = if g < self.prefix.len() {
                self.prefix.get(g)
            } else {
                tracker.deliver([words[0].get(p), words[1].get(p), words[2].get(p)])
            };
            if deliver != ctx.sent.get(p) {
                out.push(p);
            }
        }
        self.offset += ctx.sent.len();
        out
    }

    fn name(&self) -> String {
        format!(
            "majority3:{},{},{}",
            self.inputs[0], self.inputs[1], self.inputs[2]
        )
    }
}

/// Runs the majority attack against a flip-channel protocol on three
/// inputs, once per input, after forcing the first bits to `prefix`.
///
/// The confused pair is the Phase-2 pair. Costs come from the transcripts;
/// the budget is `budget` or, without one, `floor(n'/3) + 1 + |prefix|` where
/// `n'` is the number of bits after the prefix.
pub fn berlekamp_protocol_attack(
    protocol: &dyn FeedbackProtocol,
    inputs: [Message; 3],
    prefix: &BitString,
    budget: Option<usize>,
) -> Result<AttackOutcome, AttackError> {
    if protocol.corruption_kind() != CorruptionKind::Flip {
        return Err(AttackError::InvalidInput(
            "majority attack needs a flip channel".into(),
        ));
    }
    let n = protocol.alice_bits();
    if prefix.len() > n {
        return Err(AttackError::InvalidInput(
            "prefix longer than the protocol".into(),
        ));
    }
    let residual = n - prefix.len();
    let mut runs = Vec::new();
    let mut tracker_state = None;
    for &x in &inputs {
        let tracker = Arc::new(Mutex::new(MajorityTracker::new(residual)));
        let adv = MajorityAdversary {
            inputs,
            prefix: prefix.clone(),
            offset: 0,
            tracker: tracker.clone(),
        };
        let t = attacked_run(protocol, x, Box::new(adv))?;
        let state = tracker.lock().expect("tracker").clone();
        if let Some(prev) = &tracker_state {
            debug_assert_eq!(prev, &state, "the attack does not depend on Alice's input");
        }
        tracker_state = Some(state);
        runs.push(t);
    }
    let state = tracker_state.expect("three runs");
    if residual == 0 {
        return Err(AttackError::DegenerateProtocol { n: residual });
    }
    let (a, b) = state.confused();
    let pick = [a, b];
    let mut out = AttackOutcome::assemble(
        "berlekamp3".into(),
        pick.iter().map(|&i| inputs[i]).collect(),
        pick.iter().map(|&i| runs[i].total_corruption()).collect(),
        pick.iter()
            .map(|&i| BobView::from_transcript(&runs[i]))
            .collect(),
        pick.iter().map(|&i| Some(runs[i].output)).collect(),
        Some(budget.unwrap_or(residual / 3 + 1 + prefix.len())),
        n,
    );
    out.note = state.describe();
    Ok(out)
}
