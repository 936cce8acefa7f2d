//! Constructive adversaries and bound calculators for feedback ECCs.
//!
//! Every attack here produces an [`AttackOutcome`] recording the confused
//! inputs, what each run cost and Bob's full view in each run, so callers can
//! verify success from the record instead of trusting the attack code.

mod berlekamp;
mod bounds;
mod pairwise;
mod rounds;

use std::fmt::Write as _;
use std::hash::{DefaultHasher, Hash, Hasher};

use crate::bits::{message_hex, BitString, Message, TriBitString};
use crate::channel::{AdversaryBudget, BudgetMode, Channel, Passthrough};
use crate::error::ProtocolError;
use crate::protocols::{FeedbackProtocol, SessionTranscript};

pub use berlekamp::{
    berlekamp_protocol_attack, berlekamp_three_input_attack, CodewordSenders, ConstantSenders,
    RewindRestricted, ThreeInputProtocol,
};
pub use bounds::{
    feedback_bits_lower_bound, feedback_bits_lower_bound_descending, least_clique_colors,
    round_lb_delta_erasure, round_lb_delta_error, DeltaRecursion, ExactFraction,
};
pub use pairwise::{pairwise_erasure_attack, pairwise_error_attack, realized_distance};
pub use rounds::{
    find_confusable_triple, first_feedback_position, round_attack_early, round_attack_late,
};

/// Everything Bob sees in one session: each round's received word and every
/// feedback slot he sent.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BobView {
    pub received: Vec<TriBitString>,
    pub feedback: Vec<BitString>,
}

impl BobView {
    pub fn from_transcript(t: &SessionTranscript) -> Self {
        Self {
            received: t.rounds.iter().map(|r| r.received.clone()).collect(),
            feedback: t
                .rounds
                .iter()
                .flat_map(|r| r.feedback.iter().cloned())
                .chain(t.trailing_feedback.iter().cloned())
                .collect(),
        }
    }

    /// A full-feedback view where Bob echoes every received bit.
    pub fn echo(received: &BitString) -> Self {
        Self {
            received: vec![TriBitString::from_bits(received.clone())],
            feedback: vec![received.clone()],
        }
    }

    pub fn digest(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.hash(&mut h);
        h.finish()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttackOutcome {
    pub name: String,
    /// The inputs Bob cannot tell apart when the attack succeeds.
    pub confused_inputs: Vec<Message>,
    /// Corruptions spent had Alice held each confused input.
    pub per_input_cost: Vec<usize>,
    /// Bob's view in the run for each confused input.
    pub views: Vec<BobView>,
    /// Bob's output in each run, when the protocol produces one.
    pub outputs: Vec<Option<Message>>,
    /// Per-input corruption allowance the attack claims to respect.
    pub budget: Option<usize>,
    /// Bits Alice sends, `|FC|`.
    pub total_bits: usize,
    pub succeeded: bool,
    pub note: String,
}

impl AttackOutcome {
    fn assemble(
        name: String,
        confused_inputs: Vec<Message>,
        per_input_cost: Vec<usize>,
        views: Vec<BobView>,
        outputs: Vec<Option<Message>>,
        budget: Option<usize>,
        total_bits: usize,
    ) -> Self {
        let mut out = Self {
            name,
            confused_inputs,
            per_input_cost,
            views,
            outputs,
            budget,
            total_bits,
            succeeded: false,
            note: String::new(),
        };
        out.succeeded = out.views_identical() && out.within_budget();
        out
    }

    /// Bob's view in the first run.
    pub fn bob_view(&self) -> Option<&BobView> {
        self.views.first()
    }

    pub fn views_identical(&self) -> bool {
        self.views.windows(2).all(|w| w[0] == w[1])
    }

    pub fn within_budget(&self) -> bool {
        self.budget
            .is_none_or(|b| self.per_input_cost.iter().all(|&c| c <= b))
    }

    pub fn max_cost(&self) -> usize {
        self.per_input_cost.iter().copied().max().unwrap_or(0)
    }

    /// Whether at least one confused run ends with Bob outputting a wrong
    /// message.
    pub fn some_output_wrong(&self) -> bool {
        self.confused_inputs
            .iter()
            .zip(&self.outputs)
            .any(|(&x, o)| o.is_some_and(|o| o != x))
    }

    pub fn view_digest(&self) -> String {
        self.bob_view()
            .map_or_else(|| "-".into(), |v| format!("{:016x}", v.digest()))
    }

    /// Line-oriented summary: name, inputs, costs, budget, view digest.
    pub fn to_text(&self, k: usize) -> String {
        let join = |v: Vec<String>| v.join(",");
        let mut s = String::new();
        let _ = writeln!(s, "ATTACK {}", self.name);
        let _ = writeln!(
            s,
            "INPUTS {}",
            join(
                self.confused_inputs
                    .iter()
                    .map(|&x| message_hex(x, k))
                    .collect()
            )
        );
        let _ = writeln!(
            s,
            "COSTS {}",
            join(self.per_input_cost.iter().map(|c| c.to_string()).collect())
        );
        let _ = writeln!(
            s,
            "BUDGET {}",
            self.budget
                .map_or_else(|| "inf".to_string(), |b| b.to_string())
        );
        let _ = writeln!(s, "BITS {}", self.total_bits);
        let _ = writeln!(
            s,
            "OUTPUTS {}",
            join(
                self.outputs
                    .iter()
                    .map(|o| o.map_or_else(|| "-".to_string(), |x| message_hex(x, k)))
                    .collect()
            )
        );
        let _ = writeln!(s, "VIEWS_IDENTICAL {}", u8::from(self.views_identical()));
        let _ = writeln!(s, "VIEW_DIGEST {}", self.view_digest());
        if !self.note.is_empty() {
            let _ = writeln!(s, "NOTE {}", self.note);
        }
        let _ = writeln!(s, "SUCCEEDED {}", u8::from(self.succeeded));
        s
    }
}

/// One unattacked run, used to read off a protocol's round structure.
pub(crate) fn clean_run(
    protocol: &dyn FeedbackProtocol,
    x: Message,
) -> Result<SessionTranscript, ProtocolError> {
    let kind = protocol.corruption_kind();
    let mut channel = Channel::new(
        Box::new(Passthrough(kind)),
        AdversaryBudget::unbounded(kind),
        BudgetMode::Strict,
    );
    protocol.run(x, &mut channel, 0)
}

/// Runs `protocol` on `x` against `adversary` with an unbounded budget.
pub(crate) fn attacked_run(
    protocol: &dyn FeedbackProtocol,
    x: Message,
    adversary: Box<dyn crate::channel::Adversary>,
) -> Result<SessionTranscript, ProtocolError> {
    let kind = protocol.corruption_kind();
    let mut channel = Channel::new(
        adversary,
        AdversaryBudget::unbounded(kind),
        BudgetMode::Strict,
    );
    protocol.run(x, &mut channel, 0)
}

/// Messages the attacks search over: all of them when `k` is small, else the
/// first `cap`.
pub(crate) fn candidate_messages(k: usize, cap: usize) -> Vec<Message> {
    let count = if k >= 63 {
        cap as u64
    } else {
        (1u64 << k).min(cap as u64)
    };
    (0..count).collect()
}
