//! The alternating feedback/round loop shared by every protocol.

use crate::bits::{BitString, Message, TriBitString};
use crate::channel::{Channel, RoundContext};
use crate::error::ProtocolError;

use super::transcript::{ErrorDetails, RoundRecord, SessionTranscript};
use super::{AliceView, FeedbackProtocol};

pub(crate) struct Session<'c> {
    channel: &'c mut Channel,
    k: usize,
    x: Message,
    feedback: Vec<BitString>,
    pending: Vec<BitString>,
    rounds: Vec<RoundRecord>,
    flags: Vec<String>,
}

impl<'c> Session<'c> {
    pub fn new(
        protocol: &dyn FeedbackProtocol,
        channel: &'c mut Channel,
        x: Message,
    ) -> Result<Self, ProtocolError> {
        let k = protocol.params().k;
        super::check_message(x, k)?;
        if channel.kind() != protocol.corruption_kind() {
            return Err(ProtocolError::WrongAdversaryKind);
        }
        Ok(Self {
            channel,
            k,
            x,
            feedback: Vec::new(),
            pending: Vec::new(),
            rounds: Vec::new(),
            flags: Vec::new(),
        })
    }

    /// Every feedback slot sent so far.
    pub fn feedback(&self) -> &[BitString] {
        &self.feedback
    }

    pub fn send_feedback(&mut self, slot: BitString) {
        self.feedback.push(slot.clone());
        self.pending.push(slot);
    }

    pub fn flag(&mut self, text: impl Into<String>) {
        let text = text.into();
        if !self.flags.contains(&text) {
            self.flags.push(text);
        }
    }

    /// Alice sends her message under `view`; returns what Bob receives.
    pub fn round(&mut self, view: &dyn AliceView) -> Result<TriBitString, ProtocolError> {
        let sent = view.message(self.x);
        let alice = |y: Message| view.message(y);
        let ctx = RoundContext {
            round: self.rounds.len(),
            k: self.k,
            alice_input: self.x,
            sent: &sent,
            feedback: &self.feedback,
            alice: &alice,
        };
        let v = self.channel.transmit(&ctx)?;
        let received = v.bob_received.clone();
        self.rounds.push(RoundRecord {
            feedback: std::mem::take(&mut self.pending),
            sent,
            received: v.bob_received,
            corruption: v.corruption,
        });
        Ok(received)
    }

    pub fn finish(
        self,
        protocol: &dyn FeedbackProtocol,
        seed: u64,
        output: Message,
        error_details: Option<ErrorDetails>,
    ) -> SessionTranscript {
        let budget = *self.channel.budget();
        SessionTranscript {
            params: protocol.params().clone(),
            adversary: self.channel.adversary_name(),
            seed,
            input: self.x,
            rounds: self.rounds,
            trailing_feedback: self.pending,
            output,
            correct: output == self.x,
            corruption_kind: budget.kind,
            corruption_log: self.channel.log().to_vec(),
            budget_limit: (budget.limit != usize::MAX).then_some(budget.limit),
            budget_spent: budget.spent,
            truncated: self.channel.truncated(),
            flags: self.flags,
            error_details,
        }
    }
}
