//! One-shot encoding without feedback.

use std::sync::Arc;

use crate::binary_codes::CodeHandle;
use crate::bits::{BitString, Message, TriBitString};
use crate::channel::{Channel, CorruptionKind};
use crate::error::ProtocolError;
use crate::ratio::Rational;

use super::params::{Mode, ProtocolKind, ProtocolParams};
use super::session::Session;
use super::transcript::SessionTranscript;
use super::{cached_base_code, AliceView, FeedbackProtocol};

/// Alice sends `encode(x)` once; Bob outputs the nearest codeword on the
/// unerased positions, ties to the smaller message.
pub struct PlainProtocol {
    params: ProtocolParams,
    code: Arc<CodeHandle>,
    kind: CorruptionKind,
}

impl PlainProtocol {
    pub fn new(k: usize, eps: Rational, kind: CorruptionKind) -> Result<Self, ProtocolError> {
        Ok(Self::from_code(cached_base_code(k, eps)?, kind))
    }

    pub fn from_code(code: Arc<CodeHandle>, kind: CorruptionKind) -> Self {
        let mut params = ProtocolParams::new(ProtocolKind::Plain, code.k(), code.eps(), Mode::Desk);
        params.n0 = code.n0();
        params.m = code.n0();
        params.l = code.list_bound();
        Self { params, code, kind }
    }

    pub fn code(&self) -> &CodeHandle {
        &self.code
    }

    pub fn decode(&self, received: &TriBitString) -> Message {
        let mask = received.erasure_mask();
        let mut best = (0, usize::MAX);
        for (x, c) in self.code.codebook().iter().enumerate() {
            let d = received.values().distance_outside(c, mask);
            if d < best.1 {
                best = (x as Message, d);
            }
        }
        best.0
    }
}

struct PlainView<'a>(&'a CodeHandle);

impl AliceView for PlainView<'_> {
    fn message(&self, x: Message) -> BitString {
        self.0.encode(x).clone()
    }
}

impl FeedbackProtocol for PlainProtocol {
    fn params(&self) -> &ProtocolParams {
        &self.params
    }

    fn corruption_kind(&self) -> CorruptionKind {
        self.kind
    }

    fn alice_view<'a>(&'a self, _: &[BitString]) -> Box<dyn AliceView + 'a> {
        Box::new(PlainView(&self.code))
    }

    fn run(
        &self,
        x: Message,
        channel: &mut Channel,
        seed: u64,
    ) -> Result<SessionTranscript, ProtocolError> {
        let mut session = Session::new(self, channel, x)?;
        let received = session.round(&PlainView(&self.code))?;
        let output = self.decode(&received);
        Ok(session.finish(self, seed, output, None))
    }

    fn alice_bits(&self) -> usize {
        self.code.n0()
    }

    fn feedback_bits(&self) -> usize {
        0
    }

    fn feedback_slots(&self) -> usize {
        0
    }
}
