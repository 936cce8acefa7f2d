//! The erasure protocol.
//!
//! Phase 1: Alice sends `ECC(x)` every round and Bob answers `0^beta` until a
//! round arrives with fewer than a `1 - eps` fraction of erasures. Bob then
//! sends a descriptor of the `L` messages consistent with that round, which
//! moves both parties to phase 2. Phase 2: Alice sends the bits of `gamma`,
//! the index of `x` in Bob's list, one bit per round repeated `n0` times. Bob
//! appends the first unerased bit and acknowledges with `1^beta`, or answers
//! `0^beta` when the whole round is erased.

use std::sync::Arc;

use crate::binary_codes::{consistent_messages, CodeHandle};
use crate::bits::{ceil_log2, BitString, Message, TriBitString};
use crate::channel::{Channel, CorruptionKind};
use crate::error::ProtocolError;
use crate::partitions::{encoded_len, set_count_for_len, PartitionDescriptor};
use crate::ratio::{ceil_mul, Rational};

use super::params::{DeskOverrides, Mode, ProtocolKind, ProtocolParams};
use super::session::Session;
use super::transcript::SessionTranscript;
use super::{cached_base_code, AliceView, FeedbackProtocol};

pub struct ErasureProtocol {
    params: ProtocolParams,
    code: Arc<CodeHandle>,
    /// `ceil(log2 L)`.
    gamma_bits: usize,
}

/// Bob's phase-2 state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErasurePhaseState {
    pub list: Vec<Message>,
    pub gamma_hat: Vec<bool>,
}

impl ErasureProtocol {
    pub fn new(
        k: usize,
        eps: Rational,
        mode: Mode,
        overrides: &DeskOverrides,
    ) -> Result<Self, ProtocolError> {
        Self::from_code(cached_base_code(k, eps)?, mode, overrides)
    }

    pub fn from_code(
        code: Arc<CodeHandle>,
        mode: Mode,
        overrides: &DeskOverrides,
    ) -> Result<Self, ProtocolError> {
        let k = code.k();
        let eps = code.eps();
        let space = if k >= 63 { usize::MAX } else { 1usize << k };
        let l = match mode {
            Mode::Paper => code.list_bound(),
            Mode::Desk => overrides.l.unwrap_or(code.list_bound()),
        }
        .clamp(1, space);
        let gamma_bits = ceil_log2(l as u64);
        let paper_t = ceil_mul(Rational::from_integer(1) / eps, gamma_bits + 1) as usize;
        let t = match mode {
            Mode::Paper => paper_t,
            Mode::Desk => overrides.t.unwrap_or(paper_t),
        };
        if t == 0 {
            return Err(ProtocolError::InvalidParams("T must be positive".into()));
        }
        let mut params = ProtocolParams::new(ProtocolKind::Erasure, k, eps, mode);
        params.l = l;
        params.t = t;
        params.n0 = code.n0();
        params.m = code.n0();
        params.beta = encoded_len(l, k);
        Ok(Self {
            params,
            code,
            gamma_bits,
        })
    }

    pub fn code(&self) -> &CodeHandle {
        &self.code
    }

    pub fn beta(&self) -> usize {
        self.params.beta
    }

    /// Whether a round is too erased to start phase 2, that is whether at
    /// least a `1 - eps` fraction of it is erased.
    pub fn too_erased(&self, received: &TriBitString) -> bool {
        let e = self.params.eps;
        let erased = Rational::from_integer(received.erasure_count() as i64);
        erased >= (Rational::from_integer(1) - e) * Rational::from_integer(received.len() as i64)
    }

    /// Bob's list after a decodable round: the consistent messages followed
    /// by the smallest other messages, exactly `L` in total. `None` when more
    /// than `L` messages are consistent.
    pub fn bob_list(&self, received: &TriBitString) -> Option<Vec<Message>> {
        let l = self.params.l;
        let mut list = consistent_messages(&self.code, received);
        if list.len() > l {
            return None;
        }
        let mut y = 0;
        while list.len() < l {
            if !list.contains(&y) {
                list.push(y);
            }
            y += 1;
        }
        Some(list)
    }

    /// Descriptor of Bob's list, `beta` bits.
    pub fn list_message(&self, list: &[Message]) -> Result<BitString, ProtocolError> {
        Ok(PartitionDescriptor::ptdesc_relaxed(list, self.params.k)?.encode())
    }

    /// `gamma - 1` in `ceil(log2 L)` bits.
    pub fn gamma_string(&self, gamma: usize) -> BitString {
        BitString::from_uint(gamma as u64 - 1, self.gamma_bits)
    }

    /// Bob's output from his list and accumulated bits.
    pub fn output(&self, state: &ErasurePhaseState) -> Message {
        let bits = &state.gamma_hat[..state.gamma_hat.len().min(self.gamma_bits)];
        let idx = bits
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | usize::from(b));
        state.list.get(idx).copied().unwrap_or(state.list[0])
    }
}

/// Alice's phase-2 position.
enum ErasureView<'a> {
    Phase1(&'a CodeHandle),
    Phase2 {
        protocol: &'a ErasureProtocol,
        descriptor: Option<PartitionDescriptor>,
        next: usize,
    },
}

impl AliceView for ErasureView<'_> {
    fn message(&self, x: Message) -> BitString {
        match self {
            ErasureView::Phase1(code) => code.encode(x).clone(),
            ErasureView::Phase2 {
                protocol,
                descriptor,
                next,
            } => {
                let n0 = protocol.params.n0;
                let gamma = descriptor.as_ref().map_or(1, |d| d.pt(x));
                let g = protocol.gamma_string(gamma);
                if *next < g.len() {
                    BitString::constant(g.get(*next), n0)
                } else {
                    BitString::zeros(n0)
                }
            }
        }
    }
}

impl FeedbackProtocol for ErasureProtocol {
    fn params(&self) -> &ProtocolParams {
        &self.params
    }

    fn corruption_kind(&self) -> CorruptionKind {
        CorruptionKind::Erase
    }

    fn alice_view<'a>(&'a self, feedback: &[BitString]) -> Box<dyn AliceView + 'a> {
        let Some(p) = feedback.iter().position(|f| !f.is_all(false)) else {
            return Box::new(ErasureView::Phase1(&self.code));
        };
        let k = self.params.k;
        let descriptor = set_count_for_len(feedback[p].len(), k)
            .and_then(|d| PartitionDescriptor::decode_with_count(&feedback[p], k, d));
        let next = feedback[p + 1..].iter().filter(|f| f.is_all(true)).count();
        Box::new(ErasureView::Phase2 {
            protocol: self,
            descriptor,
            next,
        })
    }

    fn run(
        &self,
        x: Message,
        channel: &mut Channel,
        seed: u64,
    ) -> Result<SessionTranscript, ProtocolError> {
        let mut session = Session::new(self, channel, x)?;
        let beta = self.params.beta;
        let mut state: Option<ErasurePhaseState> = None;
        let mut reply: Option<BitString> = None;
        for _ in 0..self.params.t {
            if let Some(r) = reply.take() {
                session.send_feedback(r);
            }
            let view = self.alice_view(session.feedback());
            let received = session.round(view.as_ref())?;
            reply = Some(match &mut state {
                None if self.too_erased(&received) => BitString::zeros(beta),
                None => match self.bob_list(&received) {
                    Some(list) => {
                        let msg = self.list_message(&list)?;
                        state = Some(ErasurePhaseState {
                            list,
                            gamma_hat: Vec::new(),
                        });
                        msg
                    }
                    None => {
                        session.flag("consistent list exceeds L");
                        BitString::zeros(beta)
                    }
                },
                Some(st) => match received
                    .symbols()
                    .position(|s| s != crate::bits::Symbol::Erased)
                {
                    Some(i) => {
                        st.gamma_hat.push(received.values().get(i));
                        BitString::ones(beta)
                    }
                    None => BitString::zeros(beta),
                },
            });
        }
        if let Some(r) = reply {
            session.send_feedback(r);
        }
        let output = match &state {
            Some(st) => {
                if st.gamma_hat.len() < self.gamma_bits {
                    session.flag("gamma incomplete");
                }
                self.output(st)
            }
            None => {
                session.flag("total erasure: phase 2 never reached");
                0
            }
        };
        Ok(session.finish(self, seed, output, None))
    }

    fn alice_bits(&self) -> usize {
        self.params.t * self.params.n0
    }

    fn feedback_bits(&self) -> usize {
        self.params.t * self.params.beta
    }

    fn feedback_slots(&self) -> usize {
        self.params.t
    }
}
