//! Deterministic feedback ECC state machines.
//!
//! Every protocol alternates Bob's feedback slots with Alice's round
//! messages. Alice's message is a pure function of her input and the
//! feedback slots she has seen, exposed as [`FeedbackProtocol::alice_message`]
//! so adversaries, attacks and checkers can replay any other input.

pub mod erasure;
pub mod error;
pub mod params;
pub mod plain;
pub mod rewind;
mod session;
pub mod transcript;

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::binary_codes::{build_base_code, measure_error_list, CodeHandle};
use crate::bits::{BitString, Message};
use crate::channel::{Channel, CorruptionKind};
use crate::error::ProtocolError;
use crate::ratio::{floor_mul_nonneg, rat, Rational};

pub use erasure::ErasureProtocol;
pub use error::ErrorProtocol;
pub use params::{DeskOverrides, Mode, ProtocolKind, ProtocolParams};
pub use plain::PlainProtocol;
pub use rewind::RewindProtocol;
pub use transcript::{RoundRecord, SessionTranscript};

/// Alice's strategy for one round, fixed by the feedback so far.
pub trait AliceView: Sync {
    fn message(&self, x: Message) -> BitString;
}

pub trait FeedbackProtocol: Send + Sync {
    fn params(&self) -> &ProtocolParams;

    fn corruption_kind(&self) -> CorruptionKind;

    /// Alice's strategy for the round that follows the feedback slots
    /// `feedback`, in the order Bob sent them.
    fn alice_view<'a>(&'a self, feedback: &[BitString]) -> Box<dyn AliceView + 'a>;

    /// Alice's next round message on input `x` after `feedback`.
    fn alice_message(&self, x: Message, feedback: &[BitString]) -> BitString {
        self.alice_view(feedback).message(x)
    }

    /// Runs one session with Alice holding `x`. `seed` is recorded in the
    /// transcript header.
    fn run(
        &self,
        x: Message,
        channel: &mut Channel,
        seed: u64,
    ) -> Result<SessionTranscript, ProtocolError>;

    /// Total bits Alice sends, `|FC|`.
    fn alice_bits(&self) -> usize;

    /// Closed-form total feedback bits.
    fn feedback_bits(&self) -> usize;

    /// Closed-form number of feedback slots.
    fn feedback_slots(&self) -> usize;
}

/// Builds any protocol by kind.
pub fn build_protocol(
    kind: ProtocolKind,
    k: usize,
    eps: Rational,
    mode: Mode,
    overrides: &DeskOverrides,
) -> Result<Arc<dyn FeedbackProtocol>, ProtocolError> {
    Ok(match kind {
        ProtocolKind::Erasure => Arc::new(ErasureProtocol::new(k, eps, mode, overrides)?),
        ProtocolKind::Error => Arc::new(ErrorProtocol::new(k, eps, mode, overrides)?),
        ProtocolKind::Rewind => Arc::new(RewindProtocol::new(k, eps)?),
        ProtocolKind::Plain => Arc::new(PlainProtocol::new(k, eps, CorruptionKind::Flip)?),
    })
}

/// `build_base_code`, memoized per process since the search is slow.
pub fn cached_base_code(k: usize, eps: Rational) -> Result<Arc<CodeHandle>, ProtocolError> {
    type Cache = Mutex<HashMap<(usize, Rational), Arc<CodeHandle>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(c) = cache.lock().expect("code cache").get(&(k, eps)) {
        return Ok(c.clone());
    }
    let code = Arc::new(build_base_code(k, eps)?);
    cache
        .lock()
        .expect("code cache")
        .insert((k, eps), code.clone());
    Ok(code)
}

/// List size of `code` at radius `floor((1/2 - 2 eps) n0)`, memoized.
pub fn working_list_bound(code: &CodeHandle) -> usize {
    type Cache = Mutex<HashMap<(usize, usize, Rational), usize>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (code.k(), code.n0(), code.eps());
    if let Some(&l) = cache.lock().expect("list cache").get(&key) {
        return l;
    }
    let r = floor_mul_nonneg(rat(1, 2) - code.eps() * 2, code.n0()) as usize;
    let l = measure_error_list(code, r, 0x11f7).max(1);
    cache.lock().expect("list cache").insert(key, l);
    l
}

pub(crate) fn check_message(x: Message, k: usize) -> Result<(), ProtocolError> {
    if k < 64 && x >> k != 0 {
        return Err(ProtocolError::MessageOutOfRange { x, k });
    }
    Ok(())
}
