//! Deterministic error-correcting codes with limited noiseless feedback.
//!
//! Alice sends a `k`-bit message over a channel an adversary may corrupt
//! (bit flips or erasures, under a global budget) while Bob returns a few
//! noiseless feedback bits between rounds. The crate provides the codes and
//! data structures the protocols rely on, the protocols themselves, the
//! adversaries that bound what any such protocol can achieve, and a harness
//! that runs batteries of sessions and audits their transcripts.

pub mod attacks;
pub mod binary_codes;
pub mod bits;
pub mod channel;
pub mod coin_game;
pub mod error;
pub mod harness;
pub mod par;
pub mod partitions;
pub mod protocols;
pub mod ratio;

pub use bits::{BitString, Message, Symbol, TriBitString};
pub use error::{
    AttackError, ChannelError, CodeError, CoinGameError, HarnessError, ParseError, PartitionError,
    ProtocolError,
};
pub use ratio::Rational;
