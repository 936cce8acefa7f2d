//! Rewind-if-error: Bob feeds back his whole guess every round.
//!
//! Alice pads `x` with ones to `K' = k/eps` bits. Each round Bob sends his
//! current guess `x̂` framed as `ceil(log2 K')` length bits and `K'` content
//! bits; Alice answers `100` to append 0, `010` to append 1 when `x̂` is a
//! prefix of her padded input, and `001` to pop otherwise. Any other triple
//! leaves `x̂` unchanged.

use crate::bits::{ceil_log2, msg_bit, BitString, Message};
use crate::channel::{Channel, CorruptionKind};
use crate::error::ProtocolError;
use crate::ratio::Rational;

use super::params::{Mode, ProtocolKind, ProtocolParams};
use super::session::Session;
use super::transcript::SessionTranscript;
use super::{AliceView, FeedbackProtocol};

pub const APPEND_ZERO: [bool; 3] = [true, false, false];
pub const APPEND_ONE: [bool; 3] = [false, true, false];
pub const POP: [bool; 3] = [false, false, true];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Instruction {
    Append(bool),
    Pop,
    Noop,
}

impl Instruction {
    pub fn from_triple(t: [bool; 3]) -> Self {
        match t {
            APPEND_ZERO => Instruction::Append(false),
            APPEND_ONE => Instruction::Append(true),
            POP => Instruction::Pop,
            _ => Instruction::Noop,
        }
    }

    pub fn bits(self) -> BitString {
        let t = match self {
            Instruction::Append(false) => APPEND_ZERO,
            Instruction::Append(true) => APPEND_ONE,
            Instruction::Pop => POP,
            Instruction::Noop => [false; 3],
        };
        BitString::from_bits(t)
    }
}

pub struct RewindProtocol {
    params: ProtocolParams,
    /// `K' = k / eps`.
    rounds: usize,
    /// Width of the length prefix.
    width: usize,
}

impl RewindProtocol {
    pub fn new(k: usize, eps: Rational) -> Result<Self, ProtocolError> {
        if k == 0 || k > 64 {
            return Err(ProtocolError::InvalidParams(format!(
                "k={k} outside 1..=64"
            )));
        }
        let kk = Rational::from_integer(k as i64) / eps;
        if !kk.is_integer() || kk <= Rational::from_integer(0) {
            return Err(ProtocolError::InvalidParams(
                "k/eps must be a positive integer".into(),
            ));
        }
        let rounds = kk.to_integer() as usize;
        if rounds < k {
            return Err(ProtocolError::InvalidParams("eps must be at most 1".into()));
        }
        let mut params = ProtocolParams::new(ProtocolKind::Rewind, k, eps, Mode::Paper);
        params.t = rounds;
        params.m = 3;
        Ok(Self {
            params,
            rounds,
            width: ceil_log2(rounds as u64),
        })
    }

    /// `K'`.
    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// Feedback frame length, `ceil(log2 K') + K'`.
    pub fn frame_len(&self) -> usize {
        self.width + self.rounds
    }

    pub fn frame(&self, guess: &[bool]) -> BitString {
        assert!(guess.len() < self.rounds);
        let mut s = BitString::from_uint(guess.len() as u64, self.width);
        s.extend_from(&BitString::from_bits(guess.iter().copied()));
        s.extend_from(&BitString::zeros(self.rounds - guess.len()));
        s
    }

    pub fn unframe(&self, frame: &BitString) -> Vec<bool> {
        let len = (frame.read_uint(0, self.width) as usize).min(self.rounds);
        (0..len).map(|i| frame.get(self.width + i)).collect()
    }

    /// Bit `i` of `x` padded with ones.
    pub fn padded_bit(&self, x: Message, i: usize) -> bool {
        let k = self.params.k;
        if i < k {
            msg_bit(x, k, i)
        } else {
            true
        }
    }

    /// Alice's instruction for guess `guess`.
    pub fn instruction(&self, x: Message, guess: &[bool]) -> Instruction {
        let prefix = guess
            .iter()
            .enumerate()
            .all(|(i, &b)| self.padded_bit(x, i) == b);
        if prefix && guess.len() < self.rounds {
            Instruction::Append(self.padded_bit(x, guess.len()))
        } else {
            Instruction::Pop
        }
    }

    /// Bob's update on a received triple.
    pub fn apply(&self, guess: &mut Vec<bool>, triple: [bool; 3]) {
        match Instruction::from_triple(triple) {
            Instruction::Append(b) if guess.len() < self.rounds => guess.push(b),
            Instruction::Pop => {
                guess.pop();
            }
            _ => {}
        }
    }

    /// The first `k` bits of `guess` as a message, padding with zeros.
    pub fn output(&self, guess: &[bool]) -> Message {
        let k = self.params.k;
        (0..k).fold(0, |acc, i| {
            (acc << 1) | u64::from(guess.get(i).copied().unwrap_or(false))
        })
    }
}

struct RewindView<'a> {
    protocol: &'a RewindProtocol,
    guess: Vec<bool>,
}

impl AliceView for RewindView<'_> {
    fn message(&self, x: Message) -> BitString {
        self.protocol.instruction(x, &self.guess).bits()
    }
}

impl FeedbackProtocol for RewindProtocol {
    fn params(&self) -> &ProtocolParams {
        &self.params
    }

    fn corruption_kind(&self) -> CorruptionKind {
        CorruptionKind::Flip
    }

    fn alice_view<'a>(&'a self, feedback: &[BitString]) -> Box<dyn AliceView + 'a> {
        let guess = feedback.last().map(|f| self.unframe(f)).unwrap_or_default();
        Box::new(RewindView {
            protocol: self,
            guess,
        })
    }

    fn run(
        &self,
        x: Message,
        channel: &mut Channel,
        seed: u64,
    ) -> Result<SessionTranscript, ProtocolError> {
        let mut session = Session::new(self, channel, x)?;
        let mut guess: Vec<bool> = Vec::new();
        for _ in 0..self.rounds {
            session.send_feedback(self.frame(&guess));
            let view = RewindView {
                protocol: self,
                guess: guess.clone(),
            };
            let received = session.round(&view)?;
            let bits = received.values();
            self.apply(&mut guess, [bits.get(0), bits.get(1), bits.get(2)]);
        }
        if guess.len() < self.params.k {
            session.flag(format!("guess has {} bits, fewer than k", guess.len()));
        }
        let output = self.output(&guess);
        Ok(session.finish(self, seed, output, None))
    }

    fn alice_bits(&self) -> usize {
        3 * self.rounds
    }

    fn feedback_bits(&self) -> usize {
        self.rounds * self.frame_len()
    }

    fn feedback_slots(&self) -> usize {
        self.rounds
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{adversary_random, AdversaryBudget, BudgetMode, Passthrough};
    use crate::ratio::rat;

    fn clean(p: &RewindProtocol, x: Message) -> SessionTranscript {
        let mut ch = Channel::new(
            Box::new(Passthrough(CorruptionKind::Flip)),
            AdversaryBudget::unbounded(CorruptionKind::Flip),
            BudgetMode::Strict,
        );
        p.run(x, &mut ch, 0).unwrap()
    }

    #[test]
    fn clean_runs_decode() {
        let p = RewindProtocol::new(4, rat(1, 4)).unwrap();
        for x in 0..16 {
            let t = clean(&p, x);
            assert!(t.correct, "x={x}");
            assert_eq!(t.zeta(), p.feedback_bits());
            assert_eq!(t.rho(), 16);
            assert_eq!(t.alice_bits(), 48);
        }
    }

    #[test]
    fn one_flip_neighbors() {
        let mut noops = 0;
        for ins in [APPEND_ZERO, APPEND_ONE, POP] {
            for i in 0..3 {
                let mut t = ins;
                t[i] = !t[i];
                if Instruction::from_triple(t) == Instruction::Noop {
                    noops += 1;
                }
            }
        }
        // Each instruction has exactly one neighbor of weight 0 and two of
        // weight 2, and no weight-1 neighbor.
        assert_eq!(noops, 9);
        assert_eq!(
            Instruction::from_triple([false, false, false]),
            Instruction::Noop
        );
    }

    #[test]
    fn frame_round_trip() {
        let p = RewindProtocol::new(3, rat(1, 3)).unwrap();
        let g = vec![true, false, true];
        let f = p.frame(&g);
        assert_eq!(f.len(), p.frame_len());
        assert_eq!(p.unframe(&f), g);
    }

    #[test]
    fn rejects_non_integral_length() {
        assert!(RewindProtocol::new(4, rat(3, 7)).is_err());
    }

    #[test]
    fn survives_light_noise() {
        let p = RewindProtocol::new(4, rat(1, 8)).unwrap();
        let budget = (p.alice_bits() as f64 * (1.0 / 3.0 - 1.0 / 8.0)).ceil() as usize - 1;
        for seed in 0..20 {
            let mut ch = Channel::new(
                Box::new(adversary_random(CorruptionKind::Flip, 0.05, seed).unwrap()),
                AdversaryBudget::new(CorruptionKind::Flip, budget),
                BudgetMode::Strict,
            );
            let t = p.run(9, &mut ch, seed).unwrap();
            assert!(t.correct, "seed {seed}");
        }
    }
}
