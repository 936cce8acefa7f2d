//! Attacks behind the round lower bounds.
//!
//! Early: blank out Alice's first `b` bits so Bob's first feedback carries no
//! information, then run the pair attack on the rest. Late: steer the first
//! `b` bits of three inputs (two for erasures) to a common word, then attack
//! the rest.

use crate::bits::{BitString, Message};
use crate::channel::CorruptionKind;
use crate::error::AttackError;
use crate::protocols::FeedbackProtocol;
use crate::ratio::{floor_mul_nonneg, rat, Rational};

use super::berlekamp::berlekamp_protocol_attack;
use super::pairwise::{run_pair, PairAdversary, Prefix};
use super::{candidate_messages, clean_run, AttackOutcome};

/// Candidate inputs scanned by the round attacks.
const CANDIDATES: usize = 16;

/// Bits Alice sends before Bob's first feedback slot, read off a clean run
/// on input 0. Equals `|FC|` for protocols without feedback.
pub fn first_feedback_position(protocol: &dyn FeedbackProtocol) -> Result<usize, AttackError> {
    let t = clean_run(protocol, 0)?;
    Ok(t.rounds
        .iter()
        .take_while(|r| r.feedback.is_empty())
        .map(|r| r.sent.len())
        .sum())
}

/// Searches for three prefixes whose coordinate-wise majority `m` is within
/// `3b/10` of each. Returns the indices and `m`.
pub fn find_confusable_triple(prefixes: &[BitString]) -> Option<(usize, usize, usize, BitString)> {
    let b = prefixes.first()?.len();
    let n = prefixes.len();
    for i in 0..n {
        for j in i + 1..n {
            for l in j + 1..n {
                let (p, q, r) = (&prefixes[i], &prefixes[j], &prefixes[l]);
                let m = BitString::from_bits((0..b).map(|t| {
                    let ones =
                        usize::from(p.get(t)) + usize::from(q.get(t)) + usize::from(r.get(t));
                    ones >= 2
                }));
                let worst = p.distance(&m).max(q.distance(&m)).max(r.distance(&m));
                if 10 * worst <= 3 * b {
                    return Some((i, j, l, m));
                }
            }
        }
    }
    None
}

/// The value the recursion assigns one more round when the first segment
/// is short: `1/3 - d/3 + d^2` for flips, `1 - d + d^2` for erasures.
fn early_bound(kind: CorruptionKind, d: Rational) -> Rational {
    match kind {
        CorruptionKind::Flip => rat(1, 3) - d / 3 + d * d,
        CorruptionKind::Erase => Rational::from_integer(1) - d + d * d,
    }
}

/// Blanks Alice's first `b` bits (flips them to 0, or erases them), then
/// attacks the remaining `N - b` bits with residual allowance
/// `floor(delta_prev (N - b))`: the flip pair attack with that switch point,
/// or the erasure pair attack. Scans pairs of candidate inputs and returns
/// the cheapest. Succeeds when the views match and every cost is within
/// `floor(bound N)` for the one-more-round bound.
pub fn round_attack_early(
    protocol: &dyn FeedbackProtocol,
    b: usize,
    delta_prev: Rational,
) -> Result<AttackOutcome, AttackError> {
    let kind = protocol.corruption_kind();
    let n = protocol.alice_bits();
    let edge = match kind {
        CorruptionKind::Flip => rat(1, 3) - delta_prev,
        CorruptionKind::Erase => Rational::from_integer(1) - delta_prev,
    };
    if Rational::from_integer(b as i64) >= edge * Rational::from_integer(n as i64) {
        return Err(AttackError::InvalidInput(format!(
            "first segment of {b} bits is not below the early-case edge for {n} bits"
        )));
    }
    let theta = floor_mul_nonneg(delta_prev, n - b) as usize;
    let budget = floor_mul_nonneg(early_bound(kind, delta_prev), n) as usize;
    let msgs = candidate_messages(protocol.params().k, CANDIDATES);
    let mut best: Option<AttackOutcome> = None;
    for (i, &x) in msgs.iter().enumerate() {
        for &y in &msgs[i + 1..] {
            let o = run_pair(
                protocol,
                "round-early".into(),
                x,
                y,
                &|| PairAdversary::new(kind, x, y, theta).with_prefix(b, Prefix::Blank),
                Some(budget),
            )?;
            let better = match &best {
                None => true,
                Some(cur) => {
                    (o.succeeded, std::cmp::Reverse(o.max_cost()))
                        > (cur.succeeded, std::cmp::Reverse(cur.max_cost()))
                }
            };
            if better {
                best = Some(o);
            }
        }
    }
    let mut out =
        best.ok_or_else(|| AttackError::InvalidInput("need at least two messages".into()))?;
    out.note = format!("b={b} residual allowance {theta}");
    Ok(out)
}

/// Late case with `b` the first feedback position.
///
/// Flips: finds three inputs whose first `b` bits are within `3b/10` of
/// their majority `m`, forces the prefix to `m` and runs the three-input
/// majority attack on the rest; budget `floor((29/90 + delta_prev/30) N) + 1`.
/// Erasures: finds the pair of inputs whose first `b` bits are closest,
/// erases where they differ and then everything after the prefix; budget
/// `floor((3/5 + 2 delta_prev/5) N)`. Returns an outcome with
/// `succeeded = false` when no candidate set is close enough.
pub fn round_attack_late(
    protocol: &dyn FeedbackProtocol,
    delta_prev: Rational,
) -> Result<AttackOutcome, AttackError> {
    let kind = protocol.corruption_kind();
    let n = protocol.alice_bits();
    let b = first_feedback_position(protocol)?;
    let msgs = candidate_messages(protocol.params().k, CANDIDATES);
    let first = protocol.alice_view(&[]);
    let prefixes: Vec<BitString> = msgs.iter().map(|&x| first.message(x).slice(0, b)).collect();
    let failed = |note: String| AttackOutcome {
        name: "round-late".into(),
        confused_inputs: Vec::new(),
        per_input_cost: Vec::new(),
        views: Vec::new(),
        outputs: Vec::new(),
        budget: None,
        total_bits: n,
        succeeded: false,
        note,
    };
    match kind {
        CorruptionKind::Flip => {
            let budget = floor_mul_nonneg(rat(29, 90) + delta_prev / 30, n) as usize + 1;
            let Some((i, j, l, m)) = find_confusable_triple(&prefixes) else {
                return Ok(failed(format!(
                    "no candidate triple within 3b/10 of its majority, b={b}"
                )));
            };
            let inputs: [Message; 3] = [msgs[i], msgs[j], msgs[l]];
            let mut out = match berlekamp_protocol_attack(protocol, inputs, &m, Some(budget)) {
                Ok(o) => o,
                Err(AttackError::DegenerateProtocol { n: rest }) => {
                    return Ok(failed(format!(
                        "majority attack never stopped on the {rest} bits after b={b}"
                    )))
                }
                Err(e) => return Err(e),
            };
            out.name = "round-late".into();
            out.note = format!("b={b} triple {inputs:?}; {}", out.note);
            Ok(out)
        }
        CorruptionKind::Erase => {
            let budget = floor_mul_nonneg(rat(3, 5) + delta_prev * rat(2, 5), n) as usize;
            let mut best: Option<(usize, usize, usize)> = None;
            for i in 0..msgs.len() {
                for j in i + 1..msgs.len() {
                    let d = prefixes[i].distance(&prefixes[j]);
                    if best.is_none_or(|(_, _, bd)| d < bd) {
                        best = Some((i, j, d));
                    }
                }
            }
            let Some((i, j, d)) = best else {
                return Ok(failed("need at least two messages".into()));
            };
            if 5 * d > 3 * b {
                return Ok(failed(format!(
                    "closest prefixes differ in {d} of {b} bits"
                )));
            }
            let (x, y) = (msgs[i], msgs[j]);
            let mut out = run_pair(
                protocol,
                "round-late".into(),
                x,
                y,
                &|| PairAdversary::new(kind, x, y, 0).with_tail_blank(b),
                Some(budget),
            )?;
            out.note = format!("b={b} prefix distance {d}");
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::binary_codes::CodeHandle;
    use crate::protocols::{DeskOverrides, ErasureProtocol, Mode, PlainProtocol, RewindProtocol};

    fn bits(s: &str) -> BitString {
        BitString::parse_binary(s).unwrap()
    }

    #[test]
    fn triple_search() {
        let same = vec![bits("0101"); 3];
        let (_, _, _, m) = find_confusable_triple(&same).unwrap();
        assert_eq!(m, bits("0101"));
        assert!(
            find_confusable_triple(&[bits("000000"), bits("000111"), bits("111000")]).is_none()
        );
        assert!(find_confusable_triple(&[bits("01"), bits("10")]).is_none());
    }

    #[test]
    fn triple_search_verified_by_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20);
        let words: Vec<BitString> = (0..64)
            .map(|_| BitString::from_bits((0..20).map(|_| rng.gen::<bool>())))
            .collect();
        if let Some((i, j, l, m)) = find_confusable_triple(&words) {
            for w in [&words[i], &words[j], &words[l]] {
                let d = (0..20).filter(|&t| w.get(t) != m.get(t)).count();
                assert!(10 * d <= 60);
            }
        }
    }

    fn plain(kind: CorruptionKind) -> PlainProtocol {
        let words = ["00000000", "00001111", "11110000", "11111111"]
            .iter()
            .map(|w| bits(w))
            .collect();
        PlainProtocol::from_code(
            Arc::new(CodeHandle::from_codebook(2, rat(1, 4), words, 2).unwrap()),
            kind,
        )
    }

    #[test]
    fn early_with_empty_segment_is_the_pair_attack() {
        let p = plain(CorruptionKind::Flip);
        let o = round_attack_early(&p, 0, rat(1, 4)).unwrap();
        assert!(o.succeeded);
        assert_eq!(o.max_cost(), 2);
        assert!(round_attack_early(&p, 8, rat(1, 4)).is_err());
    }

    #[test]
    fn early_erasure_on_long_phase_two() {
        let over = DeskOverrides {
            t: Some(120),
            ..Default::default()
        };
        let p = ErasureProtocol::new(3, rat(1, 4), Mode::Desk, &over).unwrap();
        let b = first_feedback_position(&p).unwrap();
        assert_eq!(b, p.params().n0);
        let o = round_attack_early(&p, b, rat(1, 2)).unwrap();
        assert!(o.views_identical());
        assert!(o.max_cost() >= b);
        assert_eq!(o.succeeded, o.max_cost() <= o.budget.unwrap());
    }

    #[test]
    fn late_on_rewind_starts_with_feedback() {
        let r = RewindProtocol::new(4, rat(1, 4)).unwrap();
        assert_eq!(first_feedback_position(&r).unwrap(), 0);
        let o = round_attack_late(&r, rat(1, 4)).unwrap();
        assert!(o.views_identical());
    }

    #[test]
    fn late_erasure_on_plain() {
        let p = plain(CorruptionKind::Erase);
        let o = round_attack_late(&p, rat(1, 2)).unwrap();
        assert!(o.succeeded);
        assert_eq!(o.max_cost(), 4);
    }
}
