//! Exact bound calculators: the round recursion and the feedback-bit bound.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};

use crate::channel::CorruptionKind;
use crate::ratio::Rational;

/// A non-negative fraction kept unreduced so the recursion stays cheap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactFraction {
    pub num: BigInt,
    pub den: BigInt,
}

impl ExactFraction {
    fn new(num: i64, den: i64) -> Self {
        Self {
            num: num.into(),
            den: den.into(),
        }
    }

    /// `self < a/b`, with `b > 0`.
    pub fn lt_ratio(&self, a: i64, b: i64) -> bool {
        &self.num * BigInt::from(b) < BigInt::from(a) * &self.den
    }

    pub fn le(&self, other: &Self) -> bool {
        &self.num * &other.den <= &other.num * &self.den
    }

    pub fn reduced(&self) -> BigRational {
        BigRational::new(self.num.clone(), self.den.clone())
    }

    pub fn to_f64(&self) -> f64 {
        // Scale down both sides so large operands still convert.
        let shift = self.den.bits().saturating_sub(60);
        let n: BigInt = &self.num >> shift;
        let d: BigInt = &self.den >> shift;
        let n: f64 = n.to_string().parse().unwrap_or(f64::NAN);
        let d: f64 = d.to_string().parse().unwrap_or(f64::NAN);
        n / d
    }
}

/// Iterates `delta(0), delta(1), ...` of the round recursion.
///
/// Flips: `delta(0) = 1/4`, `delta(r+1) = max(1/3 - d/3 + d^2, 29/90 + d/30)`.
/// Erasures: `delta(0) = 1/2`, `delta(r+1) = max(1 - d + d^2, 3/5 + 2d/5)`.
pub struct DeltaRecursion {
    kind: CorruptionKind,
    next: ExactFraction,
}

impl DeltaRecursion {
    pub fn new(kind: CorruptionKind) -> Self {
        let next = match kind {
            CorruptionKind::Flip => ExactFraction::new(1, 4),
            CorruptionKind::Erase => ExactFraction::new(1, 2),
        };
        Self { kind, next }
    }

    fn step(&self, d: &ExactFraction) -> ExactFraction {
        let (n, q) = (&d.num, &d.den);
        let (early, late) = match self.kind {
            CorruptionKind::Flip => (
                // (q^2 - n q + 3 n^2) / (3 q^2)
                ExactFraction {
                    num: q * q - n * q + BigInt::from(3) * n * n,
                    den: BigInt::from(3) * q * q,
                },
                // (29 q + 3 n) / (90 q)
                ExactFraction {
                    num: BigInt::from(29) * q + BigInt::from(3) * n,
                    den: BigInt::from(90) * q,
                },
            ),
            CorruptionKind::Erase => (
                // (q^2 - n q + n^2) / q^2
                ExactFraction {
                    num: q * q - n * q + n * n,
                    den: q * q,
                },
                // (3 q + 2 n) / (5 q)
                ExactFraction {
                    num: BigInt::from(3) * q + BigInt::from(2) * n,
                    den: BigInt::from(5) * q,
                },
            ),
        };
        if early.le(&late) {
            late
        } else {
            early
        }
    }
}

impl Iterator for DeltaRecursion {
    type Item = ExactFraction;

    fn next(&mut self) -> Option<ExactFraction> {
        let following = self.step(&self.next);
        Some(std::mem::replace(&mut self.next, following))
    }
}

pub fn round_lb_delta_error(r: usize) -> BigRational {
    DeltaRecursion::new(CorruptionKind::Flip)
        .nth(r)
        .expect("infinite")
        .reduced()
}

pub fn round_lb_delta_erasure(r: usize) -> BigRational {
    DeltaRecursion::new(CorruptionKind::Erase)
        .nth(r)
        .expect("infinite")
        .reduced()
}

/// Whether `l^(t l) > 2^k`.
fn exceeds(l: u64, t: u64, k: u64) -> bool {
    if l <= 1 {
        return false;
    }
    let est = (t * l) as f64 * (l as f64).log2();
    if est > k as f64 + 2.0 {
        return true;
    }
    if est < k as f64 - 2.0 {
        return false;
    }
    let power: BigUint = Pow::pow(BigUint::from(l), t * l);
    power > BigUint::one() << k
}

/// Clique size `t = ceil(10 / delta)`.
fn clique_size(delta: Rational) -> u64 {
    assert!(delta > Rational::zero(), "delta must be positive");
    (Rational::from_integer(10) / delta).ceil().to_integer() as u64
}

/// The least `l` with `l^(t l) > 2^k` for `t = ceil(10/delta)`, counting up.
pub fn least_clique_colors(k: u64, delta: Rational) -> u64 {
    let t = clique_size(delta);
    (1..).find(|&l| exceeds(l, t, k)).expect("unbounded search")
}

fn bits_for(l: u64) -> usize {
    crate::bits::ceil_log2(l)
}

/// Feedback bits any protocol resisting a `1/4 + delta` fraction of flips
/// needs: `ceil(log2 l)` for the least `l` with `l^(t l) > 2^k`.
pub fn feedback_bits_lower_bound(k: u64, delta: Rational) -> usize {
    bits_for(least_clique_colors(k, delta))
}

/// The same value found by doubling past the threshold and then counting
/// down.
pub fn feedback_bits_lower_bound_descending(k: u64, delta: Rational) -> usize {
    let t = clique_size(delta);
    let mut hi = 2u64;
    while !exceeds(hi, t, k) {
        hi *= 2;
    }
    while hi > 1 && exceeds(hi - 1, t, k) {
        hi -= 1;
    }
    bits_for(hi)
}
