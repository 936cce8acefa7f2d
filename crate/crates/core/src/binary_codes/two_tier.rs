//! The two-tier code `ECC[s,f]`.
//!
//! A partition descriptor `s` splits the messages into `D` sets and `f` maps
//! each set to a class in `{1,2,3}`. Class-1 messages are encoded as
//! `0^N0 || ecc(x)` with `ecc` of length `2 N0`; every class-2 message maps
//! to `1^N0 || 0^2N0` and every class-3 message to `1^N0 || 1^2N0`.

use std::sync::Arc;

use super::CodeHandle;
use crate::bits::{BitString, Message, TriBitString};
use crate::error::CodeError;
use crate::partitions::PartitionDescriptor;
use crate::ratio::{floor_mul, rat, Rational};

#[derive(Clone, Debug)]
pub struct TwoTierCodeSpec {
    s: BitString,
    descriptor: Option<PartitionDescriptor>,
    f: Vec<u8>,
    base: Arc<CodeHandle>,
    n0_core: usize,
}

impl TwoTierCodeSpec {
    /// `base` has block length `2 N0`; `f[i]` is the class of set `i + 1`.
    /// When `s` decodes, `f` must cover exactly its `D` sets; otherwise every
    /// message falls in set 1 and `f` needs at least one entry.
    pub fn new(base: Arc<CodeHandle>, s: BitString, f: Vec<u8>) -> Result<Self, CodeError> {
        let descriptor = PartitionDescriptor::decode(&s, base.k());
        Self::assemble(base, s, descriptor, f)
    }

    /// Like [`Self::new`] with a known set count, for descriptors that sit
    /// inside a longer padded string.
    pub fn with_set_count(
        base: Arc<CodeHandle>,
        s: BitString,
        d: usize,
        f: Vec<u8>,
    ) -> Result<Self, CodeError> {
        let descriptor = PartitionDescriptor::decode_with_count(&s, base.k(), d);
        Self::assemble(base, s, descriptor, f)
    }

    fn assemble(
        base: Arc<CodeHandle>,
        s: BitString,
        descriptor: Option<PartitionDescriptor>,
        f: Vec<u8>,
    ) -> Result<Self, CodeError> {
        if !base.n0().is_multiple_of(2) {
            return Err(CodeError::InvalidParameter(format!(
                "base length {} is odd",
                base.n0()
            )));
        }
        if f.iter().any(|c| !(1..=3).contains(c)) {
            return Err(CodeError::InvalidParameter(
                "classes must be 1, 2 or 3".into(),
            ));
        }
        let sets = descriptor.as_ref().map_or(1, |d| d.set_count());
        let total = match &descriptor {
            Some(_) => f.len() == sets,
            None => !f.is_empty(),
        };
        if !total {
            return Err(CodeError::InvalidParameter(format!(
                "class map has {} entries for {} sets",
                f.len(),
                sets
            )));
        }
        let n0_core = base.n0() / 2;
        Ok(Self {
            s,
            descriptor,
            f,
            base,
            n0_core,
        })
    }

    pub fn s(&self) -> &BitString {
        &self.s
    }

    pub fn f(&self) -> &[u8] {
        &self.f
    }

    pub fn base(&self) -> &CodeHandle {
        &self.base
    }

    pub fn n0_core(&self) -> usize {
        self.n0_core
    }

    /// Total block length `M = 3 N0`.
    pub fn m(&self) -> usize {
        3 * self.n0_core
    }

    /// Number of sets encoded in `s`, if it decodes.
    pub fn set_count(&self) -> Option<usize> {
        self.descriptor.as_ref().map(|d| d.set_count())
    }

    /// List bound of the class-1 decoder.
    pub fn list_bound(&self) -> usize {
        self.base.list_bound()
    }

    /// `pt(s, x)`, 1-based.
    pub fn set_of(&self, x: Message) -> usize {
        self.descriptor.as_ref().map_or(1, |d| d.pt(x))
    }

    /// `f(pt(s, x))`.
    pub fn class_of(&self, x: Message) -> u8 {
        self.f[self.set_of(x) - 1]
    }

    /// The shared codeword of class 2 or 3.
    pub fn class_word(&self, class: u8) -> BitString {
        assert!(class == 2 || class == 3);
        let n = self.n0_core;
        BitString::concat(&[&BitString::ones(n), &BitString::constant(class == 3, 2 * n)])
    }

    /// `floor((1/3 - 2 eps) M)`, or `None` when the coefficient is negative.
    pub fn class1_radius(&self) -> Option<usize> {
        let coeff = rat(1, 3) - self.base.eps() * 2;
        (coeff >= Rational::from_integer(0)).then(|| floor_mul(coeff, self.m()) as usize)
    }

    /// Radius for the base decoder, `floor((1/2 - 2 eps) 2N0)`.
    fn base_radius(&self) -> Option<usize> {
        let coeff = rat(1, 2) - self.base.eps() * 2;
        (coeff >= Rational::from_integer(0)).then(|| floor_mul(coeff, self.base.n0()) as usize)
    }

    pub fn encode_bits(&self, x: Message) -> BitString {
        match self.class_of(x) {
            1 => BitString::concat(&[&BitString::zeros(self.n0_core), self.base.encode(x)]),
            c => self.class_word(c),
        }
    }

    /// Class-1 messages within the class-1 radius of `m`, with distances, in
    /// ascending message order. No list bound is enforced.
    pub fn scan_class1(&self, m: &BitString) -> Vec<(Message, usize)> {
        assert_eq!(m.len(), self.m());
        let (Some(radius), Some(base_radius)) = (self.class1_radius(), self.base_radius()) else {
            return Vec::new();
        };
        let n = self.n0_core;
        let prefix = m.slice(0, n).count_ones();
        if prefix > radius {
            return Vec::new();
        }
        let tail = m.slice(n, 3 * n);
        self.base
            .scan_within(&tail, base_radius.min(radius - prefix))
            .into_iter()
            .filter(|&(y, _)| self.class_of(y) == 1)
            .map(|(y, d)| (y, d + prefix))
            .filter(|&(_, d)| d <= radius)
            .collect()
    }
}

/// `ECC[s,f](x)`.
pub fn ecc_sf_encode(spec: &TwoTierCodeSpec, x: Message) -> TriBitString {
    TriBitString::from_bits(spec.encode_bits(x))
}

/// `{ x : f(pt(s,x)) = 1 and Δ(ECC[s,f](x), m) <= (1/3 - 2 eps) M }` in
/// ascending order, checked against the list bound.
pub fn ecc_sf_list_decode(
    spec: &TwoTierCodeSpec,
    m: &TriBitString,
) -> Result<Vec<Message>, CodeError> {
    if m.len() != spec.m() {
        return Err(CodeError::LengthMismatch {
            expected: spec.m(),
            got: m.len(),
        });
    }
    let bits = m.as_bits().ok_or(CodeError::ErasuresPresent)?;
    let list: Vec<Message> = spec.scan_class1(bits).into_iter().map(|(x, _)| x).collect();
    if list.len() > spec.list_bound() {
        return Err(CodeError::ListBoundExceeded {
            size: list.len(),
            bound: spec.list_bound(),
        });
    }
    Ok(list)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binary_codes::{build_base_code, repeat_code};
    use crate::partitions::PartitionDescriptor;

    fn spec(k: usize, xs: &[Message], f: Vec<u8>) -> TwoTierCodeSpec {
        let core = build_base_code(k, rat(1, 10)).unwrap();
        let base = Arc::new(repeat_code(&core, 2).unwrap());
        let s = PartitionDescriptor::ptdesc(xs, k).unwrap().encode();
        TwoTierCodeSpec::new(base, s, f).unwrap()
    }

    #[test]
    fn class_words() {
        let sp = spec(3, &[0, 5, 6], vec![1, 2, 3]);
        let n = sp.n0_core();
        let c2 = ecc_sf_encode(&sp, 5).into_bits().unwrap();
        let c3 = ecc_sf_encode(&sp, 6).into_bits().unwrap();
        assert_eq!(
            c2,
            BitString::concat(&[&BitString::ones(n), &BitString::zeros(2 * n)])
        );
        assert_eq!(c3, BitString::ones(3 * n));
        assert_eq!(sp.m(), 3 * n);
    }

    #[test]
    fn decodes_own_codeword_and_rejects_class_words() {
        let sp = spec(3, &[0, 5, 6], vec![1, 2, 3]);
        let c0 = ecc_sf_encode(&sp, 0);
        assert!(ecc_sf_list_decode(&sp, &c0).unwrap().contains(&0));
        let c2 = ecc_sf_encode(&sp, 5);
        assert!(ecc_sf_list_decode(&sp, &c2).unwrap().is_empty());
    }

    #[test]
    fn wrong_class_map_length() {
        let core = build_base_code(3, rat(1, 10)).unwrap();
        let base = Arc::new(repeat_code(&core, 2).unwrap());
        let s = PartitionDescriptor::ptdesc(&[0, 1], 3).unwrap().encode();
        assert!(TwoTierCodeSpec::new(base, s, vec![1]).is_err());
    }
}
