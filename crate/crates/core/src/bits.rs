//! Packed bit strings and three-valued channel strings.
//!
//! Bit `i` of a string is the `i`-th symbol sent. Messages in `{0,1}^k` are
//! carried as `u64` values read most-significant-bit first, so numeric order
//! on messages coincides with lexicographic order on their bit strings.

use std::fmt;

use crate::error::ParseError;

/// A message in `{0,1}^k`, stored in the low `k` bits of a `u64`.
pub type Message = u64;

/// Bit `i` (0-based, MSB first) of a `k`-bit message.
#[inline]
pub fn msg_bit(x: Message, k: usize, i: usize) -> bool {
    debug_assert!(i < k);
    (x >> (k - 1 - i)) & 1 == 1
}

/// Number of bits needed to write any value in `0..n` (at least 1 for `n > 1`,
/// 0 for `n <= 1`).
pub fn ceil_log2(n: u64) -> usize {
    if n <= 1 {
        0
    } else {
        (64 - (n - 1).leading_zeros()) as usize
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn ones(len: usize) -> Self {
        Self::constant(true, len)
    }

    pub fn constant(bit: bool, len: usize) -> Self {
        let mut s = Self::zeros(len);
        if bit {
            for w in &mut s.words {
                *w = u64::MAX;
            }
            s.clear_tail();
        }
        s
    }

    /// A string of `len` bits taken from packed words, bit `i` at position
    /// `i % 64` of word `i / 64`. Surplus words and bits are dropped.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Self {
        words.resize(len.div_ceil(64), 0);
        let mut s = Self { len, words };
        s.clear_tail();
        s
    }

    /// The `width`-bit big-endian representation of `value`.
    pub fn from_uint(value: u64, width: usize) -> Self {
        let mut s = Self::zeros(width);
        for i in 0..width {
            let shift = width - 1 - i;
            if shift < 64 && (value >> shift) & 1 == 1 {
                s.set(i, true);
            }
        }
        s
    }

    /// Reads bits `start..start+width` as a big-endian unsigned integer.
    pub fn read_uint(&self, start: usize, width: usize) -> u64 {
        assert!(width <= 64 && start + width <= self.len);
        let mut v = 0u64;
        for i in start..start + width {
            v = (v << 1) | self.get(i) as u64;
        }
        v
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut s = Self::new();
        for b in bits {
            s.push(b);
        }
        s
    }

    /// Parses a string over `{'0','1'}`.
    pub fn parse_binary(text: &str) -> Result<Self, ParseError> {
        text.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(ParseError::BadDigit(other)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Self::from_bits)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i & 63);
        if bit {
            self.words[i >> 6] |= mask;
        } else {
            self.words[i >> 6] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        let b = self.get(i);
        self.set(i, !b);
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(64) {
            self.words.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, bit);
    }

    pub fn extend_from(&mut self, other: &BitString) {
        for b in other.iter() {
            self.push(b);
        }
    }

    pub fn concat(parts: &[&BitString]) -> Self {
        let mut s = Self::new();
        for p in parts {
            s.extend_from(p);
        }
        s
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn slice(&self, start: usize, end: usize) -> Self {
        assert!(start <= end && end <= self.len);
        Self::from_bits((start..end).map(|i| self.get(i)))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn complement(&self) -> Self {
        let mut s = Self {
            len: self.len,
            words: self.words.iter().map(|w| !w).collect(),
        };
        s.clear_tail();
        s
    }

    pub fn repeat(&self, times: usize) -> Self {
        let mut s = Self::new();
        for _ in 0..times {
            s.extend_from(self);
        }
        s
    }

    pub fn is_all(&self, bit: bool) -> bool {
        if bit {
            self.count_ones() == self.len
        } else {
            self.words.iter().all(|&w| w == 0)
        }
    }

    /// Hamming distance. Panics on length mismatch.
    pub fn distance(&self, other: &BitString) -> usize {
        assert_eq!(
            self.len, other.len,
            "distance between strings of unequal length"
        );
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// Hamming distance restricted to positions where `mask` is 0.
    pub fn distance_outside(&self, other: &BitString, mask: &BitString) -> usize {
        assert_eq!(self.len, other.len);
        assert_eq!(self.len, mask.len);
        self.words
            .iter()
            .zip(&other.words)
            .zip(&mask.words)
            .map(|((a, b), m)| ((a ^ b) & !m).count_ones() as usize)
            .sum()
    }

    /// Hexadecimal form: bit 0 is the high bit of the first digit, and the
    /// final digit is zero-padded on the right.
    pub fn to_hex(&self) -> String {
        let digits = self.len.div_ceil(4);
        let mut out = String::with_capacity(digits);
        for d in 0..digits {
            let mut nib = 0u32;
            for j in 0..4 {
                let i = 4 * d + j;
                nib = (nib << 1) | (i < self.len && self.get(i)) as u32;
            }
            out.push(char::from_digit(nib, 16).unwrap());
        }
        out
    }

    /// Inverse of [`BitString::to_hex`] for a known bit length.
    pub fn from_hex(hex: &str, len: usize) -> Result<Self, ParseError> {
        if hex.len() != len.div_ceil(4) {
            return Err(ParseError::HexLength {
                digits: hex.len(),
                bits: len,
            });
        }
        let mut s = Self::zeros(len);
        for (d, c) in hex.chars().enumerate() {
            let nib = c.to_digit(16).ok_or(ParseError::BadDigit(c))?;
            for j in 0..4 {
                let i = 4 * d + j;
                let bit = (nib >> (3 - j)) & 1 == 1;
                if i < len {
                    s.set(i, bit);
                } else if bit {
                    return Err(ParseError::NonZeroPadding);
                }
            }
        }
        Ok(s)
    }

    /// `len:hex`, a self-delimiting form used in transcripts.
    pub fn to_framed_hex(&self) -> String {
        format!("{}:{}", self.len, self.to_hex())
    }

    pub fn from_framed_hex(text: &str) -> Result<Self, ParseError> {
        let (len, hex) = text
            .split_once(':')
            .ok_or(ParseError::MissingField("len:hex"))?;
        let len: usize = len
            .parse()
            .map_err(|_| ParseError::BadNumber(len.to_string()))?;
        Self::from_hex(hex, len)
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString(")?;
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// One channel symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Symbol {
    Zero,
    One,
    Erased,
}

/// A string over `{0, 1, ⊥}`.
///
/// Stored as a value plane and an erasure mask; the value under an erased
/// position is always 0.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct TriBitString {
    values: BitString,
    erased: BitString,
}

impl TriBitString {
    pub fn from_bits(bits: BitString) -> Self {
        let erased = BitString::zeros(bits.len());
        Self {
            values: bits,
            erased,
        }
    }

    pub fn all_erased(len: usize) -> Self {
        Self {
            values: BitString::zeros(len),
            erased: BitString::ones(len),
        }
    }

    pub fn from_symbols<I: IntoIterator<Item = Symbol>>(symbols: I) -> Self {
        let mut values = BitString::new();
        let mut erased = BitString::new();
        for s in symbols {
            values.push(s == Symbol::One);
            erased.push(s == Symbol::Erased);
        }
        Self { values, erased }
    }

    /// Parses a string over `{'0','1','_'}` where `_` is an erasure.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        text.chars()
            .map(|c| match c {
                '0' => Ok(Symbol::Zero),
                '1' => Ok(Symbol::One),
                '_' => Ok(Symbol::Erased),
                other => Err(ParseError::BadDigit(other)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Self::from_symbols)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn symbol(&self, i: usize) -> Symbol {
        if self.erased.get(i) {
            Symbol::Erased
        } else if self.values.get(i) {
            Symbol::One
        } else {
            Symbol::Zero
        }
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        (0..self.len()).map(move |i| self.symbol(i))
    }

    pub fn erase(&mut self, i: usize) {
        self.values.set(i, false);
        self.erased.set(i, true);
    }

    pub fn flip(&mut self, i: usize) {
        assert!(!self.erased.get(i), "cannot flip an erased symbol");
        self.values.flip(i);
    }

    pub fn erasure_count(&self) -> usize {
        self.erased.count_ones()
    }

    pub fn has_erasures(&self) -> bool {
        !self.erased.is_all(false)
    }

    pub fn erasure_mask(&self) -> &BitString {
        &self.erased
    }

    /// Value plane; erased positions read as 0.
    pub fn values(&self) -> &BitString {
        &self.values
    }

    /// The underlying bits when no symbol is erased.
    pub fn as_bits(&self) -> Option<&BitString> {
        (!self.has_erasures()).then_some(&self.values)
    }

    pub fn into_bits(self) -> Option<BitString> {
        (!self.has_erasures()).then_some(self.values)
    }

    /// Whether `word` agrees with every unerased position.
    pub fn consistent_with(&self, word: &BitString) -> bool {
        self.values.distance_outside(word, &self.erased) == 0
    }

    /// Number of positions where the symbols differ (an erasure differs from
    /// any bit).
    pub fn symbol_distance(&self, other: &TriBitString) -> usize {
        assert_eq!(self.len(), other.len());
        (0..self.len())
            .filter(|&i| self.symbol(i) != other.symbol(i))
            .count()
    }

    pub fn slice(&self, start: usize, end: usize) -> Self {
        Self {
            values: self.values.slice(start, end),
            erased: self.erased.slice(start, end),
        }
    }

    pub fn extend_from(&mut self, other: &TriBitString) {
        self.values.extend_from(&other.values);
        self.erased.extend_from(&other.erased);
    }

    /// Hex of the value plane, followed by `/` and the erasure mask when any
    /// symbol is erased.
    pub fn to_hex(&self) -> String {
        if self.has_erasures() {
            format!("{}/{}", self.values.to_hex(), self.erased.to_hex())
        } else {
            self.values.to_hex()
        }
    }

    pub fn from_hex(text: &str, len: usize) -> Result<Self, ParseError> {
        match text.split_once('/') {
            None => Ok(Self::from_bits(BitString::from_hex(text, len)?)),
            Some((v, e)) => {
                let values = BitString::from_hex(v, len)?;
                let erased = BitString::from_hex(e, len)?;
                if values.distance_outside(&BitString::zeros(len), &erased.complement()) != 0 {
                    return Err(ParseError::ValueUnderErasure);
                }
                Ok(Self { values, erased })
            }
        }
    }
}

impl From<BitString> for TriBitString {
    fn from(bits: BitString) -> Self {
        Self::from_bits(bits)
    }
}

impl fmt::Debug for TriBitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TriBitString({self})")
    }
}

impl fmt::Display for TriBitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in self.symbols() {
            f.write_str(match s {
                Symbol::Zero => "0",
                Symbol::One => "1",
                Symbol::Erased => "_",
            })?;
        }
        Ok(())
    }
}

/// Bits of a `k`-bit message as a string.
pub fn message_bits(x: Message, k: usize) -> BitString {
    BitString::from_uint(x, k)
}

/// Hex form of a `k`-bit message, `ceil(k/4)` digits.
pub fn message_hex(x: Message, k: usize) -> String {
    message_bits(x, k).to_hex()
}

pub fn message_from_hex(hex: &str, k: usize) -> Result<Message, ParseError> {
    let bits = BitString::from_hex(hex, k)?;
    Ok(bits.read_uint(0, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn message_bits_are_msb_first() {
        assert_eq!(message_bits(0b1011, 4).to_string(), "1011");
        assert!(msg_bit(0b1000, 4, 0));
        assert!(!msg_bit(0b1000, 4, 3));
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(4), 2);
        assert_eq!(ceil_log2(5), 3);
        assert_eq!(ceil_log2(1024), 10);
        assert_eq!(ceil_log2(1025), 11);
    }

    #[test]
    fn hex_pads_last_digit_on_the_right() {
        let s = BitString::parse_binary("101").unwrap();
        assert_eq!(s.to_hex(), "a");
        assert_eq!(BitString::from_hex("a", 3).unwrap(), s);
        assert!(BitString::from_hex("b", 3).is_err());
    }

    #[test]
    fn complement_and_constants() {
        let s = BitString::parse_binary("0110").unwrap();
        assert_eq!(s.complement().to_string(), "1001");
        assert!(BitString::ones(70).is_all(true));
        assert_eq!(BitString::ones(70).count_ones(), 70);
        assert!(BitString::ones(70).complement().is_all(false));
    }

    #[test]
    fn tri_string_round_trip() {
        let t = TriBitString::parse("1_0_1").unwrap();
        assert_eq!(t.erasure_count(), 2);
        assert_eq!(TriBitString::from_hex(&t.to_hex(), 5).unwrap(), t);
        assert!(t.consistent_with(&BitString::parse_binary("11011").unwrap()));
        assert!(!t.consistent_with(&BitString::parse_binary("01011").unwrap()));
    }

    proptest! {
        #[test]
        fn hex_round_trip(bits in proptest::collection::vec(any::<bool>(), 0..200)) {
            let s = BitString::from_bits(bits.clone());
            prop_assert_eq!(BitString::from_hex(&s.to_hex(), bits.len()).unwrap(), s.clone());
            prop_assert_eq!(BitString::from_framed_hex(&s.to_framed_hex()).unwrap(), s);
        }

        #[test]
        fn distance_matches_naive(a in proptest::collection::vec(any::<bool>(), 130),
                                  b in proptest::collection::vec(any::<bool>(), 130)) {
            let naive = a.iter().zip(&b).filter(|(x, y)| x != y).count();
            prop_assert_eq!(BitString::from_bits(a).distance(&BitString::from_bits(b)), naive);
        }

        #[test]
        fn uint_round_trip(v in any::<u64>(), w in 1usize..=64) {
            let masked = if w == 64 { v } else { v & ((1u64 << w) - 1) };
            prop_assert_eq!(BitString::from_uint(v, w).read_uint(0, w), masked);
        }
    }
}
