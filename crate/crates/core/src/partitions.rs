//! Short descriptors of partitions of `{0,1}^k` that separate a list of
//! strings.
//!
//! A descriptor stores `D` bit positions `I` and the restrictions `x_i[I]` of
//! the `D` listed strings. The set of any `x` is the first `i` with
//! `x[I] = x_i[I]`, and set 1 when there is none. Indices are 0-based in the
//! API; set numbers are 1-based.
//!
//! Wire layout: the `D` indices, each in `ceil(log2 k)` bits big-endian, then
//! the `D` restrictions row by row, `D * ceil(log2 k) + D^2` bits in total.

use crate::bits::{ceil_log2, msg_bit, BitString, Message};
use crate::error::PartitionError;

/// Bits used to write one index of a `k`-bit string.
pub fn index_width(k: usize) -> usize {
    ceil_log2(k as u64)
}

/// Length of an encoded descriptor with `d` sets over `k`-bit strings.
pub fn encoded_len(d: usize, k: usize) -> usize {
    d * index_width(k) + d * d
}

/// `x` restricted to `indices`.
pub fn restrict(x: Message, k: usize, indices: &[usize]) -> BitString {
    BitString::from_bits(indices.iter().map(|&i| msg_bit(x, k, i)))
}

/// Positions on which the listed strings have pairwise distinct restrictions,
/// one per string. Each new string either collides with exactly one earlier
/// string on the positions chosen so far, and then gets the first position
/// where the two differ, or collides with none and gets the first unused
/// position.
pub fn distinguishing_indices(xs: &[Message], k: usize) -> Result<Vec<usize>, PartitionError> {
    if xs.len() > k {
        return Err(PartitionError::TooManyStrings { count: xs.len(), k });
    }
    distinguishing_indices_relaxed(xs, k)
}

/// [`distinguishing_indices`] without the `L <= k` requirement. Once every
/// position is in use all distinct strings already differ on the chosen
/// positions, so later strings reuse position 0.
pub fn distinguishing_indices_relaxed(
    xs: &[Message],
    k: usize,
) -> Result<Vec<usize>, PartitionError> {
    if xs.is_empty() {
        return Err(PartitionError::Empty);
    }
    if k == 0 || (k < 64 && xs.iter().any(|&x| x >> k != 0)) {
        return Err(PartitionError::TooManyStrings { count: xs.len(), k });
    }
    let mut sorted = xs.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(PartitionError::DuplicateString);
    }
    let mut indices: Vec<usize> = Vec::with_capacity(xs.len());
    let mut used = vec![false; k];
    indices.push(0);
    used[0] = true;
    for (l, &x) in xs.iter().enumerate().skip(1) {
        let key = restrict(x, k, &indices);
        let twin = xs[..l].iter().find(|&&y| restrict(y, k, &indices) == key);
        let next = match twin {
            Some(&y) => (0..k)
                .find(|&i| msg_bit(x, k, i) != msg_bit(y, k, i))
                .expect("distinct strings"),
            None => used.iter().position(|&u| !u).unwrap_or(0),
        };
        used[next] = true;
        indices.push(next);
    }
    Ok(indices)
}

/// A decoded partition descriptor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionDescriptor {
    k: usize,
    indices: Vec<usize>,
    rows: Vec<BitString>,
}

impl PartitionDescriptor {
    /// Descriptor placing `xs[i]` in set `i + 1`. Requires `|xs| <= k`.
    pub fn ptdesc(xs: &[Message], k: usize) -> Result<Self, PartitionError> {
        let indices = distinguishing_indices(xs, k)?;
        Ok(Self::from_indices(xs, k, indices))
    }

    /// [`Self::ptdesc`] for lists longer than `k`.
    pub fn ptdesc_relaxed(xs: &[Message], k: usize) -> Result<Self, PartitionError> {
        let indices = distinguishing_indices_relaxed(xs, k)?;
        Ok(Self::from_indices(xs, k, indices))
    }

    /// A descriptor with exactly `width` sets: the listed strings take the
    /// first sets and the remaining rows are all zeros. The padding
    /// positions repeat position 0.
    pub fn ptdesc_padded(xs: &[Message], k: usize, width: usize) -> Result<Self, PartitionError> {
        if width < xs.len() {
            return Err(PartitionError::WidthTooSmall {
                width,
                count: xs.len(),
            });
        }
        let mut indices = distinguishing_indices_relaxed(xs, k)?;
        indices.resize(width, 0);
        let mut rows: Vec<BitString> = xs.iter().map(|&x| restrict(x, k, &indices)).collect();
        rows.resize(width, BitString::zeros(width));
        Ok(Self { k, indices, rows })
    }

    /// A descriptor from explicit indices and rows, one row of `D` bits per
    /// set. Used to build descriptors over strings wider than a `Message`.
    pub fn from_parts(
        k: usize,
        indices: Vec<usize>,
        rows: Vec<BitString>,
    ) -> Result<Self, PartitionError> {
        let d = indices.len();
        if d == 0 {
            return Err(PartitionError::Empty);
        }
        if indices.iter().any(|&i| i >= k) || rows.len() != d || rows.iter().any(|r| r.len() != d) {
            return Err(PartitionError::TooManyStrings { count: d, k });
        }
        Ok(Self { k, indices, rows })
    }

    fn from_indices(xs: &[Message], k: usize, indices: Vec<usize>) -> Self {
        let rows = xs.iter().map(|&x| restrict(x, k, &indices)).collect();
        Self { k, indices, rows }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of sets `D`.
    pub fn set_count(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn evaluations(&self) -> &[BitString] {
        &self.rows
    }

    /// Set of `x`, in `1..=D`.
    pub fn pt(&self, x: Message) -> usize {
        let key = restrict(x, self.k, &self.indices);
        self.rows
            .iter()
            .position(|r| *r == key)
            .map_or(1, |i| i + 1)
    }

    pub fn encode(&self) -> BitString {
        let w = index_width(self.k);
        let mut s = BitString::new();
        for &i in &self.indices {
            s.extend_from(&BitString::from_uint(i as u64, w));
        }
        for r in &self.rows {
            s.extend_from(r);
        }
        s
    }

    /// Decodes `s` as a descriptor over `k`-bit strings, inferring `D` from
    /// the length. `None` when the length fits no `D` or an index is out of
    /// range.
    pub fn decode(s: &BitString, k: usize) -> Option<Self> {
        let d = set_count_for_len(s.len(), k)?;
        Self::decode_with_count(s, k, d)
    }

    /// Decodes the first `encoded_len(d, k)` bits of `s`.
    pub fn decode_with_count(s: &BitString, k: usize, d: usize) -> Option<Self> {
        if d == 0 || k == 0 || s.len() < encoded_len(d, k) {
            return None;
        }
        let w = index_width(k);
        let indices: Vec<usize> = (0..d).map(|j| s.read_uint(j * w, w) as usize).collect();
        if indices.iter().any(|&i| i >= k) {
            return None;
        }
        let base = d * w;
        let rows = (0..d)
            .map(|r| s.slice(base + r * d, base + (r + 1) * d))
            .collect();
        Some(Self { k, indices, rows })
    }
}

/// The `D > 0` with `D * ceil(log2 k) + D^2 = len`, if any.
pub fn set_count_for_len(len: usize, k: usize) -> Option<usize> {
    let mut d = 1;
    while encoded_len(d, k) < len {
        d += 1;
    }
    (encoded_len(d, k) == len).then_some(d)
}

/// Set of `x` under the encoded descriptor `s`; 1 when `s` does not decode.
pub fn pt(s: &BitString, k: usize, x: Message) -> usize {
    PartitionDescriptor::decode(s, k).map_or(1, |d| d.pt(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(s: &str) -> Message {
        u64::from_str_radix(s, 2).unwrap()
    }

    #[test]
    fn two_strings() {
        let xs = [parse("00"), parse("01")];
        let idx = distinguishing_indices(&xs, 2).unwrap();
        assert!(idx.contains(&1));
        assert_ne!(restrict(xs[0], 2, &idx), restrict(xs[1], 2, &idx));
    }

    #[test]
    fn three_strings() {
        let xs = [parse("000"), parse("011"), parse("101")];
        let idx = distinguishing_indices(&xs, 3).unwrap();
        assert_eq!(idx.len(), 3);
        let rows: Vec<_> = xs.iter().map(|&x| restrict(x, 3, &idx)).collect();
        for i in 0..3 {
            for j in i + 1..3 {
                assert_ne!(rows[i], rows[j]);
            }
        }
    }

    #[test]
    fn too_many_strings() {
        assert_eq!(
            distinguishing_indices(&[0, 1, 2], 2),
            Err(PartitionError::TooManyStrings { count: 3, k: 2 })
        );
        assert!(distinguishing_indices_relaxed(&[0, 1, 2], 2).is_ok());
    }

    #[test]
    fn singleton_and_empty() {
        let d = PartitionDescriptor::ptdesc(&[5], 4).unwrap();
        assert_eq!(d.set_count(), 1);
        assert_eq!(d.pt(5), 1);
        assert_eq!(pt(&BitString::new(), 4, 9), 1);
        assert_eq!(distinguishing_indices(&[], 4), Err(PartitionError::Empty));
        assert_eq!(
            distinguishing_indices(&[3, 3], 4),
            Err(PartitionError::DuplicateString)
        );
    }

    #[test]
    fn unmatched_string_falls_in_set_one() {
        let xs = [parse("0000"), parse("1000")];
        let d = PartitionDescriptor::ptdesc(&xs, 4).unwrap();
        // Indices 0 and 1; 0100 restricts to 01, which no row carries.
        assert_eq!(d.indices(), &[0, 1]);
        assert_eq!(d.pt(parse("0100")), 1);
        assert_eq!(d.pt(parse("1000")), 2);
    }

    #[test]
    fn padded_rows_do_not_capture_listed_strings() {
        let xs = [parse("0000"), parse("1111")];
        let d = PartitionDescriptor::ptdesc_padded(&xs, 4, 4).unwrap();
        assert_eq!(d.set_count(), 4);
        assert_eq!(d.pt(xs[0]), 1);
        assert_eq!(d.pt(xs[1]), 2);
        assert!(PartitionDescriptor::ptdesc_padded(&xs, 4, 1).is_err());
    }

    #[test]
    fn malformed_encodings_map_to_set_one() {
        // k = 3 uses 2-bit indices; index 3 is out of range.
        let s = BitString::parse_binary("11").unwrap();
        assert_eq!(set_count_for_len(3, 3), Some(1));
        assert_eq!(pt(&s, 3, 7), 1);
        let bad = BitString::parse_binary("111").unwrap();
        assert_eq!(pt(&bad, 3, 7), 1);
    }

    proptest! {
        #[test]
        fn duality(k in 1usize..=16, seed in any::<u64>(), count in 1usize..=6) {
            use rand::{Rng, SeedableRng};
            let count = count.min(k).min(1 << k.min(10));
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut xs: Vec<Message> = Vec::new();
            while xs.len() < count {
                let x = rng.gen_range(0..1u64 << k);
                if !xs.contains(&x) {
                    xs.push(x);
                }
            }
            let d = PartitionDescriptor::ptdesc(&xs, k).unwrap();
            let enc = d.encode();
            prop_assert_eq!(enc.len(), encoded_len(count, k));
            prop_assert_eq!(PartitionDescriptor::decode(&enc, k), Some(d.clone()));
            for (i, &x) in xs.iter().enumerate() {
                prop_assert_eq!(pt(&enc, k, x), i + 1);
            }
        }

        #[test]
        fn pt_is_total(bits in proptest::collection::vec(any::<bool>(), 0..80), k in 1usize..=16, x in any::<u64>()) {
            let s = BitString::from_bits(bits);
            let x = if k < 64 { x & ((1 << k) - 1) } else { x };
            let i = pt(&s, k, x);
            prop_assert!(i >= 1);
        }
    }
}
