//! Binary codes with explicit distance and list-decoding guarantees.
//!
//! Codes are small enough to materialize: every codebook holds all `2^k`
//! codewords, and decoding is an exact scan. Structured codes (repetitions and
//! complement extensions) remember how they were built so that list decoding
//! can proceed block by block and union the per-block lists.

mod bounds;
mod io;
mod search;
mod two_tier;

use std::sync::Arc;

use crate::bits::{BitString, Message, TriBitString};
use crate::error::CodeError;
use crate::ratio::{floor_mul, Rational};

pub use bounds::{
    johnson_list_bound, measure_error_list, measure_list_bound, plotkin_erasure_bound,
    plotkin_max_codewords, ListMeasurement,
};
pub use io::{read_codebook, write_codebook};
pub use search::{build_base_code, build_base_code_with, SearchBudget};
pub use two_tier::{ecc_sf_encode, ecc_sf_list_decode, TwoTierCodeSpec};

#[derive(Clone, Debug)]
enum Structure {
    Flat,
    Repeat {
        inner: Arc<CodeHandle>,
        times: usize,
    },
    ComplementExtend {
        inner: Arc<CodeHandle>,
    },
}

/// A finite binary code `{0,1}^k -> {0,1}^n0` with its list-size bound.
#[derive(Clone, Debug)]
pub struct CodeHandle {
    k: usize,
    n0: usize,
    eps: Rational,
    codebook: Arc<Vec<BitString>>,
    list_bound: usize,
    structure: Structure,
}

impl CodeHandle {
    /// Wraps an explicit codebook indexed by message. No distance property is
    /// checked; `list_bound` is taken as given.
    pub fn from_codebook(
        k: usize,
        eps: Rational,
        codewords: Vec<BitString>,
        list_bound: usize,
    ) -> Result<Self, CodeError> {
        if k > 20 {
            return Err(CodeError::InvalidParameter(format!(
                "k={k} is too large to materialize"
            )));
        }
        if codewords.len() != 1usize << k {
            return Err(CodeError::InvalidParameter(format!(
                "codebook has {} entries, expected {}",
                codewords.len(),
                1usize << k
            )));
        }
        let n0 = codewords[0].len();
        if let Some(bad) = codewords.iter().find(|c| c.len() != n0) {
            return Err(CodeError::LengthMismatch {
                expected: n0,
                got: bad.len(),
            });
        }
        if list_bound == 0 {
            return Err(CodeError::InvalidParameter(
                "list bound must be positive".into(),
            ));
        }
        Ok(Self {
            k,
            n0,
            eps,
            codebook: Arc::new(codewords),
            list_bound,
            structure: Structure::Flat,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Block length in bits.
    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn eps(&self) -> Rational {
        self.eps
    }

    pub fn list_bound(&self) -> usize {
        self.list_bound
    }

    pub fn with_list_bound(mut self, list_bound: usize) -> Self {
        self.list_bound = list_bound.max(1);
        self
    }

    pub fn message_count(&self) -> usize {
        self.codebook.len()
    }

    pub fn encode(&self, x: Message) -> &BitString {
        &self.codebook[x as usize]
    }

    pub fn codebook(&self) -> &[BitString] {
        &self.codebook
    }

    /// `floor(((1 - eps)/2) * n0)`, the largest radius covered by the list
    /// bound.
    pub fn decoding_radius(&self) -> usize {
        floor_mul((Rational::from_integer(1) - self.eps) / 2, self.n0).max(0) as usize
    }

    /// `ceil(((1 - eps)/2) * n0)`, the distance floor of a base code.
    pub fn distance_floor(&self) -> usize {
        crate::ratio::ceil_mul((Rational::from_integer(1) - self.eps) / 2, self.n0).max(0) as usize
    }

    /// The block count and inner code if this is a repetition.
    pub fn repetition_of(&self) -> Option<(&CodeHandle, usize)> {
        match &self.structure {
            Structure::Repeat { inner, times } => Some((inner, *times)),
            _ => None,
        }
    }

    /// All messages whose codeword lies within `radius` of `received`, with
    /// their distances, in ascending message order. No bound is enforced.
    pub fn scan_within(&self, received: &BitString, radius: usize) -> Vec<(Message, usize)> {
        assert_eq!(received.len(), self.n0);
        match &self.structure {
            Structure::Flat => self.flat_scan(received, radius),
            Structure::Repeat { inner, times } => {
                let per_block = radius / times;
                let mut candidates = Vec::new();
                for b in 0..*times {
                    let block = received.slice(b * inner.n0, (b + 1) * inner.n0);
                    candidates.extend(
                        inner
                            .scan_within(&block, per_block)
                            .into_iter()
                            .map(|(x, _)| x),
                    );
                }
                self.filter_candidates(candidates, received, radius)
            }
            Structure::ComplementExtend { inner } => {
                let half = inner.n0;
                let first = received.slice(0, half);
                let second = received.slice(half, 2 * half).complement();
                let mut candidates: Vec<Message> = inner
                    .scan_within(&first, radius / 2)
                    .into_iter()
                    .map(|(x, _)| x)
                    .collect();
                candidates.extend(
                    inner
                        .scan_within(&second, radius / 2)
                        .into_iter()
                        .map(|(x, _)| x),
                );
                self.filter_candidates(candidates, received, radius)
            }
        }
    }

    /// Nearest codeword, ties to the smaller message.
    pub fn nearest(&self, received: &BitString) -> (Message, usize) {
        let mut best = (0, usize::MAX);
        for (x, c) in self.codebook.iter().enumerate() {
            let d = c.distance(received);
            if d < best.1 {
                best = (x as Message, d);
            }
        }
        best
    }

    fn flat_scan(&self, received: &BitString, radius: usize) -> Vec<(Message, usize)> {
        self.codebook
            .iter()
            .enumerate()
            .filter_map(|(x, c)| {
                let d = c.distance(received);
                (d <= radius).then_some((x as Message, d))
            })
            .collect()
    }

    fn filter_candidates(
        &self,
        mut candidates: Vec<Message>,
        received: &BitString,
        radius: usize,
    ) -> Vec<(Message, usize)> {
        candidates.sort_unstable();
        candidates.dedup();
        candidates
            .into_iter()
            .filter_map(|x| {
                let d = self.encode(x).distance(received);
                (d <= radius).then_some((x, d))
            })
            .collect()
    }
}

/// Exact minimum pairwise distance; `None` for a single-codeword code.
pub fn min_distance(code: &CodeHandle) -> Option<usize> {
    let words = code.codebook();
    let mut best: Option<usize> = None;
    for i in 0..words.len() {
        for j in i + 1..words.len() {
            let d = words[i].distance(&words[j]);
            best = Some(best.map_or(d, |b| b.min(d)));
        }
    }
    best
}

/// Minimum over codewords of the distance to `0^n0` and to `1^n0`.
pub fn min_constant_distance(code: &CodeHandle) -> usize {
    code.codebook()
        .iter()
        .map(|c| {
            let w = c.count_ones();
            w.min(c.len() - w)
        })
        .min()
        .unwrap_or(0)
}

/// `{ x : Δ(encode(x), received) <= radius }` in ascending order.
pub fn list_decode_errors(
    code: &CodeHandle,
    received: &TriBitString,
    radius: usize,
) -> Result<Vec<Message>, CodeError> {
    if received.len() != code.n0() {
        return Err(CodeError::LengthMismatch {
            expected: code.n0(),
            got: received.len(),
        });
    }
    let bits = received.as_bits().ok_or(CodeError::ErasuresPresent)?;
    let max = code.decoding_radius();
    if radius > max {
        return Err(CodeError::RadiusTooLarge { radius, max });
    }
    let list: Vec<Message> = code
        .scan_within(bits, radius)
        .into_iter()
        .map(|(x, _)| x)
        .collect();
    if list.len() > code.list_bound() {
        return Err(CodeError::ListBoundExceeded {
            size: list.len(),
            bound: code.list_bound(),
        });
    }
    Ok(list)
}

/// Messages whose codeword agrees with every unerased symbol.
pub fn list_decode_erasures(
    code: &CodeHandle,
    received: &TriBitString,
) -> Result<Vec<Message>, CodeError> {
    if received.len() != code.n0() {
        return Err(CodeError::LengthMismatch {
            expected: code.n0(),
            got: received.len(),
        });
    }
    let max = max_erasures(code.eps(), code.n0());
    let erased = received.erasure_count();
    if erased > max {
        return Err(CodeError::TooManyErasures { erased, max });
    }
    let list = consistent_messages(code, received);
    if list.len() > code.list_bound() {
        return Err(CodeError::ListBoundExceeded {
            size: list.len(),
            bound: code.list_bound(),
        });
    }
    Ok(list)
}

/// Largest erasure count within a `1 - eps` fraction of `n` symbols.
pub fn max_erasures(eps: Rational, n: usize) -> usize {
    floor_mul(Rational::from_integer(1) - eps, n).max(0) as usize
}

/// Exact consistency set, without any bound.
pub fn consistent_messages(code: &CodeHandle, received: &TriBitString) -> Vec<Message> {
    code.codebook()
        .iter()
        .enumerate()
        .filter(|(_, c)| received.consistent_with(c))
        .map(|(x, _)| x as Message)
        .collect()
}

/// Concatenates `times` copies of each codeword.
pub fn repeat_code(code: &CodeHandle, times: usize) -> Result<CodeHandle, CodeError> {
    if !(2..=3).contains(&times) {
        return Err(CodeError::InvalidParameter(format!(
            "repeat count {times} not in {{2,3}}"
        )));
    }
    repeat_code_n(code, times)
}

/// Repeats a code any positive number of times. Used for the long per-chunk
/// codes; the list bound scales with the block count.
pub fn repeat_code_n(code: &CodeHandle, times: usize) -> Result<CodeHandle, CodeError> {
    if times == 0 {
        return Err(CodeError::InvalidParameter(
            "repeat count must be positive".into(),
        ));
    }
    if times == 1 {
        return Ok(code.clone());
    }
    let words = code.codebook().iter().map(|c| c.repeat(times)).collect();
    Ok(CodeHandle {
        k: code.k,
        n0: code.n0 * times,
        eps: code.eps,
        codebook: Arc::new(words),
        list_bound: code.list_bound * times,
        structure: Structure::Repeat {
            inner: Arc::new(code.clone()),
            times,
        },
    })
}

/// Maps `x` to `encode(x) || complement(encode(x))`.
pub fn complement_extend(code: &CodeHandle) -> CodeHandle {
    let words = code
        .codebook()
        .iter()
        .map(|c| BitString::concat(&[c, &c.complement()]))
        .collect();
    CodeHandle {
        k: code.k,
        n0: 2 * code.n0,
        eps: code.eps,
        codebook: Arc::new(words),
        list_bound: 2 * code.list_bound,
        structure: Structure::ComplementExtend {
            inner: Arc::new(code.clone()),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::rat;

    fn bits(s: &str) -> BitString {
        BitString::parse_binary(s).unwrap()
    }

    fn rep3() -> CodeHandle {
        CodeHandle::from_codebook(1, rat(1, 2), vec![bits("000"), bits("111")], 2).unwrap()
    }

    #[test]
    fn repetition_code_distance() {
        assert_eq!(min_distance(&rep3()), Some(3));
    }

    #[test]
    fn single_codeword_has_no_pair() {
        let c = CodeHandle::from_codebook(0, rat(1, 2), vec![bits("0101")], 1).unwrap();
        assert_eq!(min_distance(&c), None);
    }

    #[test]
    fn repeat_twice() {
        let c = CodeHandle::from_codebook(1, rat(1, 2), vec![bits("00"), bits("11")], 1).unwrap();
        let r = repeat_code(&c, 2).unwrap();
        assert_eq!(r.encode(0).to_string(), "0000");
        assert_eq!(r.encode(1).to_string(), "1111");
        assert_eq!(min_distance(&r), Some(4));
        assert!(repeat_code(&c, 4).is_err());
    }

    #[test]
    fn complement_extension() {
        let c = CodeHandle::from_codebook(0, rat(1, 2), vec![bits("01")], 1).unwrap();
        assert_eq!(complement_extend(&c).encode(0).to_string(), "0110");
    }

    #[test]
    fn decode_identity_and_radius_check() {
        let c = rep3();
        let r = TriBitString::from(bits("000"));
        assert_eq!(list_decode_errors(&c, &r, 0).unwrap(), vec![0]);
        assert!(matches!(
            list_decode_errors(&c, &r, 3),
            Err(CodeError::RadiusTooLarge { .. })
        ));
        let wrong = TriBitString::from(bits("00"));
        assert!(matches!(
            list_decode_errors(&c, &wrong, 0),
            Err(CodeError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn erasure_decoding() {
        let c = rep3();
        let r = TriBitString::parse("_11").unwrap();
        assert_eq!(list_decode_erasures(&c, &r).unwrap(), vec![1]);
        let all = TriBitString::all_erased(3);
        assert!(matches!(
            list_decode_erasures(&c, &all),
            Err(CodeError::TooManyErasures { .. })
        ));
    }

    #[test]
    fn nearest_breaks_ties_low() {
        let c =
            CodeHandle::from_codebook(1, rat(1, 2), vec![bits("0011"), bits("1100")], 2).unwrap();
        assert_eq!(c.nearest(&bits("1010")).0, 0);
        assert_eq!(c.nearest(&bits("1101")).0, 1);
    }
}
