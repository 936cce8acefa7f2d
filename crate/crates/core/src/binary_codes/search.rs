//! Randomized greedy code search with exhaustive verification.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::bounds::{measure_list_bound, plotkin_max_codewords};
use super::{min_constant_distance, min_distance, CodeHandle, Structure};
use crate::bits::BitString;
use crate::error::CodeError;
use crate::ratio::{ceil_mul, format_ratio, in_unit_interval, Rational};

/// Limits of the code search.
#[derive(Clone, Debug)]
pub struct SearchBudget {
    pub seed: u64,
    /// Independent greedy attempts per block length.
    pub attempts_per_length: usize,
    /// An attempt gives up after this many consecutive rejected candidates.
    pub stall_limit: usize,
    /// Largest block length tried.
    pub max_n0: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            seed: 0x5eed_c0de,
            attempts_per_length: 3,
            stall_limit: 4000,
            max_n0: 6000,
        }
    }
}

/// Builds a code with `2^k` codewords whose pairwise distances and distances
/// to `0^n0` and `1^n0` are all at least `ceil(((1 - eps)/2) n0)`, with `n0`
/// a multiple of 3.
pub fn build_base_code(k: usize, eps: Rational) -> Result<CodeHandle, CodeError> {
    build_base_code_with(k, eps, &SearchBudget::default())
}

/// [`build_base_code`] under an explicit budget.
///
/// Lengths are probed by galloping upward from the smallest admissible
/// multiple of 3, then bisecting between the last failure and the first
/// success, so the returned `n0` is the smallest success under the assumption
/// that success is monotone in the length.
pub fn build_base_code_with(
    k: usize,
    eps: Rational,
    budget: &SearchBudget,
) -> Result<CodeHandle, CodeError> {
    if !(1..=12).contains(&k) {
        return Err(CodeError::InvalidParameter(format!("k={k} outside 1..=12")));
    }
    if !in_unit_interval(eps) {
        return Err(CodeError::InvalidParameter(format!(
            "eps={} outside (0,1)",
            format_ratio(eps)
        )));
    }
    let failed = || CodeError::ConstructionFailed {
        k,
        eps: format_ratio(eps),
        max_n0: budget.max_n0,
    };
    let start = smallest_admissible_length(eps);
    if start > budget.max_n0 {
        return Err(failed());
    }
    let max_n = round_down_to_3(budget.max_n0);
    let mut lo_fail: Option<usize> = None;
    let mut n = start;
    let (mut hi_ok, mut found) = loop {
        if let Some(words) = try_length(k, eps, n, budget) {
            break (n, words);
        }
        lo_fail = Some(n);
        if n >= max_n {
            return Err(failed());
        }
        n = round_up_to_3(n + n / 4).max(n + 3).min(max_n);
    };
    if let Some(mut lo) = lo_fail {
        while hi_ok - lo > 3 {
            let mid = round_down_to_3(lo + (hi_ok - lo) / 2).max(lo + 3);
            if mid >= hi_ok {
                break;
            }
            match try_length(k, eps, mid, budget) {
                Some(words) => {
                    hi_ok = mid;
                    found = words;
                }
                None => lo = mid,
            }
        }
    }
    let mut code = CodeHandle {
        k,
        n0: hi_ok,
        eps,
        codebook: Arc::new(found),
        list_bound: 1,
        structure: Structure::Flat,
    };
    verify(&code).map_err(|_| failed())?;
    let measured = measure_list_bound(&code, budget.seed ^ hi_ok as u64);
    code.list_bound = measured.bound();
    Ok(code)
}

/// Smallest multiple of 3 with `eps * n >= 2`.
fn smallest_admissible_length(eps: Rational) -> usize {
    let mut n = 3;
    while eps * Rational::from_integer(n as i64) < Rational::from_integer(2) {
        n += 3;
    }
    n
}

fn round_up_to_3(n: usize) -> usize {
    n.div_ceil(3) * 3
}

fn round_down_to_3(n: usize) -> usize {
    n / 3 * 3
}

fn required_distance(eps: Rational, n: usize) -> usize {
    ceil_mul((Rational::from_integer(1) - eps) / 2, n).max(0) as usize
}

/// Whether a code with `2^k` codewords plus the two constant words could
/// exist at length `n` with the required distance, by the Plotkin bound.
fn plotkin_allows(k: usize, n: usize, d: usize) -> bool {
    if 2 * d > n {
        return false;
    }
    match plotkin_max_codewords(n, d) {
        Some(max) => max >= (1u64 << k) + 2,
        None => true,
    }
}

fn try_length(k: usize, eps: Rational, n: usize, budget: &SearchBudget) -> Option<Vec<BitString>> {
    let d = required_distance(eps, n);
    if !plotkin_allows(k, n, d) {
        return None;
    }
    let target = 1usize << k;
    for attempt in 0..budget.attempts_per_length {
        let seed = budget.seed ^ ((n as u64) << 20) ^ attempt as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut words: Vec<BitString> = Vec::with_capacity(target);
        let mut stalled = 0;
        while words.len() < target && stalled < budget.stall_limit {
            let cand = BitString::from_words((0..n.div_ceil(64)).map(|_| rng.gen()).collect(), n);
            let w = cand.count_ones();
            if w >= d && n - w >= d && words.iter().all(|c| c.distance(&cand) >= d) {
                words.push(cand);
                stalled = 0;
            } else {
                stalled += 1;
            }
        }
        if words.len() == target {
            return Some(words);
        }
    }
    None
}

/// Exhaustive check of the distance and constant-word invariants.
fn verify(code: &CodeHandle) -> Result<(), ()> {
    let d = code.distance_floor();
    let pair_ok = min_distance(code).is_none_or(|m| m >= d);
    (pair_ok && min_constant_distance(code) >= d)
        .then_some(())
        .ok_or(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::rat;

    #[test]
    fn admissible_start() {
        assert_eq!(smallest_admissible_length(rat(1, 2)), 6);
        assert_eq!(smallest_admissible_length(rat(1, 5)), 12);
        assert_eq!(smallest_admissible_length(rat(1, 10)), 21);
    }

    #[test]
    fn one_bit_code() {
        let c = build_base_code(1, rat(1, 2)).unwrap();
        assert_eq!(c.n0() % 3, 0);
        let d = c.distance_floor();
        assert!(min_distance(&c).unwrap() >= d);
        assert!(min_constant_distance(&c) >= d);
    }

    #[test]
    fn tiny_budget_fails() {
        let budget = SearchBudget {
            max_n0: 300,
            ..SearchBudget::default()
        };
        assert!(matches!(
            build_base_code_with(12, rat(1, 100), &budget),
            Err(CodeError::ConstructionFailed { .. })
        ));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_base_code(0, rat(1, 2)).is_err());
        assert!(build_base_code(13, rat(1, 2)).is_err());
        assert!(build_base_code(4, rat(1, 1)).is_err());
    }
}
