//! List-size bounds: closed-form certificates and an empirical sweep.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{max_erasures, CodeHandle};
use crate::bits::BitString;

/// Plotkin upper bound on the size of a binary code of length `n` and
/// minimum distance `d`, when one applies (`2d >= n`).
pub fn plotkin_max_codewords(n: usize, d: usize) -> Option<u64> {
    let (n, d) = (n as u64, d as u64);
    if d == 0 {
        return None;
    }
    if d > n {
        return Some(1);
    }
    if 2 * d > n {
        Some(2 * (d / (2 * d - n)))
    } else if 2 * d == n {
        Some(4 * d)
    } else {
        None
    }
}

/// Johnson bound: the number of codewords of a length-`n`, distance-`d`
/// binary code inside any Hamming ball of radius `r` is at most
/// `floor(dn / (dn - 2r(n - r)))` when `dn > 2r(n - r)`.
pub fn johnson_list_bound(n: usize, d: usize, r: usize) -> Option<u64> {
    if r >= n {
        return None;
    }
    let (n, d, r) = (n as u128, d as u128, r as u128);
    let dn = d * n;
    let q = 2 * r * (n - r);
    (dn > q).then(|| (dn / (dn - q)) as u64)
}

/// Number of codewords that can agree on every unerased symbol when `e`
/// symbols are erased and the code has minimum distance `d`: such codewords
/// differ only inside the erased coordinates.
pub fn plotkin_erasure_bound(d: usize, e: usize) -> Option<u64> {
    if d > e {
        Some(1)
    } else {
        plotkin_max_codewords(e, d)
    }
}

/// Largest list sizes observed by [`measure_list_bound`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ListMeasurement {
    /// Largest error list at radius `floor(((1 - eps)/2) n0)`.
    pub errors: usize,
    /// Largest consistency set with at most `floor((1 - eps) n0)` erasures.
    pub erasures: usize,
    /// Whether every decoding center was enumerated.
    pub exhaustive: bool,
}

impl ListMeasurement {
    pub fn bound(&self) -> usize {
        self.errors.max(self.erasures).max(1)
    }
}

/// Block lengths up to this are swept exhaustively over all centers.
pub const EXHAUSTIVE_CENTER_BITS: usize = 16;

/// Longest code whose error list size is found by sweeping every center.
pub const ERROR_SWEEP_BITS: usize = 24;

/// Sampled centers and local-search starts for codes too long to sweep.
const LIST_SAMPLES: usize = 1 << 15;
const LIST_CLIMBS: usize = 64;

/// Measures the list sizes of `code` at its decoding radius and erasure
/// limit. Exhaustive for short codes; otherwise a seeded local search that
/// pulls centers toward groups of codewords.
pub fn measure_list_bound(code: &CodeHandle, seed: u64) -> ListMeasurement {
    let n = code.n0();
    let r = code.decoding_radius();
    let unerased = n - max_erasures(code.eps(), n);
    let errors = measure_error_list(code, r, seed);
    if n <= EXHAUSTIVE_CENTER_BITS {
        return ListMeasurement {
            errors,
            erasures: exhaustive_erasure_sets(code, unerased),
            exhaustive: true,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xe7a5);
    let erasures = greedy_erasure_sets(code, unerased, &mut rng);
    ListMeasurement {
        errors,
        erasures,
        exhaustive: false,
    }
}

/// Largest number of codewords observed inside one Hamming ball of radius
/// `r`: exhaustive over all centers for codes of length at most
/// [`ERROR_SWEEP_BITS`]. Otherwise a seeded
/// sample of random points and perturbed codewords, followed by a local
/// search from the best samples, codewords, majority centers and random
/// points.
pub fn measure_error_list(code: &CodeHandle, r: usize, seed: u64) -> usize {
    let n = code.n0();
    let words = code.codebook();
    let count = |center: &BitString| words.iter().filter(|c| c.distance(center) <= r).count();
    if n <= ERROR_SWEEP_BITS {
        let packed: Vec<u64> = words.iter().map(|w| w.read_uint(0, n)).collect();
        return (0u64..1 << n)
            .map(|c| {
                packed
                    .iter()
                    .filter(|&&w| (w ^ c).count_ones() as usize <= r)
                    .count()
            })
            .max()
            .unwrap_or(0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sampled: Vec<(usize, BitString)> = (0..LIST_SAMPLES)
        .map(|s| {
            let center = if s % 4 == 0 {
                BitString::from_bits((0..n).map(|_| rng.gen::<bool>()))
            } else {
                let mut c = words[rng.gen_range(0..words.len())].clone();
                for _ in 0..rng.gen_range(0..=r) {
                    c.flip(rng.gen_range(0..n));
                }
                c
            };
            (count(&center), center)
        })
        .collect();
    sampled.sort_by_key(|s| std::cmp::Reverse(s.0));
    let mut errors = sampled.first().map_or(0, |s| s.0);
    for (_, center) in sampled.into_iter().take(LIST_CLIMBS) {
        errors = errors.max(climb_error_center(code, center, r));
    }
    let restarts = 48.min(4 * words.len()).max(8);
    for attempt in 0..restarts {
        let start = match attempt % 3 {
            0 => words[rng.gen_range(0..words.len())].clone(),
            1 => {
                let a = &words[rng.gen_range(0..words.len())];
                let b = &words[rng.gen_range(0..words.len())];
                let c = &words[rng.gen_range(0..words.len())];
                BitString::from_bits(
                    (0..n).map(|i| (a.get(i) as u8 + b.get(i) as u8 + c.get(i) as u8) >= 2),
                )
            }
            _ => BitString::from_bits((0..n).map(|_| rng.gen::<bool>())),
        };
        errors = errors.max(climb_error_center(code, start, r));
    }
    errors
}

/// Local search maximizing the number of codewords within `r`. Each step
/// flips the bit that most reduces the total excess distance of the
/// `count + 1` nearest codewords.
fn climb_error_center(code: &CodeHandle, mut center: BitString, r: usize) -> usize {
    let words = code.codebook();
    let n = center.len();
    let mut dist: Vec<usize> = words.iter().map(|c| c.distance(&center)).collect();
    let mut best = dist.iter().filter(|&&d| d <= r).count();
    for _ in 0..4 * n {
        let count = dist.iter().filter(|&&d| d <= r).count();
        best = best.max(count);
        let target = (count + 1).min(words.len());
        let mut order: Vec<usize> = (0..words.len()).collect();
        order.sort_by_key(|&i| dist[i]);
        let group = &order[..target];
        let excess = |d: usize| d.saturating_sub(r);
        let current: usize = group.iter().map(|&i| excess(dist[i])).sum();
        let mut best_move: Option<(usize, usize)> = None;
        for j in 0..n {
            let cj = center.get(j);
            let score: usize = group
                .iter()
                .map(|&i| {
                    let d = if words[i].get(j) == cj {
                        dist[i] + 1
                    } else {
                        dist[i] - 1
                    };
                    excess(d)
                })
                .sum();
            if score < current && best_move.is_none_or(|(_, s)| score < s) {
                best_move = Some((j, score));
            }
        }
        let Some((j, _)) = best_move else { break };
        let cj = center.get(j);
        for (i, w) in words.iter().enumerate() {
            if w.get(j) == cj {
                dist[i] += 1;
            } else {
                dist[i] -= 1;
            }
        }
        center.flip(j);
    }
    best.max(dist.iter().filter(|&&d| d <= r).count())
}

/// Largest consistency set over every choice of `unerased` positions and
/// every pattern on them. Only used for short codes.
fn exhaustive_erasure_sets(code: &CodeHandle, unerased: usize) -> usize {
    let n = code.n0();
    let words = code.codebook();
    let mut best = 1;
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize != unerased {
            continue;
        }
        let mut keys: Vec<u32> = words
            .iter()
            .map(|w| {
                (0..n)
                    .filter(|&p| mask >> p & 1 == 1)
                    .fold(0u32, |acc, p| acc << 1 | w.get(p) as u32)
            })
            .collect();
        keys.sort_unstable();
        let mut run = 1;
        for pair in keys.windows(2) {
            run = if pair[0] == pair[1] { run + 1 } else { 1 };
            best = best.max(run);
        }
    }
    best
}

fn greedy_erasure_sets(code: &CodeHandle, unerased: usize, rng: &mut ChaCha8Rng) -> usize {
    let words = code.codebook();
    let seeds = words.len().min(64);
    let mut best = 1;
    for _ in 0..seeds {
        let i = rng.gen_range(0..words.len());
        best = best.max(grow_agreement_group(words, i, unerased));
    }
    best
}

/// Starting from codeword `seed`, repeatedly adds the codeword that keeps the
/// common agreement set largest, while at least `unerased` positions remain.
/// Returns the number of codewords consistent with `seed` on the first
/// `unerased` positions of the final agreement set.
fn grow_agreement_group(words: &[BitString], seed: usize, unerased: usize) -> usize {
    let n = words[seed].len();
    let mut agree: Vec<usize> = (0..n).collect();
    let base = &words[seed];
    loop {
        let mut best: Option<(usize, usize)> = None;
        for (i, w) in words.iter().enumerate() {
            if i == seed {
                continue;
            }
            let kept = agree.iter().filter(|&&p| w.get(p) == base.get(p)).count();
            if kept < agree.len() && kept >= unerased && best.is_none_or(|(_, b)| kept > b) {
                best = Some((i, kept));
            }
        }
        match best {
            Some((i, _)) => {
                let w = &words[i];
                agree.retain(|&p| w.get(p) == base.get(p));
            }
            None => break,
        }
    }
    let window = &agree[..unerased.min(agree.len())];
    words
        .iter()
        .filter(|w| window.iter().all(|&p| w.get(p) == base.get(p)))
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plotkin_values() {
        assert_eq!(plotkin_max_codewords(3, 3), Some(2));
        assert_eq!(plotkin_max_codewords(10, 6), Some(6));
        assert_eq!(plotkin_max_codewords(10, 5), Some(20));
        assert_eq!(plotkin_max_codewords(10, 4), None);
        assert_eq!(plotkin_max_codewords(4, 5), Some(1));
    }

    #[test]
    fn johnson_values() {
        // d = 9/20 n, r = 3/10 n gives dn / (dn - 2r(n-r)) = 15.
        assert_eq!(johnson_list_bound(20, 9, 6), Some(15));
        assert_eq!(johnson_list_bound(20, 8, 6), None);
        assert_eq!(johnson_list_bound(10, 5, 0), Some(1));
    }

    #[test]
    fn erasure_bound_values() {
        assert_eq!(plotkin_erasure_bound(5, 4), Some(1));
        assert_eq!(plotkin_erasure_bound(5, 8), Some(4));
    }
}
