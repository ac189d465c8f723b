use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::SplitError;
use crate::fingerprint::{tanimoto, FingerprintBits};

pub const DEFAULT_N_PAIRS: usize = 1_000_000;

const CHUNK: usize = 1 << 16;

#[derive(Debug, Clone, Copy)]
pub enum PairSet<'a> {
    /// Unordered pairs `i != j` of one set.
    Within(&'a [FingerprintBits]),
    /// All of `a x b`.
    Between(&'a [FingerprintBits], &'a [FingerprintBits]),
}

impl PairSet<'_> {
    fn pair_count(&self) -> u128 {
        match *self {
            PairSet::Within(a) => (a.len() as u128) * (a.len() as u128).saturating_sub(1) / 2,
            PairSet::Between(a, b) => a.len() as u128 * b.len() as u128,
        }
    }
}

/// Tanimoto similarities over a pair set: every pair when there are at most
/// `n_pairs`, otherwise `n_pairs` uniform draws with replacement. Draws come
/// from ChaCha8 stream `c` of `seed` for chunk `c`, so the output does not
/// depend on the thread count.
pub fn sample_tanimoto_pairs(set: PairSet<'_>, n_pairs: usize, seed: u64) -> Result<Vec<f64>, SplitError> {
    let (a, b) = match set {
        PairSet::Within([]) => return Err(SplitError::EmptySet),
        PairSet::Within(a) if a.len() < 2 => return Err(SplitError::SingletonSet(a.len())),
        PairSet::Within(a) => (a, a),
        PairSet::Between(a, b) if a.is_empty() || b.is_empty() => return Err(SplitError::EmptySet),
        PairSet::Between(a, b) => (a, b),
    };
    let within = matches!(set, PairSet::Within(_));
    let sim = |i: usize, j: usize| tanimoto(&a[i], &b[j]);

    if set.pair_count() <= n_pairs as u128 {
        let rows: Vec<Vec<f64>> = (0..a.len())
            .into_par_iter()
            .map(|i| {
                let start = if within { i + 1 } else { 0 };
                (start..b.len()).map(|j| sim(i, j)).collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<_, _>>()?;
        return Ok(rows.concat());
    }

    let chunks = n_pairs.div_ceil(CHUNK);
    let parts: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let len = CHUNK.min(n_pairs - c * CHUNK);
            (0..len)
                .map(|_| {
                    let i = rng.gen_range(0..a.len());
                    let j = if within {
                        let j = rng.gen_range(0..a.len() - 1);
                        j + usize::from(j >= i)
                    } else {
                        rng.gen_range(0..b.len())
                    };
                    sim(i, j)
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    Ok(parts.concat())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp(bits: &[usize]) -> FingerprintBits {
        FingerprintBits::from_indices(64, 2, bits.iter().copied()).unwrap()
    }

    #[test]
    fn identical_singletons() {
        let a = [fp(&[1, 2])];
        let s = sample_tanimoto_pairs(PairSet::Between(&a, &a), 10, 0).unwrap();
        assert_eq!(s, vec![1.0]);
    }

    #[test]
    fn within_enumerates_unordered_pairs() {
        let a = [fp(&[1]), fp(&[1, 2]), fp(&[2])];
        let s = sample_tanimoto_pairs(PairSet::Within(&a), 1000, 0).unwrap();
        assert_eq!(s, vec![0.5, 0.0, 0.5]);
    }

    #[test]
    fn disjoint_sets_sample_zero() {
        let a: Vec<_> = (0..30).map(|i| fp(&[i])).collect();
        let b: Vec<_> = (32..62).map(|i| fp(&[i])).collect();
        let s = sample_tanimoto_pairs(PairSet::Between(&a, &b), 100, 1).unwrap();
        assert_eq!(s.len(), 100);
        assert!(s.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn sampling_is_deterministic_and_excludes_self() {
        let a: Vec<_> = (0..64).map(|i| fp(&[i])).collect();
        let s1 = sample_tanimoto_pairs(PairSet::Within(&a), 1500, 9).unwrap();
        let s2 = sample_tanimoto_pairs(PairSet::Within(&a), 1500, 9).unwrap();
        assert_eq!(s1.len(), 1500, "2016 pairs exceed the budget");
        assert_eq!(s1, s2);
        assert!(s1.iter().all(|&x| x == 0.0), "distinct singletons never match");
        let big: Vec<_> = (0..600).map(|i| fp(&[i % 64])).collect();
        let s3 = sample_tanimoto_pairs(PairSet::Within(&big), 150_000, 9).unwrap();
        assert_eq!(s3.len(), 150_000);
        assert_ne!(s3[..CHUNK], s3[CHUNK..2 * CHUNK], "chunks use distinct streams");
    }

    #[test]
    fn errors() {
        assert!(sample_tanimoto_pairs(PairSet::Within(&[]), 1, 0).is_err());
        assert!(sample_tanimoto_pairs(PairSet::Within(&[fp(&[1])]), 1, 0).is_err());
        assert!(sample_tanimoto_pairs(PairSet::Between(&[fp(&[1])], &[]), 1, 0).is_err());
    }
}
