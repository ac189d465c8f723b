//! Binary circular fingerprints, Tanimoto similarity and Murcko scaffolds.
//!
//! Environment identifiers are deduplicated by value only. Two environments
//! covering the same bonds but reached from different centres both set bits
//! when their hashes differ, which some toolkits avoid by bond-set
//! comparison.

mod morgan;
mod scaffold;

use std::fmt;

use thiserror::Error;

pub use morgan::{morgan_fingerprint, morgan_identifiers, mix64};
pub use scaffold::{murcko_scaffold, scaffold_molecule, ScaffoldKey};

pub const DEFAULT_RADIUS: u32 = 2;
pub const DEFAULT_BITS: usize = 2048;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FingerprintError {
    #[error("fingerprint length must be a positive power of two, got {0}")]
    BadLength(usize),
    #[error("fingerprint lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("invalid hex fingerprint: {0}")]
    BadHex(String),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FingerprintBits {
    words: Vec<u64>,
    nbits: usize,
    radius: u32,
    popcount: u32,
}

impl FingerprintBits {
    pub fn new(nbits: usize, radius: u32) -> Result<Self, FingerprintError> {
        if nbits == 0 || !nbits.is_power_of_two() {
            return Err(FingerprintError::BadLength(nbits));
        }
        Ok(FingerprintBits {
            words: vec![0; nbits.div_ceil(64)],
            nbits,
            radius,
            popcount: 0,
        })
    }

    /// Sets every listed bit index, reduced modulo the length.
    pub fn from_indices(
        nbits: usize,
        radius: u32,
        indices: impl IntoIterator<Item = usize>,
    ) -> Result<Self, FingerprintError> {
        let mut fp = Self::new(nbits, radius)?;
        for i in indices {
            fp.set(i % nbits);
        }
        Ok(fp)
    }

    pub fn set(&mut self, bit: usize) {
        assert!(bit < self.nbits, "bit {bit} out of range {}", self.nbits);
        let (w, m) = (bit / 64, 1u64 << (bit % 64));
        if self.words[w] & m == 0 {
            self.words[w] |= m;
            self.popcount += 1;
        }
    }

    pub fn get(&self, bit: usize) -> bool {
        bit < self.nbits && self.words[bit / 64] >> (bit % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.nbits
    }

    pub fn is_empty(&self) -> bool {
        self.popcount == 0
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn popcount(&self) -> u32 {
        self.popcount
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Indices of set bits, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nbits).filter(|&i| self.get(i))
    }

    /// Lowercase hex, most significant bit first.
    pub fn to_hex(&self) -> String {
        let digits = self.nbits.div_ceil(4);
        (0..digits)
            .rev()
            .map(|d| {
                let nibble = (0..4)
                    .filter(|k| self.get(4 * d + k))
                    .fold(0u32, |acc, k| acc | 1 << k);
                char::from_digit(nibble, 16).unwrap()
            })
            .collect()
    }

    pub fn from_hex(hex: &str, nbits: usize, radius: u32) -> Result<Self, FingerprintError> {
        let mut fp = Self::new(nbits, radius)?;
        let hex = hex.trim();
        if hex.len() != nbits.div_ceil(4) {
            return Err(FingerprintError::BadHex(format!(
                "expected {} digits, found {}",
                nbits.div_ceil(4),
                hex.len()
            )));
        }
        for (pos, ch) in hex.chars().enumerate() {
            let nibble = ch
                .to_digit(16)
                .ok_or_else(|| FingerprintError::BadHex(format!("bad digit {ch:?} at {pos}")))?;
            let d = hex.len() - 1 - pos;
            for k in 0..4 {
                if nibble >> k & 1 == 1 {
                    let bit = 4 * d + k;
                    if bit >= nbits {
                        return Err(FingerprintError::BadHex(format!("bit {bit} beyond length")));
                    }
                    fp.set(bit);
                }
            }
        }
        Ok(fp)
    }
}

impl fmt::Debug for FingerprintBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FingerprintBits")
            .field("nbits", &self.nbits)
            .field("radius", &self.radius)
            .field("popcount", &self.popcount)
            .finish()
    }
}

/// `c / (a + b - c)` over popcounts; zero when both are empty.
pub fn tanimoto(a: &FingerprintBits, b: &FingerprintBits) -> Result<f64, FingerprintError> {
    if a.nbits != b.nbits {
        return Err(FingerprintError::LengthMismatch(a.nbits, b.nbits));
    }
    let c: u32 = a
        .words
        .iter()
        .zip(&b.words)
        .map(|(x, y)| (x & y).count_ones())
        .sum();
    let union = a.popcount + b.popcount - c;
    if union == 0 {
        return Ok(0.0);
    }
    Ok(f64::from(c) / f64::from(union))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_power_of_two() {
        assert_eq!(FingerprintBits::new(0, 2), Err(FingerprintError::BadLength(0)));
        assert_eq!(FingerprintBits::new(1000, 2), Err(FingerprintError::BadLength(1000)));
        assert!(FingerprintBits::new(1, 0).is_ok());
    }

    #[test]
    fn popcount_tracks_sets() {
        let fp = FingerprintBits::from_indices(64, 0, [1, 1, 65, 3]).unwrap();
        assert_eq!(fp.popcount(), 2);
        assert_eq!(fp.ones().collect::<Vec<_>>(), vec![1, 3]);
    }

    #[test]
    fn hex_is_msb_first() {
        let fp = FingerprintBits::from_indices(16, 0, [0, 15]).unwrap();
        assert_eq!(fp.to_hex(), "8001");
        let fp = FingerprintBits::from_indices(8, 0, [4]).unwrap();
        assert_eq!(fp.to_hex(), "10");
        let back = FingerprintBits::from_hex("8001", 16, 0).unwrap();
        assert_eq!(back.ones().collect::<Vec<_>>(), vec![0, 15]);
        assert!(FingerprintBits::from_hex("80g1", 16, 0).is_err());
        assert!(FingerprintBits::from_hex("801", 16, 0).is_err());
        assert!(FingerprintBits::from_hex("2", 1, 0).is_err());
    }

    #[test]
    fn tanimoto_examples() {
        let a = FingerprintBits::from_indices(32, 0, [0, 1, 2, 3]).unwrap();
        let b = FingerprintBits::from_indices(32, 0, [2, 3, 4, 5, 6, 7]).unwrap();
        assert_eq!(tanimoto(&a, &b).unwrap(), 0.25);
        assert_eq!(tanimoto(&a, &a).unwrap(), 1.0);
        let c = FingerprintBits::from_indices(32, 0, [10, 11]).unwrap();
        assert_eq!(tanimoto(&a, &c).unwrap(), 0.0);
        let e = FingerprintBits::new(32, 0).unwrap();
        assert_eq!(tanimoto(&e, &e).unwrap(), 0.0);
        let other = FingerprintBits::new(64, 0).unwrap();
        assert_eq!(tanimoto(&a, &other), Err(FingerprintError::LengthMismatch(32, 64)));
    }
}
