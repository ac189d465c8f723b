//! Molecule-level dataset partitions and the shift diagnostics used to
//! compare them.

mod diagnostics;
mod ks;
mod pairs;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::fingerprint::ScaffoldKey;
use crate::spectra::{spectral_entropy, Spectrum, SpectrumError};

pub use diagnostics::{split_diagnostics, DiagnosticsInput, PairDiagnostics, SplitDiagnostics};
pub use ks::{kolmogorov_log10_p, ks_statistic, ks_two_sample, KsResult};
pub use pairs::{sample_tanimoto_pairs, PairSet, DEFAULT_N_PAIRS};

#[derive(Debug, Error)]
pub enum SplitError {
    #[error("ratios must be positive and sum to 1 (got {0}, {1}, {2})")]
    BadRatios(f64, f64, f64),
    #[error("need at least 3 molecules to split, got {0}")]
    TooFew(usize),
    #[error("molecule key {0:?} listed twice")]
    DuplicateKey(String),
    #[error("sample is empty")]
    EmptySample,
    #[error("sample contains NaN")]
    NanSample,
    #[error("fingerprint set is empty")]
    EmptySet,
    #[error("within-set pairs need at least 2 fingerprints, got {0}")]
    SingletonSet(usize),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Fingerprint(#[from] crate::fingerprint::FingerprintError),
    #[error("line {line}: {reason}")]
    BadAssignment { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Partition {
    Train,
    Val,
    Test,
}

impl Partition {
    pub const ALL: [Partition; 3] = [Partition::Train, Partition::Val, Partition::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Partition::Train => "train",
            Partition::Val => "val",
            Partition::Test => "test",
        }
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Partition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Partition::Train),
            "val" | "valid" | "validation" => Ok(Partition::Val),
            "test" => Ok(Partition::Test),
            other => Err(format!("unknown partition {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Random,
    Scaffold,
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(Strategy::Random),
            "scaffold" => Ok(Strategy::Scaffold),
            other => Err(format!("unknown strategy {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ratios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Ratios {
    pub fn new(train: f64, val: f64, test: f64) -> Result<Ratios, SplitError> {
        let parts = [train, val, test];
        let ok = parts.iter().all(|r| r.is_finite() && *r > 0.0)
            && (parts.iter().sum::<f64>() - 1.0).abs() <= 1e-9;
        if !ok {
            return Err(SplitError::BadRatios(train, val, test));
        }
        Ok(Ratios { train, val, test })
    }
}

impl Default for Ratios {
    fn default() -> Self {
        Ratios { train: 0.8, val: 0.1, test: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitAssignment {
    pub assignment: BTreeMap<String, Partition>,
    pub seed: u64,
    pub strategy: Strategy,
    pub ratios: Ratios,
    pub warnings: Vec<String>,
}

impl SplitAssignment {
    pub fn counts(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for p in self.assignment.values() {
            c[*p as usize] += 1;
        }
        c
    }

    pub fn keys_in(&self, part: Partition) -> impl Iterator<Item = &str> {
        self.assignment
            .iter()
            .filter(move |(_, p)| **p == part)
            .map(|(k, _)| k.as_str())
    }

    /// `molecule_key<TAB>partition` lines under a header.
    pub fn write_tsv(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "molecule_key\tpartition")?;
        for (k, p) in &self.assignment {
            writeln!(w, "{k}\t{p}")?;
        }
        Ok(())
    }
}

/// Reads a `molecule_key<TAB>partition` file, as written by
/// [`SplitAssignment::write_tsv`] or supplied externally.
pub fn read_assignment_tsv(reader: impl BufRead) -> Result<BTreeMap<String, Partition>, SplitError> {
    let mut out = BTreeMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if line.trim().is_empty() || line.starts_with('#') || (idx == 0 && line.starts_with("molecule_key")) {
            continue;
        }
        let bad = |reason: String| SplitError::BadAssignment { line: lineno, reason };
        let (k, p) = line.split_once('\t').ok_or_else(|| bad("expected two tab-separated cells".into()))?;
        let part: Partition = p.trim().parse().map_err(bad)?;
        if out.insert(k.to_string(), part).is_some() {
            return Err(bad(format!("molecule key {k:?} listed twice")));
        }
    }
    Ok(out)
}

fn unique_sorted(keys: &[String]) -> Result<Vec<String>, SplitError> {
    let mut v = keys.to_vec();
    v.sort();
    for w in v.windows(2) {
        if w[0] == w[1] {
            return Err(SplitError::DuplicateKey(w[0].clone()));
        }
    }
    Ok(v)
}

/// Shuffles the keys with a seeded ChaCha8 stream and cuts at
/// `round(n * cumulative ratio)`. The input order does not matter.
pub fn random_split(keys: &[String], ratios: Ratios, seed: u64) -> Result<SplitAssignment, SplitError> {
    let mut keys = unique_sorted(keys)?;
    let n = keys.len();
    if n < 3 {
        return Err(SplitError::TooFew(n));
    }
    keys.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let cut_train = (n as f64 * ratios.train).round() as usize;
    let cut_val = ((n as f64 * (ratios.train + ratios.val)).round() as usize).max(cut_train);
    let assignment = keys
        .into_iter()
        .enumerate()
        .map(|(i, k)| {
            let p = if i < cut_train {
                Partition::Train
            } else if i < cut_val {
                Partition::Val
            } else {
                Partition::Test
            };
            (k, p)
        })
        .collect();
    Ok(SplitAssignment {
        assignment,
        seed,
        strategy: Strategy::Random,
        ratios,
        warnings: Vec::new(),
    })
}

/// Groups molecules by scaffold key and assigns whole groups greedily,
/// largest first (ties by key text): train while it stays within its
/// target, then val, then test. A group larger than the train target goes
/// to train with a warning. `seed` is recorded but the order is fully
/// determined by the groups.
pub fn scaffold_split(
    molecules: &[(String, ScaffoldKey)],
    ratios: Ratios,
    seed: u64,
) -> Result<SplitAssignment, SplitError> {
    let keys: Vec<String> = molecules.iter().map(|m| m.0.clone()).collect();
    unique_sorted(&keys)?;
    let n = molecules.len();
    if n < 3 {
        return Err(SplitError::TooFew(n));
    }
    let mut groups: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (k, s) in molecules {
        groups.entry(s.key.as_str()).or_default().push(k.as_str());
    }
    let mut groups: Vec<(&str, Vec<&str>)> = groups.into_iter().collect();
    groups.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(b.0)));

    let eps = 1e-9;
    let train_target = n as f64 * ratios.train;
    let val_target = n as f64 * ratios.val;
    let (mut n_train, mut n_val) = (0usize, 0usize);
    let mut assignment = BTreeMap::new();
    let mut warnings = Vec::new();
    for (scaffold, members) in groups {
        let size = members.len();
        let part = if size as f64 > train_target + eps {
            warnings.push(format!(
                "scaffold group {:?} holds {size} molecules, more than the train target {train_target:.1}; assigned to train",
                if scaffold.is_empty() { "<acyclic>" } else { scaffold }
            ));
            Partition::Train
        } else if (n_train + size) as f64 <= train_target + eps {
            Partition::Train
        } else if (n_val + size) as f64 <= val_target + eps {
            Partition::Val
        } else {
            Partition::Test
        };
        match part {
            Partition::Train => n_train += size,
            Partition::Val => n_val += size,
            Partition::Test => {}
        }
        for m in members {
            assignment.insert(m.to_string(), part);
        }
    }
    Ok(SplitAssignment {
        assignment,
        seed,
        strategy: Strategy::Scaffold,
        ratios,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaffoldOverlap {
    /// `|A ∩ B| / |B|`.
    pub test_in_train: f64,
    /// `|A ∩ B| / |A ∪ B|`.
    pub jaccard: f64,
    /// Set when a denominator was empty and the value defaulted to 0.
    pub guarded: bool,
}

pub fn scaffold_overlap(a: &BTreeSet<String>, b: &BTreeSet<String>) -> ScaffoldOverlap {
    let inter = a.intersection(b).count() as f64;
    let union = a.union(b).count() as f64;
    let mut guarded = false;
    let mut ratio = |num: f64, den: f64| {
        if den == 0.0 {
            guarded = true;
            0.0
        } else {
            num / den
        }
    };
    let test_in_train = ratio(inter, b.len() as f64);
    let jaccard = ratio(inter, union);
    ScaffoldOverlap { test_in_train, jaccard, guarded }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyShift {
    pub mean_entropy_train: f64,
    pub mean_entropy_other: f64,
    pub ks: KsResult,
}

pub fn entropies(spectra: &[Spectrum]) -> Result<Vec<f64>, SpectrumError> {
    spectra.iter().map(spectral_entropy).collect()
}

pub fn entropy_shift(train: &[Spectrum], other: &[Spectrum]) -> Result<EntropyShift, SplitError> {
    let a = entropies(train)?;
    let b = entropies(other)?;
    let ks = ks_two_sample(&a, &b)?;
    Ok(EntropyShift {
        mean_entropy_train: a.iter().sum::<f64>() / a.len() as f64,
        mean_entropy_other: b.iter().sum::<f64>() / b.len() as f64,
        ks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::Peak;

    fn keys(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("m{i}")).collect()
    }

    #[test]
    fn random_exact_cut_and_determinism() {
        let r = Ratios::new(0.8, 0.1, 0.1).unwrap();
        let a = random_split(&keys(10), r, 7).unwrap();
        assert_eq!(a.counts(), [8, 1, 1]);
        let mut rev = keys(10);
        rev.reverse();
        assert_eq!(random_split(&rev, r, 7).unwrap(), a);
        assert_ne!(random_split(&keys(10), r, 8).unwrap().assignment, a.assignment);
    }

    #[test]
    fn bad_inputs() {
        assert!(Ratios::new(0.5, 0.5, 0.1).is_err());
        assert!(Ratios::new(1.0, 0.0, 0.0).is_err());
        let r = Ratios::default();
        assert!(matches!(random_split(&keys(2), r, 0), Err(SplitError::TooFew(2))));
        let dup = vec!["a".to_string(), "b".into(), "a".into()];
        assert!(matches!(random_split(&dup, r, 0), Err(SplitError::DuplicateKey(_))));
    }

    fn sk(s: &str) -> ScaffoldKey {
        ScaffoldKey { key: s.to_string(), is_acyclic: s.is_empty() }
    }

    #[test]
    fn scaffold_greedy_fill() {
        let mut mols: Vec<(String, ScaffoldKey)> = (0..8).map(|i| (format!("a{i}"), sk("big"))).collect();
        mols.push(("b".into(), sk("s1")));
        mols.push(("c".into(), sk("s2")));
        let a = scaffold_split(&mols, Ratios::default(), 1).unwrap();
        assert_eq!(a.counts(), [8, 1, 1]);
        assert!(a.warnings.is_empty());
        assert_eq!(a.assignment["b"], Partition::Val);
        assert_eq!(a.assignment["c"], Partition::Test);
    }

    #[test]
    fn single_scaffold_goes_to_train_with_warning() {
        let mols: Vec<(String, ScaffoldKey)> = (0..5).map(|i| (format!("m{i}"), sk(""))).collect();
        let a = scaffold_split(&mols, Ratios::default(), 1).unwrap();
        assert_eq!(a.counts(), [5, 0, 0]);
        assert_eq!(a.warnings.len(), 1);
    }

    #[test]
    fn overlap_examples() {
        let set = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
        let o = scaffold_overlap(&set(&["s1", "s2", "s3"]), &set(&["s2", "s3", "s4", "s5"]));
        assert_eq!((o.test_in_train, o.jaccard), (0.5, 0.4));
        let o = scaffold_overlap(&set(&["a"]), &set(&["a"]));
        assert_eq!((o.test_in_train, o.jaccard), (1.0, 1.0));
        let o = scaffold_overlap(&set(&["a"]), &set(&["b"]));
        assert_eq!((o.test_in_train, o.jaccard), (0.0, 0.0));
        let o = scaffold_overlap(&set(&[]), &set(&[]));
        assert!(o.guarded);
    }

    #[test]
    fn entropy_shift_examples() {
        let one = |i: usize| Spectrum::new(format!("s{i}"), vec![Peak::new(50.0, 1.0)], None).unwrap();
        let two = |i: usize| {
            Spectrum::new(format!("t{i}"), vec![Peak::new(50.0, 1.0), Peak::new(60.0, 1.0)], None).unwrap()
        };
        let a: Vec<_> = (0..3).map(one).collect();
        let b: Vec<_> = (0..3).map(two).collect();
        assert_eq!(entropy_shift(&a, &b).unwrap().ks.d, 1.0);
        assert_eq!(entropy_shift(&a, &a).unwrap().ks.d, 0.0);
        let e = entropy_shift(&b, &a).unwrap();
        assert!((e.mean_entropy_train - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn assignment_tsv_roundtrip() {
        let a = random_split(&keys(10), Ratios::default(), 3).unwrap();
        let mut buf = Vec::new();
        a.write_tsv(&mut buf).unwrap();
        assert_eq!(read_assignment_tsv(buf.as_slice()).unwrap(), a.assignment);
        assert!(read_assignment_tsv("x\tholdout\n".as_bytes()).is_err());
    }
}
