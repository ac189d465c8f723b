use std::collections::BTreeSet;

use serde::Serialize;

use super::{
    entropy_shift, ks_two_sample, sample_tanimoto_pairs, scaffold_overlap, EntropyShift, KsResult,
    PairSet, ScaffoldOverlap, SplitError,
};
use crate::fingerprint::{mix64, FingerprintBits, ScaffoldKey};
use crate::spectra::Spectrum;

/// One partition's molecules (key, fingerprint, scaffold) and spectra.
#[derive(Debug, Clone, Default)]
pub struct DiagnosticsInput {
    pub molecules: Vec<(String, FingerprintBits, ScaffoldKey)>,
    pub spectra: Vec<Spectrum>,
}

impl DiagnosticsInput {
    fn normalized(&self) -> (Vec<FingerprintBits>, BTreeSet<String>, Vec<Spectrum>) {
        let mut mols: Vec<_> = self.molecules.iter().collect();
        mols.sort_by(|a, b| a.0.cmp(&b.0));
        let fps = mols.iter().map(|m| m.1.clone()).collect();
        let scaffolds = mols.iter().map(|m| m.2.key.clone()).collect();
        let mut spectra = self.spectra.clone();
        spectra.sort_by(|a, b| a.record_id.cmp(&b.record_id));
        (fps, scaffolds, spectra)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairDiagnostics {
    pub pair: String,
    pub n_molecules: usize,
    pub n_spectra: usize,
    /// Mean Tanimoto over train-by-other pairs.
    pub mean_tanimoto: f64,
    /// Train-train versus train-other similarity distributions.
    pub tanimoto_ks: KsResult,
    pub scaffold_overlap: ScaffoldOverlap,
    pub entropy: Option<EntropyShift>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitDiagnostics {
    pub n_train_molecules: usize,
    pub n_train_spectra: usize,
    pub train_train_mean_tanimoto: f64,
    pub train_mean_entropy: Option<f64>,
    pub n_pairs: usize,
    pub seed: u64,
    pub pairs: Vec<PairDiagnostics>,
    /// Comparisons left out because a partition was empty.
    pub skipped: Vec<String>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Train-val and train-test shift statistics. Records are sorted by key
/// before sampling so the result ignores input order.
pub fn split_diagnostics(
    train: &DiagnosticsInput,
    others: &[(&str, &DiagnosticsInput)],
    n_pairs: usize,
    seed: u64,
) -> Result<SplitDiagnostics, SplitError> {
    let (train_fps, train_scaffolds, train_spectra) = train.normalized();
    let baseline = sample_tanimoto_pairs(PairSet::Within(&train_fps), n_pairs, mix64(seed))?;
    let train_entropy = if train_spectra.is_empty() {
        None
    } else {
        Some(mean(&super::entropies(&train_spectra)?))
    };

    let mut pairs = Vec::new();
    let mut skipped = Vec::new();
    for (k, (label, part)) in others.iter().enumerate() {
        let (fps, scaffolds, spectra) = part.normalized();
        let pair = format!("train_{label}");
        if fps.is_empty() {
            skipped.push(format!("{pair}: no {label} molecules"));
            continue;
        }
        let stream = mix64(seed ^ mix64(k as u64 + 1));
        let sims = sample_tanimoto_pairs(PairSet::Between(&train_fps, &fps), n_pairs, stream)?;
        let entropy = if train_spectra.is_empty() || spectra.is_empty() {
            skipped.push(format!("{pair}: entropy needs spectra on both sides"));
            None
        } else {
            Some(entropy_shift(&train_spectra, &spectra)?)
        };
        pairs.push(PairDiagnostics {
            pair,
            n_molecules: fps.len(),
            n_spectra: spectra.len(),
            mean_tanimoto: mean(&sims),
            tanimoto_ks: ks_two_sample(&baseline, &sims)?,
            scaffold_overlap: scaffold_overlap(&train_scaffolds, &scaffolds),
            entropy,
        });
    }
    Ok(SplitDiagnostics {
        n_train_molecules: train_fps.len(),
        n_train_spectra: train_spectra.len(),
        train_train_mean_tanimoto: mean(&baseline),
        train_mean_entropy: train_entropy,
        n_pairs,
        seed,
        pairs,
        skipped,
    })
}
