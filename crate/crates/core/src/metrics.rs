//! Spectrum similarity scores and retrieval ranking metrics.
//!
//! Cosine and Jensen-Shannon similarity take `log1p`-transformed bins;
//! coverage takes raw bins. [`score_spectrum`] applies the transforms.

use serde::Serialize;
use thiserror::Error;

use crate::spectra::BinnedSpectrum;

pub const DEFAULT_TAU: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("vector lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("vector has no positive mass")]
    ZeroVector,
    #[error("no candidates")]
    NoCandidates,
    #[error("true candidate {0:?} is not among the candidates")]
    TrueAbsent(String),
    #[error("true candidate {0:?} appears {1} times")]
    TrueDuplicated(String, usize),
    #[error("no results to aggregate")]
    EmptyResults,
    #[error("k must be >= 1")]
    BadK,
    #[error("k percent must lie in (0, 100], got {0}")]
    BadPercent(f64),
    #[error("binned spectra differ in shape: resolution {0} vs {1}, max m/z {2} vs {3}")]
    ShapeMismatch(f64, f64, f64, f64),
}

fn same_len(a: &[f64], b: &[f64]) -> Result<(), MetricError> {
    if a.len() != b.len() {
        return Err(MetricError::LengthMismatch(a.len(), b.len()));
    }
    Ok(())
}

/// Dot product of the two L2-normalized vectors. Zero when either vector is
/// all zero.
pub fn cosine_similarity(pred: &[f64], truth: &[f64]) -> Result<f64, MetricError> {
    same_len(pred, truth)?;
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in pred.iter().zip(truth) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    Ok(cosine_from_sums(dot, na, nb))
}

/// Cosine from a dot product and the two squared norms, with the same zero
/// and equal-norm handling as [`cosine_similarity`]. Lets callers holding
/// sparse vectors accumulate the sums themselves.
pub fn cosine_from_sums(dot: f64, na: f64, nb: f64) -> f64 {
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let c = if na == nb { dot / na } else { dot / (na * nb).sqrt() };
    c.clamp(0.0, 1.0)
}

/// `sum p log2(p / m) / sum p`; dividing by the computed mass keeps the
/// disjoint-support case at exactly 1.
fn kl_to_mixture(p: &[f64], q: &[f64]) -> f64 {
    let mut acc = 0.0;
    let mut mass = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi > 0.0 {
            let m = 0.5 * (pi + qi);
            acc += pi * (pi / m).log2();
            mass += pi;
        }
    }
    acc / mass
}

/// `1 - JS divergence` with base-2 logarithms, in `[0, 1]`.
pub fn js_similarity(pred: &[f64], truth: &[f64]) -> Result<f64, MetricError> {
    same_len(pred, truth)?;
    let normalize = |v: &[f64]| -> Result<Vec<f64>, MetricError> {
        let s: f64 = v.iter().sum();
        if s.is_nan() || s <= 0.0 {
            return Err(MetricError::ZeroVector);
        }
        Ok(v.iter().map(|x| x / s).collect())
    };
    let p = normalize(pred)?;
    let q = normalize(truth)?;
    let div = 0.5 * (kl_to_mixture(&p, &q) + kl_to_mixture(&q, &p));
    Ok((1.0 - div).clamp(0.0, 1.0))
}

fn significant(v: &[f64], tau: f64) -> Vec<bool> {
    let max = v.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return vec![false; v.len()];
    }
    v.iter().map(|x| x / max > tau).collect()
}

/// Fraction of truth bins above `tau` (relative to the truth maximum) that
/// are also above `tau` in the prediction. `None` when no truth bin clears
/// the threshold.
pub fn spectral_coverage(pred: &[f64], truth: &[f64], tau: f64) -> Result<Option<f64>, MetricError> {
    same_len(pred, truth)?;
    let p = significant(pred, tau);
    let t = significant(truth, tau);
    let total = t.iter().filter(|&&x| x).count();
    if total == 0 {
        return Ok(None);
    }
    let shared = p.iter().zip(&t).filter(|(a, b)| **a && **b).count();
    Ok(Some(shared as f64 / total as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumScore {
    pub cosine: f64,
    pub js_similarity: f64,
    /// `None` when the truth has no bin above the coverage threshold.
    pub coverage: Option<f64>,
    /// Set when either spectrum is all zero. Cosine is then 0 and, since
    /// the two share no mass, JS similarity is reported as 0.
    pub degenerate: bool,
}

pub fn score_spectrum(
    pred: &BinnedSpectrum,
    truth: &BinnedSpectrum,
    tau: f64,
) -> Result<SpectrumScore, MetricError> {
    if pred.resolution != truth.resolution || pred.max_mz != truth.max_mz {
        return Err(MetricError::ShapeMismatch(
            pred.resolution,
            truth.resolution,
            pred.max_mz,
            truth.max_mz,
        ));
    }
    score_values(&pred.values, &truth.values, tau)
}

/// Scores raw (untransformed) bin vectors.
pub fn score_values(pred: &[f64], truth: &[f64], tau: f64) -> Result<SpectrumScore, MetricError> {
    same_len(pred, truth)?;
    let lp: Vec<f64> = pred.iter().map(|x| x.ln_1p()).collect();
    let lt: Vec<f64> = truth.iter().map(|x| x.ln_1p()).collect();
    let degenerate = !lp.iter().any(|&x| x > 0.0) || !lt.iter().any(|&x| x > 0.0);
    Ok(SpectrumScore {
        cosine: cosine_similarity(&lp, &lt)?,
        js_similarity: if degenerate { 0.0 } else { js_similarity(&lp, &lt)? },
        coverage: spectral_coverage(pred, truth, tau)?,
        degenerate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankResult {
    /// 0-based position of the true candidate.
    pub rank: usize,
    pub total_candidates: usize,
    /// `rank / total_candidates`.
    pub normalized_rank: f64,
}

impl RankResult {
    pub fn new(rank: usize, total_candidates: usize) -> RankResult {
        RankResult {
            rank,
            total_candidates,
            normalized_rank: rank as f64 / total_candidates as f64,
        }
    }
}

fn order_key(x: f64) -> f64 {
    if x.is_nan() {
        f64::NEG_INFINITY
    } else {
        x
    }
}

/// Rank of `true_id` among candidates sorted by descending score, with ties
/// resolved against the true candidate: the rank counts every other
/// candidate scoring at least as high. NaN scores sort last.
pub fn rank_candidates<S: AsRef<str>>(
    scored: &[(S, f64)],
    true_id: &str,
) -> Result<RankResult, MetricError> {
    if scored.is_empty() {
        return Err(MetricError::NoCandidates);
    }
    let hits: Vec<usize> = (0..scored.len()).filter(|&i| scored[i].0.as_ref() == true_id).collect();
    let t = match hits.as_slice() {
        [] => return Err(MetricError::TrueAbsent(true_id.to_string())),
        [t] => *t,
        many => return Err(MetricError::TrueDuplicated(true_id.to_string(), many.len())),
    };
    let target = order_key(scored[t].1);
    let rank = scored
        .iter()
        .enumerate()
        .filter(|&(i, (_, s))| i != t && order_key(*s) >= target)
        .count();
    Ok(RankResult::new(rank, scored.len()))
}

/// Share of queries whose rank is below `k`.
pub fn top_k(results: &[RankResult], k: usize) -> Result<f64, MetricError> {
    if k == 0 {
        return Err(MetricError::BadK);
    }
    if results.is_empty() {
        return Err(MetricError::EmptyResults);
    }
    Ok(results.iter().filter(|r| r.rank < k).count() as f64 / results.len() as f64)
}

/// Share of queries whose normalized rank is below `k_percent / 100`.
pub fn top_k_percent(results: &[RankResult], k_percent: f64) -> Result<f64, MetricError> {
    if !(k_percent > 0.0 && k_percent <= 100.0) {
        return Err(MetricError::BadPercent(k_percent));
    }
    if results.is_empty() {
        return Err(MetricError::EmptyResults);
    }
    let cut = k_percent / 100.0;
    Ok(results.iter().filter(|r| r.normalized_rank < cut).count() as f64 / results.len() as f64)
}
