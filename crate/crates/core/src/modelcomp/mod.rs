//! Multi-model comparison across benchmark conditions: average ranks, the
//! Friedman test, pairwise Wilcoxon signed-rank tests with Holm step-down
//! correction, and critical-difference cliques.

mod svg;
mod wilcoxon;

use std::io::BufRead;

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

pub use svg::render_cd_svg;
pub use wilcoxon::{wilcoxon_signed_rank, WilcoxonMethod, WilcoxonResult, EXACT_MAX_N};

pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Error)]
pub enum ModelCompError {
    #[error("paired samples differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("scores must not be NaN")]
    NonFinite,
    #[error("need at least 2 models, got {0}")]
    TooFewModels(usize),
    #[error("need at least 2 complete conditions, got {0}")]
    TooFewConditions(usize),
    #[error("model {0:?} appears twice")]
    DuplicateModel(String),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("alpha must lie in (0, 1), got {0}")]
    BadAlpha(f64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    HigherBetter,
    LowerBetter,
}

/// Conditions by models. Conditions with a missing cell are dropped and
/// listed in `dropped_conditions`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreMatrix {
    pub models: Vec<String>,
    pub conditions: Vec<String>,
    pub scores: Vec<Vec<f64>>,
    pub direction: Direction,
    pub dropped_conditions: Vec<String>,
}

impl ScoreMatrix {
    pub fn new(
        models: Vec<String>,
        rows: Vec<(String, Vec<Option<f64>>)>,
        direction: Direction,
    ) -> Result<ScoreMatrix, ModelCompError> {
        if models.len() < 2 {
            return Err(ModelCompError::TooFewModels(models.len()));
        }
        for (i, m) in models.iter().enumerate() {
            if models[..i].contains(m) {
                return Err(ModelCompError::DuplicateModel(m.clone()));
            }
        }
        let mut conditions = Vec::new();
        let mut scores = Vec::new();
        let mut dropped = Vec::new();
        for (name, row) in rows {
            if row.len() != models.len() {
                return Err(ModelCompError::LengthMismatch(row.len(), models.len()));
            }
            match row.iter().map(|c| c.filter(|x| !x.is_nan())).collect::<Option<Vec<f64>>>() {
                Some(r) => {
                    conditions.push(name);
                    scores.push(r);
                }
                None => dropped.push(name),
            }
        }
        if scores.len() < 2 {
            return Err(ModelCompError::TooFewConditions(scores.len()));
        }
        Ok(ScoreMatrix {
            models,
            conditions,
            scores,
            direction,
            dropped_conditions: dropped,
        })
    }

    /// Header `condition<TAB>model...`, then one row per condition. Empty,
    /// `NA` or `NaN` cells are missing.
    pub fn from_tsv(reader: impl BufRead, direction: Direction) -> Result<ScoreMatrix, ModelCompError> {
        let mut models: Option<Vec<String>> = None;
        let mut rows = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cells: Vec<&str> = line.split('\t').map(str::trim).collect();
            let Some(ms) = &models else {
                if cells.len() < 3 {
                    return Err(ModelCompError::Parse {
                        line: lineno,
                        reason: "header needs a condition column and at least two models".into(),
                    });
                }
                models = Some(cells[1..].iter().map(|s| s.to_string()).collect());
                continue;
            };
            if cells.len() != ms.len() + 1 {
                return Err(ModelCompError::Parse {
                    line: lineno,
                    reason: format!("expected {} cells, found {}", ms.len() + 1, cells.len()),
                });
            }
            let mut row = Vec::new();
            for c in &cells[1..] {
                if c.is_empty() || c.eq_ignore_ascii_case("na") || c.eq_ignore_ascii_case("nan") {
                    row.push(None);
                } else {
                    let x: f64 = c.parse().map_err(|_| ModelCompError::Parse {
                        line: lineno,
                        reason: format!("{c:?} is not a number"),
                    })?;
                    row.push(Some(x));
                }
            }
            rows.push((cells[0].to_string(), row));
        }
        let models = models.ok_or(ModelCompError::Parse {
            line: 0,
            reason: "empty score matrix".into(),
        })?;
        ScoreMatrix::new(models, rows, direction)
    }

    pub fn k(&self) -> usize {
        self.models.len()
    }

    pub fn n(&self) -> usize {
        self.scores.len()
    }

    /// Scores of one model across conditions, oriented so higher is better.
    fn column(&self, j: usize) -> Vec<f64> {
        self.scores.iter().map(|r| self.oriented(r[j])).collect()
    }

    fn oriented(&self, x: f64) -> f64 {
        match self.direction {
            Direction::HigherBetter => x,
            Direction::LowerBetter => -x,
        }
    }
}

/// Per condition, rank 1 is best and ties share the mean of their positions;
/// the ranks are then averaged over conditions.
pub fn average_ranks(m: &ScoreMatrix) -> Vec<f64> {
    let k = m.k();
    let mut sums = vec![0.0; k];
    for row in &m.scores {
        let s: Vec<f64> = row.iter().map(|&x| m.oriented(x)).collect();
        for j in 0..k {
            let better = s.iter().filter(|&&x| x > s[j]).count() as f64;
            let equal = s.iter().filter(|&&x| x == s[j]).count() as f64;
            sums[j] += better + (equal + 1.0) / 2.0;
        }
    }
    sums.iter().map(|s| s / m.n() as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FriedmanResult {
    pub statistic: f64,
    pub dof: usize,
    pub log10_p: f64,
}

/// log10 of the chi-square upper tail. Falls back to the leading term of the
/// asymptotic expansion of the regularized upper gamma function when the
/// direct value underflows.
pub fn chi2_log10_sf(x: f64, dof: usize) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    let p = dist.sf(x);
    if p > 1e-300 {
        return p.min(1.0).log10();
    }
    let a = dof as f64 / 2.0;
    let y = x / 2.0;
    let mut series = 1.0;
    let mut term = 1.0;
    for i in 1..30 {
        term *= (a - i as f64) / y;
        if term.abs() < 1e-17 {
            break;
        }
        series += term;
    }
    ((a - 1.0) * y.ln() - y - ln_gamma(a) + series.ln()) / std::f64::consts::LN_10
}

/// `12N / (k(k+1)) * (sum R_j^2 - k(k+1)^2 / 4)` with k-1 degrees of
/// freedom, no tie correction. Requires at least three models.
pub fn friedman_test(m: &ScoreMatrix) -> Result<FriedmanResult, ModelCompError> {
    let k = m.k();
    if k < 3 {
        return Err(ModelCompError::TooFewModels(k));
    }
    let (kf, nf) = (k as f64, m.n() as f64);
    let r = average_ranks(m);
    let sum_sq: f64 = r.iter().map(|x| x * x).sum();
    let statistic = (12.0 * nf / (kf * (kf + 1.0)) * (sum_sq - kf * (kf + 1.0).powi(2) / 4.0)).max(0.0);
    Ok(FriedmanResult {
        statistic,
        dof: k - 1,
        log10_p: chi2_log10_sf(statistic, k - 1),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolmDecision {
    pub threshold: f64,
    pub rejected: bool,
}

/// Holm step-down: the i-th smallest p (1-based) is compared with
/// `alpha / (m - i + 1)`, stopping at the first failure. Results follow the
/// input order.
pub fn holm_correct(p: &[f64], alpha: f64) -> Vec<HolmDecision> {
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]).then(a.cmp(&b)));
    let mut out = vec![HolmDecision { threshold: 0.0, rejected: false }; m];
    let mut still = true;
    for (i, &idx) in order.iter().enumerate() {
        let threshold = alpha / (m - i) as f64;
        still = still && p[idx] <= threshold;
        out[idx] = HolmDecision { threshold, rejected: still };
    }
    out
}

/// Maximal runs of consecutive models (sorted by rank) with no rejected pair
/// inside. `order` lists model indices best first; `rejected(a, b)` is
/// symmetric.
pub fn cd_cliques(order: &[usize], rejected: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let k = order.len();
    let mut cliques = Vec::new();
    let mut prev_end = None;
    for start in 0..k {
        let mut end = start;
        while end + 1 < k && (start..=end).all(|i| !rejected(order[i], order[end + 1])) {
            end += 1;
        }
        if prev_end.is_none_or(|p| end > p) {
            cliques.push(order[start..=end].to_vec());
            prev_end = Some(end);
        }
    }
    cliques
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairwiseResult {
    pub model_a: String,
    pub model_b: String,
    pub p: f64,
    pub w_plus: f64,
    pub n_nonzero: usize,
    pub method: WilcoxonMethod,
    pub small_sample: bool,
    pub holm_threshold: f64,
    pub rejected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub models: Vec<String>,
    pub direction: Direction,
    pub n_conditions: usize,
    pub dropped_conditions: Vec<String>,
    pub alpha: f64,
    pub average_ranks: Vec<f64>,
    /// Absent with two models; the pairwise test decides alone.
    pub friedman: Option<FriedmanResult>,
    pub friedman_rejected: bool,
    pub pairwise: Vec<PairwiseResult>,
    /// Model names per clique, best rank first.
    pub cliques: Vec<Vec<String>>,
    pub notes: Vec<String>,
}

/// Full pipeline. When the Friedman test does not reject, no pairwise
/// hypothesis is rejected and all models form one clique.
pub fn compare(m: &ScoreMatrix, alpha: f64) -> Result<ComparisonReport, ModelCompError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ModelCompError::BadAlpha(alpha));
    }
    let k = m.k();
    let ranks = average_ranks(m);
    let mut notes = Vec::new();
    let friedman = match friedman_test(m) {
        Ok(f) => Some(f),
        Err(ModelCompError::TooFewModels(_)) => {
            notes.push("two models: Friedman test skipped, Wilcoxon decides".into());
            None
        }
        Err(e) => return Err(e),
    };
    let friedman_rejected = friedman.is_none_or(|f| f.log10_p <= alpha.log10());
    if !friedman_rejected {
        notes.push("Friedman test not significant: no pairwise rejection".into());
    }
    if !m.dropped_conditions.is_empty() {
        notes.push(format!("{} condition(s) dropped for missing cells", m.dropped_conditions.len()));
    }

    let mut pairs = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            pairs.push((a, b, wilcoxon_signed_rank(&m.column(a), &m.column(b))?));
        }
    }
    let p: Vec<f64> = pairs.iter().map(|x| x.2.p).collect();
    let holm = holm_correct(&p, alpha);
    let mut reject = vec![vec![false; k]; k];
    let pairwise = pairs
        .iter()
        .zip(&holm)
        .map(|(&(a, b, w), h)| {
            let rejected = h.rejected && friedman_rejected;
            reject[a][b] = rejected;
            reject[b][a] = rejected;
            PairwiseResult {
                model_a: m.models[a].clone(),
                model_b: m.models[b].clone(),
                p: w.p,
                w_plus: w.w_plus,
                n_nonzero: w.n_nonzero,
                method: w.method,
                small_sample: w.small_sample,
                holm_threshold: h.threshold,
                rejected,
            }
        })
        .collect();

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| ranks[a].total_cmp(&ranks[b]).then(m.models[a].cmp(&m.models[b])));
    let cliques = cd_cliques(&order, |a, b| reject[a][b])
        .into_iter()
        .map(|c| c.into_iter().map(|i| m.models[i].clone()).collect())
        .collect();

    Ok(ComparisonReport {
        models: m.models.clone(),
        direction: m.direction,
        n_conditions: m.n(),
        dropped_conditions: m.dropped_conditions.clone(),
        alpha,
        average_ranks: ranks,
        friedman,
        friedman_rejected,
        pairwise,
        cliques,
        notes,
    })
}
