use serde::Serialize;
use statrs::function::erf::erfc;

use super::ModelCompError;

/// Largest count of non-zero differences handled by exact enumeration.
pub const EXACT_MAX_N: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WilcoxonMethod {
    Exact,
    Normal,
    /// Every difference was zero; p is 1.
    AllZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WilcoxonResult {
    /// Two-sided p-value.
    pub p: f64,
    /// Sum of ranks of the positive differences.
    pub w_plus: f64,
    pub n_nonzero: usize,
    pub method: WilcoxonMethod,
    /// Fewer than five non-zero differences: the test cannot reach
    /// conventional significance.
    pub small_sample: bool,
}

/// Midranks of `|d|`, 1-based.
fn midranks(abs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..abs.len()).collect();
    order.sort_by(|&i, &j| abs[i].total_cmp(&abs[j]));
    let mut ranks = vec![0.0; abs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && abs[order[j + 1]] == abs[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Signed-rank test on paired samples. Zero differences are discarded.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonResult, ModelCompError> {
    if a.len() != b.len() {
        return Err(ModelCompError::LengthMismatch(a.len(), b.len()));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|&x| x != 0.0).collect();
    if d.iter().any(|x| x.is_nan()) {
        return Err(ModelCompError::NonFinite);
    }
    let n = d.len();
    if n == 0 {
        return Ok(WilcoxonResult {
            p: 1.0,
            w_plus: 0.0,
            n_nonzero: 0,
            method: WilcoxonMethod::AllZero,
            small_sample: true,
        });
    }
    let abs: Vec<f64> = d.iter().map(|x| x.abs()).collect();
    let ranks = midranks(&abs);
    let w_plus: f64 = d.iter().zip(&ranks).filter(|(x, _)| **x > 0.0).map(|(_, r)| r).sum();

    let (p, method) = if n <= EXACT_MAX_N {
        (exact_p(&ranks, w_plus), WilcoxonMethod::Exact)
    } else {
        (normal_p(&ranks, w_plus), WilcoxonMethod::Normal)
    };
    Ok(WilcoxonResult {
        p,
        w_plus,
        n_nonzero: n,
        method,
        small_sample: n < 5,
    })
}

/// Null distribution of the doubled positive rank sum by dynamic programming
/// over subsets; doubling makes midranks integral.
fn exact_p(ranks: &[f64], w_plus: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0.0f64; total + 1];
    counts[0] = 1.0;
    let mut reach = 0;
    for &r in &doubled {
        for s in (0..=reach).rev() {
            if counts[s] > 0.0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let w = (w_plus * 2.0).round() as usize;
    let all = 2f64.powi(ranks.len() as i32);
    let lower: f64 = counts[..=w].iter().sum();
    let upper: f64 = counts[w..].iter().sum();
    (2.0 * lower.min(upper) / all).min(1.0)
}

fn normal_p(ranks: &[f64], w_plus: f64) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut tie_term = 0.0;
    let mut sorted = ranks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|&&r| r == sorted[i]).count();
        let t = j as f64;
        tie_term += t * t * t - t;
        i += j;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((w_plus - mean).abs() - 0.5).max(0.0) / var.sqrt();
    erfc(z / std::f64::consts::SQRT_2).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_positive_six() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let b = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0];
        let r = wilcoxon_signed_rank(&a, &b).unwrap();
        assert_eq!(r.method, WilcoxonMethod::Exact);
        assert_eq!(r.p, 0.03125);
        assert_eq!(r.w_plus, 21.0);
    }

    #[test]
    fn identical_inputs() {
        let r = wilcoxon_signed_rank(&[1.0, 2.0], &[1.0, 2.0]).unwrap();
        assert_eq!((r.p, r.method), (1.0, WilcoxonMethod::AllZero));
    }

    #[test]
    fn balanced_signs() {
        let d = [1.0, -1.0, 2.0, -2.0, 3.0, -3.0, 4.0, -4.0];
        let r = wilcoxon_signed_rank(&d, &[0.0; 8]).unwrap();
        assert_eq!(r.p, 1.0);
    }

    #[test]
    fn midranks_average_ties() {
        assert_eq!(midranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn normal_branch_for_large_n() {
        let a: Vec<f64> = (1..=40).map(f64::from).collect();
        let b: Vec<f64> = a.iter().map(|x| x - 1.0).collect();
        let r = wilcoxon_signed_rank(&a, &b).unwrap();
        assert_eq!(r.method, WilcoxonMethod::Normal);
        assert!(r.p < 1e-6);
    }
}
