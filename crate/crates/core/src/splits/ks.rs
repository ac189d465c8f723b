//! Two-sample Kolmogorov-Smirnov test with the p-value kept in log10 space.

use serde::Serialize;

use super::SplitError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    /// Supremum distance between the two empirical CDFs.
    pub d: f64,
    pub log10_p: f64,
    pub n: usize,
    pub m: usize,
    /// `d * sqrt(n m / (n + m))`.
    pub z: f64,
}

fn sorted(sample: &[f64]) -> Result<Vec<f64>, SplitError> {
    if sample.is_empty() {
        return Err(SplitError::EmptySample);
    }
    if sample.iter().any(|x| x.is_nan()) {
        return Err(SplitError::NanSample);
    }
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Largest gap between the step CDFs `F(t) = #{x <= t} / n`, evaluated at
/// every distinct value of the merged samples.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64, SplitError> {
    let (a, b) = (sorted(a)?, sorted(b)?);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() || j < b.len() {
        let t = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(d)
}

/// log10 of the asymptotic Kolmogorov tail `2 sum (-1)^(k-1) exp(-2 k^2 Z^2)`,
/// clamped to at most 0. The leading factor `2 exp(-2 Z^2)` is pulled out so
/// large `Z` never underflows.
pub fn kolmogorov_log10_p(z: f64) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    let z2 = z * z;
    let mut s = 0.0;
    let mut k = 1.0f64;
    loop {
        let term = (-2.0 * (k * k - 1.0) * z2).exp();
        let sign = if (k as u64) % 2 == 1 { 1.0 } else { -1.0 };
        s += sign * term;
        // Terms of the unscaled series are term * exp(-2 Z^2).
        if term * (-2.0 * z2).exp() < 1e-16 || k > 1e7 {
            break;
        }
        k += 1.0;
    }
    if s <= 0.0 {
        return 0.0;
    }
    ((std::f64::consts::LN_2 - 2.0 * z2 + s.ln()) / std::f64::consts::LN_10).min(0.0)
}

pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult, SplitError> {
    let d = ks_statistic(a, b)?;
    let (n, m) = (a.len(), b.len());
    let n_eff = (n as f64 * m as f64) / (n + m) as f64;
    let z = d * n_eff.sqrt();
    Ok(KsResult {
        d,
        log10_p: kolmogorov_log10_p(z),
        n,
        m,
        z,
    })
}
