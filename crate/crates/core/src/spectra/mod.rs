//! Peak lists, fixed-width binning, intensity preprocessing and spectral
//! entropy. Readers for MGF, MSP and the native TSV layout live in [`io`].

pub mod io;

use thiserror::Error;

pub const DEFAULT_MAX_MZ: f64 = 1000.0;
pub const DEFAULT_RESOLUTION: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error("invalid peak (mz {mz}, intensity {intensity}): mz must be > 0 and intensity >= 0")]
    InvalidPeak { mz: f64, intensity: f64 },
    #[error("bin width must be positive and finite, got {0}")]
    BadResolution(f64),
    #[error("max m/z must be positive and finite, got {0}")]
    BadMaxMz(f64),
    #[error("spectrum {0:?} has no positive intensity")]
    ZeroIntensity(String),
    #[error("binned vector has {found} values, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("binned value {value} at index {index} is negative or not finite")]
    BadValue { index: usize, value: f64 },
    #[error("cannot coarsen by a factor of {0}")]
    BadFactor(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub mz: f64,
    pub intensity: f64,
}

impl Peak {
    pub fn new(mz: f64, intensity: f64) -> Peak {
        Peak { mz, intensity }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    peaks: Vec<Peak>,
    pub precursor_mz: Option<f64>,
    pub record_id: String,
}

impl Spectrum {
    /// Validates peaks, sorts them by m/z and merges equal m/z by summing
    /// intensities.
    pub fn new(
        record_id: impl Into<String>,
        mut peaks: Vec<Peak>,
        precursor_mz: Option<f64>,
    ) -> Result<Spectrum, SpectrumError> {
        for p in &peaks {
            let ok = p.mz.is_finite() && p.mz > 0.0 && p.intensity.is_finite() && p.intensity >= 0.0;
            if !ok {
                return Err(SpectrumError::InvalidPeak { mz: p.mz, intensity: p.intensity });
            }
        }
        peaks.sort_by(|a, b| a.mz.total_cmp(&b.mz));
        let mut merged: Vec<Peak> = Vec::with_capacity(peaks.len());
        for p in peaks {
            match merged.last_mut() {
                Some(last) if last.mz == p.mz => last.intensity += p.intensity,
                _ => merged.push(p),
            }
        }
        Ok(Spectrum {
            peaks: merged,
            precursor_mz,
            record_id: record_id.into(),
        })
    }

    pub fn peaks(&self) -> &[Peak] {
        &self.peaks
    }

    pub fn total_intensity(&self) -> f64 {
        self.peaks.iter().map(|p| p.intensity).sum()
    }

    pub fn has_signal(&self) -> bool {
        self.peaks.iter().any(|p| p.intensity > 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinnedSpectrum {
    pub resolution: f64,
    pub max_mz: f64,
    pub values: Vec<f64>,
    pub dropped_peak_count: usize,
    pub dropped_intensity: f64,
}

/// Number of bins covering `[0, max_mz)` at width `resolution`.
pub fn bin_count(resolution: f64, max_mz: f64) -> Result<usize, SpectrumError> {
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(SpectrumError::BadResolution(resolution));
    }
    if !(max_mz.is_finite() && max_mz > 0.0) {
        return Err(SpectrumError::BadMaxMz(max_mz));
    }
    Ok((max_mz / resolution).ceil() as usize)
}

impl BinnedSpectrum {
    /// Wraps an externally produced vector, checking its shape.
    pub fn from_values(
        resolution: f64,
        max_mz: f64,
        values: Vec<f64>,
    ) -> Result<BinnedSpectrum, SpectrumError> {
        let expected = bin_count(resolution, max_mz)?;
        if values.len() != expected {
            return Err(SpectrumError::LengthMismatch { expected, found: values.len() });
        }
        if let Some((index, &value)) =
            values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(SpectrumError::BadValue { index, value });
        }
        Ok(BinnedSpectrum {
            resolution,
            max_mz,
            values,
            dropped_peak_count: 0,
            dropped_intensity: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sums consecutive groups of `factor` bins into one bin of width
    /// `factor * resolution`.
    pub fn coarsen(&self, factor: usize) -> Result<BinnedSpectrum, SpectrumError> {
        if factor == 0 {
            return Err(SpectrumError::BadFactor(factor));
        }
        let values = self.values.chunks(factor).map(|c| c.iter().sum()).collect();
        Ok(BinnedSpectrum {
            resolution: self.resolution * factor as f64,
            max_mz: self.max_mz,
            values,
            dropped_peak_count: self.dropped_peak_count,
            dropped_intensity: self.dropped_intensity,
        })
    }
}

/// Sums intensities into bins `floor(mz / resolution)`. Peaks at or above
/// `max_mz` are dropped and counted.
pub fn bin_spectrum(
    s: &Spectrum,
    resolution: f64,
    max_mz: f64,
) -> Result<BinnedSpectrum, SpectrumError> {
    let n = bin_count(resolution, max_mz)?;
    let mut out = BinnedSpectrum {
        resolution,
        max_mz,
        values: vec![0.0; n],
        dropped_peak_count: 0,
        dropped_intensity: 0.0,
    };
    for p in &s.peaks {
        if p.mz >= max_mz {
            out.dropped_peak_count += 1;
            out.dropped_intensity += p.intensity;
            continue;
        }
        let idx = ((p.mz / resolution).floor() as usize).min(n - 1);
        out.values[idx] += p.intensity;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    L1,
    L2,
}

/// `log1p` each value, then scale to unit norm. All-zero input stays zero.
pub fn preprocess(b: &BinnedSpectrum, norm: Norm) -> Vec<f64> {
    preprocess_values(&b.values, norm)
}

pub fn preprocess_values(values: &[f64], norm: Norm) -> Vec<f64> {
    let mut v: Vec<f64> = values.iter().map(|x| x.ln_1p()).collect();
    let scale = match norm {
        Norm::L1 => v.iter().map(|x| x.abs()).sum::<f64>(),
        Norm::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
    };
    if scale > 0.0 {
        for x in &mut v {
            *x /= scale;
        }
    }
    v
}

/// Shannon entropy in nats of the raw peak intensity distribution.
pub fn spectral_entropy(s: &Spectrum) -> Result<f64, SpectrumError> {
    let total = s.total_intensity();
    if total <= 0.0 {
        return Err(SpectrumError::ZeroIntensity(s.record_id.clone()));
    }
    Ok(s
        .peaks
        .iter()
        .filter(|p| p.intensity > 0.0)
        .map(|p| {
            let q = p.intensity / total;
            -q * q.ln()
        })
        .sum::<f64>()
        .max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(peaks: &[(f64, f64)]) -> Spectrum {
        Spectrum::new("t", peaks.iter().map(|&(m, i)| Peak::new(m, i)).collect(), None).unwrap()
    }

    #[test]
    fn construction_sorts_and_merges() {
        let s = spec(&[(200.0, 1.0), (100.0, 2.0), (200.0, 3.0)]);
        assert_eq!(s.peaks(), &[Peak::new(100.0, 2.0), Peak::new(200.0, 4.0)]);
        assert!(Spectrum::new("x", vec![Peak::new(0.0, 1.0)], None).is_err());
        assert!(Spectrum::new("x", vec![Peak::new(1.0, -1.0)], None).is_err());
        assert!(Spectrum::new("x", vec![Peak::new(f64::NAN, 1.0)], None).is_err());
    }

    #[test]
    fn same_bin_aggregation() {
        let b = bin_spectrum(&spec(&[(100.4, 2.0), (100.6, 3.0)]), 1.0, 1000.0).unwrap();
        assert_eq!(b.len(), 1000);
        assert_eq!(b.values[100], 5.0);
        assert_eq!(b.values.iter().sum::<f64>(), 5.0);
    }

    #[test]
    fn out_of_range_peaks_are_dropped() {
        let b = bin_spectrum(&spec(&[(1500.0, 1.0)]), 1.0, 1000.0).unwrap();
        assert!(b.values.iter().all(|&v| v == 0.0));
        assert_eq!(b.dropped_peak_count, 1);
        let edge = bin_spectrum(&spec(&[(1000.0, 1.0)]), 1.0, 1000.0).unwrap();
        assert_eq!(edge.dropped_peak_count, 1);
    }

    #[test]
    fn coarse_width_floor_semantics() {
        let b = bin_spectrum(&spec(&[(0.5, 1.0), (1.5, 1.0), (9.5, 1.0)]), 5.0, 10.0).unwrap();
        assert_eq!(b.values, vec![2.0, 1.0]);
        let edge = bin_spectrum(&spec(&[(5.0, 1.0)]), 5.0, 10.0).unwrap();
        assert_eq!(edge.values, vec![0.0, 1.0]);
    }

    #[test]
    fn invalid_binning_parameters() {
        assert_eq!(bin_count(0.0, 10.0), Err(SpectrumError::BadResolution(0.0)));
        assert_eq!(bin_count(1.0, -1.0), Err(SpectrumError::BadMaxMz(-1.0)));
        assert_eq!(bin_count(3.0, 10.0), Ok(4));
    }

    #[test]
    fn preprocess_examples() {
        let b = BinnedSpectrum::from_values(1.0, 3.0, vec![0.0, std::f64::consts::E - 1.0, 0.0])
            .unwrap();
        let v = preprocess(&b, Norm::L1);
        assert_eq!(v[0], 0.0);
        assert!((v[1] - 1.0).abs() < 1e-15);
        let z = BinnedSpectrum::from_values(1.0, 3.0, vec![0.0; 3]).unwrap();
        assert_eq!(preprocess(&z, Norm::L2), vec![0.0; 3]);
        let w = BinnedSpectrum::from_values(1.0, 3.0, vec![1.0, 2.0, 3.0]).unwrap();
        let l2 = preprocess(&w, Norm::L2);
        assert!((l2.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(BinnedSpectrum::from_values(1.0, 3.0, vec![1.0]).is_err());
        assert!(BinnedSpectrum::from_values(1.0, 3.0, vec![1.0, -1.0, 0.0]).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(spectral_entropy(&spec(&[(100.0, 7.0)])).unwrap(), 0.0);
        let two = spectral_entropy(&spec(&[(100.0, 1.0), (200.0, 1.0)])).unwrap();
        assert!((two - std::f64::consts::LN_2).abs() < 1e-15);
        let four = spec(&[(1.0, 1.0), (2.0, 1.0), (3.0, 1.0), (4.0, 1.0)]);
        assert!((spectral_entropy(&four).unwrap() - 4f64.ln()).abs() < 1e-15);
        let with_zero = spec(&[(1.0, 1.0), (2.0, 0.0)]);
        assert_eq!(spectral_entropy(&with_zero).unwrap(), 0.0);
        assert!(spectral_entropy(&spec(&[(1.0, 0.0)])).is_err());
    }
}
