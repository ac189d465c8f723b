use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use msbench_core::spectra::io::{parse_mgf, parse_msp, parse_tsv};
use msbench_core::spectra::{
    bin_spectrum, preprocess, spectral_entropy, BinnedSpectrum, Norm, Peak, Spectrum,
};
use proptest::prelude::*;

fn fixture(name: &str) -> (BufReader<File>, usize, usize) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name);
    let text = std::fs::read_to_string(&path).unwrap();
    let count = |key: &str| -> usize {
        text.lines()
            .find_map(|l| l.strip_prefix(&format!("# {key}: ")))
            .unwrap_or_else(|| panic!("{name} lacks a {key} header"))
            .trim()
            .parse()
            .unwrap()
    };
    (BufReader::new(File::open(&path).unwrap()), count("records"), count("skipped"))
}

#[test]
fn fixture_files_parse_to_declared_counts() {
    let (r, n, k) = fixture("small.mgf");
    let out = parse_mgf(r).unwrap();
    assert_eq!((out.records.len(), out.skipped.len()), (n, k), "{:?}", out.skipped);
    assert_eq!(out.records[0].field(&["SMILES"]), Some("Cn1cnc2c1c(=O)n(C)c(=O)n2C"));
    assert_eq!(out.records[2].spectrum.record_id, "scan4");

    let (r, n, k) = fixture("small.msp");
    let out = parse_msp(r).unwrap();
    assert_eq!((out.records.len(), out.skipped.len()), (n, k), "{:?}", out.skipped);
    assert_eq!(out.records[0].spectrum.peaks().len(), 4);

    let (r, n, k) = fixture("small.tsv");
    let out = parse_tsv(r).unwrap();
    assert_eq!((out.records.len(), out.skipped.len()), (n, k), "{:?}", out.skipped);
    assert_eq!(out.records[2].spectrum.peaks().len(), 2, "equal m/z merged");
    assert_eq!(out.records[2].spectrum.peaks()[1], Peak::new(77.0386, 105.0));
}

fn peaks_strategy() -> impl Strategy<Value = Vec<Peak>> {
    proptest::collection::vec((0.01f64..1200.0, 0.0f64..1e4), 1..60)
        .prop_map(|v| v.into_iter().map(|(m, i)| Peak::new(m, i)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn binning_conserves_intensity(peaks in peaks_strategy(), res in prop::sample::select(vec![0.1, 1.0, 2.0, 4.0, 5.0, 10.0])) {
        let s = Spectrum::new("p", peaks, None).unwrap();
        let b = bin_spectrum(&s, res, 1000.0).unwrap();
        let raw = s.total_intensity();
        let kept: f64 = b.values.iter().sum();
        let dropped_n = s.peaks().iter().filter(|p| p.mz >= 1000.0).count();
        prop_assert_eq!(b.dropped_peak_count, dropped_n);
        prop_assert!((kept + b.dropped_intensity - raw).abs() <= 1e-12 * raw.max(1.0));
        prop_assert_eq!(b.len(), (1000.0f64 / res).ceil() as usize);
    }

    #[test]
    fn coarsening_matches_direct_binning(peaks in peaks_strategy()) {
        let near_edge = peaks.iter().any(|p| {
            let f = p.mz / 5.0;
            (f - f.round()).abs() * 5.0 < 1e-9 || (p.mz - p.mz.round()).abs() < 1e-9
        });
        prop_assume!(!near_edge);
        let s = Spectrum::new("p", peaks, None).unwrap();
        let fine = bin_spectrum(&s, 1.0, 1000.0).unwrap().coarsen(5).unwrap();
        let coarse = bin_spectrum(&s, 5.0, 1000.0).unwrap();
        prop_assert_eq!(fine.len(), coarse.len());
        for (a, b) in fine.values.iter().zip(&coarse.values) {
            prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
        }
    }

    #[test]
    fn entropy_is_bounded(peaks in peaks_strategy()) {
        let s = Spectrum::new("p", peaks, None).unwrap();
        prop_assume!(s.has_signal());
        let h = spectral_entropy(&s).unwrap();
        prop_assert!(h >= 0.0);
        prop_assert!(h <= (s.peaks().len() as f64).ln() + 1e-12);
    }

    #[test]
    fn preprocessing_normalizes(values in proptest::collection::vec(0.0f64..100.0, 10)) {
        let b = BinnedSpectrum::from_values(1.0, 10.0, values.clone()).unwrap();
        let l1 = preprocess(&b, Norm::L1);
        let l2 = preprocess(&b, Norm::L2);
        if values.iter().any(|&v| v > 0.0) {
            prop_assert!((l1.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!((l2.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
        } else {
            prop_assert!(l1.iter().chain(&l2).all(|&x| x == 0.0));
        }
    }
}

#[test]
fn uniform_spectra_have_log_n_entropy() {
    for n in [1usize, 2, 4, 8] {
        let peaks = (1..=n).map(|i| Peak::new(i as f64 * 10.0, 3.0)).collect();
        let h = spectral_entropy(&Spectrum::new("u", peaks, None).unwrap()).unwrap();
        assert!((h - (n as f64).ln()).abs() < 1e-12, "n={n}");
    }
}
