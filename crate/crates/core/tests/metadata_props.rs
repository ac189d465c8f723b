use msbench_core::metadata::{embed_metadata, fit_metadata_stats, FeatureState, MetadataConfig, MetadataRecord};
use proptest::prelude::*;

fn record() -> impl Strategy<Value = MetadataRecord> {
    let cat = |words: &'static [&'static str]| {
        proptest::option::of(prop::sample::select(words).prop_map(str::to_string))
    };
    (
        proptest::option::of(0.0f64..200.0),
        proptest::option::of(0.0f64..150.0),
        cat(&["Orbitrap", "QTOF", "FT"]),
        cat(&["[M+H]+", "[M+Na]+"]),
        cat(&["positive", "negative"]),
        proptest::option::of(1.0f64..3000.0),
    )
        .prop_map(|(ace, nce, i, p, m, mz)| MetadataRecord {
            ace,
            nce,
            instrument_type: i,
            precursor_type: p,
            ion_mode: m,
            precursor_mz: mz,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn embedding_shape_and_one_hot(train in proptest::collection::vec(record(), 1..40), probe in record()) {
        let stats = fit_metadata_stats(&train, &MetadataConfig::default()).unwrap();
        let dim = stats.dimension();
        let v = embed_metadata(&probe, &stats);
        prop_assert_eq!(v.values.len(), dim);
        prop_assert_eq!(&v, &embed_metadata(&probe, &stats));
        for seg in ["instrument_type", "precursor_type", "ion_mode", "precursor_mz"] {
            let s = v.segment(seg).unwrap();
            prop_assert!(s.iter().all(|&x| x == 0.0 || x == 1.0));
            prop_assert!(s.iter().filter(|&&x| x == 1.0).count() <= 1);
        }
        for r in &train {
            prop_assert_eq!(embed_metadata(r, &stats).values.len(), dim);
        }
    }

    #[test]
    fn standardized_training_values(train in proptest::collection::vec(record(), 2..60)) {
        let stats = fit_metadata_stats(&train, &MetadataConfig::default()).unwrap();
        prop_assume!(stats.ace.state == FeatureState::Fitted && stats.ace.std > 1e-6);
        let z: Vec<f64> = train
            .iter()
            .filter(|r| r.ace.is_some())
            .map(|r| embed_metadata(r, &stats).values[1])
            .collect();
        let n = z.len() as f64;
        let mean = z.iter().sum::<f64>() / n;
        let var = z.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        prop_assert!(mean.abs() < 1e-9);
        prop_assert!((var.sqrt() - 1.0).abs() < 1e-9);
    }
}
