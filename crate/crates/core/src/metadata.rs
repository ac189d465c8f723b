//! Fixed-length numeric embedding of acquisition metadata.
//!
//! Layout, in order: ACE (missing indicator, standardized value), NCE (same
//! pair), one-hot instrument type, one-hot precursor type, one-hot ion mode,
//! one-hot integer precursor m/z bin. An indicator of 1 means missing, and a
//! missing value is written as -1.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_MAX_PRECURSOR_BIN: usize = 1500;

#[derive(Debug, Error)]
pub enum MetadataError {
    #[error("{field}: {value:?} is not a number")]
    BadNumber { field: &'static str, value: String },
    #[error("{field}: collision energy {value} is negative")]
    NegativeEnergy { field: &'static str, value: f64 },
    #[error("precursor_mz {0} must be positive")]
    BadPrecursor(f64),
    #[error("no training records to fit metadata statistics")]
    EmptyTraining,
    #[error("vocabulary for {0} lists {1:?} more than once")]
    DuplicateCategory(&'static str, String),
    #[error("max_precursor_bin must be at least 1")]
    ZeroPrecursorBins,
    #[error("config: {0}")]
    Config(#[from] toml::de::Error),
    #[error("stats sidecar: {0}")]
    Sidecar(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetadataRecord {
    pub ace: Option<f64>,
    pub nce: Option<f64>,
    pub instrument_type: Option<String>,
    pub precursor_type: Option<String>,
    pub ion_mode: Option<String>,
    pub precursor_mz: Option<f64>,
}

fn number(fields: &BTreeMap<String, String>, field: &'static str) -> Result<Option<f64>, MetadataError> {
    let Some(raw) = fields.get(field).map(|s| s.trim()).filter(|s| !s.is_empty()) else {
        return Ok(None);
    };
    match raw.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(Some(x)),
        _ => Err(MetadataError::BadNumber { field, value: raw.to_string() }),
    }
}

fn category(fields: &BTreeMap<String, String>, field: &str) -> Option<String> {
    fields.get(field).map(|s| s.trim()).filter(|s| !s.is_empty()).map(str::to_string)
}

impl MetadataRecord {
    /// Builds a record from named text cells (`ace`, `nce`, `instrument_type`,
    /// `precursor_type`, `ion_mode`, `precursor_mz`). Empty cells are missing.
    pub fn from_fields(fields: &BTreeMap<String, String>) -> Result<Self, MetadataError> {
        let rec = MetadataRecord {
            ace: number(fields, "ace")?,
            nce: number(fields, "nce")?,
            instrument_type: category(fields, "instrument_type"),
            precursor_type: category(fields, "precursor_type"),
            ion_mode: category(fields, "ion_mode"),
            precursor_mz: number(fields, "precursor_mz")?,
        };
        rec.validate()?;
        Ok(rec)
    }

    pub fn validate(&self) -> Result<(), MetadataError> {
        for (field, v) in [("ace", self.ace), ("nce", self.nce)] {
            if let Some(x) = v.filter(|x| *x < 0.0) {
                return Err(MetadataError::NegativeEnergy { field, value: x });
            }
        }
        if let Some(mz) = self.precursor_mz.filter(|x| *x <= 0.0) {
            return Err(MetadataError::BadPrecursor(mz));
        }
        Ok(())
    }

    fn category(&self, c: Category) -> Option<&str> {
        match c {
            Category::Instrument => self.instrument_type.as_deref(),
            Category::PrecursorType => self.precursor_type.as_deref(),
            Category::IonMode => self.ion_mode.as_deref(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Category {
    Instrument,
    PrecursorType,
    IonMode,
}

const CATEGORIES: [(Category, &str); 3] = [
    (Category::Instrument, "instrument_type"),
    (Category::PrecursorType, "precursor_type"),
    (Category::IonMode, "ion_mode"),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VocabularyConfig {
    pub vocabulary: Vec<String>,
    /// Defaults to the vocabulary size.
    #[serde(default)]
    pub expected_count: Option<usize>,
}

impl VocabularyConfig {
    fn new(words: &[&str]) -> Self {
        VocabularyConfig {
            vocabulary: words.iter().map(|s| s.to_string()).collect(),
            expected_count: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetadataConfig {
    #[serde(default = "default_max_bin")]
    pub max_precursor_bin: usize,
    pub instrument_type: VocabularyConfig,
    pub precursor_type: VocabularyConfig,
    pub ion_mode: VocabularyConfig,
}

fn default_max_bin() -> usize {
    DEFAULT_MAX_PRECURSOR_BIN
}

impl Default for MetadataConfig {
    fn default() -> Self {
        MetadataConfig {
            max_precursor_bin: DEFAULT_MAX_PRECURSOR_BIN,
            instrument_type: VocabularyConfig::new(&["Orbitrap", "QTOF"]),
            precursor_type: VocabularyConfig::new(&["[M+H]+", "[M+Na]+"]),
            ion_mode: VocabularyConfig::new(&["negative", "positive"]),
        }
    }
}

impl MetadataConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, MetadataError> {
        Ok(toml::from_str(text)?)
    }

    fn vocab(&self, c: Category) -> &VocabularyConfig {
        match c {
            Category::Instrument => &self.instrument_type,
            Category::PrecursorType => &self.precursor_type,
            Category::IonMode => &self.ion_mode,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureState {
    Fitted,
    /// Every training value equal; standardized values are 0.
    Constant,
    /// No training value present; every embedding writes (1, -1).
    Missing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousStats {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub state: FeatureState,
    pub present: usize,
}

impl ContinuousStats {
    fn fit(values: impl Iterator<Item = f64>) -> ContinuousStats {
        let v: Vec<f64> = values.collect();
        if v.is_empty() {
            return ContinuousStats {
                mean: 0.0,
                std: 0.0,
                state: FeatureState::Missing,
                present: 0,
            };
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let std = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
        ContinuousStats {
            mean,
            std,
            state: if std > 0.0 { FeatureState::Fitted } else { FeatureState::Constant },
            present: v.len(),
        }
    }

    /// (missing indicator, value) for one observation.
    pub fn encode(&self, x: Option<f64>) -> (f64, f64) {
        match (self.state, x) {
            (FeatureState::Missing, _) | (_, None) => (1.0, -1.0),
            (FeatureState::Constant, Some(_)) => (0.0, 0.0),
            (FeatureState::Fitted, Some(x)) => (0.0, (x - self.mean) / self.std),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryStats {
    pub name: String,
    /// Sorted and duplicate-free.
    pub vocabulary: Vec<String>,
    pub expected_count: usize,
    pub observed_unique: usize,
    /// Set when `observed_unique != expected_count`; the segment is then all
    /// zero for every record.
    pub zeroed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetadataStats {
    pub ace: ContinuousStats,
    pub nce: ContinuousStats,
    pub categories: Vec<CategoryStats>,
    pub max_precursor_bin: usize,
    /// Training records holding a category value outside its vocabulary.
    pub unseen_category_records: usize,
}

impl MetadataStats {
    pub fn to_json(&self) -> Result<String, MetadataError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, MetadataError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn layout(&self) -> Vec<Segment> {
        let mut segs = Vec::new();
        let mut offset = 0;
        let mut push = |name: &str, len: usize| {
            segs.push(Segment { name: name.to_string(), offset, len });
            offset += len;
        };
        push("ace_indicator", 1);
        push("ace_value", 1);
        push("nce_indicator", 1);
        push("nce_value", 1);
        for c in &self.categories {
            push(&c.name, c.vocabulary.len());
        }
        push("precursor_mz", self.max_precursor_bin);
        segs
    }

    pub fn dimension(&self) -> usize {
        self.layout().iter().map(|s| s.len).sum()
    }
}

pub fn fit_metadata_stats(
    train: &[MetadataRecord],
    config: &MetadataConfig,
) -> Result<MetadataStats, MetadataError> {
    if train.is_empty() {
        return Err(MetadataError::EmptyTraining);
    }
    if config.max_precursor_bin == 0 {
        return Err(MetadataError::ZeroPrecursorBins);
    }
    let mut categories = Vec::new();
    let mut unseen = vec![false; train.len()];
    for (c, name) in CATEGORIES {
        let cfg = config.vocab(c);
        let mut vocab = BTreeSet::new();
        for w in &cfg.vocabulary {
            if !vocab.insert(w.trim().to_string()) {
                return Err(MetadataError::DuplicateCategory(name, w.clone()));
            }
        }
        let mut observed = BTreeSet::new();
        for (i, r) in train.iter().enumerate() {
            if let Some(v) = r.category(c) {
                observed.insert(v);
                unseen[i] |= !vocab.contains(v);
            }
        }
        let expected_count = cfg.expected_count.unwrap_or(vocab.len());
        categories.push(CategoryStats {
            name: name.to_string(),
            vocabulary: vocab.into_iter().collect(),
            expected_count,
            observed_unique: observed.len(),
            zeroed: observed.len() != expected_count,
        });
    }
    Ok(MetadataStats {
        ace: ContinuousStats::fit(train.iter().filter_map(|r| r.ace)),
        nce: ContinuousStats::fit(train.iter().filter_map(|r| r.nce)),
        categories,
        max_precursor_bin: config.max_precursor_bin,
        unseen_category_records: unseen.iter().filter(|&&u| u).count(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub name: String,
    pub offset: usize,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetadataVector {
    pub values: Vec<f64>,
    pub layout: Vec<Segment>,
}

impl MetadataVector {
    pub fn segment(&self, name: &str) -> Option<&[f64]> {
        self.layout
            .iter()
            .find(|s| s.name == name)
            .map(|s| &self.values[s.offset..s.offset + s.len])
    }
}

pub fn embed_metadata(rec: &MetadataRecord, stats: &MetadataStats) -> MetadataVector {
    let layout = stats.layout();
    let mut values = Vec::with_capacity(layout.iter().map(|s| s.len).sum());
    for x in [stats.ace.encode(rec.ace), stats.nce.encode(rec.nce)] {
        values.extend([x.0, x.1]);
    }
    for ((c, _), cs) in CATEGORIES.iter().zip(&stats.categories) {
        let start = values.len();
        values.resize(start + cs.vocabulary.len(), 0.0);
        if cs.zeroed {
            continue;
        }
        if let Some(k) = rec.category(*c).and_then(|v| cs.vocabulary.iter().position(|w| w == v)) {
            values[start + k] = 1.0;
        }
    }
    let start = values.len();
    values.resize(start + stats.max_precursor_bin, 0.0);
    if let Some(mz) = rec.precursor_mz {
        let bin = (mz.floor().max(0.0) as usize).min(stats.max_precursor_bin - 1);
        values[start + bin] = 1.0;
    }
    MetadataVector { values, layout }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(ace: Option<f64>, instrument: Option<&str>) -> MetadataRecord {
        MetadataRecord {
            ace,
            instrument_type: instrument.map(str::to_string),
            ..Default::default()
        }
    }

    #[test]
    fn population_std() {
        let train: Vec<_> = [10.0, 20.0, 30.0].iter().map(|&a| rec(Some(a), None)).collect();
        let s = fit_metadata_stats(&train, &MetadataConfig::default()).unwrap();
        assert_eq!(s.ace.mean, 20.0);
        assert!((s.ace.std - (200.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((s.ace.std - 8.1650).abs() < 1e-4);
        let v = embed_metadata(&rec(Some(20.0), None), &s);
        assert_eq!(&v.values[0..2], &[0.0, 0.0]);
    }

    #[test]
    fn missing_feature_encodings() {
        let train = vec![rec(None, None), rec(None, None)];
        let s = fit_metadata_stats(&train, &MetadataConfig::default()).unwrap();
        assert_eq!(s.ace.state, FeatureState::Missing);
        let v = embed_metadata(&rec(Some(5.0), None), &s);
        assert_eq!(v.segment("ace_indicator").unwrap(), &[1.0]);
        assert_eq!(v.segment("ace_value").unwrap(), &[-1.0]);
    }

    #[test]
    fn constant_feature_standardizes_to_zero() {
        let train = vec![rec(Some(7.0), None), rec(Some(7.0), None)];
        let s = fit_metadata_stats(&train, &MetadataConfig::default()).unwrap();
        assert_eq!(s.ace.state, FeatureState::Constant);
        assert_eq!(embed_metadata(&rec(Some(9.0), None), &s).values[..2], [0.0, 0.0]);
    }

    #[test]
    fn vocabulary_comes_from_config() {
        let train = vec![rec(None, Some("Orbitrap")), rec(None, Some("Orbitrap"))];
        let s = fit_metadata_stats(&train, &MetadataConfig::default()).unwrap();
        assert_eq!(s.categories[0].vocabulary, vec!["Orbitrap", "QTOF"]);
        assert!(s.categories[0].zeroed, "1 observed vs 2 expected");
    }

    #[test]
    fn count_mismatch_zeroes_segment() {
        let train = vec![
            rec(None, Some("Orbitrap")),
            rec(None, Some("QTOF")),
            rec(None, Some("FT")),
        ];
        let s = fit_metadata_stats(&train, &MetadataConfig::default()).unwrap();
        assert_eq!(s.categories[0].observed_unique, 3);
        assert_eq!(s.unseen_category_records, 1);
        for r in &train {
            assert!(embed_metadata(r, &s).segment("instrument_type").unwrap().iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn one_hot_and_precursor_bins() {
        let train = vec![rec(None, Some("Orbitrap")), rec(None, Some("QTOF"))];
        let s = fit_metadata_stats(&train, &MetadataConfig::default()).unwrap();
        let mut r = rec(None, Some("QTOF"));
        r.precursor_mz = Some(2000.7);
        let v = embed_metadata(&r, &s);
        assert_eq!(v.segment("instrument_type").unwrap(), &[0.0, 1.0]);
        let p = v.segment("precursor_mz").unwrap();
        assert_eq!(p.len(), DEFAULT_MAX_PRECURSOR_BIN);
        assert_eq!(p[DEFAULT_MAX_PRECURSOR_BIN - 1], 1.0);
        r.precursor_mz = Some(180.9);
        assert_eq!(embed_metadata(&r, &s).segment("precursor_mz").unwrap()[180], 1.0);
        r.instrument_type = Some("Other".into());
        assert!(embed_metadata(&r, &s).segment("instrument_type").unwrap().iter().all(|&x| x == 0.0));
        assert_eq!(v.values.len(), s.dimension());
    }

    #[test]
    fn ingest_validation() {
        let mut f = BTreeMap::new();
        f.insert("ace".to_string(), "-3".to_string());
        assert!(matches!(MetadataRecord::from_fields(&f), Err(MetadataError::NegativeEnergy { .. })));
        f.insert("ace".to_string(), "abc".to_string());
        assert!(matches!(MetadataRecord::from_fields(&f), Err(MetadataError::BadNumber { .. })));
        f.insert("ace".to_string(), " 30 ".to_string());
        f.insert("ion_mode".to_string(), " positive ".to_string());
        let r = MetadataRecord::from_fields(&f).unwrap();
        assert_eq!((r.ace, r.ion_mode.as_deref()), (Some(30.0), Some("positive")));
    }

    #[test]
    fn config_and_sidecar_roundtrip() {
        let cfg = MetadataConfig::from_toml_str(
            "max_precursor_bin = 1000\n[instrument_type]\nvocabulary = [\"QTOF\", \"Orbitrap\"]\nexpected_count = 2\n[precursor_type]\nvocabulary = [\"[M+H]+\"]\n[ion_mode]\nvocabulary = [\"positive\"]\n",
        )
        .unwrap();
        assert_eq!(cfg.max_precursor_bin, 1000);
        let s = fit_metadata_stats(&[rec(Some(1.0), Some("QTOF"))], &cfg).unwrap();
        assert_eq!(MetadataStats::from_json(&s.to_json().unwrap()).unwrap(), s);
        assert!(MetadataConfig::from_toml_str("bogus = 1").is_err());
        let dup = MetadataConfig {
            ion_mode: VocabularyConfig::new(&["positive", "positive"]),
            ..MetadataConfig::default()
        };
        assert!(fit_metadata_stats(&[rec(None, None)], &dup).is_err());
    }
}
