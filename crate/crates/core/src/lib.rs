//! Evaluation substrate for binned MS/MS spectrum prediction benchmarks.
//!
//! * [`mol`]: SMILES parsing, ring perception and canonical molecule keys
//! * [`fingerprint`]: Morgan fingerprints, Tanimoto similarity, Murcko scaffolds
//! * [`spectra`]: peak lists, MGF/MSP/TSV readers, binning, spectral entropy
//! * [`metadata`]: fixed-length embedding of acquisition metadata
//! * [`splits`]: random and scaffold splits plus distribution-shift diagnostics
//! * [`metrics`]: spectrum similarity and retrieval ranking metrics
//! * [`modelcomp`]: Friedman / Wilcoxon-Holm model comparison and CD cliques

pub mod fingerprint;
pub mod mol;
pub mod numfmt;
pub mod spectra;
pub mod metadata;
pub mod splits;
pub mod metrics;
pub mod modelcomp;
