#![allow(dead_code)]

pub mod reference;

use std::path::PathBuf;

use stakeflow::config::{PartialConfig, ProviderKind, RunConfig};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

/// Fixture corpus with precomputed 8-dimensional mention and seed vectors.
pub fn external_config(threshold: f64) -> RunConfig {
    RunConfig::resolve(PartialConfig {
        corpus: Some(fixture("corpus.jsonl")),
        mentions: Some(fixture("mentions_vectors.jsonl")),
        seeds: Some(fixture("seeds_vectors.jsonl")),
        provider: Some(ProviderKind::External),
        dim: Some(8),
        threshold: Some(threshold),
        ..Default::default()
    })
    .unwrap()
}

/// Fixture corpus through gazetteer detection, the knowledge base and the
/// hashed embedding.
pub fn hashed_config(threshold: f64) -> RunConfig {
    RunConfig::resolve(PartialConfig {
        corpus: Some(fixture("corpus.jsonl")),
        gazetteer: Some(fixture("gazetteer.jsonl")),
        kb: Some(fixture("kb.jsonl")),
        seeds: Some(fixture("seeds.jsonl")),
        threshold: Some(threshold),
        ..Default::default()
    })
    .unwrap()
}

pub fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_stakeflow"))
}
