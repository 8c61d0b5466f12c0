//! Synthetic mention streams with planted cluster structure.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stakeflow_core::clustering::{SeedCluster, SeedMember};
use stakeflow_core::{CoarseType, Document, EmbeddingVector, Mention, Ontology, Span, StakeholderType};

use crate::error::{Error, Result};

pub const SYNTHETIC_TOPIC: &str = "Synthetic";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedConfig {
    pub mentions: usize,
    pub clusters: usize,
    pub dim: usize,
    /// Half-width of the uniform noise added to every component.
    pub noise: f64,
    pub mentions_per_doc: usize,
    pub rng_seed: u64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig {
            mentions: 1000,
            clusters: 20,
            dim: 32,
            noise: 0.05,
            mentions_per_doc: 10,
            rng_seed: 7,
        }
    }
}

/// A stream whose mentions are noisy copies of `clusters` orthogonal centers.
///
/// Each center is a standard basis vector and is also the single seed of its
/// cluster. Every mention has a distinct surface, so the dictionary never
/// short-circuits the similarity path.
#[derive(Debug, Clone)]
pub struct PlantedStream {
    pub ontology: Ontology,
    pub seeds: Vec<SeedCluster>,
    pub documents: Vec<Document>,
    /// Parallel to `documents`; every mention carries its vector.
    pub mentions: Vec<Vec<Mention>>,
    /// Planted cluster of each mention, in stream order.
    pub truth: Vec<usize>,
}

impl PlantedStream {
    pub fn vectors(&self) -> Vec<Vec<EmbeddingVector>> {
        self.mentions
            .iter()
            .map(|ms| {
                ms.iter()
                    .map(|m| m.vector.clone().expect("planted mentions carry vectors"))
                    .collect()
            })
            .collect()
    }

    pub fn mention_count(&self) -> usize {
        self.truth.len()
    }
}

pub fn label_for(cluster: usize) -> String {
    format!("Planted{cluster:02}")
}

pub fn planted_stream(cfg: &PlantedConfig) -> Result<PlantedStream> {
    if cfg.clusters == 0 || cfg.dim < cfg.clusters {
        return Err(Error::Usage(format!(
            "synthetic stream needs 1 <= clusters <= dim (got {} clusters, dim {})",
            cfg.clusters, cfg.dim
        )));
    }
    if cfg.mentions_per_doc == 0 || !cfg.noise.is_finite() || cfg.noise < 0.0 {
        return Err(Error::Usage(
            "synthetic stream needs mentions_per_doc > 0 and finite noise >= 0".into(),
        ));
    }

    let labels: Vec<String> = (0..cfg.clusters).map(label_for).collect();
    let types = labels
        .iter()
        .map(|l| StakeholderType::new(l.clone(), l.clone(), ""))
        .collect();
    let topics = BTreeMap::from([(
        SYNTHETIC_TOPIC.to_string(),
        labels.iter().cloned().collect::<BTreeSet<_>>(),
    )]);
    let ontology = Ontology::new(types, Vec::new(), topics)?;

    let center = |c: usize| {
        let mut v = vec![0.0; cfg.dim];
        v[c] = 1.0;
        v
    };
    let seeds = (0..cfg.clusters)
        .map(|c| SeedCluster {
            cluster_id: c as u32,
            label: labels[c].clone(),
            members: vec![SeedMember::with_vector(
                format!("Seed{c:02}"),
                EmbeddingVector::new(center(c)).expect("finite"),
            )],
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut documents = Vec::new();
    let mut mentions = Vec::new();
    let mut truth = Vec::with_capacity(cfg.mentions);
    for (d, chunk_start) in (0..cfg.mentions).step_by(cfg.mentions_per_doc).enumerate() {
        let n = cfg.mentions_per_doc.min(cfg.mentions - chunk_start);
        let doc_id = format!("syn-{d:04}");
        let mut text = String::new();
        let mut doc_mentions = Vec::with_capacity(n);
        for k in 0..n {
            let i = chunk_start + k;
            let c = rng.gen_range(0..cfg.clusters);
            let mut v = center(c);
            for x in &mut v {
                *x += rng.gen_range(-cfg.noise..=cfg.noise);
            }
            let surface = format!("Entity{i:05}");
            if !text.is_empty() {
                text.push_str(", ");
            }
            let start = text.len();
            text.push_str(&surface);
            doc_mentions.push(Mention {
                doc_id: doc_id.clone(),
                mention_id: k as u32,
                span: Span::new(start, text.len()),
                head: surface.clone(),
                surface: surface.clone(),
                coarse_type: CoarseType::Person,
                context_window: surface,
                kb_key: None,
                vector: Some(EmbeddingVector::new(v).expect("finite")),
            });
            truth.push(c);
        }
        text.push('.');
        documents.push(Document {
            doc_id,
            media_house: format!("House{}", d % 3),
            topic: SYNTHETIC_TOPIC.into(),
            publish_date: "2020-01-01".into(),
            text,
        });
        mentions.push(doc_mentions);
    }

    Ok(PlantedStream {
        ontology,
        seeds,
        documents,
        mentions,
        truth,
    })
}
