//! Sequential cross-document candidate clustering.
//!
//! Mentions are consumed strictly in corpus order. Each mention is either
//! found in the known-surface dictionary, attached to the most similar
//! existing cluster when that similarity exceeds the threshold, or placed in
//! a new cluster that inherits the label of the most similar cluster. The
//! cluster list starts from labelled seed clusters, so every label in the
//! final state comes from the seed table.
//!
//! ```text
//!  mention ──► normalized surface known? ──yes──► KnownEntity (no scoring)
//!                     │ no
//!                     ▼
//!          score against every cluster centroid (|clusters| ops)
//!                     │
//!          best > T ──┴── best <= T
//!              │               │
//!      MatchedExisting    NewSingleton (label of best)
//! ```

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::corpus::{Mention, Span};
use crate::embedding::{cosine_slices, EmbeddingError, EmbeddingProvider, EmbeddingVector};
use crate::ontology::Ontology;
use crate::text::normalize_surface;

/// Similarity threshold in [-1, 1]. A mention joins its best cluster only
/// when the score is strictly greater than the threshold.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Threshold(f64);

impl Threshold {
    /// Cosine scores never exceed 1, so this threshold sends every
    /// non-dictionary mention to a new cluster.
    pub const ALWAYS_SINGLETON: Threshold = Threshold(1.0);
    /// Every nonzero mention vector scores above -1 against some cluster
    /// unless it is exactly opposite, so this threshold never creates clusters
    /// in practice.
    pub const NEVER_SINGLETON: Threshold = Threshold(-1.0);

    pub fn new(value: f64) -> Result<Self, ClusterError> {
        if (-1.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(ClusterError::ThresholdOutOfRange(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClusterError {
    #[error("threshold {0} is outside [-1, 1]")]
    ThresholdOutOfRange(f64),
    #[error("seed table is empty")]
    EmptySeeds,
    #[error("seed cluster {0} has no members")]
    EmptySeedCluster(u32),
    #[error("seed cluster {cluster_id} has label {label:?}, which is not an ontology type")]
    InvalidLabel { cluster_id: u32, label: String },
    #[error("seed cluster ids must be strictly increasing; {0} is out of order")]
    SeedIdOrder(u32),
    #[error("seed surface {surface:?} appears in seed clusters {first} and {second}")]
    DuplicateSeedSurface { surface: String, first: u32, second: u32 },
    #[error("seed cluster {0} has a member whose surface normalizes to an empty key")]
    EmptySeedSurface(u32),
    #[error("cluster {0} has no embeddable content")]
    NoEmbeddableContent(u32),
    #[error("seed cluster {cluster_id}: {source}")]
    SeedVector { cluster_id: u32, source: EmbeddingError },
    #[error("mention {mention_id} in {doc_id:?}: {source}")]
    MentionVector {
        doc_id: String,
        mention_id: u32,
        source: EmbeddingError,
    },
    #[error("document {doc_id:?}: {mentions} mentions but {vectors} vectors")]
    VectorCount {
        doc_id: String,
        mentions: usize,
        vectors: usize,
    },
    #[error("cluster state has no clusters")]
    NoClusters,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedMember {
    pub surface: String,
    pub vector: Option<EmbeddingVector>,
}

impl SeedMember {
    pub fn new(surface: impl Into<String>) -> Self {
        Self {
            surface: surface.into(),
            vector: None,
        }
    }

    pub fn with_vector(surface: impl Into<String>, vector: EmbeddingVector) -> Self {
        Self {
            surface: surface.into(),
            vector: Some(vector),
        }
    }
}

/// One labelled group of example surfaces.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedCluster {
    pub cluster_id: u32,
    pub label: String,
    pub members: Vec<SeedMember>,
}

/// `(head, doc_id)` pair; seed members have no document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterMember {
    pub head: String,
    pub doc_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    cluster_id: u32,
    label: String,
    members: Vec<ClusterMember>,
    // Seed surfaces and supplied vectors, consumed on first centroid request.
    unresolved_seeds: Vec<SeedMember>,
    vector_sum: Vec<f64>,
    vector_count: usize,
    centroid: Option<EmbeddingVector>,
}

impl Cluster {
    fn seeded(seed: &SeedCluster, dim: usize) -> Self {
        Self {
            cluster_id: seed.cluster_id,
            label: seed.label.clone(),
            members: seed
                .members
                .iter()
                .map(|m| ClusterMember {
                    head: m.surface.clone(),
                    doc_id: None,
                })
                .collect(),
            unresolved_seeds: seed.members.clone(),
            vector_sum: alloc::vec![0.0; dim],
            vector_count: 0,
            centroid: None,
        }
    }

    pub fn cluster_id(&self) -> u32 {
        self.cluster_id
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn members(&self) -> &[ClusterMember] {
        &self.members
    }

    /// Number of vectors averaged into the centroid so far.
    pub fn vector_count(&self) -> usize {
        self.vector_count
    }

    fn resolve_seeds(&mut self, provider: &EmbeddingProvider) -> Result<(), ClusterError> {
        if self.unresolved_seeds.is_empty() {
            return Ok(());
        }
        for seed in core::mem::take(&mut self.unresolved_seeds) {
            let vector = match seed.vector {
                Some(v) => Some(v),
                None => provider.embed_text(&seed.surface),
            };
            if let Some(v) = vector {
                self.accumulate(&v);
            }
        }
        if self.vector_count == 0 {
            return Err(ClusterError::NoEmbeddableContent(self.cluster_id));
        }
        Ok(())
    }

    fn accumulate(&mut self, v: &EmbeddingVector) {
        self.vector_sum.iter_mut().zip(v.as_slice()).for_each(|(s, x)| *s += x);
        self.vector_count += 1;
        self.centroid = None;
    }

    /// Elementwise mean of member vectors. Seed surfaces without supplied
    /// vectors are embedded with `provider` on first call.
    pub fn centroid(&mut self, provider: &EmbeddingProvider) -> Result<&EmbeddingVector, ClusterError> {
        self.resolve_seeds(provider)?;
        if self.vector_count == 0 {
            return Err(ClusterError::NoEmbeddableContent(self.cluster_id));
        }
        let n = self.vector_count as f64;
        let sum = &self.vector_sum;
        Ok(self
            .centroid
            .get_or_insert_with(|| EmbeddingVector::new(sum.iter().map(|s| s / n).collect()).expect("finite mean")))
    }

    fn push(
        &mut self,
        member: ClusterMember,
        vector: &EmbeddingVector,
        provider: &EmbeddingProvider,
    ) -> Result<(), ClusterError> {
        self.resolve_seeds(provider)?;
        self.members.push(member);
        self.accumulate(vector);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DecisionKind {
    KnownEntity,
    MatchedExisting,
    NewSingleton,
}

impl DecisionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DecisionKind::KnownEntity => "KnownEntity",
            DecisionKind::MatchedExisting => "MatchedExisting",
            DecisionKind::NewSingleton => "NewSingleton",
        }
    }
}

impl fmt::Display for DecisionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for DecisionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Self::KnownEntity, Self::MatchedExisting, Self::NewSingleton]
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| alloc::format!("unknown decision kind {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentDecision {
    pub kind: DecisionKind,
    pub cluster_id: u32,
    pub label: String,
    /// Best cosine score; absent for dictionary hits.
    pub score: Option<f64>,
    /// For new clusters, the cluster whose label was inherited.
    pub nearest_cluster_id: Option<u32>,
}

/// One (entity phrase, stakeholder type) pair with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct StakeholderRow {
    pub doc_id: String,
    pub mention_id: u32,
    pub span: Span,
    pub surface: String,
    pub label: String,
    pub decision: DecisionKind,
    pub cluster_id: u32,
    pub score: Option<f64>,
    pub nearest_cluster_id: Option<u32>,
}

/// Per-document stakeholder pairs, in corpus and mention order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StakeholderTable {
    rows: Vec<StakeholderRow>,
}

impl StakeholderTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn extend(&mut self, fragment: Vec<StakeholderRow>) {
        self.rows.extend(fragment);
    }

    pub fn rows(&self) -> &[StakeholderRow] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<StakeholderRow> {
        self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows belonging to `doc_id`.
    pub fn fragment<'a>(&'a self, doc_id: &'a str) -> impl Iterator<Item = &'a StakeholderRow> + 'a {
        self.rows.iter().filter(move |r| r.doc_id == doc_id)
    }
}

impl From<Vec<StakeholderRow>> for StakeholderTable {
    fn from(rows: Vec<StakeholderRow>) -> Self {
        Self { rows }
    }
}

/// Evolving cluster list with its labels and the known-surface dictionary.
///
/// Single writer: assignments must be applied in corpus order.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterState {
    clusters: Vec<Cluster>,
    known_lookup: BTreeMap<String, usize>,
    threshold: Threshold,
    provider: EmbeddingProvider,
    similarity_op_count: u64,
    mentions_processed: u64,
    next_id: u32,
}

impl ClusterState {
    /// Builds the initial state from the seed table.
    pub fn new(
        seeds: &[SeedCluster],
        threshold: Threshold,
        ontology: &Ontology,
        provider: EmbeddingProvider,
    ) -> Result<Self, ClusterError> {
        if seeds.is_empty() {
            return Err(ClusterError::EmptySeeds);
        }
        let dim = provider.dim();
        let mut clusters = Vec::with_capacity(seeds.len());
        let mut known_lookup: BTreeMap<String, usize> = BTreeMap::new();
        for (index, seed) in seeds.iter().enumerate() {
            if let Some(prev) = clusters.last().map(Cluster::cluster_id) {
                if seed.cluster_id <= prev {
                    return Err(ClusterError::SeedIdOrder(seed.cluster_id));
                }
            }
            if seed.members.is_empty() {
                return Err(ClusterError::EmptySeedCluster(seed.cluster_id));
            }
            if !ontology.contains(&seed.label) {
                return Err(ClusterError::InvalidLabel {
                    cluster_id: seed.cluster_id,
                    label: seed.label.clone(),
                });
            }
            for member in &seed.members {
                if let Some(v) = &member.vector {
                    v.expect_dim(dim).map_err(|source| ClusterError::SeedVector {
                        cluster_id: seed.cluster_id,
                        source,
                    })?;
                }
                let key = normalize_surface(&member.surface);
                if key.is_empty() {
                    return Err(ClusterError::EmptySeedSurface(seed.cluster_id));
                }
                match known_lookup.get(&key) {
                    Some(&other) if other != index => {
                        return Err(ClusterError::DuplicateSeedSurface {
                            surface: key,
                            first: seeds[other].cluster_id,
                            second: seed.cluster_id,
                        })
                    }
                    _ => {
                        known_lookup.insert(key, index);
                    }
                }
            }
            let has_content = seed
                .members
                .iter()
                .any(|m| m.vector.is_some() || provider.encodes_text());
            if !has_content {
                return Err(ClusterError::NoEmbeddableContent(seed.cluster_id));
            }
            clusters.push(Cluster::seeded(seed, dim));
        }
        let next_id = clusters.last().map_or(0, |c| c.cluster_id + 1);
        Ok(Self {
            clusters,
            known_lookup,
            threshold,
            provider,
            similarity_op_count: 0,
            mentions_processed: 0,
            next_id,
        })
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    /// Label list parallel to [`clusters`](Self::clusters).
    pub fn labels(&self) -> Vec<&str> {
        self.clusters.iter().map(Cluster::label).collect()
    }

    pub fn threshold(&self) -> Threshold {
        self.threshold
    }

    pub fn provider(&self) -> &EmbeddingProvider {
        &self.provider
    }

    /// Total cosine scores computed so far.
    pub fn similarity_op_count(&self) -> u64 {
        self.similarity_op_count
    }

    pub fn mentions_processed(&self) -> u64 {
        self.mentions_processed
    }

    /// Cluster id registered for a normalized surface.
    pub fn lookup(&self, normalized: &str) -> Option<u32> {
        self.known_lookup.get(normalized).map(|&i| self.clusters[i].cluster_id)
    }

    pub fn known_surfaces(&self) -> impl Iterator<Item = (&str, u32)> {
        self.known_lookup
            .iter()
            .map(|(k, &i)| (k.as_str(), self.clusters[i].cluster_id))
    }

    /// Cluster by id.
    pub fn cluster(&self, cluster_id: u32) -> Option<&Cluster> {
        self.clusters
            .binary_search_by_key(&cluster_id, Cluster::cluster_id)
            .ok()
            .map(|i| &self.clusters[i])
    }

    /// Centroid of a cluster, embedding seed surfaces if needed.
    pub fn cluster_vector(&mut self, cluster_id: u32) -> Option<Result<EmbeddingVector, ClusterError>> {
        let i = self
            .clusters
            .binary_search_by_key(&cluster_id, Cluster::cluster_id)
            .ok()?;
        let provider = self.provider;
        Some(self.clusters[i].centroid(&provider).cloned())
    }

    /// Assigns one mention with representation `vector`.
    pub fn assign(&mut self, m: &Mention, vector: &EmbeddingVector) -> Result<AssignmentDecision, ClusterError> {
        let key = normalize_surface(&m.surface);
        if let Some(&i) = self.known_lookup.get(&key) {
            self.mentions_processed += 1;
            let c = &self.clusters[i];
            return Ok(AssignmentDecision {
                kind: DecisionKind::KnownEntity,
                cluster_id: c.cluster_id,
                label: c.label.clone(),
                score: None,
                nearest_cluster_id: None,
            });
        }

        vector
            .expect_dim(self.provider.dim())
            .map_err(|source| ClusterError::MentionVector {
                doc_id: m.doc_id.clone(),
                mention_id: m.mention_id,
                source,
            })?;
        if self.clusters.is_empty() {
            return Err(ClusterError::NoClusters);
        }

        let provider = self.provider;
        let mut best: Option<(usize, f64)> = None;
        for (i, cluster) in self.clusters.iter_mut().enumerate() {
            let score = cosine_slices(vector.as_slice(), cluster.centroid(&provider)?.as_slice());
            self.similarity_op_count += 1;
            // strict comparison: the earliest cluster wins ties
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((i, score));
            }
        }
        let (best_index, best_score) = best.expect("at least one cluster");
        self.mentions_processed += 1;

        let member = ClusterMember {
            head: m.head.clone(),
            doc_id: Some(m.doc_id.clone()),
        };
        if best_score > self.threshold.0 {
            let cluster = &mut self.clusters[best_index];
            cluster.push(member, vector, &provider)?;
            self.known_lookup.insert(key, best_index);
            Ok(AssignmentDecision {
                kind: DecisionKind::MatchedExisting,
                cluster_id: cluster.cluster_id,
                label: cluster.label.clone(),
                score: Some(best_score),
                nearest_cluster_id: None,
            })
        } else {
            let nearest = &self.clusters[best_index];
            let label = nearest.label.clone();
            let nearest_id = nearest.cluster_id;
            let cluster_id = self.next_id;
            self.next_id += 1;
            let mut cluster = Cluster {
                cluster_id,
                label: label.clone(),
                members: Vec::new(),
                unresolved_seeds: Vec::new(),
                vector_sum: alloc::vec![0.0; provider.dim()],
                vector_count: 0,
                centroid: None,
            };
            cluster.push(member, vector, &provider)?;
            self.clusters.push(cluster);
            self.known_lookup.insert(key, self.clusters.len() - 1);
            Ok(AssignmentDecision {
                kind: DecisionKind::NewSingleton,
                cluster_id,
                label,
                score: Some(best_score),
                nearest_cluster_id: Some(nearest_id),
            })
        }
    }

    /// Assigns a document's mentions in order and returns its stakeholder
    /// pairs. `vectors` is parallel to `mentions`.
    pub fn process_document(
        &mut self,
        doc_id: &str,
        mentions: &[Mention],
        vectors: &[EmbeddingVector],
    ) -> Result<Vec<StakeholderRow>, ClusterError> {
        if mentions.len() != vectors.len() {
            return Err(ClusterError::VectorCount {
                doc_id: doc_id.into(),
                mentions: mentions.len(),
                vectors: vectors.len(),
            });
        }
        mentions
            .iter()
            .zip(vectors)
            .map(|(m, v)| {
                let d = self.assign(m, v)?;
                Ok(StakeholderRow {
                    doc_id: doc_id.into(),
                    mention_id: m.mention_id,
                    span: m.span,
                    surface: m.surface.clone(),
                    label: d.label,
                    decision: d.kind,
                    cluster_id: d.cluster_id,
                    score: d.score,
                    nearest_cluster_id: d.nearest_cluster_id,
                })
            })
            .collect()
    }

    /// Processes documents strictly in the given order.
    pub fn run<'a, I>(&mut self, corpus: I) -> Result<StakeholderTable, ClusterError>
    where
        I: IntoIterator<Item = (&'a str, &'a [Mention], &'a [EmbeddingVector])>,
    {
        let mut table = StakeholderTable::new();
        for (doc_id, mentions, vectors) in corpus {
            table.extend(self.process_document(doc_id, mentions, vectors)?);
        }
        Ok(table)
    }
}
