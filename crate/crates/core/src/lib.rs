//! Stakeholder extraction engine for topic-tagged news streams.
//!
//! The crate is `no_std` with `alloc` and contains only the algorithmic
//! parts of the pipeline:
//!
//! - [`ontology`]: stakeholder type graph and per-topic stakeholder sets.
//! - [`corpus`]: documents, mentions, surface normalization and gazetteer
//!   mention detection.
//! - [`embedding`]: hashed text embeddings, knowledge-base features,
//!   aggregation and cosine similarity.
//! - [`clustering`]: sequential cross-document clustering against labelled
//!   seed clusters, producing the per-document stakeholder table.
//! - [`coverage`]: visibility counts per (topic, media house, stakeholder type).
//! - [`evaluation`]: precision/recall/F scoring, the complexity report and the
//!   all-pairs baseline.
//!
//! File formats, IO and the command line live in the `stakeflow` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod clustering;
pub mod corpus;
pub mod coverage;
pub mod embedding;
pub mod evaluation;
pub mod ontology;
pub mod text;

pub use clustering::{
    AssignmentDecision, Cluster, ClusterError, ClusterState, DecisionKind, SeedCluster, SeedMember, StakeholderRow,
    StakeholderTable, Threshold,
};
pub use corpus::{CoarseType, CorpusError, Document, Gazetteer, GazetteerEntry, Mention, Span};
pub use coverage::{CoverageMatrix, CoverageShare, EmptyCoverage};
pub use embedding::{EmbeddingError, EmbeddingProvider, EmbeddingVector, KnowledgeBase, Triplet};
pub use evaluation::{ComplexityReport, GoldAnnotation, MetricReport, Prediction};
pub use ontology::{Ontology, OntologyEdge, OntologyError, Relation, StakeholderType};
pub use text::normalize_surface;
