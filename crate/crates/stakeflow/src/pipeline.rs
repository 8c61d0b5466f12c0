//! The extract, cluster, coverage, eval and bench stages.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use stakeflow_core::clustering::{ClusterState, SeedCluster, StakeholderRow, StakeholderTable, Threshold};
use stakeflow_core::evaluation::{
    complexity_report, pair_agreement, pairwise_baseline, score, BaselineItem, ComplexityReport, Prediction,
    TypeMetrics,
};
use stakeflow_core::{
    normalize_surface, CoverageMatrix, Document, EmbeddingProvider, EmbeddingVector, KnowledgeBase, Mention,
    MetricReport, Ontology,
};

use crate::config::{PartialConfig, ProviderKind, RunConfig};
use crate::error::{Error, Result};
use crate::ontology_file::{default_ontology, load_ontology};
use crate::records::{self, cluster_records, Corpus, MentionRecord, Skipped, StakeholderRecord};
use crate::synthetic::{planted_stream, PlantedConfig};

pub const MENTIONS_FILE: &str = "mentions.jsonl";
pub const STAKEHOLDERS_FILE: &str = "stakeholders.jsonl";
pub const CLUSTERS_FILE: &str = "clusters.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const METRICS_JSON_FILE: &str = "metrics.json";
pub const METRICS_CSV_FILE: &str = "metrics.csv";
pub const COMPLEXITY_FILE: &str = "complexity.json";

pub fn ontology(cfg: &RunConfig) -> Result<Ontology> {
    match cfg.optional(&cfg.ontology, "ontology")? {
        Some(path) => load_ontology(path),
        None => Ok(default_ontology()),
    }
}

/// Fails on the first document whose topic is not configured.
pub fn check_topics(ontology: &Ontology, docs: &[Document]) -> Result<()> {
    match docs.iter().find(|d| !ontology.has_topic(&d.topic)) {
        Some(d) => Err(Error::UnknownTopic {
            doc_id: d.doc_id.clone(),
            topic: d.topic.clone(),
        }),
        None => Ok(()),
    }
}

fn corpus(cfg: &RunConfig, command: &str, ontology: &Ontology) -> Result<Corpus> {
    let path = cfg.require(&cfg.corpus, "corpus", command)?;
    let corpus = records::load_corpus(path, cfg.lenient)?;
    check_topics(ontology, &corpus.documents)?;
    Ok(corpus)
}

/// Documents with their mentions, parallel vectors.
#[derive(Debug, Clone)]
pub struct Extraction {
    pub documents: Vec<Document>,
    pub mentions: Vec<Vec<Mention>>,
    pub skipped: Vec<Skipped>,
}

impl Extraction {
    pub fn mention_count(&self) -> usize {
        self.mentions.iter().map(Vec::len).sum()
    }
}

/// Parses the corpus and runs gazetteer detection.
pub fn extract(cfg: &RunConfig) -> Result<Extraction> {
    let gazetteer_path = cfg.require(&cfg.gazetteer, "gazetteer", "extract")?;
    let ontology = ontology(cfg)?;
    let corpus = corpus(cfg, "extract", &ontology)?;
    let gazetteer = records::load_gazetteer(gazetteer_path)?;
    let mentions = corpus
        .documents
        .par_iter()
        .map(|d| gazetteer.detect_mentions(d, cfg.window))
        .collect();
    Ok(Extraction {
        documents: corpus.documents,
        mentions,
        skipped: corpus.skipped,
    })
}

pub fn write_mentions(path: &Path, mentions: &[Vec<Mention>]) -> Result<()> {
    let records: Vec<MentionRecord> = mentions.iter().flatten().map(MentionRecord::from).collect();
    records::write_jsonl(path, &records)
}

/// Mentions from `--mentions` if given, otherwise from gazetteer detection.
fn cluster_inputs(cfg: &RunConfig, ontology: &Ontology) -> Result<Extraction> {
    if let Some(path) = cfg.optional(&cfg.mentions, "mentions")? {
        let corpus = corpus(cfg, "cluster", ontology)?;
        let mentions = records::load_mentions(path, &corpus.documents, cfg.window)?;
        return Ok(Extraction {
            documents: corpus.documents,
            mentions,
            skipped: corpus.skipped,
        });
    }
    if cfg.gazetteer.is_none() {
        return Err(Error::Usage("cluster requires --mentions or --gazetteer".into()));
    }
    extract(cfg)
}

/// Computes every mention's representation, in parallel, keeping order.
pub fn embed_all(
    provider: &EmbeddingProvider,
    kb: Option<&KnowledgeBase>,
    mentions: &[Vec<Mention>],
) -> Result<Vec<Vec<EmbeddingVector>>> {
    let vectors = mentions
        .par_iter()
        .map(|ms| ms.par_iter().map(|m| provider.embed_mention(m, kb)).collect())
        .collect::<std::result::Result<Vec<Vec<_>>, _>>()?;
    Ok(vectors)
}

/// Runs the clusterer over documents strictly in order.
pub fn run_clustering(
    seeds: &[SeedCluster],
    threshold: Threshold,
    ontology: &Ontology,
    provider: EmbeddingProvider,
    documents: &[Document],
    mentions: &[Vec<Mention>],
    vectors: &[Vec<EmbeddingVector>],
) -> Result<(ClusterState, StakeholderTable)> {
    let mut state = ClusterState::new(seeds, threshold, ontology, provider)?;
    let stream = documents
        .iter()
        .zip(mentions)
        .zip(vectors)
        .map(|((d, ms), vs)| (d.doc_id.as_str(), ms.as_slice(), vs.as_slice()));
    let table = state.run(stream)?;
    Ok((state, table))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub threshold: f64,
    pub dimension: usize,
    pub seed: u64,
    pub provider: String,
    pub document_count: usize,
    pub mention_count: usize,
    pub cluster_count: usize,
    pub similarity_op_count: u64,
    pub config: PartialConfig,
}

#[derive(Debug, Clone)]
pub struct ClusterRun {
    pub extraction: Extraction,
    pub vectors: Vec<Vec<EmbeddingVector>>,
    pub state: ClusterState,
    pub table: StakeholderTable,
    pub manifest: Manifest,
}

pub fn cluster(cfg: &RunConfig) -> Result<ClusterRun> {
    let seeds_path = cfg.require(&cfg.seeds, "seeds", "cluster")?;
    let ontology = ontology(cfg)?;
    let seeds = records::load_seeds(seeds_path)?;
    let kb = cfg.optional(&cfg.kb, "kb")?.map(records::load_kb).transpose()?;
    let extraction = cluster_inputs(cfg, &ontology)?;

    let provider = cfg.provider();
    let vectors = embed_all(&provider, kb.as_ref(), &extraction.mentions)?;
    let (state, table) = run_clustering(
        &seeds,
        cfg.threshold,
        &ontology,
        provider,
        &extraction.documents,
        &extraction.mentions,
        &vectors,
    )?;
    let manifest = Manifest {
        threshold: cfg.threshold.value(),
        dimension: cfg.dim,
        seed: cfg.hash_seed,
        provider: cfg.provider.as_str().into(),
        document_count: extraction.documents.len(),
        mention_count: extraction.mention_count(),
        cluster_count: state.clusters().len(),
        similarity_op_count: state.similarity_op_count(),
        config: cfg.echo(),
    };
    Ok(ClusterRun {
        extraction,
        vectors,
        state,
        table,
        manifest,
    })
}

pub fn stakeholder_records(table: &StakeholderTable) -> Vec<StakeholderRecord> {
    table.rows().iter().map(StakeholderRecord::from).collect()
}

/// Writes the stakeholder table, the cluster dump and the manifest into `dir`.
pub fn write_cluster_outputs(dir: &Path, run: &ClusterRun) -> Result<Vec<PathBuf>> {
    let of = dir.join(STAKEHOLDERS_FILE);
    records::write_jsonl(&of, &stakeholder_records(&run.table))?;
    let clusters = dir.join(CLUSTERS_FILE);
    records::write_jsonl(&clusters, &cluster_records(&run.state))?;
    let manifest = dir.join(MANIFEST_FILE);
    records::write_json(&manifest, &run.manifest)?;
    Ok(vec![of, clusters, manifest])
}

/// Counts stakeholder rows per (topic, media house, type), one shard per worker.
pub fn accumulate_coverage(documents: &[Document], rows: &[Vec<StakeholderRow>]) -> CoverageMatrix {
    documents
        .par_iter()
        .zip(rows)
        .fold(CoverageMatrix::new, |mut m, (d, frag)| {
            m.accumulate_document(d, frag);
            m
        })
        .reduce(CoverageMatrix::new, |mut a, b| {
            a.merge(&b);
            a
        })
}

#[derive(Debug, Clone)]
pub struct CoverageRun {
    pub ontology: Ontology,
    pub matrix: CoverageMatrix,
}

pub fn coverage(cfg: &RunConfig) -> Result<CoverageRun> {
    let ontology = ontology(cfg)?;
    let corpus = corpus(cfg, "coverage", &ontology)?;
    let of = cfg.stakeholders_path();
    if !of.exists() {
        return Err(Error::Usage(format!(
            "coverage needs a stakeholder table: {} does not exist (run cluster or pass --stakeholders)",
            of.display()
        )));
    }
    let rows = records::load_stakeholders(&of)?;
    let grouped = records::group_rows(&corpus.documents, rows, &of)?;
    let matrix = accumulate_coverage(&corpus.documents, &grouped);
    Ok(CoverageRun { ontology, matrix })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeMetricsRecord {
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
    pub true_positives: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
}

impl From<&TypeMetrics> for TypeMetricsRecord {
    fn from(m: &TypeMetrics) -> Self {
        TypeMetricsRecord {
            precision: m.precision,
            recall: m.recall,
            f_score: m.f_score,
            true_positives: m.true_positives,
            false_positives: m.false_positives,
            false_negatives: m.false_negatives,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReportRecord {
    pub per_type: BTreeMap<String, TypeMetricsRecord>,
    pub macro_f: f64,
    pub support: BTreeMap<String, u64>,
}

impl From<&MetricReport> for MetricReportRecord {
    fn from(r: &MetricReport) -> Self {
        MetricReportRecord {
            per_type: r.per_type.iter().map(|(k, v)| (k.clone(), v.into())).collect(),
            macro_f: r.macro_f,
            support: r.support.clone(),
        }
    }
}

pub fn evaluate(cfg: &RunConfig) -> Result<MetricReport> {
    let gold_path = cfg.require(&cfg.gold, "gold", "eval")?;
    let ontology = ontology(cfg)?;
    let of = cfg.stakeholders_path();
    if !of.exists() {
        return Err(Error::Usage(format!(
            "eval needs a stakeholder table: {} does not exist (run cluster or pass --stakeholders)",
            of.display()
        )));
    }
    let gold = records::load_gold(gold_path)?;
    if let Some(g) = gold.iter().find(|g| !ontology.contains(&g.label)) {
        return Err(Error::format(
            gold_path,
            format!("gold label {:?} for {:?} is not an ontology type", g.label, g.doc_id),
        ));
    }
    let predictions: Vec<Prediction> = records::load_stakeholders(&of)?.iter().map(Prediction::from).collect();
    Ok(score(&predictions, &gold)?)
}

pub fn write_metrics(dir: &Path, report: &MetricReport) -> Result<Vec<PathBuf>> {
    let json = dir.join(METRICS_JSON_FILE);
    records::write_json(&json, &MetricReportRecord::from(report))?;
    let csv = dir.join(METRICS_CSV_FILE);
    std::fs::write(&csv, report.render_table()).map_err(|e| Error::io(&csv, e))?;
    Ok(vec![json, csv])
}

/// Options for `bench`.
#[derive(Debug, Clone, Default)]
pub struct BenchOptions {
    /// Generate a planted stream instead of reading inputs.
    pub synthetic: Option<PlantedConfig>,
    /// Also run the all-pairs baseline.
    pub pairwise: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineSummary {
    pub op_count: u64,
    pub components: usize,
    pub unlabeled_components: usize,
    /// Rand index between the baseline's and the clusterer's partitions of
    /// the mentions.
    pub agreement_with_sequential: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub source: String,
    pub threshold: f64,
    pub similarity_op_count: u64,
    pub mention_count: u64,
    pub cluster_count: u64,
    pub bound: u64,
    pub within_bound: bool,
    pub pairwise_ops: u64,
    pub speedup: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planted_clusters: Option<usize>,
    /// Rand index between the clusterer's partition and the planted one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agreement_with_planted: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<BaselineSummary>,
}

/// Cluster id of every processed mention, in stream order.
pub fn sequential_partition(table: &StakeholderTable) -> Vec<usize> {
    table.rows().iter().map(|r| r.cluster_id as usize).collect()
}

fn baseline(
    seeds: &[SeedCluster],
    threshold: Threshold,
    mentions: &[Vec<Mention>],
    vectors: &[Vec<EmbeddingVector>],
    sequential: &[usize],
) -> Result<BaselineSummary> {
    let seed_labels: BTreeMap<String, &str> = seeds
        .iter()
        .flat_map(|s| {
            s.members
                .iter()
                .map(move |m| (normalize_surface(&m.surface), s.label.as_str()))
        })
        .collect();
    let items: Vec<BaselineItem> = mentions
        .iter()
        .flatten()
        .zip(vectors.iter().flatten())
        .map(|(m, v)| BaselineItem {
            vector: v.clone(),
            seed_label: seed_labels.get(&normalize_surface(&m.surface)).map(|l| l.to_string()),
        })
        .collect();
    let result = pairwise_baseline(&items, threshold.value());
    Ok(BaselineSummary {
        op_count: result.op_count,
        components: result.components.len(),
        unlabeled_components: result.unlabeled_components(),
        agreement_with_sequential: pair_agreement(&result.assignment, sequential)?,
    })
}

pub fn bench(cfg: &RunConfig, opts: &BenchOptions) -> Result<BenchReport> {
    let (source, seeds, mentions, state, table, vectors, planted) = match &opts.synthetic {
        Some(p) => {
            let stream = planted_stream(p)?;
            let provider = EmbeddingProvider::external(p.dim)?;
            let vectors = stream.vectors();
            let (state, table) = run_clustering(
                &stream.seeds,
                cfg.threshold,
                &stream.ontology,
                provider,
                &stream.documents,
                &stream.mentions,
                &vectors,
            )?;
            let source = format!(
                "synthetic(mentions={}, clusters={}, dim={}, noise={}, rng_seed={})",
                p.mentions, p.clusters, p.dim, p.noise, p.rng_seed
            );
            (
                source,
                stream.seeds,
                stream.mentions,
                state,
                table,
                vectors,
                Some((p.clusters, stream.truth)),
            )
        }
        None => {
            let seeds = records::load_seeds(cfg.require(&cfg.seeds, "seeds", "bench")?)?;
            let run = cluster(cfg)?;
            let source = match cfg.provider {
                ProviderKind::Hashed => "corpus(hashed)".to_string(),
                ProviderKind::External => "corpus(external)".to_string(),
            };
            (
                source,
                seeds,
                run.extraction.mentions,
                run.state,
                run.table,
                run.vectors,
                None,
            )
        }
    };

    let m = table.len() as u64;
    let c = state.clusters().len() as u64;
    let ComplexityReport {
        similarity_op_count,
        bound,
        pairwise_ops,
        speedup,
        ..
    } = complexity_report(state.similarity_op_count(), m, c)?;
    let sequential = sequential_partition(&table);
    let (planted_clusters, agreement_with_planted) = match planted {
        Some((k, truth)) => (Some(k), Some(pair_agreement(&sequential, &truth)?)),
        None => (None, None),
    };
    let baseline = if opts.pairwise {
        Some(baseline(&seeds, cfg.threshold, &mentions, &vectors, &sequential)?)
    } else {
        None
    };
    Ok(BenchReport {
        source,
        threshold: cfg.threshold.value(),
        similarity_op_count,
        mention_count: m,
        cluster_count: c,
        bound,
        within_bound: similarity_op_count <= bound,
        pairwise_ops,
        speedup,
        planted_clusters,
        agreement_with_planted,
        baseline,
    })
}
