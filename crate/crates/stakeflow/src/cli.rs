//! Command-line interface.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{PartialConfig, ProviderKind, RunConfig};
use crate::coverage_io::write_coverage;
use crate::error::{Error, Result};
use crate::pipeline::{self, BenchOptions};
use crate::records::{write_json, Skipped};
use crate::synthetic::PlantedConfig;

#[derive(Debug, Parser)]
#[command(
    name = "stakeflow",
    version,
    about = "Stakeholder labelling and media coverage analysis for news corpora"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detect gazetteer mentions and write mentions.jsonl.
    Extract(Shared),
    /// Label mentions by sequential clustering against seed clusters.
    Cluster(Shared),
    /// Count labelled mentions per topic, media house and stakeholder type.
    Coverage(Shared),
    /// Score a stakeholder table against gold annotations.
    Eval(Shared),
    /// Report similarity operation counts against the C x M bound.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Shared {
    /// TOML config file, or a run manifest to reproduce.
    #[arg(long, env = "STAKEFLOW_CONFIG")]
    pub config: Option<PathBuf>,
    /// Ontology file (defaults to the built-in ontology).
    #[arg(long, env = "STAKEFLOW_ONTOLOGY")]
    pub ontology: Option<PathBuf>,
    /// Document JSONL.
    #[arg(long, env = "STAKEFLOW_CORPUS")]
    pub corpus: Option<PathBuf>,
    /// Gazetteer JSONL.
    #[arg(long, env = "STAKEFLOW_GAZETTEER")]
    pub gazetteer: Option<PathBuf>,
    /// Knowledge-base JSONL.
    #[arg(long, env = "STAKEFLOW_KB")]
    pub kb: Option<PathBuf>,
    /// Seed cluster JSONL.
    #[arg(long, env = "STAKEFLOW_SEEDS")]
    pub seeds: Option<PathBuf>,
    /// Mention JSONL to cluster instead of running the gazetteer; `-` reads stdin.
    #[arg(long, env = "STAKEFLOW_MENTIONS")]
    pub mentions: Option<PathBuf>,
    /// Stakeholder table to read [default: <out>/stakeholders.jsonl].
    #[arg(long, env = "STAKEFLOW_STAKEHOLDERS")]
    pub stakeholders: Option<PathBuf>,
    /// Gold annotation JSONL.
    #[arg(long, env = "STAKEFLOW_GOLD")]
    pub gold: Option<PathBuf>,
    /// Similarity threshold in [-1, 1] [default: 0.75].
    #[arg(long, env = "STAKEFLOW_THRESHOLD", allow_negative_numbers = true)]
    pub threshold: Option<f64>,
    /// Embedding dimension [default: 256].
    #[arg(long, env = "STAKEFLOW_DIM")]
    pub dim: Option<usize>,
    /// Seed of the hashed embedding [default: 0].
    #[arg(long, env = "STAKEFLOW_HASH_SEED")]
    pub hash_seed: Option<u64>,
    /// Embedding provider [default: hashed].
    #[arg(long, env = "STAKEFLOW_PROVIDER", value_enum)]
    pub provider: Option<ProviderKind>,
    /// Context window in characters on each side of a mention [default: 200].
    #[arg(long, env = "STAKEFLOW_WINDOW")]
    pub window: Option<usize>,
    /// Output directory [default: out].
    #[arg(long, env = "STAKEFLOW_OUT")]
    pub out: Option<PathBuf>,
    /// Skip malformed corpus lines instead of aborting.
    #[arg(long, env = "STAKEFLOW_LENIENT")]
    pub lenient: bool,
}

impl Shared {
    fn flags(&self) -> PartialConfig {
        PartialConfig {
            ontology: self.ontology.clone(),
            corpus: self.corpus.clone(),
            gazetteer: self.gazetteer.clone(),
            kb: self.kb.clone(),
            seeds: self.seeds.clone(),
            mentions: self.mentions.clone(),
            stakeholders: self.stakeholders.clone(),
            gold: self.gold.clone(),
            threshold: self.threshold,
            dim: self.dim,
            hash_seed: self.hash_seed,
            provider: self.provider,
            window: self.window,
            lenient: self.lenient.then_some(true),
            out: self.out.clone(),
        }
    }

    pub fn resolve(&self) -> Result<RunConfig> {
        RunConfig::from_layers(self.flags(), self.config.as_deref())
    }
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub shared: Shared,
    /// Use a generated stream with planted clusters instead of input files.
    #[arg(long)]
    pub synthetic: bool,
    #[arg(long, default_value_t = 1000)]
    pub synthetic_mentions: usize,
    #[arg(long, default_value_t = 20)]
    pub synthetic_clusters: usize,
    #[arg(long, default_value_t = 32)]
    pub synthetic_dim: usize,
    #[arg(long, default_value_t = 0.05)]
    pub synthetic_noise: f64,
    #[arg(long, default_value_t = 7)]
    pub synthetic_seed: u64,
    /// Also run the all-pairs connected-components baseline.
    #[arg(long)]
    pub pairwise: bool,
}

fn prepare_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn report_skipped(skipped: &[Skipped]) {
    for s in skipped {
        eprintln!("warning: skipped corpus line {}: {}", s.line, s.reason);
    }
}

fn wrote(out: &mut impl Write, paths: &[PathBuf]) {
    for p in paths {
        let _ = writeln!(out, "wrote {}", p.display());
    }
}

/// Runs one command, writing progress lines to `out`.
pub fn run(cli: &Cli, out: &mut impl Write) -> Result<()> {
    match &cli.command {
        Command::Extract(shared) => {
            let cfg = shared.resolve()?;
            let ex = pipeline::extract(&cfg)?;
            report_skipped(&ex.skipped);
            prepare_out(&cfg.out)?;
            let path = cfg.out.join(pipeline::MENTIONS_FILE);
            pipeline::write_mentions(&path, &ex.mentions)?;
            let _ = writeln!(out, "{} documents, {} mentions", ex.documents.len(), ex.mention_count());
            wrote(out, &[path]);
        }
        Command::Cluster(shared) => {
            let cfg = shared.resolve()?;
            let run = pipeline::cluster(&cfg)?;
            report_skipped(&run.extraction.skipped);
            prepare_out(&cfg.out)?;
            let paths = pipeline::write_cluster_outputs(&cfg.out, &run)?;
            let m = &run.manifest;
            let _ = writeln!(
                out,
                "{} mentions, {} clusters, {} similarity ops",
                m.mention_count, m.cluster_count, m.similarity_op_count
            );
            wrote(out, &paths);
        }
        Command::Coverage(shared) => {
            let cfg = shared.resolve()?;
            let cov = pipeline::coverage(&cfg)?;
            prepare_out(&cfg.out)?;
            let paths = write_coverage(&cfg.out, &cov.matrix, &cov.ontology)?;
            wrote(out, &paths);
        }
        Command::Eval(shared) => {
            let cfg = shared.resolve()?;
            let report = pipeline::evaluate(&cfg)?;
            prepare_out(&cfg.out)?;
            let paths = pipeline::write_metrics(&cfg.out, &report)?;
            let _ = write!(out, "{}", report.render_table());
            wrote(out, &paths);
        }
        Command::Bench(args) => {
            let cfg = args.shared.resolve()?;
            let opts = BenchOptions {
                synthetic: args.synthetic.then_some(PlantedConfig {
                    mentions: args.synthetic_mentions,
                    clusters: args.synthetic_clusters,
                    dim: args.synthetic_dim,
                    noise: args.synthetic_noise,
                    rng_seed: args.synthetic_seed,
                    ..PlantedConfig::default()
                }),
                pairwise: args.pairwise,
            };
            let report = pipeline::bench(&cfg, &opts)?;
            prepare_out(&cfg.out)?;
            let path = cfg.out.join(pipeline::COMPLEXITY_FILE);
            write_json(&path, &report)?;
            let _ = writeln!(
                out,
                "{} similarity ops <= C x M = {} x {} = {}; pairwise baseline needs {}",
                report.similarity_op_count,
                report.cluster_count,
                report.mention_count,
                report.bound,
                report.pairwise_ops
            );
            if let Some(b) = &report.baseline {
                let _ = writeln!(
                    out,
                    "baseline: {} ops, {} components ({} unlabeled), agreement {:.4}",
                    b.op_count, b.components, b.unlabeled_components, b.agreement_with_sequential
                );
            }
            wrote(out, &[path]);
        }
    }
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli, &mut std::io::stdout().lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                2
            } else {
                1
            }
        }
    }
}
