//! Run configuration: command-line flags over a config file over defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stakeflow_core::clustering::Threshold;
use stakeflow_core::corpus::DEFAULT_CONTEXT_WINDOW;
use stakeflow_core::embedding::{DEFAULT_DIMENSION, DEFAULT_HASH_SEED};
use stakeflow_core::EmbeddingProvider;

use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.75;
pub const DEFAULT_OUT: &str = "out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    #[default]
    Hashed,
    External,
}

impl ProviderKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProviderKind::Hashed => "hashed",
            ProviderKind::External => "external",
        }
    }
}

/// Every setting, each optional. Used for config files, for flags before
/// merging, and for the configuration echoed into run manifests.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ontology: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gazetteer: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kb: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mentions: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stakeholders: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hash_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provider: Option<ProviderKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lenient: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl PartialConfig {
    /// Fills every unset field from `lower`.
    pub fn or(self, lower: PartialConfig) -> PartialConfig {
        PartialConfig {
            ontology: self.ontology.or(lower.ontology),
            corpus: self.corpus.or(lower.corpus),
            gazetteer: self.gazetteer.or(lower.gazetteer),
            kb: self.kb.or(lower.kb),
            seeds: self.seeds.or(lower.seeds),
            mentions: self.mentions.or(lower.mentions),
            stakeholders: self.stakeholders.or(lower.stakeholders),
            gold: self.gold.or(lower.gold),
            threshold: self.threshold.or(lower.threshold),
            dim: self.dim.or(lower.dim),
            hash_seed: self.hash_seed.or(lower.hash_seed),
            provider: self.provider.or(lower.provider),
            window: self.window.or(lower.window),
            lenient: self.lenient.or(lower.lenient),
            out: self.out.or(lower.out),
        }
    }
}

/// Reads a TOML config file, or a JSON file whose settings sit either at
/// the top level or under `"config"` (as in a run manifest).
pub fn load_config_file(path: &Path) -> Result<PartialConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if !is_json {
        return toml::from_str(&text).map_err(|e| {
            let line = e.span().map_or(0, |s| text[..s.start].matches('\n').count() + 1);
            Error::parse(path, line, e.message())
        });
    }
    let json_err = |e: serde_json::Error| Error::parse(path, e.line(), e);
    let mut value: serde_json::Value = serde_json::from_str(&text).map_err(json_err)?;
    if let Some(inner) = value.get_mut("config") {
        value = inner.take();
    }
    serde_json::from_value(value).map_err(|e| Error::format(path, e))
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub ontology: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub gazetteer: Option<PathBuf>,
    pub kb: Option<PathBuf>,
    pub seeds: Option<PathBuf>,
    pub mentions: Option<PathBuf>,
    pub stakeholders: Option<PathBuf>,
    pub gold: Option<PathBuf>,
    pub threshold: Threshold,
    pub dim: usize,
    pub hash_seed: u64,
    pub provider: ProviderKind,
    pub window: usize,
    pub lenient: bool,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::resolve(PartialConfig::default()).expect("defaults are valid")
    }
}

impl RunConfig {
    pub fn resolve(p: PartialConfig) -> Result<Self> {
        let t = p.threshold.unwrap_or(DEFAULT_THRESHOLD);
        let threshold = Threshold::new(t).map_err(|e| Error::Usage(format!("--threshold: {e}")))?;
        let dim = p.dim.unwrap_or(DEFAULT_DIMENSION);
        if dim == 0 {
            return Err(Error::Usage("--dim must be positive".into()));
        }
        Ok(RunConfig {
            ontology: p.ontology,
            corpus: p.corpus,
            gazetteer: p.gazetteer,
            kb: p.kb,
            seeds: p.seeds,
            mentions: p.mentions,
            stakeholders: p.stakeholders,
            gold: p.gold,
            threshold,
            dim,
            hash_seed: p.hash_seed.unwrap_or(DEFAULT_HASH_SEED),
            provider: p.provider.unwrap_or_default(),
            window: p.window.unwrap_or(DEFAULT_CONTEXT_WINDOW),
            lenient: p.lenient.unwrap_or(false),
            out: p.out.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
        })
    }

    /// Flags over the config file named by `--config` (if any) over defaults.
    pub fn from_layers(flags: PartialConfig, config_file: Option<&Path>) -> Result<Self> {
        let file = match config_file {
            Some(path) => load_config_file(path)?,
            None => PartialConfig::default(),
        };
        Self::resolve(flags.or(file))
    }

    pub fn provider(&self) -> EmbeddingProvider {
        let made = match self.provider {
            ProviderKind::Hashed => EmbeddingProvider::hashed(self.dim, self.hash_seed),
            ProviderKind::External => EmbeddingProvider::external(self.dim),
        };
        made.expect("dimension validated on resolve")
    }

    /// The settings that determine a run's artifacts. The output directory is
    /// left out so that runs into different directories echo identically.
    pub fn echo(&self) -> PartialConfig {
        PartialConfig {
            ontology: self.ontology.clone(),
            corpus: self.corpus.clone(),
            gazetteer: self.gazetteer.clone(),
            kb: self.kb.clone(),
            seeds: self.seeds.clone(),
            mentions: self.mentions.clone(),
            stakeholders: self.stakeholders.clone(),
            gold: self.gold.clone(),
            threshold: Some(self.threshold.value()),
            dim: Some(self.dim),
            hash_seed: Some(self.hash_seed),
            provider: Some(self.provider),
            window: Some(self.window),
            lenient: Some(self.lenient),
            out: None,
        }
    }

    /// `path` if set, else a usage error naming the flag.
    pub fn require<'a>(&self, path: &'a Option<PathBuf>, flag: &str, command: &str) -> Result<&'a Path> {
        let path = path
            .as_deref()
            .ok_or_else(|| Error::Usage(format!("{command} requires --{flag}")))?;
        if path != Path::new("-") && !path.exists() {
            return Err(Error::Usage(format!("--{flag}: {} does not exist", path.display())));
        }
        Ok(path)
    }

    /// Like [`RunConfig::require`] for an optional input: absent is fine, a
    /// path that does not exist is not.
    pub fn optional<'a>(&self, path: &'a Option<PathBuf>, flag: &str) -> Result<Option<&'a Path>> {
        match path.as_deref() {
            Some(p) if p != Path::new("-") && !p.exists() => {
                Err(Error::Usage(format!("--{flag}: {} does not exist", p.display())))
            }
            other => Ok(other),
        }
    }

    /// The stakeholder table: `--stakeholders`, else `stakeholders.jsonl` in the
    /// output directory.
    pub fn stakeholders_path(&self) -> PathBuf {
        self.stakeholders
            .clone()
            .unwrap_or_else(|| self.out.join(crate::pipeline::STAKEHOLDERS_FILE))
    }
}
