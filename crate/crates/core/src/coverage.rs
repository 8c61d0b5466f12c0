//! Visibility counts per (topic, media house, stakeholder type).
//!
//! Visibility counts mentions, not documents: every labelled pair in the
//! stakeholder table adds one, whatever its decision kind. Matrices merge by
//! addition, so per-shard matrices can be combined in any order.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;

use crate::clustering::StakeholderRow;
use crate::corpus::Document;

type Pair = (String, String);
type Key = (String, String, String);

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CoverageMatrix {
    counts: BTreeMap<Key, u64>,
    doc_counts: BTreeMap<Pair, u64>,
}

/// Returned by [`CoverageMatrix::coverage_share`] when a (topic, media house)
/// pair has no labelled mentions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("no labelled mentions for this (topic, media house) pair")]
pub struct EmptyCoverage;

/// Percentage of labelled mentions per stakeholder type.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageShare {
    /// Every type of the topic's stakeholder set, including zero shares.
    pub shares: BTreeMap<String, f64>,
    /// Combined share of labels outside the topic's stakeholder set.
    pub other: f64,
    /// Per-type breakdown of `other`.
    pub other_types: BTreeMap<String, f64>,
}

impl CoverageShare {
    pub fn total(&self) -> f64 {
        self.shares.values().sum::<f64>() + self.other
    }
}

impl CoverageMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    /// Counts one document with the given pair labels.
    pub fn accumulate<'a>(&mut self, topic: &str, media_house: &str, labels: impl IntoIterator<Item = &'a str>) {
        *self.doc_counts.entry((topic.into(), media_house.into())).or_insert(0) += 1;
        for label in labels {
            self.add(topic, media_house, label, 1);
        }
    }

    /// Counts `doc` with its stakeholder table fragment.
    pub fn accumulate_document(&mut self, doc: &Document, fragment: &[StakeholderRow]) {
        self.accumulate(&doc.topic, &doc.media_house, fragment.iter().map(|r| r.label.as_str()));
    }

    /// Adds `count` mentions without touching document counts.
    pub fn add(&mut self, topic: &str, media_house: &str, stakeholder_type: &str, count: u64) {
        *self
            .counts
            .entry((topic.into(), media_house.into(), stakeholder_type.into()))
            .or_insert(0) += count;
    }

    /// Adds `count` documents for a pair.
    pub fn add_documents(&mut self, topic: &str, media_house: &str, count: u64) {
        *self.doc_counts.entry((topic.into(), media_house.into())).or_insert(0) += count;
    }

    pub fn merge(&mut self, other: &CoverageMatrix) {
        for ((t, h, s), c) in &other.counts {
            self.add(t, h, s, *c);
        }
        for ((t, h), c) in &other.doc_counts {
            self.add_documents(t, h, *c);
        }
    }

    /// Mention count for a key, 0 when absent.
    pub fn visibility(&self, topic: &str, media_house: &str, stakeholder_type: &str) -> u64 {
        self.counts
            .get(&(topic.into(), media_house.into(), stakeholder_type.into()))
            .copied()
            .unwrap_or(0)
    }

    pub fn doc_count(&self, topic: &str, media_house: &str) -> u64 {
        self.doc_counts
            .get(&(topic.into(), media_house.into()))
            .copied()
            .unwrap_or(0)
    }

    /// Labelled mentions for a pair across all types.
    pub fn total(&self, topic: &str, media_house: &str) -> u64 {
        self.types_for(topic, media_house).map(|(_, c)| c).sum()
    }

    /// Non-zero `(type, count)` entries for a pair, sorted by type.
    pub fn types_for<'a>(&'a self, topic: &'a str, media_house: &'a str) -> impl Iterator<Item = (&'a str, u64)> + 'a {
        self.counts
            .iter()
            .filter(move |((t, h, _), _)| t == topic && h == media_house)
            .map(|((_, _, s), &c)| (s.as_str(), c))
    }

    /// Every (topic, media house) pair seen, sorted.
    pub fn pairs(&self) -> BTreeSet<(&str, &str)> {
        self.doc_counts
            .keys()
            .map(|(t, h)| (t.as_str(), h.as_str()))
            .chain(self.counts.keys().map(|(t, h, _)| (t.as_str(), h.as_str())))
            .collect()
    }

    pub fn topics(&self) -> BTreeSet<&str> {
        self.pairs().into_iter().map(|(t, _)| t).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty() && self.doc_counts.is_empty()
    }

    /// Percentage of the pair's labelled mentions per type of
    /// `topic_types`; labels outside that set are reported under `other`.
    pub fn coverage_share(
        &self,
        topic: &str,
        media_house: &str,
        topic_types: &BTreeSet<String>,
    ) -> Result<CoverageShare, EmptyCoverage> {
        let total = self.total(topic, media_house);
        if total == 0 {
            return Err(EmptyCoverage);
        }
        let pct = |c: u64| c as f64 / total as f64 * 100.0;
        let mut shares: BTreeMap<String, f64> = topic_types.iter().map(|t| (t.clone(), 0.0)).collect();
        let mut other_types = BTreeMap::new();
        for (ty, c) in self.types_for(topic, media_house) {
            match shares.get_mut(ty) {
                Some(slot) => *slot = pct(c),
                None => {
                    other_types.insert(ty.into(), pct(c));
                }
            }
        }
        let other = other_types.values().sum();
        Ok(CoverageShare {
            shares,
            other,
            other_types,
        })
    }
}
