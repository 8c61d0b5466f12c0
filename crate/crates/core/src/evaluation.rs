//! Scoring against gold annotations, the complexity report, and the
//! all-pairs connected-components baseline.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::clustering::StakeholderRow;
use crate::corpus::Span;
use crate::embedding::{cosine_slices, EmbeddingVector};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldAnnotation {
    pub doc_id: String,
    pub span: Span,
    pub surface: String,
    pub label: String,
}

/// A predicted label for one mention span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prediction {
    pub doc_id: String,
    pub span: Span,
    pub label: String,
}

impl From<&StakeholderRow> for Prediction {
    fn from(r: &StakeholderRow) -> Self {
        Self {
            doc_id: r.doc_id.clone(),
            span: r.span,
            label: r.label.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("duplicate gold annotation for {doc_id:?} span [{}, {})", span.start, span.end)]
    DuplicateGold { doc_id: String, span: Span },
    #[error("duplicate prediction for {doc_id:?} span [{}, {})", span.start, span.end)]
    DuplicatePrediction { doc_id: String, span: Span },
    #[error("similarity op count {ops} exceeds the C x M bound {bound}")]
    BoundViolation { ops: u64, bound: u64 },
    #[error("partitions cover different item counts ({0} vs {1})")]
    PartitionLength(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TypeMetrics {
    pub true_positives: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
}

impl TypeMetrics {
    fn finish(mut self) -> Self {
        let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        self.precision = ratio(self.true_positives, self.true_positives + self.false_positives);
        self.recall = ratio(self.true_positives, self.true_positives + self.false_negatives);
        let sum = self.precision + self.recall;
        self.f_score = if sum == 0.0 {
            0.0
        } else {
            2.0 * self.precision * self.recall / sum
        };
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    /// Every label seen in gold or predictions.
    pub per_type: BTreeMap<String, TypeMetrics>,
    /// Gold mention count per label.
    pub support: BTreeMap<String, u64>,
    /// Unweighted mean F over labels with gold support.
    pub macro_f: f64,
}

impl MetricReport {
    /// Precision / recall / F table as CSV, percentages with two decimals,
    /// closing with the macro-F row.
    pub fn render_table(&self) -> String {
        let mut out = String::from("Stakeholder Type,Precision,Recall,F-Score\n");
        for (label, m) in &self.per_type {
            let _ = writeln!(
                out,
                "{},{:.2},{:.2},{:.2}",
                csv_field(label),
                m.precision * 100.0,
                m.recall * 100.0,
                m.f_score * 100.0
            );
        }
        let _ = writeln!(out, "Macro-Fscore,-,-,{:.2}", self.macro_f * 100.0);
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.into()
    }
}

/// Mention-level exact-span scoring.
///
/// A prediction on a gold span with the gold label is a true positive;
/// with another label it is a false positive for the predicted label and a
/// false negative for the gold label. Predictions on non-gold spans are false
/// positives; unpredicted gold spans are false negatives.
pub fn score(predictions: &[Prediction], gold: &[GoldAnnotation]) -> Result<MetricReport, EvalError> {
    let mut gold_index: BTreeMap<(&str, Span), &str> = BTreeMap::new();
    let mut support: BTreeMap<String, u64> = BTreeMap::new();
    for g in gold {
        if gold_index
            .insert((g.doc_id.as_str(), g.span), g.label.as_str())
            .is_some()
        {
            return Err(EvalError::DuplicateGold {
                doc_id: g.doc_id.clone(),
                span: g.span,
            });
        }
        *support.entry(g.label.clone()).or_insert(0) += 1;
    }

    let mut per_type: BTreeMap<String, TypeMetrics> = BTreeMap::new();
    let mut matched: BTreeMap<(&str, Span), ()> = BTreeMap::new();
    for p in predictions {
        let key = (p.doc_id.as_str(), p.span);
        if matched.insert(key, ()).is_some() {
            return Err(EvalError::DuplicatePrediction {
                doc_id: p.doc_id.clone(),
                span: p.span,
            });
        }
        match gold_index.get(&key) {
            Some(&gold_label) if gold_label == p.label => {
                per_type.entry(p.label.clone()).or_default().true_positives += 1;
            }
            Some(&gold_label) => {
                per_type.entry(p.label.clone()).or_default().false_positives += 1;
                per_type.entry(gold_label.into()).or_default().false_negatives += 1;
            }
            None => per_type.entry(p.label.clone()).or_default().false_positives += 1,
        }
    }
    for (key, label) in &gold_index {
        if !matched.contains_key(key) {
            per_type.entry((*label).into()).or_default().false_negatives += 1;
        }
    }

    let per_type: BTreeMap<String, TypeMetrics> = per_type.into_iter().map(|(k, m)| (k, m.finish())).collect();
    let supported: Vec<f64> = support.keys().map(|l| per_type[l].f_score).collect();
    let macro_f = if supported.is_empty() {
        0.0
    } else {
        supported.iter().sum::<f64>() / supported.len() as f64
    };
    Ok(MetricReport {
        per_type,
        support,
        macro_f,
    })
}

/// Similarity-count comparison between the sequential clusterer and the
/// all-pairs baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityReport {
    pub similarity_op_count: u64,
    pub mention_count: u64,
    pub cluster_count: u64,
    /// `cluster_count * mention_count`.
    pub bound: u64,
    /// `M (M - 1) / 2`.
    pub pairwise_ops: u64,
    /// `pairwise_ops / similarity_op_count`; absent when no scores were
    /// computed.
    pub speedup: Option<f64>,
}

/// Checks `ops <= C * M` and reports the pairwise comparison.
pub fn complexity_report(ops: u64, mentions: u64, clusters: u64) -> Result<ComplexityReport, EvalError> {
    let bound = clusters * mentions;
    if ops > bound {
        return Err(EvalError::BoundViolation { ops, bound });
    }
    let pairwise_ops = pairwise_op_count(mentions);
    Ok(ComplexityReport {
        similarity_op_count: ops,
        mention_count: mentions,
        cluster_count: clusters,
        bound,
        pairwise_ops,
        speedup: (ops > 0).then(|| pairwise_ops as f64 / ops as f64),
    })
}

pub fn pairwise_op_count(m: u64) -> u64 {
    m * m.saturating_sub(1) / 2
}

/// Input item for the all-pairs baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineItem {
    pub vector: EmbeddingVector,
    /// Label of the seed cluster this mention's surface belongs to, if any.
    pub seed_label: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineComponent {
    /// Item indices, ascending.
    pub members: Vec<usize>,
    /// Majority seed label (ties to the smallest label); `None` if no member
    /// carries one.
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineResult {
    pub op_count: u64,
    /// Component index per item.
    pub assignment: Vec<usize>,
    /// Ordered by smallest member.
    pub components: Vec<BaselineComponent>,
}

impl BaselineResult {
    pub fn unlabeled_components(&self) -> usize {
        self.components.iter().filter(|c| c.label.is_none()).count()
    }
}

/// Scores every pair, links pairs scoring above `threshold`, and returns the
/// connected components.
pub fn pairwise_baseline(items: &[BaselineItem], threshold: f64) -> BaselineResult {
    let n = items.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut op_count = 0u64;
    for i in 0..n {
        for j in (i + 1)..n {
            let s = cosine_slices(items[i].vector.as_slice(), items[j].vector.as_slice());
            op_count += 1;
            if s > threshold {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }

    let mut root_to_component: BTreeMap<usize, usize> = BTreeMap::new();
    let mut assignment = Vec::with_capacity(n);
    let mut components: Vec<BaselineComponent> = Vec::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        let c = *root_to_component.entry(root).or_insert_with(|| {
            components.push(BaselineComponent {
                members: Vec::new(),
                label: None,
            });
            components.len() - 1
        });
        components[c].members.push(i);
        assignment.push(c);
    }
    for comp in &mut components {
        let mut votes: BTreeMap<&str, usize> = BTreeMap::new();
        for &i in &comp.members {
            if let Some(l) = &items[i].seed_label {
                *votes.entry(l.as_str()).or_insert(0) += 1;
            }
        }
        // BTreeMap iterates labels ascending; keep the first maximum
        let mut best: Option<(&str, usize)> = None;
        for (l, v) in votes {
            if best.is_none_or(|(_, bv)| v > bv) {
                best = Some((l, v));
            }
        }
        comp.label = best.map(|(l, _)| l.into());
    }
    BaselineResult {
        op_count,
        assignment,
        components,
    }
}

/// Rand index: fraction of item pairs on which two partitions agree
/// (together in both or apart in both). 1.0 for fewer than two items.
pub fn pair_agreement(a: &[usize], b: &[usize]) -> Result<f64, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::PartitionLength(a.len(), b.len()));
    }
    let n = a.len();
    if n < 2 {
        return Ok(1.0);
    }
    let mut agree = 0u64;
    for i in 0..n {
        for j in (i + 1)..n {
            if (a[i] == a[j]) == (b[i] == b[j]) {
                agree += 1;
            }
        }
    }
    Ok(agree as f64 / pairwise_op_count(n as u64) as f64)
}
