//! JSONL wire records and their readers and writers.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use stakeflow_core::clustering::{ClusterState, DecisionKind, SeedCluster, SeedMember, StakeholderRow};
use stakeflow_core::corpus::{attach_mentions, check_unique_ids, context_window, GazetteerEntry};
use stakeflow_core::{
    CoarseType, Document, EmbeddingVector, Gazetteer, GoldAnnotation, KnowledgeBase, Mention, Span, Triplet,
};

use crate::error::{Error, Result};

/// A malformed input line that was skipped in lenient mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skipped {
    pub line: usize,
    pub reason: String,
}

/// Opens `path` for reading; `-` reads standard input.
pub fn open_input(path: &Path) -> Result<Box<dyn BufRead>> {
    if path == Path::new("-") {
        return Ok(Box::new(BufReader::new(io::stdin())));
    }
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(Box::new(BufReader::new(file)))
}

/// Reads one JSON value per non-blank line, converting each with `convert`.
///
/// In lenient mode lines that fail to parse or convert are recorded in
/// `skipped` instead of aborting.
pub fn read_jsonl<R, T, U, F>(
    reader: R,
    origin: &Path,
    lenient: bool,
    skipped: &mut Vec<Skipped>,
    mut convert: F,
) -> Result<Vec<U>>
where
    R: BufRead,
    T: DeserializeOwned,
    F: FnMut(T) -> std::result::Result<U, String>,
{
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<T>(&line)
            .map_err(|e| e.to_string())
            .and_then(&mut convert);
        match parsed {
            Ok(v) => out.push(v),
            Err(reason) if lenient => skipped.push(Skipped { line: lineno, reason }),
            Err(reason) => return Err(Error::parse(origin, lineno, reason)),
        }
    }
    Ok(out)
}

fn read_strict<T, U, F>(path: &Path, convert: F) -> Result<Vec<U>>
where
    T: DeserializeOwned,
    F: FnMut(T) -> std::result::Result<U, String>,
{
    read_jsonl(open_input(path)?, path, false, &mut Vec::new(), convert)
}

/// Writes one JSON value per line.
pub fn write_jsonl<'a, T, I>(path: &Path, items: I) -> Result<()>
where
    T: Serialize + 'a,
    I: IntoIterator<Item = &'a T>,
{
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);
    for item in items {
        serde_json::to_writer(&mut w, item).map_err(|e| Error::io(path, e.into()))?;
        w.write_all(b"\n").map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Writes a pretty-printed JSON document with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::io(path, e.into()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DocumentRecord {
    pub doc_id: String,
    pub media_house: String,
    pub topic: String,
    pub publish_date: String,
    pub text: String,
}

fn check_date(date: &str) -> std::result::Result<(), String> {
    let ok = chrono::NaiveDate::parse_from_str(date, "%Y-%m-%d").is_ok()
        || chrono::DateTime::parse_from_rfc3339(date).is_ok()
        || chrono::NaiveDateTime::parse_from_str(date, "%Y-%m-%dT%H:%M:%S").is_ok();
    if ok {
        Ok(())
    } else {
        Err(format!("publish_date {date:?} is not an ISO-8601 date"))
    }
}

impl TryFrom<DocumentRecord> for Document {
    type Error = String;

    fn try_from(r: DocumentRecord) -> std::result::Result<Self, String> {
        if r.doc_id.is_empty() {
            return Err("doc_id is empty".into());
        }
        check_date(&r.publish_date)?;
        Ok(Document {
            doc_id: r.doc_id,
            media_house: r.media_house,
            topic: r.topic,
            publish_date: r.publish_date,
            text: r.text,
        })
    }
}

impl From<&Document> for DocumentRecord {
    fn from(d: &Document) -> Self {
        DocumentRecord {
            doc_id: d.doc_id.clone(),
            media_house: d.media_house.clone(),
            topic: d.topic.clone(),
            publish_date: d.publish_date.clone(),
            text: d.text.clone(),
        }
    }
}

/// Documents in input order plus any lines skipped in lenient mode.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub skipped: Vec<Skipped>,
}

pub fn parse_corpus(reader: impl BufRead, origin: &Path, lenient: bool) -> Result<Corpus> {
    let mut skipped = Vec::new();
    let documents = read_jsonl(reader, origin, lenient, &mut skipped, |r: DocumentRecord| {
        Document::try_from(r)
    })?;
    check_unique_ids(&documents)?;
    Ok(Corpus { documents, skipped })
}

pub fn load_corpus(path: &Path, lenient: bool) -> Result<Corpus> {
    parse_corpus(open_input(path)?, path, lenient)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MentionRecord {
    pub doc_id: String,
    pub mention_id: u32,
    pub span: [usize; 2],
    pub surface: String,
    #[serde(default)]
    pub head: String,
    pub coarse_type: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kb_key: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<f64>>,
}

impl From<&Mention> for MentionRecord {
    fn from(m: &Mention) -> Self {
        MentionRecord {
            doc_id: m.doc_id.clone(),
            mention_id: m.mention_id,
            span: [m.span.start, m.span.end],
            surface: m.surface.clone(),
            head: m.head.clone(),
            coarse_type: m.coarse_type.as_str().into(),
            kb_key: m.kb_key.clone(),
            vector: m.vector.as_ref().map(|v| v.as_slice().to_vec()),
        }
    }
}

impl TryFrom<MentionRecord> for Mention {
    type Error = String;

    /// The context window is left empty; it is filled in once the mention is
    /// attached to its document.
    fn try_from(r: MentionRecord) -> std::result::Result<Self, String> {
        let coarse_type: CoarseType = r
            .coarse_type
            .parse()
            .map_err(|e| format!("mention {}: {e}", r.mention_id))?;
        let vector = r
            .vector
            .map(EmbeddingVector::new)
            .transpose()
            .map_err(|e| format!("mention {}: {e}", r.mention_id))?;
        let head = if r.head.is_empty() {
            stakeflow_core::text::last_word(&r.surface).to_string()
        } else {
            r.head
        };
        Ok(Mention {
            doc_id: r.doc_id,
            mention_id: r.mention_id,
            span: Span::new(r.span[0], r.span[1]),
            surface: r.surface,
            head,
            coarse_type,
            context_window: String::new(),
            kb_key: r.kb_key,
            vector,
        })
    }
}

/// Parses mention records and attaches them to `docs`, verifying every span.
///
/// The result is parallel to `docs`, each group sorted by span start.
pub fn parse_mentions(
    reader: impl BufRead,
    origin: &Path,
    docs: &[Document],
    window: usize,
) -> Result<Vec<Vec<Mention>>> {
    let mentions = read_jsonl(reader, origin, false, &mut Vec::new(), |r: MentionRecord| {
        Mention::try_from(r)
    })?;
    let mut grouped = attach_mentions(docs, mentions)?;
    for (doc, group) in docs.iter().zip(&mut grouped) {
        for m in group {
            m.context_window = context_window(&doc.text, m.span, window).into();
        }
    }
    Ok(grouped)
}

pub fn load_mentions(path: &Path, docs: &[Document], window: usize) -> Result<Vec<Vec<Mention>>> {
    parse_mentions(open_input(path)?, path, docs, window)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GazetteerRecord {
    pub surface: String,
    pub coarse_type: String,
    #[serde(default)]
    pub kb_key: Option<String>,
    #[serde(default)]
    pub head: String,
}

pub fn load_gazetteer(path: &Path) -> Result<Gazetteer> {
    let mut gazetteer = Gazetteer::new();
    read_strict(path, |r: GazetteerRecord| {
        let coarse_type: CoarseType = r.coarse_type.parse().map_err(|e| format!("{e}"))?;
        let entry = GazetteerEntry {
            coarse_type,
            kb_key: r.kb_key.filter(|k| !k.is_empty()),
            head: r.head,
        };
        gazetteer.insert(&r.surface, entry).map_err(|e| e.to_string())
    })?;
    Ok(gazetteer)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KbRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kb_key: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triplet: Option<[String; 3]>,
}

pub fn load_kb(path: &Path) -> Result<KnowledgeBase> {
    let mut entries = Vec::new();
    let mut triplets = Vec::new();
    read_strict(path, |r: KbRecord| {
        match (r.kb_key, r.description, r.triplet) {
            (Some(k), Some(d), t) => {
                entries.push((k, d));
                triplets.extend(t.map(|[s, p, o]| Triplet::new(s, p, o)));
            }
            (None, None, Some([s, p, o])) => triplets.push(Triplet::new(s, p, o)),
            _ => return Err("expected {\"kb_key\", \"description\"} or {\"triplet\": [s, p, o]}".into()),
        }
        Ok(())
    })?;
    Ok(KnowledgeBase::new(entries, triplets)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedMemberRecord {
    pub surface: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedRecord {
    pub cluster_id: u32,
    pub label: String,
    pub members: Vec<SeedMemberRecord>,
}

impl TryFrom<SeedRecord> for SeedCluster {
    type Error = String;

    fn try_from(r: SeedRecord) -> std::result::Result<Self, String> {
        let members = r
            .members
            .into_iter()
            .map(|m| match m.vector {
                Some(v) => EmbeddingVector::new(v)
                    .map(|v| SeedMember::with_vector(m.surface, v))
                    .map_err(|e| format!("seed cluster {}: {e}", r.cluster_id)),
                None => Ok(SeedMember::new(m.surface)),
            })
            .collect::<std::result::Result<_, _>>()?;
        Ok(SeedCluster {
            cluster_id: r.cluster_id,
            label: r.label,
            members,
        })
    }
}

pub fn load_seeds(path: &Path) -> Result<Vec<SeedCluster>> {
    read_strict(path, |r: SeedRecord| SeedCluster::try_from(r))
}

/// One stakeholder table line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StakeholderRecord {
    pub doc_id: String,
    pub mention_id: u32,
    pub span: [usize; 2],
    pub surface: String,
    pub label: String,
    pub decision: String,
    pub cluster_id: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nearest_cluster_id: Option<u32>,
}

impl From<&StakeholderRow> for StakeholderRecord {
    fn from(r: &StakeholderRow) -> Self {
        StakeholderRecord {
            doc_id: r.doc_id.clone(),
            mention_id: r.mention_id,
            span: [r.span.start, r.span.end],
            surface: r.surface.clone(),
            label: r.label.clone(),
            decision: r.decision.as_str().into(),
            cluster_id: r.cluster_id,
            score: r.score,
            nearest_cluster_id: r.nearest_cluster_id,
        }
    }
}

impl TryFrom<StakeholderRecord> for StakeholderRow {
    type Error = String;

    fn try_from(r: StakeholderRecord) -> std::result::Result<Self, String> {
        let decision: DecisionKind = r.decision.parse()?;
        Ok(StakeholderRow {
            doc_id: r.doc_id,
            mention_id: r.mention_id,
            span: Span::new(r.span[0], r.span[1]),
            surface: r.surface,
            label: r.label,
            decision,
            cluster_id: r.cluster_id,
            score: r.score,
            nearest_cluster_id: r.nearest_cluster_id,
        })
    }
}

pub fn load_stakeholders(path: &Path) -> Result<Vec<StakeholderRow>> {
    read_strict(path, |r: StakeholderRecord| StakeholderRow::try_from(r))
}

/// Groups stakeholder rows by document, parallel to `docs`.
pub fn group_rows(docs: &[Document], rows: Vec<StakeholderRow>, origin: &Path) -> Result<Vec<Vec<StakeholderRow>>> {
    let index: BTreeMap<&str, usize> = docs.iter().enumerate().map(|(i, d)| (d.doc_id.as_str(), i)).collect();
    let mut grouped: Vec<Vec<StakeholderRow>> = docs.iter().map(|_| Vec::new()).collect();
    for r in rows {
        let Some(&slot) = index.get(r.doc_id.as_str()) else {
            return Err(Error::format(
                origin,
                format!(
                    "row for mention {} references unknown document {:?}",
                    r.mention_id, r.doc_id
                ),
            ));
        };
        grouped[slot].push(r);
    }
    Ok(grouped)
}

/// One cluster of the final state. Seed members have no document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRecord {
    pub cluster_id: u32,
    pub label: String,
    pub members: Vec<(String, Option<String>)>,
}

pub fn cluster_records(state: &ClusterState) -> Vec<ClusterRecord> {
    state
        .clusters()
        .iter()
        .map(|c| ClusterRecord {
            cluster_id: c.cluster_id(),
            label: c.label().into(),
            members: c.members().iter().map(|m| (m.head.clone(), m.doc_id.clone())).collect(),
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoldRecord {
    pub doc_id: String,
    pub span: [usize; 2],
    pub surface: String,
    pub label: String,
}

impl From<GoldRecord> for GoldAnnotation {
    fn from(r: GoldRecord) -> Self {
        GoldAnnotation {
            doc_id: r.doc_id,
            span: Span::new(r.span[0], r.span[1]),
            surface: r.surface,
            label: r.label,
        }
    }
}

pub fn load_gold(path: &Path) -> Result<Vec<GoldAnnotation>> {
    read_strict(path, |r: GoldRecord| Ok(GoldAnnotation::from(r)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(text: &str, lenient: bool) -> Result<Corpus> {
        parse_corpus(text.as_bytes(), Path::new("docs.jsonl"), lenient)
    }

    const DOC: &str =
        r#"{"doc_id":"d1","media_house":"BBC","topic":"CAB Bill","publish_date":"2019-12-10","text":"x"}"#;

    #[test]
    fn empty_corpus() {
        assert!(corpus("", false).unwrap().documents.is_empty());
    }

    #[test]
    fn missing_field_names_the_line() {
        let line = r#"{"doc_id":"d1","topic":"CAB Bill","publish_date":"2019-12-10","text":"x"}"#;
        let err = corpus(line, false).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{msg}");
        assert!(msg.contains("media_house"), "{msg}");
    }

    #[test]
    fn lenient_skips_bad_lines() {
        let text = format!(
            "{DOC}\nnot json\n{}",
            DOC.replace("d1", "d2").replace("2019-12-10", "yesterday")
        );
        let c = corpus(&text, true).unwrap();
        assert_eq!(c.documents.len(), 1);
        assert_eq!(c.skipped.iter().map(|s| s.line).collect::<Vec<_>>(), [2, 3]);
    }

    #[test]
    fn duplicate_ids_fail_even_when_lenient() {
        let text = format!("{DOC}\n{DOC}\n");
        assert!(matches!(corpus(&text, true), Err(Error::Corpus(_))));
    }

    #[test]
    fn dates() {
        assert!(check_date("2020-02-29").is_ok());
        assert!(check_date("2020-02-29T10:00:00Z").is_ok());
        assert!(check_date("2021-02-29").is_err());
        assert!(check_date("29/02/2020").is_err());
    }

    #[test]
    fn mention_records_reject_date_entities() {
        let doc = corpus(DOC, false).unwrap().documents;
        let line = r#"{"doc_id":"d1","mention_id":0,"span":[0,1],"surface":"x","head":"x","coarse_type":"DATE"}"#;
        let err = parse_mentions(line.as_bytes(), Path::new("m.jsonl"), &doc, 10).unwrap_err();
        assert!(err.to_string().contains("DATE"), "{err}");
    }

    #[test]
    fn stakeholder_record_round_trip() {
        let rec = StakeholderRecord {
            doc_id: "d1".into(),
            mention_id: 3,
            span: [4, 9],
            surface: "Modi".into(),
            label: "Government".into(),
            decision: "MatchedExisting".into(),
            cluster_id: 0,
            score: Some(0.8125),
            nearest_cluster_id: None,
        };
        let row = StakeholderRow::try_from(rec.clone()).unwrap();
        assert_eq!(StakeholderRecord::from(&row), rec);
    }
}
