//! Coverage tables as CSV and JSON.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stakeflow_core::{CoverageMatrix, Ontology};

use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 6] = [
    "topic",
    "media_house",
    "stakeholder_type",
    "count",
    "share_pct",
    "doc_count",
];

/// One exported row. `share_pct` is absent when the pair has no labelled
/// mentions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageRecord {
    pub topic: String,
    pub media_house: String,
    pub stakeholder_type: String,
    pub count: u64,
    pub share_pct: Option<f64>,
    pub doc_count: u64,
}

/// Rows for every (topic, media house) pair in the matrix, sorted by topic,
/// house and type.
///
/// Each pair lists every type of its topic set, with zero counts where the
/// type was never mentioned, plus any other type that was counted.
pub fn coverage_records(matrix: &CoverageMatrix, ontology: &Ontology) -> Vec<CoverageRecord> {
    let mut rows = Vec::new();
    for (topic, house) in matrix.pairs() {
        let mut types: BTreeSet<&str> = matrix.types_for(topic, house).map(|(t, _)| t).collect();
        if let Ok(set) = ontology.topic_stakeholders(topic) {
            types.extend(set.iter().map(String::as_str));
        }
        let total = matrix.total(topic, house);
        let doc_count = matrix.doc_count(topic, house);
        for ty in types {
            let count = matrix.visibility(topic, house, ty);
            rows.push(CoverageRecord {
                topic: topic.into(),
                media_house: house.into(),
                stakeholder_type: ty.into(),
                count,
                share_pct: (total > 0).then(|| count as f64 / total as f64 * 100.0),
                doc_count,
            });
        }
    }
    rows
}

pub fn render_csv(rows: &[CoverageRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in rows {
        let share = r.share_pct.map(|s| s.to_string()).unwrap_or_default();
        w.write_record([
            r.topic.as_str(),
            r.media_house.as_str(),
            r.stakeholder_type.as_str(),
            &r.count.to_string(),
            &share,
            &r.doc_count.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

pub fn render_json(rows: &[CoverageRecord]) -> String {
    let mut text = serde_json::to_string_pretty(rows).expect("coverage rows serialize");
    text.push('\n');
    text
}

/// Parses an exported CSV back into rows.
pub fn parse_csv(text: &str, origin: &Path) -> Result<Vec<CoverageRecord>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| Error::format(origin, e))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::parse(
            origin,
            1,
            format!("expected header {}", CSV_HEADER.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::parse(origin, line, e))?;
        let num = |k: usize| {
            rec[k]
                .parse::<u64>()
                .map_err(|e| Error::parse(origin, line, format!("{}: {e}", CSV_HEADER[k])))
        };
        let share_pct = match &rec[4] {
            "" => None,
            s => Some(
                s.parse::<f64>()
                    .map_err(|e| Error::parse(origin, line, format!("share_pct: {e}")))?,
            ),
        };
        rows.push(CoverageRecord {
            topic: rec[0].into(),
            media_house: rec[1].into(),
            stakeholder_type: rec[2].into(),
            count: num(3)?,
            share_pct,
            doc_count: num(5)?,
        });
    }
    Ok(rows)
}

/// Rebuilds the matrix an export came from.
pub fn matrix_from_records(rows: &[CoverageRecord]) -> CoverageMatrix {
    let mut matrix = CoverageMatrix::new();
    let mut docs = BTreeMap::new();
    for r in rows {
        if r.count > 0 {
            matrix.add(&r.topic, &r.media_house, &r.stakeholder_type, r.count);
        }
        docs.insert((r.topic.as_str(), r.media_house.as_str()), r.doc_count);
    }
    for ((topic, house), n) in docs {
        matrix.add_documents(topic, house, n);
    }
    matrix
}

/// File-name-safe form of a topic: ASCII alphanumerics kept, runs of
/// anything else become one underscore.
pub fn sanitize_topic(topic: &str) -> String {
    let mut out = String::new();
    for c in topic.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c);
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    let trimmed = out.trim_matches('_');
    if trimmed.is_empty() {
        "topic".into()
    } else {
        trimmed.into()
    }
}

/// Writes `coverage.csv`, `coverage.json` and one `coverage_<topic>.csv`
/// per topic into `dir`, returning the paths written.
pub fn write_coverage(dir: &Path, matrix: &CoverageMatrix, ontology: &Ontology) -> Result<Vec<PathBuf>> {
    let rows = coverage_records(matrix, ontology);
    let mut written = Vec::new();
    let mut put = |name: String, body: String| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        written.push(path);
        Ok(())
    };
    put("coverage.csv".into(), render_csv(&rows))?;
    put("coverage.json".into(), render_json(&rows))?;

    let mut by_topic: BTreeMap<String, Vec<CoverageRecord>> = BTreeMap::new();
    for r in &rows {
        by_topic.entry(sanitize_topic(&r.topic)).or_default().push(r.clone());
    }
    for (name, topic_rows) in by_topic {
        put(format!("coverage_{name}.csv"), render_csv(&topic_rows))?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology_file::default_ontology;

    #[test]
    fn empty_matrix_is_header_only() {
        let csv = render_csv(&coverage_records(&CoverageMatrix::new(), &default_ontology()));
        assert_eq!(csv, "topic,media_house,stakeholder_type,count,share_pct,doc_count\n");
    }

    #[test]
    fn topic_names() {
        assert_eq!(sanitize_topic("Farms' Law"), "Farms_Law");
        assert_eq!(sanitize_topic("CAB Bill"), "CAB_Bill");
        assert_eq!(sanitize_topic("Covid Control"), "Covid_Control");
        assert_eq!(sanitize_topic("!!"), "topic");
    }

    #[test]
    fn zero_rows_for_topic_types_and_export_round_trip() {
        let ontology = default_ontology();
        let mut m = CoverageMatrix::new();
        m.accumulate("CAB Bill", "BBC", ["Government", "Government", "Judiciary"]);
        m.add_documents("CAB Bill", "BBC", 2);
        m.add_documents("Demonetization", "BBC", 1);
        let rows = coverage_records(&m, &ontology);
        let cab: Vec<_> = rows.iter().filter(|r| r.topic == "CAB Bill").collect();
        assert_eq!(cab.len(), 5);
        let opp = cab
            .iter()
            .find(|r| r.stakeholder_type == "PoliticalParty:Opposition")
            .unwrap();
        assert_eq!((opp.count, opp.share_pct), (0, Some(0.0)));
        let demo: Vec<_> = rows.iter().filter(|r| r.topic == "Demonetization").collect();
        assert!(demo.iter().all(|r| r.share_pct.is_none() && r.doc_count == 1));

        let csv = render_csv(&rows);
        let parsed = parse_csv(&csv, Path::new("c.csv")).unwrap();
        assert_eq!(parsed, rows);
        let again = render_csv(&coverage_records(&matrix_from_records(&parsed), &ontology));
        assert_eq!(again, csv);
    }
}
