//! TOML ontology files.
//!
//! ```toml
//! [[types]]
//! id = "Government"
//! display_name = "Government"
//! description = "..."
//!
//! [[edges]]
//! source = "Minister"
//! relation = "partOf"
//! target = "Government"
//!
//! [topics]
//! "CAB Bill" = ["Government", "PoliticalParty:Opposition"]
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use stakeflow_core::{Ontology, OntologyEdge, OntologyError, StakeholderType};

use crate::error::{Error, Result};

/// The ontology that ships with the engine.
pub const DEFAULT_ONTOLOGY: &str = include_str!("../data/ontology.toml");

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OntologyDoc {
    #[serde(default)]
    types: Vec<TypeDoc>,
    #[serde(default)]
    edges: Vec<EdgeDoc>,
    #[serde(default)]
    topics: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TypeDoc {
    id: String,
    display_name: String,
    #[serde(default)]
    description: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    source: String,
    relation: String,
    target: String,
}

fn line_of(source: &str, offset: usize) -> usize {
    source[..offset.min(source.len())].matches('\n').count() + 1
}

/// Parses and validates an ontology. `origin` names the source in errors.
pub fn parse_ontology(source: &str, origin: &Path) -> Result<Ontology> {
    let doc: OntologyDoc = toml::from_str(source).map_err(|e| {
        let line = e.span().map_or(0, |s| line_of(source, s.start));
        Error::parse(origin, line, e.message())
    })?;

    let types = doc
        .types
        .into_iter()
        .map(|t| StakeholderType::new(t.id, t.display_name, t.description))
        .collect();
    let edges = doc
        .edges
        .into_iter()
        .map(|e| {
            let relation = e.relation.parse()?;
            Ok(OntologyEdge::new(e.source, relation, e.target))
        })
        .collect::<Result<Vec<_>, OntologyError>>()?;
    let mut topics = BTreeMap::new();
    for (topic, ids) in doc.topics {
        let set: BTreeSet<String> = ids.into_iter().collect();
        topics.insert(topic, set);
    }
    Ok(Ontology::new(types, edges, topics)?)
}

pub fn load_ontology(path: &Path) -> Result<Ontology> {
    let source = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_ontology(&source, path)
}

pub fn default_ontology() -> Ontology {
    parse_ontology(DEFAULT_ONTOLOGY, Path::new("<default ontology>")).expect("shipped ontology is valid")
}

/// Renders an ontology in the file format read by [`parse_ontology`].
pub fn serialize_ontology(ontology: &Ontology) -> String {
    let doc = OntologyDoc {
        types: ontology
            .types()
            .iter()
            .map(|t| TypeDoc {
                id: t.id.clone(),
                display_name: t.display_name.clone(),
                description: t.description.clone(),
            })
            .collect(),
        edges: ontology
            .edges()
            .iter()
            .map(|e| EdgeDoc {
                source: e.source.clone(),
                relation: e.relation.as_str().into(),
                target: e.target.clone(),
            })
            .collect(),
        topics: ontology
            .topics()
            .iter()
            .map(|(k, v)| (k.clone(), v.iter().cloned().collect()))
            .collect(),
    };
    toml::to_string(&doc).expect("ontology documents always serialize")
}
