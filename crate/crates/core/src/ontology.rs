//! Stakeholder ontology: typed graph of stakeholder classes plus the set of
//! stakeholder types analysed for each news topic.
//!
//! An [`Ontology`] is validated once at construction and immutable afterwards.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

/// Relation kinds between stakeholder types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    IsA,
    BelongsTo,
    PartOf,
}

impl Relation {
    pub const ALL: [Relation; 3] = [Relation::IsA, Relation::BelongsTo, Relation::PartOf];

    /// Spelling used in ontology files.
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::IsA => "isA",
            Relation::BelongsTo => "belongsTo",
            Relation::PartOf => "partOf",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Relation {
    type Err = OntologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Relation::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| OntologyError::UnknownRelation(s.into()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StakeholderType {
    pub id: String,
    pub display_name: String,
    pub description: String,
}

impl StakeholderType {
    pub fn new(id: impl Into<String>, display_name: impl Into<String>, description: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            display_name: display_name.into(),
            description: description.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct OntologyEdge {
    pub source: String,
    pub relation: Relation,
    pub target: String,
}

impl OntologyEdge {
    pub fn new(source: impl Into<String>, relation: Relation, target: impl Into<String>) -> Self {
        Self {
            source: source.into(),
            relation,
            target: target.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OntologyError {
    #[error("invalid stakeholder type id {0:?}: ids must be non-empty and contain no whitespace")]
    InvalidTypeId(String),
    #[error("duplicate stakeholder type id {0:?}")]
    DuplicateType(String),
    #[error("edge {from} -{relation}-> {to} references unknown type {missing:?}")]
    DanglingEdge {
        from: String,
        relation: Relation,
        to: String,
        missing: String,
    },
    #[error("self-loop edge on {0:?}")]
    SelfLoop(String),
    #[error("duplicate edge {from} -{relation}-> {to}")]
    DuplicateEdge {
        from: String,
        relation: Relation,
        to: String,
    },
    #[error("isA cycle through {0:?}")]
    IsACycle(String),
    #[error("topic {topic:?} references unknown type {id:?}")]
    UnknownTopicType { topic: String, id: String },
    #[error("topic {0:?} has no stakeholder types")]
    EmptyTopic(String),
    #[error("unknown stakeholder type {0:?}")]
    UnknownType(String),
    #[error("unknown topic {0:?}")]
    UnknownTopic(String),
    #[error("unknown relation {0:?} (expected isA, belongsTo or partOf)")]
    UnknownRelation(String),
}

/// Validated stakeholder ontology.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ontology {
    types: Vec<StakeholderType>,
    edges: Vec<OntologyEdge>,
    topics: BTreeMap<String, BTreeSet<String>>,
    index: BTreeMap<String, usize>,
}

impl Ontology {
    /// Validates and builds an ontology.
    ///
    /// Type order and edge order are kept as given so that serialization is
    /// stable.
    pub fn new(
        types: Vec<StakeholderType>,
        edges: Vec<OntologyEdge>,
        topics: BTreeMap<String, BTreeSet<String>>,
    ) -> Result<Self, OntologyError> {
        let mut index = BTreeMap::new();
        for (i, t) in types.iter().enumerate() {
            if t.id.is_empty() || t.id.chars().any(char::is_whitespace) {
                return Err(OntologyError::InvalidTypeId(t.id.clone()));
            }
            if index.insert(t.id.clone(), i).is_some() {
                return Err(OntologyError::DuplicateType(t.id.clone()));
            }
        }

        let mut seen = BTreeSet::new();
        for e in &edges {
            for end in [&e.source, &e.target] {
                if !index.contains_key(end) {
                    return Err(OntologyError::DanglingEdge {
                        from: e.source.clone(),
                        relation: e.relation,
                        to: e.target.clone(),
                        missing: end.clone(),
                    });
                }
            }
            if e.source == e.target {
                return Err(OntologyError::SelfLoop(e.source.clone()));
            }
            if !seen.insert(e) {
                return Err(OntologyError::DuplicateEdge {
                    from: e.source.clone(),
                    relation: e.relation,
                    to: e.target.clone(),
                });
            }
        }

        for (topic, ids) in &topics {
            if ids.is_empty() {
                return Err(OntologyError::EmptyTopic(topic.clone()));
            }
            if let Some(id) = ids.iter().find(|id| !index.contains_key(*id)) {
                return Err(OntologyError::UnknownTopicType {
                    topic: topic.clone(),
                    id: id.clone(),
                });
            }
        }

        let ontology = Self {
            types,
            edges,
            topics,
            index,
        };
        if let Some(id) = ontology.find_isa_cycle() {
            return Err(OntologyError::IsACycle(id));
        }
        Ok(ontology)
    }

    pub fn types(&self) -> &[StakeholderType] {
        &self.types
    }

    pub fn edges(&self) -> &[OntologyEdge] {
        &self.edges
    }

    pub fn topics(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.topics
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn get(&self, id: &str) -> Option<&StakeholderType> {
        self.index.get(id).map(|&i| &self.types[i])
    }

    fn require(&self, id: &str) -> Result<usize, OntologyError> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| OntologyError::UnknownType(id.into()))
    }

    fn successors(&self, relation: Relation) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.types.len()];
        for e in self.edges.iter().filter(|e| e.relation == relation) {
            adj[self.index[&e.source]].push(self.index[&e.target]);
        }
        adj
    }

    /// True iff `to` is reachable from `from` along edges of `relation`.
    /// Every type reaches itself.
    pub fn is_reachable(&self, from: &str, to: &str, relation: Relation) -> Result<bool, OntologyError> {
        let start = self.require(from)?;
        let goal = self.require(to)?;
        if start == goal {
            return Ok(true);
        }
        let adj = self.successors(relation);
        let mut visited = vec![false; self.types.len()];
        let mut stack = vec![start];
        visited[start] = true;
        while let Some(n) = stack.pop() {
            for &next in &adj[n] {
                if next == goal {
                    return Ok(true);
                }
                if !visited[next] {
                    visited[next] = true;
                    stack.push(next);
                }
            }
        }
        Ok(false)
    }

    /// Stakeholder types analysed for `topic`.
    pub fn topic_stakeholders(&self, topic: &str) -> Result<&BTreeSet<String>, OntologyError> {
        self.topics
            .get(topic)
            .ok_or_else(|| OntologyError::UnknownTopic(topic.into()))
    }

    pub fn has_topic(&self, topic: &str) -> bool {
        self.topics.contains_key(topic)
    }

    // Iterative three-colour DFS over isA edges, visiting roots in declaration
    // order. Returns the type a back edge points to.
    fn find_isa_cycle(&self) -> Option<String> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            White,
            Grey,
            Black,
        }
        let adj = self.successors(Relation::IsA);
        let mut mark = vec![Mark::White; self.types.len()];
        for root in 0..self.types.len() {
            if mark[root] != Mark::White {
                continue;
            }
            let mut stack = vec![(root, 0usize)];
            mark[root] = Mark::Grey;
            while let Some((node, next_child)) = stack.pop() {
                if let Some(&child) = adj[node].get(next_child) {
                    stack.push((node, next_child + 1));
                    match mark[child] {
                        Mark::Grey => return Some(self.types[child].id.clone()),
                        Mark::White => {
                            mark[child] = Mark::Grey;
                            stack.push((child, 0));
                        }
                        Mark::Black => {}
                    }
                } else {
                    mark[node] = Mark::Black;
                }
            }
        }
        None
    }
}
