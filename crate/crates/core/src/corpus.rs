//! Documents, stakeholder-candidate mentions and the gazetteer baseline
//! detector.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::embedding::EmbeddingVector;
use crate::text::{back_chars, forward_chars, last_word, normalize_surface, word_spans};

/// Default context window, in characters on either side of a mention.
pub const DEFAULT_CONTEXT_WINDOW: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    pub media_house: String,
    pub topic: String,
    /// ISO-8601 calendar date.
    pub publish_date: String,
    pub text: String,
}

/// Half-open byte range into a document's text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }
}

/// Entity classes admitted as stakeholder candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CoarseType {
    Person,
    Org,
}

impl CoarseType {
    pub fn as_str(self) -> &'static str {
        match self {
            CoarseType::Person => "PERSON",
            CoarseType::Org => "ORG",
        }
    }
}

impl fmt::Display for CoarseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CoarseType {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "PERSON" => Ok(CoarseType::Person),
            "ORG" => Ok(CoarseType::Org),
            other => Err(CorpusError::UnsupportedCoarseType(other.into())),
        }
    }
}

/// One candidate stakeholder phrase occurrence.
#[derive(Debug, Clone, PartialEq)]
pub struct Mention {
    pub doc_id: String,
    pub mention_id: u32,
    pub span: Span,
    pub surface: String,
    pub head: String,
    pub coarse_type: CoarseType,
    pub context_window: String,
    pub kb_key: Option<String>,
    pub vector: Option<EmbeddingVector>,
}

impl Mention {
    /// Checks that the span lies on character boundaries of `doc.text` and
    /// slices exactly to `surface`.
    pub fn verify_against(&self, doc: &Document) -> Result<(), CorpusError> {
        let Span { start, end } = self.span;
        let text = &doc.text;
        if start >= end || end > text.len() || !text.is_char_boundary(start) || !text.is_char_boundary(end) {
            return Err(CorpusError::SpanOutOfBounds {
                doc_id: self.doc_id.clone(),
                mention_id: self.mention_id,
                start,
                end,
                text_len: text.len(),
            });
        }
        if text[start..end] != self.surface {
            return Err(CorpusError::SurfaceMismatch {
                doc_id: self.doc_id.clone(),
                mention_id: self.mention_id,
                expected: text[start..end].into(),
                found: self.surface.clone(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CorpusError {
    #[error("coarse type {0:?} is not a stakeholder candidate class (expected PERSON or ORG)")]
    UnsupportedCoarseType(String),
    #[error("duplicate document id {0:?}")]
    DuplicateDocument(String),
    #[error("mention {mention_id} references unknown document {doc_id:?}")]
    UnknownDocument { doc_id: String, mention_id: u32 },
    #[error(
        "mention {mention_id} in {doc_id:?}: span [{start}, {end}) is not a valid range of a {text_len}-byte text"
    )]
    SpanOutOfBounds {
        doc_id: String,
        mention_id: u32,
        start: usize,
        end: usize,
        text_len: usize,
    },
    #[error("mention {mention_id} in {doc_id:?}: surface {found:?} does not match text {expected:?}")]
    SurfaceMismatch {
        doc_id: String,
        mention_id: u32,
        expected: String,
        found: String,
    },
    #[error("mention {mention_id} in {doc_id:?}: mention ids must increase with span start")]
    MentionOrder { doc_id: String, mention_id: u32 },
    #[error("gazetteer surface {0:?} normalizes to an empty key")]
    EmptyGazetteerKey(String),
    #[error("gazetteer key {0:?} has conflicting entries")]
    ConflictingGazetteerEntry(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GazetteerEntry {
    pub coarse_type: CoarseType,
    pub kb_key: Option<String>,
    /// Head word; empty means "last word of the matched surface".
    pub head: String,
}

/// Surface-form lookup table keyed by normalized surface.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Gazetteer {
    entries: BTreeMap<String, GazetteerEntry>,
    max_words: usize,
}

impl Gazetteer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `surface` under its normalized key. Re-adding an identical entry
    /// is a no-op; a different entry for the same key is an error.
    pub fn insert(&mut self, surface: &str, entry: GazetteerEntry) -> Result<(), CorpusError> {
        let key = normalize_surface(surface);
        if key.is_empty() {
            return Err(CorpusError::EmptyGazetteerKey(surface.into()));
        }
        if let Some(existing) = self.entries.get(&key) {
            if *existing != entry {
                return Err(CorpusError::ConflictingGazetteerEntry(key));
            }
            return Ok(());
        }
        self.max_words = self.max_words.max(word_spans(&key).len().max(1));
        self.entries.insert(key, entry);
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&GazetteerEntry> {
        self.entries.get(key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &GazetteerEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Longest-match, left-to-right, non-overlapping gazetteer matches over
    /// word-aligned substrings of `doc.text`.
    ///
    /// A candidate covering `n` words only matches a key that itself has `n`
    /// words, so `"Modi's"` yields `"Modi"` rather than swallowing the
    /// possessive.
    pub fn detect_mentions(&self, doc: &Document, window: usize) -> Vec<Mention> {
        let text = doc.text.as_str();
        let words = word_spans(text);
        let mut mentions = Vec::new();
        let mut i = 0;
        while i < words.len() {
            let longest = self.max_words.min(words.len() - i);
            let hit = (1..=longest).rev().find_map(|n| {
                let span = Span::new(words[i].0, words[i + n - 1].1);
                let key = normalize_surface(&text[span.start..span.end]);
                self.entries
                    .get(&key)
                    .filter(|_| word_spans(&key).len() == n)
                    .map(|entry| (n, span, entry))
            });
            let Some((n, span, entry)) = hit else {
                i += 1;
                continue;
            };
            let surface = &text[span.start..span.end];
            let head = if entry.head.is_empty() {
                last_word(surface).to_string()
            } else {
                entry.head.clone()
            };
            mentions.push(Mention {
                doc_id: doc.doc_id.clone(),
                mention_id: mentions.len() as u32,
                span,
                surface: surface.into(),
                head,
                coarse_type: entry.coarse_type,
                context_window: context_window(text, span, window).into(),
                kb_key: entry.kb_key.clone(),
                vector: None,
            });
            i += n;
        }
        mentions
    }
}

/// `span` widened by `window` characters on each side, clamped to `text`.
///
/// `span` must lie on character boundaries of `text`.
pub fn context_window(text: &str, span: Span, window: usize) -> &str {
    &text[back_chars(text, span.start, window)..forward_chars(text, span.end, window)]
}

/// Groups externally produced mentions by document, verifying every span
/// against the document text and sorting each group by span start.
///
/// The result is parallel to `docs`.
pub fn attach_mentions(docs: &[Document], mentions: Vec<Mention>) -> Result<Vec<Vec<Mention>>, CorpusError> {
    let index: BTreeMap<&str, usize> = docs.iter().enumerate().map(|(i, d)| (d.doc_id.as_str(), i)).collect();
    let mut grouped: Vec<Vec<Mention>> = docs.iter().map(|_| Vec::new()).collect();
    for m in mentions {
        let Some(&slot) = index.get(m.doc_id.as_str()) else {
            return Err(CorpusError::UnknownDocument {
                doc_id: m.doc_id,
                mention_id: m.mention_id,
            });
        };
        m.verify_against(&docs[slot])?;
        grouped[slot].push(m);
    }
    for group in &mut grouped {
        group.sort_by_key(|m| (m.span.start, m.mention_id));
        for pair in group.windows(2) {
            if pair[1].mention_id <= pair[0].mention_id {
                return Err(CorpusError::MentionOrder {
                    doc_id: pair[1].doc_id.clone(),
                    mention_id: pair[1].mention_id,
                });
            }
        }
    }
    Ok(grouped)
}

/// Fails on the first repeated document id.
pub fn check_unique_ids(docs: &[Document]) -> Result<(), CorpusError> {
    let mut seen = alloc::collections::BTreeSet::new();
    for d in docs {
        if !seen.insert(d.doc_id.as_str()) {
            return Err(CorpusError::DuplicateDocument(d.doc_id.clone()));
        }
    }
    Ok(())
}
