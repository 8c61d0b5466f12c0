//! Mention representations: a contextual feature and an optional
//! knowledge-base feature, mean-pooled into one vector and compared by
//! cosine similarity.
//!
//! Two providers exist. The hashed provider is a deterministic feature-hashing
//! encoder over character trigrams and word unigrams. The external provider
//! passes through vectors computed elsewhere (the `vector` field of a mention
//! record) and has no text encoder of its own.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::corpus::Mention;
use crate::text::normalize_surface;

pub const DEFAULT_DIMENSION: usize = 256;
pub const DEFAULT_HASH_SEED: u64 = 0;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EmbeddingError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("embedding dimension must be positive")]
    ZeroDimension,
    #[error("embedding component {index} is not finite")]
    NonFinite { index: usize },
    #[error("mention {mention_id} in {doc_id:?} has no precomputed vector (external provider)")]
    MissingVector { doc_id: String, mention_id: u32 },
    #[error("knowledge base entry with empty key")]
    EmptyKbKey,
    #[error("duplicate knowledge base key {0:?}")]
    DuplicateKbKey(String),
    #[error("knowledge base triplet with an empty field")]
    EmptyTripletField,
}

/// Fixed-length vector with finite components.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self, EmbeddingError> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(EmbeddingError::NonFinite { index });
        }
        Ok(Self(values))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    pub(crate) fn expect_dim(&self, expected: usize) -> Result<(), EmbeddingError> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(EmbeddingError::DimensionMismatch {
                expected,
                found: self.dim(),
            })
        }
    }
}

fn l2_norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum::<f64>())
}

/// Seeded 64-bit FNV-1a: the seed's eight little-endian bytes are hashed
/// before the feature bytes.
pub fn feature_hash(seed: u64, feature: &[u8]) -> u64 {
    seed.to_le_bytes()
        .iter()
        .chain(feature)
        .fold(FNV_OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

/// Hashed features of `text`: `w:<word>` for each word and `c:<trigram>` for
/// each character trigram of the normalized text (the whole text when it is
/// shorter than three characters).
pub fn hashed_features(text: &str) -> Vec<String> {
    let norm = normalize_surface(text);
    if norm.is_empty() {
        return Vec::new();
    }
    let mut features: Vec<String> = norm.split(' ').map(|w| format!("w:{w}")).collect();
    let chars: Vec<char> = norm.chars().collect();
    if chars.len() < 3 {
        features.push(format!("c:{norm}"));
    } else {
        features.extend(chars.windows(3).map(|w| {
            let mut f = String::from("c:");
            f.extend(w);
            f
        }));
    }
    features
}

/// Feature-hashing embedding of `text`.
///
/// Each feature adds +1 or -1 (low bit of its hash, 0 = +1) to bucket
/// `(hash >> 1) % dim`. The result is L2-normalized unless it is all zeros.
///
/// # Panics
///
/// If `dim` is zero.
pub fn embed_text_hashed(text: &str, dim: usize, seed: u64) -> EmbeddingVector {
    assert!(dim > 0, "embedding dimension must be positive");
    let mut values = vec![0.0f64; dim];
    for f in hashed_features(text) {
        let h = feature_hash(seed, f.as_bytes());
        let bucket = ((h >> 1) % dim as u64) as usize;
        values[bucket] += if h & 1 == 0 { 1.0 } else { -1.0 };
    }
    let norm = l2_norm(&values);
    if norm > 0.0 {
        values.iter_mut().for_each(|v| *v /= norm);
    }
    EmbeddingVector(values)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triplet {
    pub subject: String,
    pub predicate: String,
    pub object: String,
}

impl Triplet {
    pub fn new(subject: impl Into<String>, predicate: impl Into<String>, object: impl Into<String>) -> Self {
        Self {
            subject: subject.into(),
            predicate: predicate.into(),
            object: object.into(),
        }
    }

    /// `"subject predicate object"`.
    pub fn joined(&self) -> String {
        format!("{} {} {}", self.subject, self.predicate, self.object)
    }
}

/// Entity descriptions keyed by canonical entity key, plus
/// (subject, predicate, object) triplets for mentions without a key.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnowledgeBase {
    entries: BTreeMap<String, String>,
    triplets: Vec<Triplet>,
    // normalized subject/object -> first triplet mentioning it
    argument_index: BTreeMap<String, usize>,
}

impl KnowledgeBase {
    pub fn new(
        entries: impl IntoIterator<Item = (String, String)>,
        triplets: Vec<Triplet>,
    ) -> Result<Self, EmbeddingError> {
        let mut map = BTreeMap::new();
        for (key, description) in entries {
            if key.is_empty() {
                return Err(EmbeddingError::EmptyKbKey);
            }
            if map.contains_key(&key) {
                return Err(EmbeddingError::DuplicateKbKey(key));
            }
            map.insert(key, description);
        }
        let mut argument_index = BTreeMap::new();
        for (i, t) in triplets.iter().enumerate() {
            if t.subject.is_empty() || t.predicate.is_empty() || t.object.is_empty() {
                return Err(EmbeddingError::EmptyTripletField);
            }
            for arg in [&t.subject, &t.object] {
                argument_index.entry(normalize_surface(arg)).or_insert(i);
            }
        }
        Ok(Self {
            entries: map,
            triplets,
            argument_index,
        })
    }

    pub fn description(&self, kb_key: &str) -> Option<&str> {
        self.entries.get(kb_key).map(String::as_str)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn triplets(&self) -> &[Triplet] {
        &self.triplets
    }

    /// First triplet (in load order) whose subject or object normalizes to
    /// `key`.
    pub fn triplet_for(&self, key: &str) -> Option<&Triplet> {
        self.argument_index.get(key).map(|&i| &self.triplets[i])
    }

    /// Text describing the mention's entity: its keyed description, else the
    /// joined triplet whose argument matches the normalized surface.
    pub fn feature_text(&self, m: &Mention) -> Option<String> {
        if let Some(desc) = m.kb_key.as_deref().and_then(|k| self.description(k)) {
            return Some(desc.into());
        }
        self.triplet_for(&normalize_surface(&m.surface)).map(Triplet::joined)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingProvider {
    Hashed { dim: usize, seed: u64 },
    External { dim: usize },
}

impl EmbeddingProvider {
    pub fn hashed(dim: usize, seed: u64) -> Result<Self, EmbeddingError> {
        if dim == 0 {
            return Err(EmbeddingError::ZeroDimension);
        }
        Ok(Self::Hashed { dim, seed })
    }

    pub fn external(dim: usize) -> Result<Self, EmbeddingError> {
        if dim == 0 {
            return Err(EmbeddingError::ZeroDimension);
        }
        Ok(Self::External { dim })
    }

    pub fn dim(&self) -> usize {
        match *self {
            Self::Hashed { dim, .. } | Self::External { dim } => dim,
        }
    }

    /// Name used on the command line and in run manifests.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Hashed { .. } => "hashed",
            Self::External { .. } => "external",
        }
    }

    /// Whether [`embed_text`](Self::embed_text) produces vectors.
    pub fn encodes_text(&self) -> bool {
        matches!(self, Self::Hashed { .. })
    }

    /// Encodes free text. The external provider has no text encoder.
    pub fn embed_text(&self, text: &str) -> Option<EmbeddingVector> {
        match *self {
            Self::Hashed { dim, seed } => Some(embed_text_hashed(text, dim, seed)),
            Self::External { .. } => None,
        }
    }

    /// Contextual feature of a mention.
    pub fn embed_context(&self, m: &Mention) -> Result<EmbeddingVector, EmbeddingError> {
        match *self {
            Self::Hashed { dim, seed } => {
                let text = format!("{} {} {}", m.surface, m.head, m.context_window);
                Ok(embed_text_hashed(&text, dim, seed))
            }
            Self::External { dim } => {
                let v = m.vector.as_ref().ok_or_else(|| EmbeddingError::MissingVector {
                    doc_id: m.doc_id.clone(),
                    mention_id: m.mention_id,
                })?;
                v.expect_dim(dim)?;
                Ok(v.clone())
            }
        }
    }

    /// Knowledge-base feature, or `None` when the entity is not found.
    pub fn embed_kb(&self, m: &Mention, kb: &KnowledgeBase) -> Option<EmbeddingVector> {
        kb.feature_text(m).and_then(|text| self.embed_text(&text))
    }

    /// Full mention representation: contextual and KB features mean-pooled.
    pub fn embed_mention(&self, m: &Mention, kb: Option<&KnowledgeBase>) -> Result<EmbeddingVector, EmbeddingError> {
        let context = self.embed_context(m)?;
        let global = kb.and_then(|kb| self.embed_kb(m, kb));
        combine(&context, global.as_ref())
    }
}

/// Elementwise mean of the available features; with no KB feature the
/// contextual feature is returned unchanged.
pub fn combine(context: &EmbeddingVector, kb: Option<&EmbeddingVector>) -> Result<EmbeddingVector, EmbeddingError> {
    let Some(kb) = kb else {
        return Ok(context.clone());
    };
    kb.expect_dim(context.dim())?;
    Ok(EmbeddingVector(
        context.0.iter().zip(&kb.0).map(|(a, b)| (a + b) / 2.0).collect(),
    ))
}

/// Cosine similarity clamped to [-1, 1]. A zero vector on either side scores
/// -1.
pub fn cosine_similarity(u: &EmbeddingVector, v: &EmbeddingVector) -> Result<f64, EmbeddingError> {
    v.expect_dim(u.dim())?;
    Ok(cosine_slices(&u.0, &v.0))
}

pub(crate) fn cosine_slices(u: &[f64], v: &[f64]) -> f64 {
    let nu = l2_norm(u);
    let nv = l2_norm(v);
    if nu == 0.0 || nv == 0.0 {
        return -1.0;
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    (dot / (nu * nv)).clamp(-1.0, 1.0)
}
