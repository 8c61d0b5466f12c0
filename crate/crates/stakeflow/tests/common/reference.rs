//! A deliberately naive reference execution of the sequential clustering
//! algorithm, written independently of the engine: clusters keep every member
//! vector and recompute their mean on each comparison, and the dictionary is
//! a linear list.

#[derive(Debug, Clone, PartialEq)]
pub struct RefCluster {
    pub cluster_id: u32,
    pub label: String,
    pub members: Vec<(String, Option<String>)>,
    pub vectors: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefRow {
    pub doc_id: String,
    pub mention_id: u32,
    pub surface: String,
    pub label: String,
    pub decision: &'static str,
    pub cluster_id: u32,
    pub score: Option<f64>,
    pub nearest_cluster_id: Option<u32>,
}

pub struct RefMention {
    pub mention_id: u32,
    pub surface: String,
    pub head: String,
    pub vector: Vec<f64>,
}

pub struct RefSeed {
    pub cluster_id: u32,
    pub label: String,
    /// (surface, vector) per seed member; members without a vector are
    /// dictionary entries only.
    pub members: Vec<(String, Option<Vec<f64>>)>,
}

#[derive(Debug, Clone)]
pub struct RefOutput {
    pub rows: Vec<RefRow>,
    pub clusters: Vec<RefCluster>,
    pub labels: Vec<String>,
    pub ops: u64,
}

pub fn normalize(s: &str) -> String {
    let lowered = s.to_lowercase();
    let mut out = lowered.split_whitespace().collect::<Vec<_>>().join(" ");
    loop {
        let before = out.len();
        for suffix in ["'s", "\u{2019}s"] {
            if let Some(stripped) = out.strip_suffix(suffix) {
                out = stripped.to_string();
            }
        }
        while let Some(c) = out.chars().last() {
            if matches!(c, '.' | ',' | ';' | ':' | '\'' | '\u{2019}') {
                out.pop();
            } else {
                break;
            }
        }
        out = out.trim_end().to_string();
        if out.len() == before {
            return out;
        }
    }
}

fn mean(vectors: &[Vec<f64>]) -> Vec<f64> {
    let mut sum = vec![0.0; vectors[0].len()];
    for v in vectors {
        for (s, x) in sum.iter_mut().zip(v) {
            *s += x;
        }
    }
    let n = vectors.len() as f64;
    sum.iter().map(|s| s / n).collect()
}

fn cosine(u: &[f64], v: &[f64]) -> f64 {
    let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return -1.0;
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    (dot / (nu * nv)).clamp(-1.0, 1.0)
}

pub fn run(seeds: &[RefSeed], threshold: f64, stream: &[(String, Vec<RefMention>)]) -> RefOutput {
    // start from the seed clusters and their labels
    let mut clusters: Vec<RefCluster> = seeds
        .iter()
        .map(|s| RefCluster {
            cluster_id: s.cluster_id,
            label: s.label.clone(),
            members: s.members.iter().map(|(surface, _)| (surface.clone(), None)).collect(),
            vectors: s.members.iter().filter_map(|(_, v)| v.clone()).collect(),
        })
        .collect();
    let mut dictionary: Vec<(String, usize)> = Vec::new();
    for (i, s) in seeds.iter().enumerate() {
        for (surface, _) in &s.members {
            dictionary.push((normalize(surface), i));
        }
    }
    let mut next_id = seeds.iter().map(|s| s.cluster_id).max().unwrap() + 1;
    let mut rows = Vec::new();
    let mut ops = 0u64;

    // mentions in stream order, document by document
    for (doc_id, mentions) in stream {
        for e in mentions {
            let key = normalize(&e.surface);
            // dictionary hit
            if let Some(&(_, h)) = dictionary.iter().find(|(k, _)| *k == key) {
                rows.push(RefRow {
                    doc_id: doc_id.clone(),
                    mention_id: e.mention_id,
                    surface: e.surface.clone(),
                    label: clusters[h].label.clone(),
                    decision: "KnownEntity",
                    cluster_id: clusters[h].cluster_id,
                    score: None,
                    nearest_cluster_id: None,
                });
                continue;
            }
            // score every cluster, take the first maximum
            let mut scores = Vec::with_capacity(clusters.len());
            for c in &clusters {
                scores.push(cosine(&e.vector, &mean(&c.vectors)));
                ops += 1;
            }
            let mut m = 0;
            for k in 1..scores.len() {
                if scores[k] > scores[m] {
                    m = k;
                }
            }
            let sim = scores[m];
            let member = (e.head.clone(), Some(doc_id.clone()));
            if sim > threshold {
                clusters[m].members.push(member);
                clusters[m].vectors.push(e.vector.clone());
                dictionary.push((key, m));
                rows.push(RefRow {
                    doc_id: doc_id.clone(),
                    mention_id: e.mention_id,
                    surface: e.surface.clone(),
                    label: clusters[m].label.clone(),
                    decision: "MatchedExisting",
                    cluster_id: clusters[m].cluster_id,
                    score: Some(sim),
                    nearest_cluster_id: None,
                });
            } else {
                // new cluster labelled like the nearest one
                let label = clusters[m].label.clone();
                let nearest = clusters[m].cluster_id;
                clusters.push(RefCluster {
                    cluster_id: next_id,
                    label: label.clone(),
                    members: vec![member],
                    vectors: vec![e.vector.clone()],
                });
                dictionary.push((key, clusters.len() - 1));
                rows.push(RefRow {
                    doc_id: doc_id.clone(),
                    mention_id: e.mention_id,
                    surface: e.surface.clone(),
                    label,
                    decision: "NewSingleton",
                    cluster_id: next_id,
                    score: Some(sim),
                    nearest_cluster_id: Some(nearest),
                });
                next_id += 1;
            }
        }
    }
    let labels = clusters.iter().map(|c| c.label.clone()).collect();
    RefOutput {
        rows,
        clusters,
        labels,
        ops,
    }
}
