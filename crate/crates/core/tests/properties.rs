use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use stakeflow_core::clustering::{ClusterState, DecisionKind, SeedCluster, SeedMember, Threshold};
use stakeflow_core::corpus::{CoarseType, Document, Gazetteer, GazetteerEntry, Mention, Span};
use stakeflow_core::coverage::CoverageMatrix;
use stakeflow_core::embedding::{combine, cosine_similarity, EmbeddingProvider, EmbeddingVector};
use stakeflow_core::evaluation::{score, GoldAnnotation, Prediction};
use stakeflow_core::ontology::{Ontology, StakeholderType};
use stakeflow_core::text::normalize_surface;

const LABELS: [&str; 4] = [
    "Government",
    "Judiciary",
    "PoliticalParty:Opposition",
    "Citizen/Activist",
];

fn ontology() -> Ontology {
    let types = LABELS.iter().map(|id| StakeholderType::new(*id, *id, "")).collect();
    Ontology::new(types, vec![], BTreeMap::new()).unwrap()
}

fn ev(v: Vec<f64>) -> EmbeddingVector {
    EmbeddingVector::new(v).unwrap()
}

fn vec_strategy(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, dim)
}

fn nonzero(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    vec_strategy(dim).prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-6)
}

fn mention(doc: &str, id: u32, surface: &str) -> Mention {
    Mention {
        doc_id: doc.into(),
        mention_id: id,
        span: Span::new(0, surface.len()),
        surface: surface.into(),
        head: surface.into(),
        coarse_type: CoarseType::Person,
        context_window: String::new(),
        kb_key: None,
        vector: None,
    }
}

proptest! {
    #[test]
    fn normalize_is_idempotent(s in "\\PC{0,24}") {
        let once = normalize_surface(&s);
        prop_assert_eq!(normalize_surface(&once), once.clone());
        prop_assert_eq!(once.trim(), once.as_str());
        prop_assert!(!once.contains("  "));
    }

    #[test]
    fn cosine_properties(u in nonzero(6), v in nonzero(6), k in 0.01f64..100.0) {
        let (u, v) = (ev(u), ev(v));
        let self_sim = cosine_similarity(&u, &u).unwrap();
        prop_assert!((self_sim - 1.0).abs() <= 1e-9);
        let uv = cosine_similarity(&u, &v).unwrap();
        prop_assert_eq!(uv, cosine_similarity(&v, &u).unwrap());
        prop_assert!((-1.0..=1.0).contains(&uv));
        let scaled = ev(u.as_slice().iter().map(|x| x * k).collect());
        prop_assert!((cosine_similarity(&scaled, &v).unwrap() - uv).abs() <= 1e-9);
    }

    #[test]
    fn combine_matches_sum_direction(a in nonzero(5), b in nonzero(5)) {
        let (a, b) = (ev(a), ev(b));
        let ab = combine(&a, Some(&b)).unwrap();
        prop_assert_eq!(&ab, &combine(&b, Some(&a)).unwrap());
        prop_assert_eq!(combine(&a, None).unwrap(), a.clone());
        let sum = ev(a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x + y).collect());
        if sum.norm() > 1e-6 {
            prop_assert!((cosine_similarity(&ab, &sum).unwrap() - 1.0).abs() <= 1e-9);
        }
    }
}

// Small vocabulary so that multi-word gazetteer keys actually occur.
const WORDS: [&str; 8] = ["Modi", "Rahul", "Gandhi", "court", "the", "Supreme", "BJP", "said"];
const SEPS: [&str; 5] = [" ", "  ", ", ", ". ", "'s "];

fn text_strategy() -> impl Strategy<Value = String> {
    prop::collection::vec((0..WORDS.len(), 0..SEPS.len()), 0..30).prop_map(|parts| {
        parts
            .into_iter()
            .map(|(w, s)| format!("{}{}", WORDS[w], SEPS[s]))
            .collect()
    })
}

fn gazetteer_strategy() -> impl Strategy<Value = Vec<Vec<usize>>> {
    prop::collection::vec(prop::collection::vec(0..WORDS.len(), 1..4), 1..6)
}

proptest! {
    #[test]
    fn detection_invariants(text in text_strategy(), keys in gazetteer_strategy()) {
        let mut g = Gazetteer::new();
        for k in &keys {
            let surface: Vec<&str> = k.iter().map(|&i| WORDS[i]).collect();
            let _ = g.insert(&surface.join(" "), GazetteerEntry {
                coarse_type: CoarseType::Org,
                kb_key: None,
                head: String::new(),
            });
        }
        let doc = Document {
            doc_id: "d".into(),
            media_house: "H".into(),
            topic: "T".into(),
            publish_date: "2020-01-01".into(),
            text,
        };
        let ms = g.detect_mentions(&doc, 10);
        prop_assert_eq!(&ms, &g.detect_mentions(&doc, 10));
        for (i, m) in ms.iter().enumerate() {
            prop_assert_eq!(m.mention_id as usize, i);
            m.verify_against(&doc).unwrap();
            prop_assert!(g.get(&normalize_surface(&m.surface)).is_some());
        }
        for pair in ms.windows(2) {
            prop_assert!(pair[0].span.end <= pair[1].span.start);
            prop_assert!(!pair[0].span.overlaps(&pair[1].span));
        }
    }
}

#[derive(Debug, Clone)]
struct Stream {
    seeds: Vec<SeedCluster>,
    mentions: Vec<(String, Vec<f64>)>,
    threshold: f64,
}

const DIM: usize = 4;

fn stream_strategy() -> impl Strategy<Value = Stream> {
    let seeds = prop::collection::vec((0..LABELS.len(), nonzero(DIM)), 1..5);
    // surfaces drawn from a small pool so dictionary hits happen
    let mentions = prop::collection::vec((0u8..12, nonzero(DIM)), 0..40);
    (seeds, mentions, -1.0f64..=1.0).prop_map(|(seeds, mentions, threshold)| Stream {
        seeds: seeds
            .into_iter()
            .enumerate()
            .map(|(i, (l, v))| SeedCluster {
                cluster_id: i as u32,
                label: LABELS[l].into(),
                members: vec![SeedMember::with_vector(format!("seed {i}"), ev(v))],
            })
            .collect(),
        mentions: mentions.into_iter().map(|(s, v)| (format!("entity {s}"), v)).collect(),
        threshold,
    })
}

type Trace = Vec<(DecisionKind, u32, String, Option<f64>, Option<u32>, usize, u64)>;

fn run_stream(s: &Stream) -> (ClusterState, Trace) {
    let mut state = ClusterState::new(
        &s.seeds,
        Threshold::new(s.threshold).unwrap(),
        &ontology(),
        EmbeddingProvider::external(DIM).unwrap(),
    )
    .unwrap();
    let mut trace = Vec::new();
    for (i, (surface, v)) in s.mentions.iter().enumerate() {
        let before_clusters = state.clusters().len();
        let before_ops = state.similarity_op_count();
        let d = state
            .assign(&mention(&format!("d{}", i / 4), i as u32, surface), &ev(v.clone()))
            .unwrap();
        trace.push((
            d.kind,
            d.cluster_id,
            d.label,
            d.score,
            d.nearest_cluster_id,
            before_clusters,
            state.similarity_op_count() - before_ops,
        ));
    }
    (state, trace)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn clustering_invariants(s in stream_strategy()) {
        let (state, trace) = run_stream(&s);
        let seed_labels: BTreeSet<&str> = s.seeds.iter().map(|c| c.label.as_str()).collect();
        let m = s.mentions.len() as u64;
        let c_final = state.clusters().len() as u64;

        let mut expected_ops = 0u64;
        let mut seen_surfaces = BTreeSet::new();
        for ((kind, cluster_id, label, score, nearest, before_clusters, ops), (surface, _)) in trace.iter().zip(&s.mentions) {
            prop_assert!(seed_labels.contains(label.as_str()));
            let known_before = !seen_surfaces.insert(surface.clone());
            match kind {
                DecisionKind::KnownEntity => {
                    prop_assert!(known_before);
                    prop_assert_eq!(*ops, 0);
                    prop_assert!(score.is_none());
                }
                DecisionKind::MatchedExisting => {
                    prop_assert!(!known_before);
                    prop_assert!(score.unwrap() > s.threshold);
                    prop_assert_eq!(*ops, *before_clusters as u64);
                }
                DecisionKind::NewSingleton => {
                    prop_assert!(!known_before);
                    prop_assert!(score.unwrap() <= s.threshold);
                    prop_assert_eq!(*ops, *before_clusters as u64);
                    prop_assert_eq!(*cluster_id as usize, *before_clusters);
                    let nearest_label = state.cluster(nearest.unwrap()).unwrap().label();
                    prop_assert_eq!(nearest_label, label.as_str());
                }
            }
            expected_ops += ops;
        }
        prop_assert_eq!(state.similarity_op_count(), expected_ops);
        prop_assert!(state.similarity_op_count() <= c_final * m);
        prop_assert_eq!(state.labels().len(), state.clusters().len());
        for (surface, _) in &s.mentions {
            prop_assert!(state.lookup(&normalize_surface(surface)).is_some());
        }

        let (again, trace2) = run_stream(&s);
        prop_assert_eq!(&again, &state);
        prop_assert_eq!(trace2, trace);
    }

    #[test]
    fn minus_one_threshold_never_creates_clusters(s in stream_strategy()) {
        let s = Stream { threshold: -1.0, ..s };
        // a new cluster needs a best score of exactly -1 (all centroids antipodal)
        let (_, trace) = run_stream(&s);
        for t in &trace {
            if t.0 == DecisionKind::NewSingleton {
                prop_assert_eq!(t.3, Some(-1.0));
            }
        }
    }

    #[test]
    fn coverage_shares_are_scale_free(counts in prop::collection::vec(1u64..50, 1..5), k in 1u64..20) {
        let topic: BTreeSet<String> = LABELS.iter().take(2).map(|s| s.to_string()).collect();
        let mut a = CoverageMatrix::new();
        let mut b = CoverageMatrix::new();
        for (i, c) in counts.iter().enumerate() {
            a.add("T", "H", LABELS[i % LABELS.len()], *c);
            b.add("T", "H", LABELS[i % LABELS.len()], *c * k);
        }
        let sa = a.coverage_share("T", "H", &topic).unwrap();
        let sb = b.coverage_share("T", "H", &topic).unwrap();
        prop_assert!((sa.total() - 100.0).abs() <= 1e-9);
        for (ty, v) in &sa.shares {
            prop_assert!((v - sb.shares[ty]).abs() <= 1e-9);
        }
        prop_assert!((sa.other - sb.other).abs() <= 1e-9);
    }

    #[test]
    fn scoring_is_permutation_invariant(
        gold in prop::collection::btree_map(0usize..30, 0..LABELS.len(), 0..20),
        preds in prop::collection::btree_map(0usize..30, 0..LABELS.len(), 0..20),
        rotate in 0usize..20,
    ) {
        let gold: Vec<GoldAnnotation> = gold.into_iter().map(|(s, l)| GoldAnnotation {
            doc_id: "d".into(), span: Span::new(s, s + 1), surface: "x".into(), label: LABELS[l].into(),
        }).collect();
        let mut preds: Vec<Prediction> = preds.into_iter().map(|(s, l)| Prediction {
            doc_id: "d".into(), span: Span::new(s, s + 1), label: LABELS[l].into(),
        }).collect();
        let r1 = score(&preds, &gold).unwrap();
        if !preds.is_empty() {
            let n = rotate % preds.len();
            preds.rotate_left(n);
            preds.reverse();
        }
        let r2 = score(&preds, &gold).unwrap();
        prop_assert_eq!(&r1, &r2);
        for m in r1.per_type.values() {
            for x in [m.precision, m.recall, m.f_score] {
                prop_assert!((0.0..=1.0).contains(&x));
            }
            if m.precision == 0.0 || m.recall == 0.0 {
                prop_assert_eq!(m.f_score, 0.0);
            }
        }
        prop_assert!((0.0..=1.0).contains(&r1.macro_f));
    }
}
