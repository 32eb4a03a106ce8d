//! Small synthetic corpora with known structure, for tests, examples and
//! benchmarking the harness itself.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, Document, DocumentId};
use crate::error::{Error, Result};
use crate::evaluation::EvaluationPair;
use crate::graph::CitationGraph;

fn id(s: &str) -> DocumentId {
    DocumentId::new(s).expect("fixture ids are valid")
}

/// The ten citations of the six-document toy network: A and B each cite
/// three precedents, two of them shared; C and D cite A; C and F cite B.
pub const TOY_EDGES: [(&str, &str); 10] = [
    ("A", "C"),
    ("A", "D"),
    ("A", "E"),
    ("B", "C"),
    ("B", "D"),
    ("B", "F"),
    ("C", "A"),
    ("D", "A"),
    ("C", "B"),
    ("F", "B"),
];

pub fn toy_corpus() -> Corpus {
    let mut corpus = Corpus::new();
    for name in ["A", "B", "C", "D", "E", "F"] {
        let text = format!("Judgment {name}.\n\nThe facts of case {name} are recorded here.");
        corpus.insert(Document::new(id(name), text)).expect("unique");
    }
    for (s, d) in TOY_EDGES {
        corpus.cite(id(s), id(d), true).expect("valid edge");
    }
    corpus
}

/// Two `size`-cliques joined by a single bridge edge. Nodes are `a00..` and
/// `b00..`; the bridge runs between `a00` and `b00`.
pub fn two_cliques(size: usize) -> CitationGraph {
    let mut edges = Vec::new();
    for side in ["a", "b"] {
        for i in 0..size {
            for j in i + 1..size {
                edges.push((id(&format!("{side}{i:02}")), id(&format!("{side}{j:02}"))));
            }
        }
    }
    edges.push((id("a00"), id("b00")));
    CitationGraph::from_edges(std::iter::empty(), edges).expect("no self loops")
}

/// Documents drawn from two disjoint vocabularies. Returns the corpus and
/// each document's topic (0 or 1).
pub fn two_topic_corpus(
    docs_per_topic: usize,
    vocab_per_topic: usize,
    tokens_per_doc: usize,
    seed: u64,
) -> (Corpus, BTreeMap<DocumentId, usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut corpus = Corpus::new();
    let mut topics = BTreeMap::new();
    for topic in 0..2 {
        let prefix = if topic == 0 { "alpha" } else { "beta" };
        for d in 0..docs_per_topic {
            let words: Vec<String> = (0..tokens_per_doc)
                .map(|_| format!("{prefix}{}", rng.gen_range(0..vocab_per_topic)))
                .collect();
            let doc_id = id(&format!("t{topic}d{d:03}"));
            corpus
                .insert(Document::new(doc_id.clone(), words.join(" ")))
                .expect("unique");
            topics.insert(doc_id, topic);
        }
    }
    (corpus, topics)
}

/// Knobs for [`planted_benchmark`].
#[derive(Debug, Clone)]
pub struct PlantedConfig {
    pub docs: usize,
    pub clusters: usize,
    /// Documents that appear in evaluation pairs; the rest form the
    /// background training set.
    pub eval_docs: usize,
    pub pairs: usize,
    pub citations_per_doc: usize,
    /// Half-width of the uniform noise added to expert scores (0–10 scale).
    pub noise: f64,
    pub seed: u64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig {
            docs: 200,
            clusters: 8,
            eval_docs: 60,
            pairs: 150,
            citations_per_doc: 6,
            noise: 1.0,
            seed: crate::DEFAULT_SEED,
        }
    }
}

pub struct PlantedBenchmark {
    pub corpus: Corpus,
    pub pairs: Vec<EvaluationPair>,
}

const ROLE_CUES: [&str; 7] = [
    "",
    "The appellant contended that",
    "We are of the view that",
    "Section 12 of the Act provides that",
    "As observed in Sharma v. State of Punjab,",
    "The High Court held that",
    "For these reasons we dismiss the appeal, and",
];

/// A corpus whose expert scores are a noisy increasing function of
/// bibliographic overlap.
///
/// Documents belong to clusters. Each cites mostly its cluster's core
/// documents (with a per-document affinity) and otherwise any document.
/// Text is drawn from a cluster vocabulary mixed with a shared one, with
/// rhetorical cue phrases opening the paragraphs. Expert scores are
/// `clamp(10 * jaccard(out_a, out_b) + U(-noise, noise), 0, 10)`.
pub fn planted_benchmark(cfg: &PlantedConfig) -> PlantedBenchmark {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let names: Vec<DocumentId> = (0..cfg.docs).map(|i| id(&format!("d{i:03}"))).collect();
    let cluster_of: Vec<usize> = (0..cfg.docs).map(|i| i % cfg.clusters).collect();
    let core: Vec<Vec<usize>> = (0..cfg.clusters)
        .map(|c| (0..cfg.docs).filter(|&i| cluster_of[i] == c).take(5).collect())
        .collect();

    let mut corpus = Corpus::new();
    let mut edges = Vec::new();
    for (i, name) in names.iter().enumerate() {
        let c = cluster_of[i];
        let affinity: f64 = rng.gen_range(0.3..0.9);
        let paragraphs = rng.gen_range(3..7);
        let text: Vec<String> = (0..paragraphs)
            .map(|p| {
                let cue = ROLE_CUES[if p == 0 { 0 } else { rng.gen_range(0..ROLE_CUES.len()) }];
                let words: Vec<String> = (0..25)
                    .map(|_| {
                        if rng.gen_bool(affinity) {
                            format!("issue{c}w{}", rng.gen_range(0..40))
                        } else {
                            format!("common{}", rng.gen_range(0..80))
                        }
                    })
                    .collect();
                format!("{cue} {}.", words.join(" ")).trim().to_owned()
            })
            .collect();
        corpus
            .insert(Document::new(name.clone(), text.join("\n\n")))
            .expect("unique");

        let mut cited = BTreeSet::new();
        for _ in 0..cfg.citations_per_doc * 4 {
            if cited.len() == cfg.citations_per_doc {
                break;
            }
            let target = if rng.gen_bool(affinity) {
                *core[c].choose(&mut rng).expect("cluster core non-empty")
            } else {
                rng.gen_range(0..cfg.docs)
            };
            if target != i {
                cited.insert(target);
            }
        }
        edges.extend(cited.into_iter().map(|t| (i, t)));
    }
    for (s, t) in edges {
        corpus.cite(names[s].clone(), names[t].clone(), true).expect("valid");
    }

    let graph = crate::graph::build_graph(&corpus);
    let eval: Vec<usize> = (cfg.docs - cfg.eval_docs..cfg.docs).collect();
    let mut seen = BTreeSet::new();
    let mut pairs = Vec::with_capacity(cfg.pairs);
    let max_pairs = cfg.eval_docs * (cfg.eval_docs - 1) / 2;
    while pairs.len() < cfg.pairs.min(max_pairs) {
        let a = *eval.choose(&mut rng).expect("eval docs");
        // Bias half the pairs toward the same cluster so overlap varies.
        let b = if rng.gen_bool(0.5) {
            *eval
                .iter()
                .filter(|&&b| cluster_of[b] == cluster_of[a] && b != a)
                .collect::<Vec<_>>()
                .choose(&mut rng)
                .copied()
                .unwrap_or(&eval[0])
        } else {
            *eval.choose(&mut rng).expect("eval docs")
        };
        let key = (a.min(b), a.max(b));
        if a == b || !seen.insert(key) {
            continue;
        }
        let jac = crate::graph::biblio_coupling(&graph, &names[a], &names[b])
            .expect("known nodes")
            .value;
        let noise = if cfg.noise > 0.0 { rng.gen_range(-cfg.noise..cfg.noise) } else { 0.0 };
        let score = (10.0 * jac + noise).clamp(0.0, 10.0);
        pairs.push(EvaluationPair::new(names[a].clone(), names[b].clone(), score).expect("valid pair"));
    }
    PlantedBenchmark { corpus, pairs }
}

impl PlantedBenchmark {
    /// Writes `docs/<id>.txt`, `citations.csv` and `pairs.csv` under `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        let docs = dir.join("docs");
        fs::create_dir_all(&docs).map_err(|e| Error::io(&docs, e))?;
        for doc in self.corpus.documents.values() {
            let path = docs.join(format!("{}.txt", doc.id));
            fs::write(&path, &doc.text).map_err(|e| Error::io(&path, e))?;
        }
        let path = dir.join("citations.csv");
        let mut out = String::from("src,dst\n");
        for c in &self.corpus.citations {
            out.push_str(&format!("{},{}\n", c.src, c.dst));
        }
        fs::write(&path, out).map_err(|e| Error::io(&path, e))?;

        let path = dir.join("pairs.csv");
        let mut file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut out = String::from("doc_a,doc_b,score\n");
        for p in &self.pairs {
            out.push_str(&format!("{},{},{}\n", p.a, p.b, p.expert_score));
        }
        file.write_all(out.as_bytes()).map_err(|e| Error::io(&path, e))?;
        Ok(())
    }
}
