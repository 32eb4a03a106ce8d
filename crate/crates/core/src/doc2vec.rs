//! Whole-document embeddings in the distributed bag-of-words style.
//!
//! Every training document owns a vector that is trained to predict the
//! document's words through negative sampling against shared word output
//! vectors. Held-out documents get vectors by inference: a fresh document
//! vector is fitted to the same objective while word outputs stay frozen.

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::alias::AliasTable;
use crate::corpus::{tokenize, Corpus, Document, DocumentId, Stopwords, Token};
use crate::error::{Error, Result};
use crate::node2vec::parse_vector_line;
use crate::score::{Method, SimilarityScore};
use crate::sgns::{cosine_dense, init_component, noise_table, shard, Frozen, Objective, TrainConfig, Weights};

pub const DEFAULT_INFER_EPOCHS: usize = 50;

#[derive(Debug, Clone)]
pub struct DocEmbeddingModel {
    pub cfg: TrainConfig,
    pub doc_vectors: BTreeMap<DocumentId, Vec<f32>>,
    vocabulary: Vec<Token>,
    index: HashMap<Token, u32>,
    counts: Vec<u64>,
    /// Row-major word output vectors, `vocabulary.len() x dimensions`.
    word_output: Vec<f32>,
    noise: AliasTable,
    /// Mean loss per (document, word) update for each training epoch.
    pub epoch_losses: Vec<f64>,
}

impl PartialEq for DocEmbeddingModel {
    fn eq(&self, other: &Self) -> bool {
        self.cfg == other.cfg
            && self.doc_vectors == other.doc_vectors
            && self.vocabulary == other.vocabulary
            && self.counts == other.counts
            && self.word_output == other.word_output
    }
}

pub fn train_doc_embeddings(
    corpus: &Corpus,
    holdout: &BTreeSet<DocumentId>,
    cfg: &TrainConfig,
) -> Result<DocEmbeddingModel> {
    train_doc_embeddings_with(corpus, holdout, cfg, &Stopwords::empty())
}

/// Trains on every corpus document outside `holdout`.
pub fn train_doc_embeddings_with(
    corpus: &Corpus,
    holdout: &BTreeSet<DocumentId>,
    cfg: &TrainConfig,
    stopwords: &Stopwords,
) -> Result<DocEmbeddingModel> {
    cfg.validate()?;
    let training: Vec<(&DocumentId, Vec<Token>)> = corpus
        .documents
        .values()
        .filter(|d| !holdout.contains(&d.id))
        .map(|d| (&d.id, stopwords.tokenize(&d.text)))
        .collect();
    if training.is_empty() {
        return Err(Error::EmptyTraining("every document is held out".into()));
    }

    let mut freq: BTreeMap<&Token, u64> = BTreeMap::new();
    for (_, tokens) in &training {
        for t in tokens {
            *freq.entry(t).or_default() += 1;
        }
    }
    let min = cfg.min_count.max(1) as u64;
    let (vocabulary, counts): (Vec<Token>, Vec<u64>) = freq
        .into_iter()
        .filter(|&(_, c)| c >= min)
        .map(|(t, c)| (t.clone(), c))
        .unzip();
    if vocabulary.is_empty() {
        return Err(Error::EmptyTraining(format!(
            "no token occurs at least {min} times"
        )));
    }
    let index: HashMap<Token, u32> = vocabulary.iter().cloned().zip(0..).collect();

    let mut docs: Vec<(&DocumentId, Vec<u32>)> = Vec::with_capacity(training.len());
    for (id, tokens) in &training {
        let rows: Vec<u32> = tokens.iter().filter_map(|t| index.get(t).copied()).collect();
        if rows.is_empty() {
            log::warn!("document {id} has no in-vocabulary tokens; skipped");
            continue;
        }
        docs.push((id, rows));
    }
    if docs.is_empty() {
        return Err(Error::EmptyTraining("no document has an in-vocabulary token".into()));
    }

    let noise = noise_table(&counts).expect("vocabulary is non-empty");
    let dim = cfg.dimensions;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let doc_weights = Weights::random(docs.len(), dim, &mut rng);
    let output = Weights::zeros(vocabulary.len(), dim);
    let objective = Objective {
        output: &output,
        noise: &noise,
        negatives: cfg.negative_samples,
        update_output: true,
    };

    let per_epoch: u64 = docs.iter().map(|(_, r)| r.len() as u64).sum();
    let total = per_epoch * cfg.epochs as u64;
    let mut order: Vec<usize> = (0..docs.len()).collect();
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let shards = shard(&order, cfg.threads);
        let run = |(shard_no, part): (usize, &[usize])| -> (f64, u64) {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(((epoch as u64) << 32) | (shard_no as u64 + 1));
            let mut done = epoch as u64 * per_epoch + (shard_no as u64 * per_epoch) / shards.len() as u64;
            let (mut center, mut grad, mut scratch) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
            let mut loss = 0.0;
            let mut steps = 0u64;
            for &d in part {
                for &w in &docs[d].1 {
                    let lr = cfg.rate_at(done, total);
                    done += 1;
                    doc_weights.read(d, &mut center);
                    grad.iter_mut().for_each(|g| *g = 0.0);
                    loss += objective.step(&center, w as usize, lr, &mut rng, &mut grad, &mut scratch);
                    doc_weights.add(d, &grad, 1.0);
                    steps += 1;
                }
            }
            (loss, steps)
        };
        let results: Vec<(f64, u64)> = if shards.len() == 1 {
            vec![run((0, shards[0]))]
        } else {
            std::thread::scope(|scope| {
                let handles: Vec<_> = shards
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        let run = &run;
                        scope.spawn(move || run((i, s)))
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
            })
        };
        let (loss, steps) = results.iter().fold((0.0, 0u64), |(l, s), (dl, ds)| (l + dl, s + ds));
        epoch_losses.push(loss / steps.max(1) as f64);
        log::debug!("docvec epoch {} loss {:.5}", epoch + 1, epoch_losses[epoch]);
    }

    let doc_vectors = docs
        .iter()
        .map(|(id, _)| (*id).clone())
        .zip(doc_weights.into_rows())
        .collect();
    Ok(DocEmbeddingModel {
        cfg: cfg.clone(),
        doc_vectors,
        vocabulary,
        index,
        counts,
        word_output: output.into_rows().concat(),
        noise,
        epoch_losses,
    })
}

/// Fits a vector for `doc` against the frozen word outputs.
pub fn infer_doc_vector(m: &DocEmbeddingModel, doc: &Document, infer_epochs: usize, seed: u64) -> Result<Vec<f32>> {
    m.infer_tokens(&tokenize(&doc.text), infer_epochs, seed)
        .ok_or_else(|| Error::OutOfVocabulary(doc.id.to_string()))
}

impl DocEmbeddingModel {
    pub fn dimensions(&self) -> usize {
        self.cfg.dimensions
    }

    pub fn vocabulary(&self) -> &[Token] {
        &self.vocabulary
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    /// Inference over raw tokens. `None` when no token is in the vocabulary.
    pub fn infer_tokens(&self, tokens: &[Token], epochs: usize, seed: u64) -> Option<Vec<f32>> {
        let rows: Vec<usize> = tokens
            .iter()
            .filter_map(|t| self.index.get(t).map(|&r| r as usize))
            .collect();
        if rows.is_empty() {
            return None;
        }
        let dim = self.cfg.dimensions;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut vector: Vec<f32> = (0..dim).map(|_| init_component(&mut rng, dim)).collect();
        let output = Frozen {
            data: &self.word_output,
            dim,
        };
        let objective = Objective {
            output: &output,
            noise: &self.noise,
            negatives: self.cfg.negative_samples,
            update_output: false,
        };
        let total = (rows.len() * epochs) as u64;
        let (mut grad, mut scratch) = (vec![0.0; dim], vec![0.0; dim]);
        let mut done = 0;
        for _ in 0..epochs {
            for &w in &rows {
                let lr = self.cfg.rate_at(done, total);
                done += 1;
                grad.iter_mut().for_each(|g| *g = 0.0);
                objective.step(&vector, w, lr, &mut rng, &mut grad, &mut scratch);
                vector.iter_mut().zip(&grad).for_each(|(v, g)| *v += g);
            }
        }
        Some(vector)
    }

    /// The stored vector of a training document, otherwise an inferred one
    /// (seeded with the training seed).
    pub fn vector_for(&self, doc: &Document, infer_epochs: usize) -> Result<Cow<'_, [f32]>> {
        match self.doc_vectors.get(&doc.id) {
            Some(v) => Ok(Cow::Borrowed(v)),
            None => infer_doc_vector(self, doc, infer_epochs, self.cfg.seed).map(Cow::Owned),
        }
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let dim = self.cfg.dimensions;
        writeln!(out, "{DOC_MODEL_MAGIC} {}", self.cfg.header_fields())?;
        writeln!(out, "[docs] {}", self.doc_vectors.len())?;
        for (id, v) in &self.doc_vectors {
            write!(out, "{id} {dim}")?;
            for x in v {
                write!(out, " {x}")?;
            }
            writeln!(out)?;
        }
        writeln!(out, "[words] {}", self.vocabulary.len())?;
        for (i, token) in self.vocabulary.iter().enumerate() {
            write!(out, "{token} {} {dim}", self.counts[i])?;
            for x in &self.word_output[i * dim..(i + 1) * dim] {
                write!(out, " {x}")?;
            }
            writeln!(out)?;
        }
        out.flush()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write(std::io::BufWriter::new(file)).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let err = |line: usize, m: String| Error::parse(path, line, m);
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

        let (_, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
        let fields = header
            .strip_prefix(DOC_MODEL_MAGIC)
            .ok_or_else(|| err(1, format!("expected header `{DOC_MODEL_MAGIC}`")))?;
        let cfg = parse_header(fields).map_err(|m| err(1, m))?;
        let dim = cfg.dimensions;

        let mut section = None;
        let mut doc_vectors = BTreeMap::new();
        let (mut vocabulary, mut counts, mut word_output) = (Vec::new(), Vec::new(), Vec::new());
        for (n, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            if line.starts_with("[docs]") || line.starts_with("[words]") {
                section = Some(line.starts_with("[docs]"));
                continue;
            }
            match section {
                None => return Err(err(n, "data before section marker".into())),
                Some(true) => {
                    let (id, v) = parse_vector_line(line).map_err(|m| err(n, m))?;
                    if v.len() != dim {
                        return Err(err(n, format!("expected dimension {dim}")));
                    }
                    let id = DocumentId::new(id).map_err(|e| err(n, e.to_string()))?;
                    doc_vectors.insert(id, v);
                }
                Some(false) => {
                    let (token, rest) = line.split_once(' ').ok_or_else(|| err(n, "truncated line".into()))?;
                    let (count, vector) = rest.split_once(' ').ok_or_else(|| err(n, "truncated line".into()))?;
                    let count: u64 = count.parse().map_err(|e| err(n, format!("bad count: {e}")))?;
                    let (_, v) = parse_vector_line(&format!("_ {vector}")).map_err(|m| err(n, m))?;
                    if v.len() != dim {
                        return Err(err(n, format!("expected dimension {dim}")));
                    }
                    vocabulary.push(Token::from_raw(token).map_err(|e| err(n, e.to_string()))?);
                    counts.push(count);
                    word_output.extend(v);
                }
            }
        }
        let noise = noise_table(&counts).ok_or_else(|| err(0, "empty vocabulary".into()))?;
        let index = vocabulary.iter().cloned().zip(0..).collect();
        Ok(DocEmbeddingModel {
            cfg,
            doc_vectors,
            vocabulary,
            index,
            counts,
            word_output,
            noise,
            epoch_losses: Vec::new(),
        })
    }
}

const DOC_MODEL_MAGIC: &str = "# lexsim docvec v1";

fn parse_header(fields: &str) -> std::result::Result<TrainConfig, String> {
    let mut cfg = TrainConfig::docvec();
    for kv in fields.split_ascii_whitespace() {
        let (k, v) = kv.split_once('=').ok_or_else(|| format!("bad header field {kv:?}"))?;
        let bad = |e: &dyn std::fmt::Display| format!("bad value for {k}: {e}");
        match k {
            "dimensions" => cfg.dimensions = v.parse().map_err(|e| bad(&e))?,
            "window" => cfg.window = v.parse().map_err(|e| bad(&e))?,
            "negative" => cfg.negative_samples = v.parse().map_err(|e| bad(&e))?,
            "epochs" => cfg.epochs = v.parse().map_err(|e| bad(&e))?,
            "alpha" => cfg.learning_rate = v.parse().map_err(|e| bad(&e))?,
            "min_alpha" => cfg.min_learning_rate = v.parse().map_err(|e| bad(&e))?,
            "min_count" => cfg.min_count = v.parse().map_err(|e| bad(&e))?,
            "seed" => cfg.seed = v.parse().map_err(|e| bad(&e))?,
            "threads" => cfg.threads = v.parse().map_err(|e| bad(&e))?,
            _ => {}
        }
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

/// Cosine between the (stored or inferred) vectors of two documents.
pub fn fulltext_similarity(m: &DocEmbeddingModel, d1: &Document, d2: &Document) -> Result<SimilarityScore> {
    fulltext_similarity_with(m, d1, d2, DEFAULT_INFER_EPOCHS)
}

pub fn fulltext_similarity_with(
    m: &DocEmbeddingModel,
    d1: &Document,
    d2: &Document,
    infer_epochs: usize,
) -> Result<SimilarityScore> {
    let v1 = m.vector_for(d1, infer_epochs)?;
    let v2 = m.vector_for(d2, infer_epochs)?;
    let value = cosine_dense(&v1, &v2).ok_or_else(|| Error::ZeroVector(d1.id.to_string()))?;
    Ok(SimilarityScore::new(Method::FullText, &d1.id, &d2.id, value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::two_topic_corpus;

    fn small_cfg(seed: u64) -> TrainConfig {
        TrainConfig {
            dimensions: 16,
            epochs: 10,
            seed,
            ..TrainConfig::docvec()
        }
    }

    #[test]
    fn shape_and_determinism() {
        let (corpus, _) = two_topic_corpus(10, 50, 200, 1);
        let m1 = train_doc_embeddings(&corpus, &BTreeSet::new(), &small_cfg(3)).unwrap();
        let m2 = train_doc_embeddings(&corpus, &BTreeSet::new(), &small_cfg(3)).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(m1.doc_vectors.len(), 20);
        assert!(m1.doc_vectors.values().all(|v| v.len() == 16));
        assert!(m1.vocabulary().len() <= 100);
    }

    #[test]
    fn holdout_is_excluded() {
        let (corpus, _) = two_topic_corpus(10, 50, 200, 1);
        let holdout: BTreeSet<DocumentId> = corpus.documents.keys().take(3).cloned().collect();
        let m = train_doc_embeddings(&corpus, &holdout, &small_cfg(1)).unwrap();
        assert_eq!(m.doc_vectors.len(), 17);
        assert!(holdout.iter().all(|h| !m.doc_vectors.contains_key(h)));

        let all: BTreeSet<DocumentId> = corpus.documents.keys().cloned().collect();
        assert!(matches!(
            train_doc_embeddings(&corpus, &all, &small_cfg(1)),
            Err(Error::EmptyTraining(_))
        ));
    }

    #[test]
    fn min_count_can_empty_the_vocabulary() {
        let mut corpus = Corpus::new();
        corpus
            .insert(Document::new(DocumentId::new("a").unwrap(), "one two three"))
            .unwrap();
        assert!(matches!(
            train_doc_embeddings(&corpus, &BTreeSet::new(), &TrainConfig::docvec()),
            Err(Error::EmptyTraining(_))
        ));
    }

    #[test]
    fn inference_rules() {
        let (corpus, _) = two_topic_corpus(10, 50, 200, 2);
        let m = train_doc_embeddings(&corpus, &BTreeSet::new(), &small_cfg(2)).unwrap();
        let oov = Document::new(DocumentId::new("x").unwrap(), "zzzz qqqq");
        assert!(matches!(infer_doc_vector(&m, &oov, 5, 1), Err(Error::OutOfVocabulary(_))));

        let text = corpus.documents.values().next().unwrap().text.clone();
        let a = Document::new(DocumentId::new("h1").unwrap(), text.clone());
        let b = Document::new(DocumentId::new("h2").unwrap(), text);
        assert_eq!(infer_doc_vector(&m, &a, 20, 9).unwrap(), infer_doc_vector(&m, &b, 20, 9).unwrap());
        let s = fulltext_similarity(&m, &a, &b).unwrap().value;
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trained_document_reinfers_close_to_itself() {
        let (corpus, _) = two_topic_corpus(10, 50, 200, 5);
        let m = train_doc_embeddings(&corpus, &BTreeSet::new(), &small_cfg(5)).unwrap();
        for doc in corpus.documents.values().take(5) {
            let inferred = infer_doc_vector(&m, doc, DEFAULT_INFER_EPOCHS, 77).unwrap();
            let cos = cosine_dense(&inferred, &m.doc_vectors[&doc.id]).unwrap();
            assert!(cos > 0.5, "{} self-cosine {cos}", doc.id);
        }
    }

    #[test]
    fn loss_decreases_over_first_epochs() {
        let (corpus, _) = two_topic_corpus(10, 50, 200, 8);
        let m = train_doc_embeddings(&corpus, &BTreeSet::new(), &TrainConfig::docvec()).unwrap();
        let l = &m.epoch_losses;
        assert!(l[1] <= l[0] && l[2] <= l[1] && l[3] <= l[2], "{l:?}");
    }

    #[test]
    fn persistence_round_trip() {
        let (corpus, _) = two_topic_corpus(4, 20, 60, 4);
        let m = train_doc_embeddings(&corpus, &BTreeSet::new(), &small_cfg(4)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("doc.model");
        m.save(&path).unwrap();
        let loaded = DocEmbeddingModel::load(&path).unwrap();
        assert_eq!(loaded, m);
        let doc = Document::new(DocumentId::new("q").unwrap(), corpus.documents.values().next().unwrap().text.clone());
        assert_eq!(infer_doc_vector(&m, &doc, 5, 3).unwrap(), infer_doc_vector(&loaded, &doc, 5, 3).unwrap());
    }
}
