//! Benchmarking similarity methods against expert-scored document pairs.
//!
//! Every method scores every pair it can. Pairs a method cannot score are
//! left out of that method's correlation and counted in its coverage, never
//! imputed. Network and text scores can be folded pair by pair with max or
//! mean before correlating.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::corpus::{csv_error, Corpus, DocumentId, Stopwords};
use crate::doc2vec::{train_doc_embeddings_with, DocEmbeddingModel, DEFAULT_INFER_EPOCHS};
use crate::error::{Error, Result};
use crate::graph::{biblio_coupling, build_graph, co_citation, dispersion, CitationGraph};
use crate::node2vec::{generate_walks, node_cosine, train_node_embeddings, NodeEmbeddingModel, WalkConfig};
use crate::score::{Aggregation, Method, SegmentRep};
use crate::sgns::{cosine_dense, TrainConfig};
use crate::thematic::{
    segment_document, thematic_similarity, AnnotatedSegmenter, CueLexicon, SegmentContext, SegmentedDocument,
};
use crate::tfidf::{fit_tfidf, paragraph_links_similarity, TfIdfModel, DEFAULT_PARA_THRESHOLD};

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationPair {
    pub a: DocumentId,
    pub b: DocumentId,
    /// Expert similarity on a 0–10 scale.
    pub expert_score: f64,
}

impl EvaluationPair {
    pub fn new(a: DocumentId, b: DocumentId, expert_score: f64) -> Result<Self> {
        if a == b {
            return Err(Error::IdenticalPair(a.to_string()));
        }
        if !(0.0..=10.0).contains(&expert_score) {
            return Err(Error::Invalid(format!(
                "expert score {expert_score} for ({a}, {b}) outside [0, 10]"
            )));
        }
        Ok(EvaluationPair { a, b, expert_score })
    }
}

/// Reads a `doc_a,doc_b,score` CSV. When `corpus` is given, ids missing from
/// it are an error in `strict` mode and a warning otherwise.
pub fn load_pairs(path: &Path, corpus: Option<&Corpus>, strict: bool) -> Result<Vec<EvaluationPair>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["doc_a", "doc_b", "score"] {
        return Err(Error::parse(path, 1, "expected header `doc_a,doc_b,score`"));
    }

    let mut pairs = Vec::new();
    let mut seen = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let fail = |m: String| Error::parse(path, line, m);
        if record.len() != 3 {
            return Err(fail("expected 3 fields".into()));
        }
        let a = DocumentId::new(&record[0]).map_err(|e| fail(e.to_string()))?;
        let b = DocumentId::new(&record[1]).map_err(|e| fail(e.to_string()))?;
        let score: f64 = record[2]
            .parse()
            .map_err(|e| fail(format!("bad score {:?}: {e}", &record[2])))?;
        let pair = EvaluationPair::new(a, b, score).map_err(|e| fail(e.to_string()))?;
        if let Some(corpus) = corpus {
            for id in [&pair.a, &pair.b] {
                if corpus.get(id.as_str()).is_none() {
                    if strict {
                        return Err(fail(format!("unknown document {id}")));
                    }
                    log::warn!("{}:{line}: unknown document {id}", path.display());
                }
            }
        }
        let key = if pair.a < pair.b {
            (pair.a.clone(), pair.b.clone())
        } else {
            (pair.b.clone(), pair.a.clone())
        };
        if !seen.insert(key) {
            return Err(fail(format!("duplicate pair ({}, {})", pair.a, pair.b)));
        }
        pairs.push(pair);
    }
    Ok(pairs)
}

/// Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Invalid(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::Invalid("correlation needs at least two points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Invalid("zero variance".into()));
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    // Rounding can leave exact linear relations a few ulps short of ±1.
    const SNAP: f64 = 8.0 * f64::EPSILON;
    Ok(if (1.0 - r.abs()) <= SNAP { r.signum() } else { r.clamp(-1.0, 1.0) })
}

/// Folds a network score and a text score.
pub fn combine(s1: f64, s2: f64, agg: Aggregation) -> f64 {
    match agg {
        Aggregation::Max => s1.max(s2),
        Aggregation::Average => (s1 + s2) / 2.0,
    }
}

/// A network method paired with a text method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Combination {
    pub network: Method,
    pub text: Method,
    pub agg: Aggregation,
}

impl Combination {
    pub fn name(&self) -> String {
        format!("{}+{}:{}", self.network, self.text, self.agg)
    }
}

impl std::str::FromStr for Combination {
    type Err = Error;

    /// Parses `network:text:agg`, e.g. `biblio:fulltext:max`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [network, text, agg] = parts[..] else {
            return Err(Error::Config(format!("combination {s:?} is not network:text:agg")));
        };
        Ok(Combination {
            network: network.parse()?,
            text: text.parse()?,
            agg: agg.parse()?,
        })
    }
}

/// Something that assigns a similarity to a document pair.
pub trait PairScorer: Sync {
    fn name(&self) -> String;
    fn score(&self, a: &DocumentId, b: &DocumentId) -> Result<f64>;
}

/// Where thematic segments come from.
#[derive(Debug, Clone)]
pub enum SegmentSource {
    Heuristic(CueLexicon),
    Annotated(PathBuf),
}

/// Everything needed to build a [`ScoringContext`].
#[derive(Debug, Clone)]
pub struct ContextOptions {
    pub walk: WalkConfig,
    pub node_train: TrainConfig,
    pub doc_train: TrainConfig,
    pub infer_epochs: usize,
    pub para_threshold: f64,
    pub dispersion_normalized: bool,
    pub segments: SegmentSource,
    pub stopwords: Stopwords,
    /// Pre-trained models; trained from the corpus when absent and needed.
    pub node_model: Option<NodeEmbeddingModel>,
    pub doc_model: Option<DocEmbeddingModel>,
}

impl Default for ContextOptions {
    fn default() -> Self {
        ContextOptions {
            walk: WalkConfig::default(),
            node_train: TrainConfig::node2vec(),
            doc_train: TrainConfig::docvec(),
            infer_epochs: DEFAULT_INFER_EPOCHS,
            para_threshold: DEFAULT_PARA_THRESHOLD,
            dispersion_normalized: true,
            segments: SegmentSource::Heuristic(CueLexicon::default()),
            stopwords: Stopwords::empty(),
            node_model: None,
            doc_model: None,
        }
    }
}

/// Models and caches for scoring pairs of one corpus with built-in methods.
pub struct ScoringContext<'c> {
    corpus: &'c Corpus,
    pub graph: CitationGraph,
    pub node_model: Option<NodeEmbeddingModel>,
    pub tfidf: Option<TfIdfModel>,
    pub doc_model: Option<DocEmbeddingModel>,
    doc_vectors: BTreeMap<DocumentId, std::result::Result<Vec<f32>, String>>,
    segments: BTreeMap<DocumentId, std::result::Result<SegmentedDocument, String>>,
    infer_epochs: usize,
    infer_seed: u64,
    para_threshold: f64,
    dispersion_normalized: bool,
}

impl<'c> ScoringContext<'c> {
    /// Builds (or adopts) the models the requested methods need. Document
    /// embeddings are trained with every evaluation document held out.
    pub fn build(
        corpus: &'c Corpus,
        pairs: &[EvaluationPair],
        methods: &[Method],
        opts: ContextOptions,
    ) -> Result<Self> {
        let needs = |pred: fn(&Method) -> bool| methods.iter().any(pred);
        let graph = build_graph(corpus);

        let node_model = match (needs(|m| *m == Method::Node2Vec), opts.node_model) {
            (true, Some(m)) => Some(m),
            (true, None) => {
                log::info!("training node embeddings on {} nodes", graph.node_count());
                let walks = generate_walks(&graph, &opts.walk)?;
                Some(train_node_embeddings(&walks, &opts.node_train)?)
            }
            (false, _) => None,
        };

        let tfidf = if needs(|m| matches!(m, Method::ParagraphLinks | Method::Thematic(SegmentRep::TfIdf, _))) {
            let units: Vec<_> = corpus
                .documents
                .values()
                .flat_map(|d| d.paragraphs.iter().map(|p| opts.stopwords.tokenize(p)))
                .collect();
            Some(fit_tfidf(&units)?.with_stopwords(opts.stopwords.clone()))
        } else {
            None
        };

        let eval_ids: BTreeSet<DocumentId> = pairs.iter().flat_map(|p| [p.a.clone(), p.b.clone()]).collect();
        let needs_doc = needs(|m| matches!(m, Method::FullText | Method::Thematic(SegmentRep::DocVec, _)));
        let doc_model = match (needs_doc, opts.doc_model) {
            (true, Some(m)) => Some(m),
            (true, None) => {
                log::info!("training document embeddings ({} held out)", eval_ids.len());
                Some(train_doc_embeddings_with(corpus, &eval_ids, &opts.doc_train, &opts.stopwords)?)
            }
            (false, _) => None,
        };

        let mut doc_vectors = BTreeMap::new();
        if let (Some(model), true) = (&doc_model, needs(|m| *m == Method::FullText)) {
            let docs: Vec<_> = eval_ids.iter().filter_map(|id| corpus.get(id.as_str())).collect();
            doc_vectors = docs
                .par_iter()
                .map(|doc| {
                    let v = model
                        .vector_for(doc, opts.infer_epochs)
                        .map(|v| v.into_owned())
                        .map_err(|e| e.to_string());
                    (doc.id.clone(), v)
                })
                .collect();
        }

        let mut segments = BTreeMap::new();
        if needs(|m| matches!(m, Method::Thematic(..))) {
            let annotated;
            let segmenter: &dyn crate::thematic::Segmenter = match &opts.segments {
                SegmentSource::Heuristic(lex) => lex,
                SegmentSource::Annotated(dir) => {
                    annotated = AnnotatedSegmenter::new(dir);
                    &annotated
                }
            };
            for id in &eval_ids {
                if let Some(doc) = corpus.get(id.as_str()) {
                    segments.insert(id.clone(), segment_document(doc, segmenter).map_err(|e| e.to_string()));
                }
            }
        }

        Ok(ScoringContext {
            corpus,
            graph,
            node_model,
            tfidf,
            infer_seed: doc_model.as_ref().map_or(0, |m| m.cfg.seed),
            doc_model,
            doc_vectors,
            segments,
            infer_epochs: opts.infer_epochs,
            para_threshold: opts.para_threshold,
            dispersion_normalized: opts.dispersion_normalized,
        })
    }

    fn document(&self, id: &DocumentId) -> Result<&crate::corpus::Document> {
        self.corpus
            .get(id.as_str())
            .ok_or_else(|| Error::UnknownDocument(id.to_string()))
    }

    fn segmented(&self, id: &DocumentId) -> Result<&SegmentedDocument> {
        match self.segments.get(id) {
            Some(Ok(s)) => Ok(s),
            Some(Err(e)) => Err(Error::Invalid(e.clone())),
            None => Err(Error::MissingSegments(id.to_string())),
        }
    }

    fn doc_vector(&self, id: &DocumentId) -> Result<std::borrow::Cow<'_, [f32]>> {
        match self.doc_vectors.get(id) {
            Some(Ok(v)) => Ok(std::borrow::Cow::Borrowed(v)),
            Some(Err(e)) => Err(Error::Invalid(e.clone())),
            None => {
                let model = self.doc_model.as_ref().ok_or_else(|| Error::Config("no document model".into()))?;
                model.vector_for(self.document(id)?, self.infer_epochs)
            }
        }
    }

    /// Scores one pair with a built-in method.
    pub fn score(&self, method: Method, a: &DocumentId, b: &DocumentId) -> Result<f64> {
        let missing = |what: &str| Error::Config(format!("{method} needs {what}"));
        let score = match method {
            Method::Biblio => biblio_coupling(&self.graph, a, b)?.value,
            Method::CoCitation => co_citation(&self.graph, a, b)?.value,
            Method::Dispersion => dispersion(&self.graph, a, b, self.dispersion_normalized)?.value,
            Method::Node2Vec => {
                let model = self.node_model.as_ref().ok_or_else(|| missing("a node model"))?;
                node_cosine(model, a, b)?.value
            }
            Method::ParagraphLinks => {
                let model = self.tfidf.as_ref().ok_or_else(|| missing("a TF-IDF model"))?;
                paragraph_links_similarity(self.document(a)?, self.document(b)?, model, self.para_threshold)?.value
            }
            Method::FullText => {
                if a == b {
                    return Err(Error::IdenticalPair(a.to_string()));
                }
                let (va, vb) = (self.doc_vector(a)?, self.doc_vector(b)?);
                cosine_dense(&va, &vb).ok_or_else(|| Error::ZeroVector(a.to_string()))?
            }
            Method::Thematic(rep, agg) => {
                let ctx = match rep {
                    SegmentRep::TfIdf => SegmentContext::TfIdf(self.tfidf.as_ref().ok_or_else(|| missing("a TF-IDF model"))?),
                    SegmentRep::DocVec => SegmentContext::DocVec {
                        model: self.doc_model.as_ref().ok_or_else(|| missing("a document model"))?,
                        infer_epochs: self.infer_epochs,
                        seed: self.infer_seed,
                    },
                };
                thematic_similarity(self.segmented(a)?, self.segmented(b)?, &ctx, agg)?.value
            }
        };
        Ok(score)
    }

    pub fn scorer(&self, method: Method) -> MethodScorer<'_, 'c> {
        MethodScorer { ctx: self, method }
    }
}

pub struct MethodScorer<'a, 'c> {
    ctx: &'a ScoringContext<'c>,
    method: Method,
}

impl PairScorer for MethodScorer<'_, '_> {
    fn name(&self) -> String {
        self.method.name().to_owned()
    }

    fn score(&self, a: &DocumentId, b: &DocumentId) -> Result<f64> {
        self.ctx.score(self.method, a, b)
    }
}

/// One scored column of the benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodResult {
    pub method: String,
    /// Score per pair index; `None` where the method could not score.
    pub scores: Vec<Option<f64>>,
    pub correlation: f64,
    pub coverage: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    pub pairs: Vec<EvaluationPair>,
    pub results: Vec<MethodResult>,
}

fn score_column(pairs: &[EvaluationPair], scorer: &dyn PairScorer) -> Vec<Option<f64>> {
    pairs
        .par_iter()
        .map(|p| match scorer.score(&p.a, &p.b) {
            Ok(v) => Some(v),
            Err(e) => {
                log::debug!("{}: ({}, {}) unscored: {e}", scorer.name(), p.a, p.b);
                None
            }
        })
        .collect()
}

fn finish(name: String, pairs: &[EvaluationPair], scores: Vec<Option<f64>>) -> Result<MethodResult> {
    let (expert, values): (Vec<f64>, Vec<f64>) = pairs
        .iter()
        .zip(&scores)
        .filter_map(|(p, s)| s.map(|s| (p.expert_score, s)))
        .unzip();
    if values.is_empty() {
        return Err(Error::NoScorablePairs(name));
    }
    let correlation = pearson(&expert, &values).map_err(|e| Error::Invalid(format!("{name}: {e}")))?;
    Ok(MethodResult {
        method: name,
        coverage: values.len(),
        scores,
        correlation,
    })
}

fn rescale(column: &[Option<f64>]) -> Vec<Option<f64>> {
    let present = column.iter().flatten();
    let lo = present.clone().copied().fold(f64::INFINITY, f64::min);
    let hi = present.copied().fold(f64::NEG_INFINITY, f64::max);
    column
        .iter()
        .map(|s| s.map(|v| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 }))
        .collect()
}

/// Scores every pair with each scorer and each combination of two scorers.
///
/// `combinations` name constituents by [`PairScorer::name`]; constituents
/// need not be listed in `scorers` to be combined, but must be resolvable
/// through `extra`. With `rescale`, every combination is additionally
/// reported over min-max normalized constituents.
pub fn run_scorers(
    pairs: &[EvaluationPair],
    scorers: &[&dyn PairScorer],
    extra: &[&dyn PairScorer],
    combinations: &[Combination],
    rescaled: bool,
) -> Result<BenchmarkReport> {
    let mut columns: BTreeMap<String, Vec<Option<f64>>> = BTreeMap::new();
    let mut column = |name: String, scorer: &dyn PairScorer| -> Vec<Option<f64>> {
        columns
            .entry(name)
            .or_insert_with(|| score_column(pairs, scorer))
            .clone()
    };
    let lookup = |name: &str| {
        scorers
            .iter()
            .chain(extra)
            .find(|s| s.name() == name)
            .copied()
            .ok_or_else(|| Error::Config(format!("no scorer named {name}")))
    };

    let mut results = Vec::new();
    for scorer in scorers {
        let scores = column(scorer.name(), *scorer);
        results.push(finish(scorer.name(), pairs, scores)?);
    }
    for combo in combinations {
        let net = column(combo.network.name().to_owned(), lookup(combo.network.name())?);
        let text = column(combo.text.name().to_owned(), lookup(combo.text.name())?);
        let fold = |net: &[Option<f64>], text: &[Option<f64>]| -> Vec<Option<f64>> {
            net.iter()
                .zip(text)
                .map(|(n, t)| Some(combine((*n)?, (*t)?, combo.agg)))
                .collect()
        };
        results.push(finish(combo.name(), pairs, fold(&net, &text))?);
        if rescaled {
            let scores = fold(&rescale(&net), &rescale(&text));
            results.push(finish(format!("{}:rescaled", combo.name()), pairs, scores)?);
        }
    }
    Ok(BenchmarkReport {
        pairs: pairs.to_vec(),
        results,
    })
}

/// Scores `pairs` with built-in methods and combinations.
pub fn run_benchmark(
    ctx: &ScoringContext<'_>,
    pairs: &[EvaluationPair],
    methods: &[Method],
    combinations: &[Combination],
    rescaled: bool,
) -> Result<BenchmarkReport> {
    let requested: Vec<MethodScorer> = methods.iter().map(|&m| ctx.scorer(m)).collect();
    let constituents: Vec<MethodScorer> = combinations
        .iter()
        .flat_map(|c| [c.network, c.text])
        .map(|m| ctx.scorer(m))
        .collect();
    let requested: Vec<&dyn PairScorer> = requested.iter().map(|s| s as &dyn PairScorer).collect();
    let constituents: Vec<&dyn PairScorer> = constituents.iter().map(|s| s as &dyn PairScorer).collect();
    run_scorers(pairs, &requested, &constituents, combinations, rescaled)
}

impl BenchmarkReport {
    /// `doc_a,doc_b,expert,<method>...`; unscored cells are empty. Values
    /// use shortest round-trip formatting.
    pub fn write_pairs_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::Invalid(format!("writing report: {e}"));
        let mut header = vec!["doc_a".to_owned(), "doc_b".to_owned(), "expert".to_owned()];
        header.extend(self.results.iter().map(|r| r.method.clone()));
        w.write_record(&header).map_err(err)?;
        for (i, p) in self.pairs.iter().enumerate() {
            let mut row = vec![p.a.to_string(), p.b.to_string(), p.expert_score.to_string()];
            row.extend(self.results.iter().map(|r| r.scores[i].map_or(String::new(), |v| v.to_string())));
            w.write_record(&row).map_err(err)?;
        }
        w.flush().map_err(|e| Error::Invalid(format!("writing report: {e}")))
    }

    /// `method,correlation,coverage`.
    pub fn write_summary_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::Invalid(format!("writing report: {e}"));
        w.write_record(["method", "correlation", "coverage"]).map_err(err)?;
        for r in &self.results {
            w.write_record([r.method.clone(), r.correlation.to_string(), r.coverage.to_string()])
                .map_err(err)?;
        }
        w.flush().map_err(|e| Error::Invalid(format!("writing report: {e}")))
    }

    /// Human-readable correlation table.
    pub fn pretty(&self) -> String {
        let width = self.results.iter().map(|r| r.method.len()).max().unwrap_or(6).max(6);
        let mut s = String::new();
        let _ = writeln!(s, "{:<width$}  {:>11}  {:>9}", "method", "correlation", "coverage");
        for r in &self.results {
            let _ = writeln!(
                s,
                "{:<width$}  {:>11.3}  {:>9}",
                r.method,
                r.correlation,
                format!("{}/{}", r.coverage, self.pairs.len())
            );
        }
        s
    }

    pub fn result(&self, method: &str) -> Option<&MethodResult> {
        self.results.iter().find(|r| r.method == method)
    }
}

/// Recomputes `(method, correlation, coverage)` from a per-pair CSV.
pub fn summarize_pairs_csv(text: &str) -> Result<Vec<(String, f64, usize)>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Invalid(e.to_string()))?
        .clone();
    let rows: Vec<csv::StringRecord> = reader
        .records()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Invalid(e.to_string()))?;
    let parse = |s: &str| s.parse::<f64>().map_err(|e| Error::Invalid(format!("{s:?}: {e}")));
    let mut out = Vec::new();
    for col in 3..headers.len() {
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for row in &rows {
            if !row[col].is_empty() {
                x.push(parse(&row[2])?);
                y.push(parse(&row[col])?);
            }
        }
        out.push((headers[col].to_owned(), pearson(&x, &y)?, x.len()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn id(s: &str) -> DocumentId {
        DocumentId::new(s).unwrap()
    }

    #[test]
    fn pearson_examples() {
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap(), 1.0);
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        let r = pearson(&[0.0, 3.0, 7.0, 10.0], &[0.195, 0.613, 0.234, 0.574]).unwrap();
        // mpmath at 40 digits: 0.39185013103247526642...
        assert!((r - 0.391_850_131_032_475_3).abs() < 1e-9);
    }

    #[test]
    fn pearson_errors() {
        assert!(pearson(&[1.0, 2.0], &[1.0]).is_err());
        assert!(pearson(&[1.0], &[1.0]).is_err());
        assert!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn combine_examples() {
        assert_eq!(combine(0.3, 0.7, Aggregation::Max), 0.7);
        assert_eq!(combine(0.3, 0.7, Aggregation::Average), 0.5);
        assert_eq!(combine(0.4, 0.4, Aggregation::Max), 0.4);
        assert_eq!(combine(0.4, 0.4, Aggregation::Average), 0.4);
    }

    #[test]
    fn pair_validation() {
        assert!(EvaluationPair::new(id("X"), id("X"), 5.0).is_err());
        assert!(EvaluationPair::new(id("A"), id("B"), 11.0).is_err());
        assert!(EvaluationPair::new(id("A"), id("B"), -0.1).is_err());
        assert!(EvaluationPair::new(id("A"), id("B"), 10.0).is_ok());
    }

    #[test]
    fn load_pairs_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pairs.csv");
        std::fs::write(&path, "doc_a,doc_b,score\n1992_47,1992_76,0\n").unwrap();
        let pairs = load_pairs(&path, None, false).unwrap();
        assert_eq!(pairs, vec![EvaluationPair::new(id("1992_47"), id("1992_76"), 0.0).unwrap()]);

        for bad in ["X,X,5", "A,B,11", "A,B,x"] {
            std::fs::write(&path, format!("doc_a,doc_b,score\n{bad}\n")).unwrap();
            assert!(matches!(load_pairs(&path, None, false), Err(Error::Parse { line: 2, .. })), "{bad}");
        }
        std::fs::write(&path, "doc_a,doc_b,score\nA,B,1\nB,A,2\n").unwrap();
        assert!(load_pairs(&path, None, false).is_err());
        std::fs::write(&path, "a,b,score\nA,B,1\n").unwrap();
        assert!(load_pairs(&path, None, false).is_err());

        let corpus = crate::fixtures::toy_corpus();
        std::fs::write(&path, "doc_a,doc_b,score\nA,Z,1\n").unwrap();
        assert!(load_pairs(&path, Some(&corpus), true).is_err());
        assert_eq!(load_pairs(&path, Some(&corpus), false).unwrap().len(), 1);
    }

    #[test]
    fn combination_parsing() {
        let c: Combination = "biblio:fulltext:max".parse().unwrap();
        assert_eq!(c.network, Method::Biblio);
        assert_eq!(c.text, Method::FullText);
        assert_eq!(c.name(), "biblio+fulltext:max");
        assert!("biblio:fulltext".parse::<Combination>().is_err());
        assert!("biblio:fulltext:median".parse::<Combination>().is_err());
    }

    struct Fixed(&'static str, fn(&DocumentId, &DocumentId) -> Result<f64>);

    impl PairScorer for Fixed {
        fn name(&self) -> String {
            self.0.to_owned()
        }
        fn score(&self, a: &DocumentId, b: &DocumentId) -> Result<f64> {
            (self.1)(a, b)
        }
    }

    fn pairs() -> Vec<EvaluationPair> {
        (0..6)
            .map(|i| EvaluationPair::new(id(&format!("a{i}")), id(&format!("b{i}")), i as f64 * 2.0).unwrap())
            .collect()
    }

    fn idx(a: &DocumentId) -> f64 {
        a.as_str()[1..].parse().unwrap()
    }

    #[test]
    fn affine_scores_correlate_perfectly() {
        let exact = Fixed("exact", |a, _| Ok(idx(a) * 2.0 / 10.0));
        let report = run_scorers(&pairs(), &[&exact], &[], &[], false).unwrap();
        assert_eq!(report.results[0].correlation, 1.0);
        assert_eq!(report.results[0].coverage, 6);
    }

    #[test]
    fn unscorable_pairs_are_dropped_and_counted() {
        let partial = Fixed("partial", |a, _| {
            if idx(a) == 2.0 { Err(Error::MissingVector(a.to_string())) } else { Ok(idx(a)) }
        });
        let report = run_scorers(&pairs(), &[&partial], &[], &[], false).unwrap();
        assert_eq!(report.results[0].coverage, 5);
        assert_eq!(report.results[0].scores[2], None);

        let never = Fixed("never", |a, _| Err(Error::MissingVector(a.to_string())));
        assert!(matches!(
            run_scorers(&pairs(), &[&never], &[], &[], false),
            Err(Error::NoScorablePairs(m)) if m == "never"
        ));
    }

    #[test]
    fn report_round_trip() {
        let s1 = Fixed("biblio", |a, _| Ok((idx(a) * 0.37).sin()));
        let s2 = Fixed("fulltext", |a, _| if idx(a) == 4.0 { Err(Error::Invalid("x".into())) } else { Ok((idx(a) * 1.3).cos()) });
        let combos: Vec<Combination> = vec!["biblio:fulltext:max".parse().unwrap(), "biblio:fulltext:avg".parse().unwrap()];
        let report = run_scorers(&pairs(), &[&s1, &s2], &[], &combos, true).unwrap();
        assert_eq!(report.results.len(), 6);

        let mut buf = Vec::new();
        report.write_pairs_csv(&mut buf).unwrap();
        let recomputed = summarize_pairs_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
        for (r, (name, corr, cov)) in report.results.iter().zip(recomputed) {
            assert_eq!(r.method, name);
            assert_eq!(r.correlation, corr);
            assert_eq!(r.coverage, cov);
        }
        let mut summary = Vec::new();
        report.write_summary_csv(&mut summary).unwrap();
        assert!(String::from_utf8(summary).unwrap().starts_with("method,correlation,coverage\n"));
        assert!(report.pretty().contains("biblio+fulltext:max"));
    }

    proptest! {
        #[test]
        fn pearson_symmetric_and_affine_invariant(
            xy in proptest::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..40),
            scale in 0.01f64..50.0,
            shift in -100.0f64..100.0,
        ) {
            let (x, y): (Vec<f64>, Vec<f64>) = xy.into_iter().unzip();
            if let Ok(r) = pearson(&x, &y) {
                prop_assert!((-1.0..=1.0).contains(&r));
                prop_assert_eq!(r, pearson(&y, &x).unwrap());
                let moved: Vec<f64> = x.iter().map(|v| scale * v + shift).collect();
                prop_assert!((pearson(&moved, &y).unwrap() - r).abs() < 1e-12);
            }
        }

        #[test]
        fn combine_ordering(a in -1.0f64..1.0, b in -1.0f64..1.0) {
            let max = combine(a, b, Aggregation::Max);
            let avg = combine(a, b, Aggregation::Average);
            prop_assert!(max >= avg && avg >= a.min(b));
        }
    }
}
