//! TF-IDF vectors, sparse cosine, and paragraph-link document similarity.
//!
//! Weights are `tf * idf` with raw term counts and smoothed inverse document
//! frequency `ln((1 + N) / (1 + df)) + 1`, then L2-normalized.

use std::collections::{BTreeMap, HashMap};

use crate::corpus::{Document, Stopwords, Token};
use crate::error::{Error, Result};
use crate::score::{Method, SimilarityScore};

/// Paragraph-link threshold used when none is given.
pub const DEFAULT_PARA_THRESHOLD: f64 = 0.3;

#[derive(Debug, Clone)]
pub struct TfIdfModel {
    vocabulary: HashMap<Token, u32>,
    doc_freq: Vec<u64>,
    n_docs: u64,
    stopwords: Stopwords,
}

/// Sparse vector with entries sorted by column and no explicit zeros.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVector {
    entries: Vec<(u32, f64)>,
}

impl SparseVector {
    /// Builds a vector from `(column, weight)` pairs. Zero weights are
    /// dropped and repeated columns summed.
    pub fn from_entries(entries: impl IntoIterator<Item = (u32, f64)>) -> Self {
        let mut merged: BTreeMap<u32, f64> = BTreeMap::new();
        for (i, w) in entries {
            *merged.entry(i).or_default() += w;
        }
        SparseVector {
            entries: merged.into_iter().filter(|&(_, w)| w != 0.0).collect(),
        }
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt()
    }

    pub fn get(&self, column: u32) -> f64 {
        self.entries
            .binary_search_by_key(&column, |&(i, _)| i)
            .map_or(0.0, |k| self.entries[k].1)
    }
}

/// Fits document frequencies over `units`, keeping every token.
pub fn fit_tfidf(units: &[Vec<Token>]) -> Result<TfIdfModel> {
    fit_tfidf_with_min_count(units, 1)
}

/// Fits document frequencies, keeping tokens present in at least
/// `min_count` units.
pub fn fit_tfidf_with_min_count(units: &[Vec<Token>], min_count: u64) -> Result<TfIdfModel> {
    if units.is_empty() {
        return Err(Error::EmptyTraining("no units to fit TF-IDF on".into()));
    }
    let mut df: BTreeMap<&Token, u64> = BTreeMap::new();
    for unit in units {
        let mut seen: Vec<&Token> = unit.iter().collect();
        seen.sort_unstable();
        seen.dedup();
        for t in seen {
            *df.entry(t).or_default() += 1;
        }
    }
    let mut vocabulary = HashMap::new();
    let mut doc_freq = Vec::new();
    for (token, count) in df {
        if count >= min_count.max(1) {
            vocabulary.insert(token.clone(), doc_freq.len() as u32);
            doc_freq.push(count);
        }
    }
    Ok(TfIdfModel {
        vocabulary,
        doc_freq,
        n_docs: units.len() as u64,
        stopwords: Stopwords::empty(),
    })
}

impl TfIdfModel {
    /// Stopwords applied by [`TfIdfModel::transform_text`].
    pub fn with_stopwords(mut self, stopwords: Stopwords) -> Self {
        self.stopwords = stopwords;
        self
    }

    pub fn stopwords(&self) -> &Stopwords {
        &self.stopwords
    }

    pub fn n_docs(&self) -> u64 {
        self.n_docs
    }

    pub fn vocabulary_size(&self) -> usize {
        self.doc_freq.len()
    }

    pub fn column(&self, token: &str) -> Option<u32> {
        self.vocabulary.get(token).copied()
    }

    pub fn doc_freq(&self, token: &str) -> Option<u64> {
        self.column(token).map(|c| self.doc_freq[c as usize])
    }

    pub fn idf(&self, token: &str) -> Option<f64> {
        self.doc_freq(token)
            .map(|df| ((1 + self.n_docs) as f64 / (1 + df) as f64).ln() + 1.0)
    }

    pub fn transform(&self, unit: &[Token]) -> SparseVector {
        transform_tfidf(self, unit)
    }

    pub fn transform_text(&self, text: &str) -> SparseVector {
        transform_tfidf(self, &self.stopwords.tokenize(text))
    }
}

/// L2-normalized TF-IDF vector of a token list. Unknown tokens are dropped.
pub fn transform_tfidf(m: &TfIdfModel, unit: &[Token]) -> SparseVector {
    let mut tf: BTreeMap<u32, u64> = BTreeMap::new();
    for t in unit {
        if let Some(c) = m.column(t.as_str()) {
            *tf.entry(c).or_default() += 1;
        }
    }
    let mut v = SparseVector {
        entries: tf
            .into_iter()
            .map(|(c, n)| {
                let df = m.doc_freq[c as usize];
                let idf = ((1 + m.n_docs) as f64 / (1 + df) as f64).ln() + 1.0;
                (c, n as f64 * idf)
            })
            .collect(),
    };
    let norm = v.norm();
    if norm > 0.0 {
        v.entries.iter_mut().for_each(|(_, w)| *w /= norm);
    }
    v
}

/// Cosine of two sparse vectors; 0 when either is empty.
pub fn cosine(a: &SparseVector, b: &SparseVector) -> f64 {
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let (x, y) = (&a.entries, &b.entries);
    let (mut i, mut j, mut dot) = (0, 0, 0.0);
    while i < x.len() && j < y.len() {
        match x[i].0.cmp(&y[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                dot += x[i].1 * y[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

/// Fraction of paragraphs, across both documents, that link to at least one
/// paragraph of the other document. Two paragraphs link when the cosine of
/// their TF-IDF vectors is strictly above `threshold`.
pub fn paragraph_links_similarity(
    d1: &Document,
    d2: &Document,
    model: &TfIdfModel,
    threshold: f64,
) -> Result<SimilarityScore> {
    for d in [d1, d2] {
        if d.paragraphs.is_empty() {
            return Err(Error::NoParagraphs(d.id.to_string()));
        }
    }
    let v1: Vec<SparseVector> = d1.paragraphs.iter().map(|p| model.transform_text(p)).collect();
    let v2: Vec<SparseVector> = d2.paragraphs.iter().map(|p| model.transform_text(p)).collect();

    let mut linked1 = vec![false; v1.len()];
    let mut linked2 = vec![false; v2.len()];
    for (i, a) in v1.iter().enumerate() {
        for (j, b) in v2.iter().enumerate() {
            if cosine(a, b) > threshold {
                linked1[i] = true;
                linked2[j] = true;
            }
        }
    }
    let linked = linked1.iter().chain(&linked2).filter(|&&l| l).count();
    let value = linked as f64 / (v1.len() + v2.len()) as f64;
    Ok(SimilarityScore::new(Method::ParagraphLinks, &d1.id, &d2.id, value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{tokenize, DocumentId};

    fn toks(words: &[&str]) -> Vec<Token> {
        tokenize(&words.join(" "))
    }

    fn doc(id: &str, text: &str) -> Document {
        Document::new(DocumentId::new(id).unwrap(), text)
    }

    #[test]
    fn fit_counts_presence() {
        let m = fit_tfidf(&[toks(&["a", "b"]), toks(&["b", "c"])]).unwrap();
        assert_eq!(m.vocabulary_size(), 3);
        assert_eq!(m.doc_freq("a"), Some(1));
        assert_eq!(m.doc_freq("b"), Some(2));
        assert_eq!(m.doc_freq("c"), Some(1));
        assert_eq!(m.n_docs(), 2);

        let m = fit_tfidf(&[toks(&["a", "a", "x"])]).unwrap();
        assert_eq!(m.doc_freq("a"), Some(1));
        assert_eq!(m.doc_freq("x"), Some(1));
        assert!(fit_tfidf(&[]).is_err());
    }

    #[test]
    fn min_count_prunes_rare_tokens() {
        let m = fit_tfidf_with_min_count(&[toks(&["a", "b"]), toks(&["b"])], 2).unwrap();
        assert_eq!(m.vocabulary_size(), 1);
        assert!(m.column("a").is_none());
    }

    #[test]
    fn single_unit_weights_follow_counts() {
        let unit = toks(&["a", "a", "b"]);
        let m = fit_tfidf(std::slice::from_ref(&unit)).unwrap();
        assert_eq!(m.idf("a"), Some(1.0));
        let v = transform_tfidf(&m, &unit);
        let s5 = 5f64.sqrt();
        assert!((v.get(m.column("a").unwrap()) - 2.0 / s5).abs() < 1e-12);
        assert!((v.get(m.column("b").unwrap()) - 1.0 / s5).abs() < 1e-12);
    }

    #[test]
    fn oov_only_gives_empty_vector() {
        let m = fit_tfidf(&[toks(&["a"])]).unwrap();
        assert!(transform_tfidf(&m, &toks(&["zz", "yy"])).is_empty());
    }

    #[test]
    fn cosine_examples() {
        let a = SparseVector::from_entries([(0, 1.0)]);
        let b = SparseVector::from_entries([(0, 1.0), (1, 1.0)]);
        assert!((cosine(&a, &b) - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!((cosine(&b, &b) - 1.0).abs() < 1e-15);
        let c = SparseVector::from_entries([(2, 3.0)]);
        assert_eq!(cosine(&a, &c), 0.0);
        assert_eq!(cosine(&a, &SparseVector::default()), 0.0);
    }

    #[test]
    fn paragraph_links_boundaries() {
        let d1 = doc("d1", "court held the contract void\n\nappeal dismissed with costs");
        let d2 = doc("d2", "tenant eviction notice served\n\nlandlord rent arrears");
        let units: Vec<Vec<Token>> = d1.paragraphs.iter().chain(&d2.paragraphs).map(|p| tokenize(p)).collect();
        let m = fit_tfidf(&units).unwrap();

        assert_eq!(paragraph_links_similarity(&d1, &d2, &m, -1.0).unwrap().value, 1.0);
        assert_eq!(paragraph_links_similarity(&d1, &d2, &m, 1.0).unwrap().value, 0.0);
        assert_eq!(paragraph_links_similarity(&d1, &d2, &m, 0.0).unwrap().value, 0.0);
        assert_eq!(paragraph_links_similarity(&d1, &d1, &m, 0.5).unwrap().value, 1.0);

        let empty = doc("e", "   ");
        assert!(matches!(
            paragraph_links_similarity(&d1, &empty, &m, 0.3),
            Err(Error::NoParagraphs(_))
        ));
    }

    #[test]
    fn partial_links() {
        let d1 = doc("d1", "alpha beta\n\ngamma delta");
        let d2 = doc("d2", "alpha beta\n\nepsilon zeta\n\neta theta");
        let units: Vec<Vec<Token>> = d1.paragraphs.iter().chain(&d2.paragraphs).map(|p| tokenize(p)).collect();
        let m = fit_tfidf(&units).unwrap();
        // One paragraph in each document participates.
        let v = paragraph_links_similarity(&d1, &d2, &m, 0.5).unwrap().value;
        assert!((v - 2.0 / 5.0).abs() < 1e-15);
    }
}
