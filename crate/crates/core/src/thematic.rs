//! Rhetorical-role segmentation and segment-wise similarity.
//!
//! A judgment is split into the text of each rhetorical role; two documents
//! are compared role by role over the roles both contain, and the per-role
//! similarities are folded with max or mean.
//!
//! Segmentation is pluggable through [`Segmenter`]. Two implementations
//! ship: [`AnnotatedSegmenter`] reads gold labels from sidecar files, and
//! [`CueLexicon`] labels each paragraph by weighted cue-phrase matches.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use regex::{Regex, RegexBuilder};

use crate::corpus::{Document, DocumentId};
use crate::doc2vec::DocEmbeddingModel;
use crate::error::{Error, Result};
use crate::score::{Aggregation, Method, SegmentRep, SimilarityScore};
use crate::sgns::cosine_dense;
use crate::tfidf::{cosine, TfIdfModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RhetoricalRole {
    Facts,
    Arguments,
    Ratio,
    Statute,
    Precedent,
    RulingLowerCourt,
    RulingPresentCourt,
}

impl RhetoricalRole {
    pub const ALL: [RhetoricalRole; 7] = [
        RhetoricalRole::Facts,
        RhetoricalRole::Arguments,
        RhetoricalRole::Ratio,
        RhetoricalRole::Statute,
        RhetoricalRole::Precedent,
        RhetoricalRole::RulingLowerCourt,
        RhetoricalRole::RulingPresentCourt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RhetoricalRole::Facts => "Facts",
            RhetoricalRole::Arguments => "Arguments",
            RhetoricalRole::Ratio => "Ratio",
            RhetoricalRole::Statute => "Statute",
            RhetoricalRole::Precedent => "Precedent",
            RhetoricalRole::RulingLowerCourt => "RulingLowerCourt",
            RhetoricalRole::RulingPresentCourt => "RulingPresentCourt",
        }
    }
}

impl fmt::Display for RhetoricalRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RhetoricalRole {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RhetoricalRole::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown rhetorical role {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentedDocument {
    pub id: DocumentId,
    pub segments: BTreeMap<RhetoricalRole, String>,
}

impl SegmentedDocument {
    /// Joins each role's paragraphs in document order. `labels[i]` is the
    /// role of paragraph `i`; `None` leaves it out.
    pub fn from_labels(doc: &Document, labels: &[Option<RhetoricalRole>]) -> Result<Self> {
        let mut parts: BTreeMap<RhetoricalRole, Vec<&str>> = BTreeMap::new();
        for (para, label) in doc.paragraphs.iter().zip(labels) {
            if let Some(role) = label {
                parts.entry(*role).or_default().push(para);
            }
        }
        let segments: BTreeMap<_, _> = parts
            .into_iter()
            .map(|(r, ps)| (r, ps.join("\n\n")))
            .filter(|(_, text)| !text.trim().is_empty())
            .collect();
        if segments.is_empty() {
            return Err(Error::EmptyDocument(doc.id.to_string()));
        }
        Ok(SegmentedDocument {
            id: doc.id.clone(),
            segments,
        })
    }

    pub fn roles(&self) -> impl Iterator<Item = RhetoricalRole> + '_ {
        self.segments.keys().copied()
    }
}

/// Anything that can split a document into rhetorical segments.
pub trait Segmenter {
    fn segment(&self, doc: &Document) -> Result<SegmentedDocument>;
}

pub fn segment_document(doc: &Document, segmenter: &dyn Segmenter) -> Result<SegmentedDocument> {
    segmenter.segment(doc)
}

/// Reads `<dir>/<DocumentId>.tsv` sidecars with one `<role>\t<paragraph>`
/// line per labelled paragraph (paragraph indices start at 0).
#[derive(Debug, Clone)]
pub struct AnnotatedSegmenter {
    pub dir: PathBuf,
}

impl AnnotatedSegmenter {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        AnnotatedSegmenter { dir: dir.into() }
    }

    pub fn sidecar_path(&self, id: &DocumentId) -> PathBuf {
        self.dir.join(format!("{id}.tsv"))
    }
}

impl Segmenter for AnnotatedSegmenter {
    fn segment(&self, doc: &Document) -> Result<SegmentedDocument> {
        let path = self.sidecar_path(&doc.id);
        if !path.is_file() {
            return Err(Error::MissingSegments(doc.id.to_string()));
        }
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let labels = parse_sidecar(&text, doc.paragraphs.len()).map_err(|(line, m)| Error::parse(&path, line, m))?;
        SegmentedDocument::from_labels(doc, &labels)
    }
}

/// Parses sidecar text into per-paragraph labels.
pub fn parse_sidecar(
    text: &str,
    paragraphs: usize,
) -> std::result::Result<Vec<Option<RhetoricalRole>>, (usize, String)> {
    let mut labels = vec![None; paragraphs];
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (role, index) = line
            .split_once('\t')
            .ok_or_else(|| (n, "expected `<role>\\t<paragraph-index>`".to_owned()))?;
        let role: RhetoricalRole = role.parse().map_err(|e: Error| (n, e.to_string()))?;
        let index: usize = index
            .trim()
            .parse()
            .map_err(|e| (n, format!("bad paragraph index: {e}")))?;
        let slot = labels
            .get_mut(index)
            .ok_or_else(|| (n, format!("paragraph {index} out of range ({paragraphs} paragraphs)")))?;
        if slot.replace(role).is_some() {
            return Err((n, format!("paragraph {index} labelled twice")));
        }
    }
    Ok(labels)
}

/// Formats per-paragraph labels in the sidecar format.
pub fn format_sidecar(labels: &[RhetoricalRole]) -> String {
    labels
        .iter()
        .enumerate()
        .map(|(i, r)| format!("{r}\t{i}\n"))
        .collect()
}

/// Cue-phrase lexicon: weighted patterns per role.
#[derive(Debug, Clone)]
pub struct CueLexicon {
    cues: Vec<(RhetoricalRole, f64, Regex)>,
}

const LEXICON_HEADER: &str = "# lexsim cue lexicon v1";
const SHIPPED_LEXICON: &str = include_str!("../data/cue_lexicon.tsv");

// Tie-break order when two roles score equally.
const PRIORITY: [RhetoricalRole; 7] = [
    RhetoricalRole::RulingPresentCourt,
    RhetoricalRole::RulingLowerCourt,
    RhetoricalRole::Arguments,
    RhetoricalRole::Precedent,
    RhetoricalRole::Statute,
    RhetoricalRole::Ratio,
    RhetoricalRole::Facts,
];

impl Default for CueLexicon {
    fn default() -> Self {
        CueLexicon::parse(SHIPPED_LEXICON).expect("shipped lexicon is valid")
    }
}

impl CueLexicon {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(LEXICON_HEADER) {
            return Err(Error::Invalid(format!("lexicon must start with `{LEXICON_HEADER}`")));
        }
        let mut cues = Vec::new();
        for (i, line) in lines.enumerate() {
            let n = i + 2;
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let mut fields = line.splitn(3, '\t');
            let (Some(role), Some(weight), Some(pattern)) = (fields.next(), fields.next(), fields.next()) else {
                return Err(Error::Invalid(format!("lexicon line {n}: expected role, weight, pattern")));
            };
            let role: RhetoricalRole = role.parse()?;
            let weight: f64 = weight
                .parse()
                .map_err(|e| Error::Invalid(format!("lexicon line {n}: bad weight: {e}")))?;
            let regex = RegexBuilder::new(pattern)
                .case_insensitive(true)
                .build()
                .map_err(|e| Error::Invalid(format!("lexicon line {n}: {e}")))?;
            cues.push((role, weight, regex));
        }
        Ok(CueLexicon { cues })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// The role with the highest cue score, or Facts when nothing matches.
    pub fn label(&self, paragraph: &str) -> RhetoricalRole {
        let mut scores: BTreeMap<RhetoricalRole, f64> = BTreeMap::new();
        for (role, weight, regex) in &self.cues {
            let hits = regex.find_iter(paragraph).count();
            if hits > 0 {
                *scores.entry(*role).or_default() += weight * hits as f64;
            }
        }
        let best = scores.values().copied().fold(0.0, f64::max);
        if best <= 0.0 {
            return RhetoricalRole::Facts;
        }
        PRIORITY
            .into_iter()
            .find(|r| scores.get(r) == Some(&best))
            .unwrap_or(RhetoricalRole::Facts)
    }

    pub fn label_paragraphs(&self, doc: &Document) -> Vec<RhetoricalRole> {
        doc.paragraphs.iter().map(|p| self.label(p)).collect()
    }
}

impl Segmenter for CueLexicon {
    fn segment(&self, doc: &Document) -> Result<SegmentedDocument> {
        if doc.paragraphs.is_empty() {
            return Err(Error::EmptyDocument(doc.id.to_string()));
        }
        let labels: Vec<_> = self.label_paragraphs(doc).into_iter().map(Some).collect();
        SegmentedDocument::from_labels(doc, &labels)
    }
}

/// How segment texts are turned into comparable vectors.
#[derive(Clone, Copy)]
pub enum SegmentContext<'a> {
    TfIdf(&'a TfIdfModel),
    DocVec {
        model: &'a DocEmbeddingModel,
        infer_epochs: usize,
        seed: u64,
    },
}

impl SegmentContext<'_> {
    pub fn rep(&self) -> SegmentRep {
        match self {
            SegmentContext::TfIdf(_) => SegmentRep::TfIdf,
            SegmentContext::DocVec { .. } => SegmentRep::DocVec,
        }
    }

    /// `None` when the texts cannot be represented (all tokens unknown to a
    /// document model).
    fn similarity(&self, a: &str, b: &str) -> Option<f64> {
        match *self {
            SegmentContext::TfIdf(m) => Some(cosine(&m.transform_text(a), &m.transform_text(b))),
            SegmentContext::DocVec { model, infer_epochs, seed } => {
                let tokenize = |t: &str| crate::corpus::tokenize(t);
                let va = model.infer_tokens(&tokenize(a), infer_epochs, seed)?;
                let vb = model.infer_tokens(&tokenize(b), infer_epochs, seed)?;
                cosine_dense(&va, &vb)
            }
        }
    }
}

/// Similarity of every role present in both documents. Roles that the
/// context cannot represent are omitted.
pub fn per_role_report(
    s1: &SegmentedDocument,
    s2: &SegmentedDocument,
    ctx: &SegmentContext<'_>,
) -> BTreeMap<RhetoricalRole, f64> {
    s1.segments
        .iter()
        .filter_map(|(role, a)| {
            let b = s2.segments.get(role)?;
            Some((*role, ctx.similarity(a, b)?))
        })
        .collect()
}

pub fn aggregate(values: impl IntoIterator<Item = f64>, agg: Aggregation) -> Option<f64> {
    let values: Vec<f64> = values.into_iter().collect();
    if values.is_empty() {
        return None;
    }
    Some(match agg {
        Aggregation::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        Aggregation::Average => values.iter().sum::<f64>() / values.len() as f64,
    })
}

/// Role-wise similarity folded by `agg` over the shared roles.
pub fn thematic_similarity(
    s1: &SegmentedDocument,
    s2: &SegmentedDocument,
    ctx: &SegmentContext<'_>,
    agg: Aggregation,
) -> Result<SimilarityScore> {
    let report = per_role_report(s1, s2, ctx);
    let value = aggregate(report.into_values(), agg)
        .ok_or_else(|| Error::NoSharedRoles(s1.id.to_string(), s2.id.to_string()))?;
    Ok(SimilarityScore::new(Method::Thematic(ctx.rep(), agg), &s1.id, &s2.id, value))
}
