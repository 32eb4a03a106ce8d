//! Documents, citation edges and tokenization.
//!
//! A corpus lives on disk as a directory of `<DocumentId>.txt` files plus a
//! citations CSV with header `src,dst`, one directed edge (src cites dst) per
//! row.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Identifier of a case document, e.g. `1992_47`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DocumentId(String);

impl DocumentId {
    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        let bad = id.is_empty()
            || id
                .chars()
                .any(|c| c.is_whitespace() || c == '/' || c == '\\');
        if bad {
            return Err(Error::InvalidId(id));
        }
        Ok(DocumentId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for DocumentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Borrow<str> for DocumentId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl std::str::FromStr for DocumentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DocumentId::new(s)
    }
}

/// A lowercase alphanumeric token.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Token(String);

impl Token {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Wraps a string that is already a valid token (lowercase, non-empty,
    /// alphanumeric). Used by model loaders.
    pub(crate) fn from_raw(s: &str) -> Result<Self> {
        if s.is_empty() || s.chars().any(|c| !c.is_alphanumeric()) {
            return Err(Error::Invalid(format!("bad token {s:?}")));
        }
        Ok(Token(s.to_owned()))
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Borrow<str> for Token {
    fn borrow(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: DocumentId,
    pub text: String,
    pub paragraphs: Vec<String>,
}

impl Document {
    pub fn new(id: DocumentId, text: impl Into<String>) -> Self {
        let text = text.into();
        let paragraphs = split_paragraphs(&text);
        Document {
            id,
            text,
            paragraphs,
        }
    }
}

/// A directed citation: `src` cites `dst`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Citation {
    pub src: DocumentId,
    pub dst: DocumentId,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    pub documents: BTreeMap<DocumentId, Document>,
    /// Edges in file order, duplicates preserved.
    pub citations: Vec<Citation>,
    /// Edge endpoints that have no document text. Always empty in strict mode.
    pub external: BTreeSet<DocumentId>,
}

impl Corpus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, doc: Document) -> Result<()> {
        if self.documents.contains_key(&doc.id) {
            return Err(Error::DuplicateId(doc.id.to_string()));
        }
        self.external.remove(&doc.id);
        self.documents.insert(doc.id.clone(), doc);
        Ok(())
    }

    /// Adds a citation. Unknown endpoints are an error when `strict`,
    /// otherwise they are recorded as external.
    pub fn cite(&mut self, src: DocumentId, dst: DocumentId, strict: bool) -> Result<()> {
        if src == dst {
            return Err(Error::SelfLoop(src.to_string()));
        }
        for end in [&src, &dst] {
            if !self.documents.contains_key(end) {
                if strict {
                    return Err(Error::UnknownDocument(end.to_string()));
                }
                self.external.insert(end.clone());
            }
        }
        self.citations.push(Citation { src, dst });
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.documents.get(id)
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }
}

/// Loads every `*.txt` file directly under `root` and the citation edge list.
pub fn load_corpus(root: &Path, citations: &Path, strict: bool) -> Result<Corpus> {
    let mut corpus = load_documents(root)?;
    for (line, src, dst) in read_edge_csv(citations)? {
        corpus
            .cite(src, dst, strict)
            .map_err(|e| Error::parse(citations, line, e.to_string()))?;
    }
    Ok(corpus)
}

/// Loads every `*.txt` file directly under `root`, without citations.
pub fn load_documents(root: &Path) -> Result<Corpus> {
    let mut corpus = Corpus::new();
    for doc in read_documents(root)? {
        corpus.insert(doc)?;
    }
    Ok(corpus)
}

fn read_documents(root: &Path) -> Result<Vec<Document>> {
    let entries = fs::read_dir(root).map_err(|e| Error::io(root, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(root, e))?.path();
        if path.is_file() && path.extension().is_some_and(|ext| ext == "txt") {
            paths.push(path);
        }
    }
    paths.sort();

    let mut docs = Vec::with_capacity(paths.len());
    for path in paths {
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| Error::InvalidId(path.display().to_string()))?;
        let id = DocumentId::new(stem)?;
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let text = String::from_utf8(bytes).map_err(|_| Error::InvalidUtf8 { path: path.clone() })?;
        docs.push(Document::new(id, text));
    }
    Ok(docs)
}

/// Reads a `src,dst` CSV, returning `(line, src, dst)` triples.
pub fn read_edge_csv(path: &Path) -> Result<Vec<(usize, DocumentId, DocumentId)>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if headers.len() != 2 || &headers[0] != "src" || &headers[1] != "dst" {
        return Err(Error::parse(path, 1, "expected header `src,dst`"));
    }

    let mut edges = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != 2 {
            return Err(Error::parse(path, line, "expected 2 fields"));
        }
        let src = DocumentId::new(&record[0]).map_err(|e| Error::parse(path, line, e.to_string()))?;
        let dst = DocumentId::new(&record[1]).map_err(|e| Error::parse(path, line, e.to_string()))?;
        edges.push((line, src, dst));
    }
    Ok(edges)
}

pub(crate) fn csv_error(path: &Path, err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line() as usize);
    match err.into_kind() {
        csv::ErrorKind::Io(e) => Error::io(path, e),
        kind => Error::parse(path, line, format!("{kind:?}")),
    }
}

/// Splits text into paragraphs separated by one or more blank lines.
/// Each paragraph is trimmed; empty blocks are dropped.
pub fn split_paragraphs(text: &str) -> Vec<String> {
    let mut paragraphs = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    let mut flush = |current: &mut Vec<&str>| {
        if !current.is_empty() {
            let block = current.join("\n");
            let block = block.trim();
            if !block.is_empty() {
                paragraphs.push(block.to_owned());
            }
            current.clear();
        }
    };
    for line in text.lines() {
        if line.trim().is_empty() {
            flush(&mut current);
        } else {
            current.push(line);
        }
    }
    flush(&mut current);
    paragraphs
}

/// Lowercases and splits on every non-alphanumeric character.
pub fn tokenize(text: &str) -> Vec<Token> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|piece| !piece.is_empty())
        .map(|piece| Token(piece.to_owned()))
        .collect()
}

/// A set of words removed after tokenization.
#[derive(Debug, Clone, Default)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    pub fn empty() -> Self {
        Self::default()
    }

    /// One word per line; blank lines ignored. Words are tokenized so that
    /// they match the tokenizer's output.
    pub fn parse(text: &str) -> Self {
        Stopwords(
            text.lines()
                .flat_map(tokenize)
                .map(|t| t.0)
                .collect(),
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn tokenize(&self, text: &str) -> Vec<Token> {
        let mut tokens = tokenize(text);
        if !self.0.is_empty() {
            tokens.retain(|t| !self.0.contains(t.as_str()));
        }
        tokens
    }
}
