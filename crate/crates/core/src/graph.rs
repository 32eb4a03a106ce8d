//! The precedent-citation graph and the classical network similarity measures.
//!
//! Nodes are documents; a directed edge `i -> j` means `i` cites `j`.
//! Bibliographic coupling compares out-neighbourhoods, co-citation compares
//! in-neighbourhoods, and dispersion looks at how poorly connected the common
//! neighbours of a pair are in the undirected projection.

use std::collections::{BTreeSet, HashMap};
use std::io::Write;
use std::path::Path;

use crate::corpus::{Corpus, DocumentId};
use crate::error::{Error, Result};
use crate::score::{Method, SimilarityScore};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CitationGraph {
    nodes: Vec<DocumentId>,
    index: HashMap<DocumentId, usize>,
    // All adjacency lists are sorted and deduplicated.
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
    undirected: Vec<Vec<usize>>,
}

/// Builds the graph of a corpus. Every document is a node, as is every
/// external citation endpoint; duplicate citations collapse.
pub fn build_graph(corpus: &Corpus) -> CitationGraph {
    let nodes = corpus
        .documents
        .keys()
        .chain(corpus.external.iter())
        .cloned();
    let edges = corpus.citations.iter().map(|c| (c.src.clone(), c.dst.clone()));
    CitationGraph::from_edges(nodes, edges).expect("corpus edges are validated on load")
}

impl CitationGraph {
    /// Builds a graph from explicit nodes and edges. Edge endpoints missing
    /// from `nodes` are added.
    pub fn from_edges(
        nodes: impl IntoIterator<Item = DocumentId>,
        edges: impl IntoIterator<Item = (DocumentId, DocumentId)>,
    ) -> Result<Self> {
        let edges: Vec<_> = edges.into_iter().collect();
        let mut all: BTreeSet<DocumentId> = nodes.into_iter().collect();
        for (s, d) in &edges {
            if s == d {
                return Err(Error::SelfLoop(s.to_string()));
            }
            all.insert(s.clone());
            all.insert(d.clone());
        }
        let nodes: Vec<DocumentId> = all.into_iter().collect();
        let index: HashMap<_, _> = nodes.iter().cloned().zip(0..).collect();

        let n = nodes.len();
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        let mut undirected = vec![Vec::new(); n];
        for (s, d) in &edges {
            let (s, d) = (index[s], index[d]);
            out_adj[s].push(d);
            in_adj[d].push(s);
            undirected[s].push(d);
            undirected[d].push(s);
        }
        for list in out_adj.iter_mut().chain(&mut in_adj).chain(&mut undirected) {
            list.sort_unstable();
            list.dedup();
        }
        Ok(CitationGraph {
            nodes,
            index,
            out_adj,
            in_adj,
            undirected,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out_adj.iter().map(Vec::len).sum()
    }

    /// Nodes with no incident edge in either direction.
    pub fn isolated_count(&self) -> usize {
        self.undirected.iter().filter(|n| n.is_empty()).count()
    }

    /// Node ids in index order (sorted).
    pub fn nodes(&self) -> &[DocumentId] {
        &self.nodes
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn node_id(&self, index: usize) -> &DocumentId {
        &self.nodes[index]
    }

    pub fn out_neighbors(&self, node: usize) -> &[usize] {
        &self.out_adj[node]
    }

    pub fn in_neighbors(&self, node: usize) -> &[usize] {
        &self.in_adj[node]
    }

    /// Neighbours in the undirected projection.
    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.undirected[node]
    }

    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        self.undirected[a].binary_search(&b).is_ok()
    }

    pub fn has_edge(&self, src: usize, dst: usize) -> bool {
        self.out_adj[src].binary_search(&dst).is_ok()
    }

    /// Edges as `(src, dst)` id pairs, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (&DocumentId, &DocumentId)> + '_ {
        self.out_adj
            .iter()
            .enumerate()
            .flat_map(move |(s, outs)| outs.iter().map(move |&d| (&self.nodes[s], &self.nodes[d])))
    }

    /// Writes the edge list in the citations CSV format.
    pub fn write_edges<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        let to_err = |e: csv::Error| Error::Invalid(format!("writing edge list: {e}"));
        writer.write_record(["src", "dst"]).map_err(to_err)?;
        for (s, d) in self.edges() {
            writer.write_record([s.as_str(), d.as_str()]).map_err(to_err)?;
        }
        writer
            .flush()
            .map_err(|e| Error::Invalid(format!("writing edge list: {e}")))?;
        Ok(())
    }

    pub fn export_edges(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_edges(std::io::BufWriter::new(file))
    }

    fn pair(&self, a: &DocumentId, b: &DocumentId) -> Result<(usize, usize)> {
        let ia = self
            .node_index(a.as_str())
            .ok_or_else(|| Error::UnknownDocument(a.to_string()))?;
        let ib = self
            .node_index(b.as_str())
            .ok_or_else(|| Error::UnknownDocument(b.to_string()))?;
        if ia == ib {
            return Err(Error::IdenticalPair(a.to_string()));
        }
        Ok((ia, ib))
    }
}

/// Sizes of the intersection and union of two sorted, deduplicated slices.
fn overlap(a: &[usize], b: &[usize]) -> (usize, usize) {
    let (mut i, mut j, mut common) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    (common, a.len() + b.len() - common)
}

fn jaccard(a: &[usize], b: &[usize]) -> f64 {
    let (inter, union) = overlap(a, b);
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Shared out-citations over distinct out-citations.
pub fn biblio_coupling(g: &CitationGraph, a: &DocumentId, b: &DocumentId) -> Result<SimilarityScore> {
    let (ia, ib) = g.pair(a, b)?;
    let value = jaccard(g.out_neighbors(ia), g.out_neighbors(ib));
    Ok(SimilarityScore::new(Method::Biblio, a, b, value))
}

/// Shared in-citations over distinct in-citations.
pub fn co_citation(g: &CitationGraph, a: &DocumentId, b: &DocumentId) -> Result<SimilarityScore> {
    let (ia, ib) = g.pair(a, b)?;
    let value = jaccard(g.in_neighbors(ia), g.in_neighbors(ib));
    Ok(SimilarityScore::new(Method::CoCitation, a, b, value))
}

/// Raw dispersion count and embeddedness of a pair in the undirected
/// projection.
///
/// The common neighbours `C` of `a` and `b` are counted as embeddedness. Raw
/// dispersion is the number of unordered pairs `{s, t}` in `C` that are not
/// adjacent and share no neighbour besides `a` and `b`.
pub fn dispersion_counts(g: &CitationGraph, a: usize, b: usize) -> (usize, usize) {
    let common: Vec<usize> = intersect(g.neighbors(a), g.neighbors(b))
        .into_iter()
        .filter(|&n| n != a && n != b)
        .collect();

    let mut raw = 0;
    for (i, &s) in common.iter().enumerate() {
        for &t in &common[i + 1..] {
            if g.is_adjacent(s, t) {
                continue;
            }
            let shares_other = intersect(g.neighbors(s), g.neighbors(t))
                .into_iter()
                .any(|n| n != a && n != b);
            if !shares_other {
                raw += 1;
            }
        }
    }
    (raw, common.len())
}

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Dispersion of a pair. When `normalized`, the raw count is divided by the
/// embeddedness (0 when there are no common neighbours).
pub fn dispersion(
    g: &CitationGraph,
    a: &DocumentId,
    b: &DocumentId,
    normalized: bool,
) -> Result<SimilarityScore> {
    let (ia, ib) = g.pair(a, b)?;
    let (raw, embeddedness) = dispersion_counts(g, ia, ib);
    let value = match (normalized, embeddedness) {
        (false, _) => raw as f64,
        (true, 0) => 0.0,
        (true, e) => raw as f64 / e as f64,
    };
    Ok(SimilarityScore::new(Method::Dispersion, a, b, value))
}
