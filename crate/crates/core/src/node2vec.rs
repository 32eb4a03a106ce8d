//! Node embeddings from p/q-biased second-order random walks.
//!
//! Walks start from every node that has a neighbour. The first hop is
//! uniform; afterwards, moving from `v` (having arrived from `t`) to a
//! candidate `x` has unnormalized weight `1/p` if `x == t`, `1` if `x` is
//! adjacent to `t`, and `1/q` otherwise. Transition tables are precomputed
//! per directed edge `(t, v)` as alias tables, so each step is O(1).
//!
//! The walks are then treated as sentences for skip-gram training.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::alias::AliasTable;
use crate::corpus::DocumentId;
use crate::error::{Error, Result};
use crate::graph::CitationGraph;
use crate::score::{Method, SimilarityScore};
use crate::sgns::{cosine_dense, train_skipgram, TrainConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct WalkConfig {
    pub num_walks_per_node: usize,
    pub walk_length: usize,
    /// Return parameter.
    pub p: f64,
    /// In-out parameter.
    pub q: f64,
    pub seed: u64,
    /// Follow citation direction instead of the undirected projection.
    pub directed: bool,
    pub threads: usize,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            num_walks_per_node: 10,
            walk_length: 80,
            p: 1.0,
            q: 1.0,
            seed: crate::DEFAULT_SEED,
            directed: false,
            threads: 1,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_walks_per_node == 0 || self.walk_length == 0 || self.threads == 0 {
            return Err(Error::Config(
                "walks per node, walk length and threads must be positive".into(),
            ));
        }
        if !(self.p > 0.0 && self.q > 0.0) || !self.p.is_finite() || !self.q.is_finite() {
            return Err(Error::Config("p and q must be positive".into()));
        }
        Ok(())
    }

    pub(crate) fn header_fields(&self) -> String {
        format!(
            "walks={} length={} p={} q={} walk_seed={} directed={}",
            self.num_walks_per_node, self.walk_length, self.p, self.q, self.seed, self.directed
        )
    }
}

/// Walks over a graph's nodes, stored as node indices into `nodes`.
#[derive(Debug, Clone, PartialEq)]
pub struct Walks {
    pub nodes: Vec<DocumentId>,
    /// `key=value` walk settings, carried into model files.
    pub params: String,
    pub walks: Vec<Vec<u32>>,
}

impl Walks {
    pub fn ids(&self, walk: usize) -> Vec<&DocumentId> {
        self.walks[walk].iter().map(|&n| &self.nodes[n as usize]).collect()
    }
}

/// Precomputed second-order transition tables.
pub struct WalkSampler<'g> {
    graph: &'g CitationGraph,
    directed: bool,
    /// Start offset of each node's block in `edge_tables`.
    offsets: Vec<usize>,
    /// One table per (t, v) with v a successor of t, over successors of v.
    edge_tables: Vec<Option<AliasTable>>,
}

impl<'g> WalkSampler<'g> {
    pub fn new(graph: &'g CitationGraph, p: f64, q: f64, directed: bool) -> Self {
        let mut sampler = WalkSampler {
            graph,
            directed,
            offsets: Vec::with_capacity(graph.node_count() + 1),
            edge_tables: Vec::new(),
        };
        let mut offset = 0;
        for t in 0..graph.node_count() {
            sampler.offsets.push(offset);
            offset += sampler.successors(t).len();
        }
        sampler.offsets.push(offset);

        sampler.edge_tables = (0..graph.node_count())
            .flat_map(|t| sampler.successors(t).iter().map(move |&v| (t, v)))
            .map(|(t, v)| AliasTable::new(&sampler.transition_weights(t, v, p, q)))
            .collect();
        sampler
    }

    pub fn successors(&self, node: usize) -> &'g [usize] {
        if self.directed {
            self.graph.out_neighbors(node)
        } else {
            self.graph.neighbors(node)
        }
    }

    /// Unnormalized weights for stepping from `v` to each of its successors,
    /// having arrived from `t`.
    pub fn transition_weights(&self, t: usize, v: usize, p: f64, q: f64) -> Vec<f64> {
        self.successors(v)
            .iter()
            .map(|&x| {
                if x == t {
                    1.0 / p
                } else if self.graph.is_adjacent(t, x) {
                    1.0
                } else {
                    1.0 / q
                }
            })
            .collect()
    }

    /// Samples the successor of `v` given the previous node `t`.
    pub fn step(&self, t: usize, v: usize, rng: &mut impl Rng) -> Option<usize> {
        let pos = self.successors(t).binary_search(&v).ok()?;
        let table = self.edge_tables[self.offsets[t] + pos].as_ref()?;
        Some(self.successors(v)[table.sample(rng)])
    }

    pub fn walk(&self, start: usize, length: usize, rng: &mut impl Rng) -> Vec<u32> {
        let mut walk = Vec::with_capacity(length);
        walk.push(start as u32);
        if length < 2 {
            return walk;
        }
        let Some(&first) = self.successors(start).choose(rng) else {
            return walk;
        };
        walk.push(first as u32);
        while walk.len() < length {
            let t = walk[walk.len() - 2] as usize;
            let v = walk[walk.len() - 1] as usize;
            match self.step(t, v, rng) {
                Some(x) => walk.push(x as u32),
                None => break,
            }
        }
        walk
    }
}

/// Generates `num_walks_per_node` walks from every non-isolated node.
///
/// Each round visits start nodes in a seeded shuffled order, and every walk
/// draws from its own generator keyed by (round, start node). The output is
/// therefore identical for any thread count.
pub fn generate_walks(g: &CitationGraph, cfg: &WalkConfig) -> Result<Walks> {
    cfg.validate()?;
    let sampler = WalkSampler::new(g, cfg.p, cfg.q, cfg.directed);
    let starts: Vec<usize> = (0..g.node_count())
        .filter(|&n| !g.neighbors(n).is_empty())
        .collect();
    let n = g.node_count() as u64;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;

    let mut walks = Vec::with_capacity(starts.len() * cfg.num_walks_per_node);
    for round in 0..cfg.num_walks_per_node as u64 {
        let mut order = starts.clone();
        let mut shuffle_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        shuffle_rng.set_stream(u64::MAX - round);
        order.shuffle(&mut shuffle_rng);

        let one = |&start: &usize| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(round * n + start as u64);
            sampler.walk(start, cfg.walk_length, &mut rng)
        };
        let batch: Vec<Vec<u32>> = if cfg.threads == 1 {
            order.iter().map(one).collect()
        } else {
            pool.install(|| order.par_iter().map(one).collect())
        };
        walks.extend(batch);
    }

    Ok(Walks {
        nodes: g.nodes().to_vec(),
        params: cfg.header_fields(),
        walks,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeEmbeddingModel {
    pub dimensions: usize,
    pub vectors: BTreeMap<DocumentId, Vec<f32>>,
    /// Space-separated `key=value` hyperparameters, written to model files.
    pub params: String,
    pub epoch_losses: Vec<f64>,
}

/// Skip-gram training over walks. Returns one vector per node that occurs
/// in the walks at least `min_count` times.
pub fn train_node_embeddings(walks: &Walks, cfg: &TrainConfig) -> Result<NodeEmbeddingModel> {
    cfg.validate()?;
    let mut counts = vec![0u64; walks.nodes.len()];
    for w in &walks.walks {
        for &n in w {
            counts[n as usize] += 1;
        }
    }
    // Dense vocabulary rows over kept nodes, in node order.
    let min = cfg.min_count.max(1) as u64;
    let mut row_of = vec![u32::MAX; counts.len()];
    let mut kept = Vec::new();
    for (node, &c) in counts.iter().enumerate() {
        if c >= min {
            row_of[node] = kept.len() as u32;
            kept.push(node);
        }
    }
    let sequences: Vec<Vec<u32>> = walks
        .walks
        .iter()
        .map(|w| w.iter().map(|&n| row_of[n as usize]).filter(|&r| r != u32::MAX).collect())
        .collect();
    let vocab_counts: Vec<u64> = kept.iter().map(|&n| counts[n]).collect();

    let trained = train_skipgram(&sequences, &vocab_counts, cfg)?;
    let vectors = kept
        .iter()
        .zip(trained.input)
        .map(|(&node, v)| (walks.nodes[node].clone(), v))
        .collect();
    Ok(NodeEmbeddingModel {
        dimensions: cfg.dimensions,
        vectors,
        params: format!("{} {}", walks.params, cfg.header_fields()).trim().to_owned(),
        epoch_losses: trained.epoch_losses,
    })
}

const NODE_MODEL_MAGIC: &str = "# lexsim node2vec v1";

impl NodeEmbeddingModel {
    pub fn vector(&self, id: &DocumentId) -> Result<&[f32]> {
        self.vectors
            .get(id)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::MissingVector(id.to_string()))
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{NODE_MODEL_MAGIC} {}", self.params)?;
        for (id, v) in &self.vectors {
            write!(out, "{id} {}", v.len())?;
            for x in v {
                write!(out, " {x}")?;
            }
            writeln!(out)?;
        }
        out.flush()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write(std::io::BufWriter::new(file))
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut params = String::new();
        let mut vectors = BTreeMap::new();
        let mut dimensions = None;
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if let Some(rest) = line.strip_prefix(NODE_MODEL_MAGIC) {
                params = rest.trim().to_owned();
                continue;
            }
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let (id, v) = parse_vector_line(line).map_err(|m| Error::parse(path, line_no, m))?;
            let id = DocumentId::new(id).map_err(|e| Error::parse(path, line_no, e.to_string()))?;
            if *dimensions.get_or_insert(v.len()) != v.len() {
                return Err(Error::parse(path, line_no, "inconsistent vector dimension"));
            }
            if vectors.insert(id.clone(), v).is_some() {
                return Err(Error::parse(path, line_no, format!("duplicate node {id}")));
            }
        }
        let dimensions = dimensions.ok_or_else(|| Error::parse(path, 0, "no vectors"))?;
        Ok(NodeEmbeddingModel {
            dimensions,
            vectors,
            params,
            epoch_losses: Vec::new(),
        })
    }
}

/// Parses `<name> <dim> <v1> ... <v_dim>`.
pub(crate) fn parse_vector_line(line: &str) -> std::result::Result<(&str, Vec<f32>), String> {
    let mut fields = line.split_ascii_whitespace();
    let name = fields.next().ok_or("missing name")?;
    let dim: usize = fields
        .next()
        .ok_or("missing dimension")?
        .parse()
        .map_err(|e| format!("bad dimension: {e}"))?;
    let values = fields
        .map(|f| f.parse::<f32>().map_err(|e| format!("bad value {f:?}: {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if values.len() != dim {
        return Err(format!("declared {dim} values, found {}", values.len()));
    }
    Ok((name, values))
}

/// Cosine between two node vectors.
pub fn node_cosine(m: &NodeEmbeddingModel, a: &DocumentId, b: &DocumentId) -> Result<SimilarityScore> {
    let va = m.vector(a)?;
    let vb = m.vector(b)?;
    if va.iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroVector(a.to_string()));
    }
    let value = cosine_dense(va, vb).ok_or_else(|| Error::ZeroVector(b.to_string()))?;
    Ok(SimilarityScore::new(Method::Node2Vec, a, b, value))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> DocumentId {
        DocumentId::new(s).unwrap()
    }

    fn graph(n: usize, edges: &[(usize, usize)]) -> CitationGraph {
        let name = |i: usize| id(&format!("n{i:02}"));
        CitationGraph::from_edges((0..n).map(name), edges.iter().map(|&(s, d)| (name(s), name(d)))).unwrap()
    }

    #[test]
    fn two_node_path_is_forced() {
        let g = graph(2, &[(0, 1)]);
        let cfg = WalkConfig {
            walk_length: 3,
            num_walks_per_node: 4,
            ..Default::default()
        };
        let walks = generate_walks(&g, &cfg).unwrap();
        for w in &walks.walks {
            let expected: Vec<u32> = if w[0] == 0 { vec![0, 1, 0] } else { vec![1, 0, 1] };
            assert_eq!(w, &expected);
        }
        assert_eq!(walks.walks.len(), 8);
    }

    #[test]
    fn triangle_bias_weights() {
        // t = A(0), v = B(1): back to A costs 1/p, C is adjacent to A.
        let g = graph(3, &[(0, 1), (1, 2), (2, 0)]);
        let s = WalkSampler::new(&g, 0.5, 3.0, false);
        assert_eq!(s.transition_weights(0, 1, 0.5, 3.0), vec![2.0, 1.0]);
        let uniform = WalkSampler::new(&g, 1.0, 1.0, false);
        assert_eq!(uniform.transition_weights(0, 1, 1.0, 1.0), vec![1.0, 1.0]);
    }

    #[test]
    fn isolated_nodes_get_no_walks() {
        let g = graph(4, &[(0, 1)]);
        let walks = generate_walks(&g, &WalkConfig { walk_length: 5, ..Default::default() }).unwrap();
        assert!(walks.walks.iter().all(|w| w[0] < 2));
        assert_eq!(walks.walks.len(), 20);
    }

    #[test]
    fn directed_walks_stop_at_sinks() {
        let g = graph(3, &[(0, 1), (1, 2)]);
        let cfg = WalkConfig {
            directed: true,
            walk_length: 10,
            num_walks_per_node: 1,
            ..Default::default()
        };
        let walks = generate_walks(&g, &cfg).unwrap();
        let from0 = walks.walks.iter().find(|w| w[0] == 0).unwrap();
        assert_eq!(from0, &vec![0, 1, 2]);
        let from2 = walks.walks.iter().find(|w| w[0] == 2).unwrap();
        assert_eq!(from2, &vec![2]);
    }

    #[test]
    fn walks_follow_edges_and_ignore_thread_count() {
        let edges: Vec<_> = (0..12).flat_map(|i| [(i, (i + 1) % 12), (i, (i * 5 + 3) % 12)]).filter(|(a, b)| a != b).collect();
        let g = graph(12, &edges);
        let cfg = WalkConfig { walk_length: 20, p: 0.5, q: 2.0, ..Default::default() };
        let single = generate_walks(&g, &cfg).unwrap();
        let multi = generate_walks(&g, &WalkConfig { threads: 4, ..cfg.clone() }).unwrap();
        assert_eq!(single, multi);
        for w in &single.walks {
            assert_eq!(w.len(), 20);
            for pair in w.windows(2) {
                assert!(g.is_adjacent(pair[0] as usize, pair[1] as usize));
            }
        }
    }

    #[test]
    fn cosine_errors_and_values() {
        let mut vectors = BTreeMap::new();
        vectors.insert(id("a"), vec![1.0, 0.0]);
        vectors.insert(id("b"), vec![0.0, 1.0]);
        vectors.insert(id("c"), vec![-1.0, 0.0]);
        vectors.insert(id("z"), vec![0.0, 0.0]);
        let m = NodeEmbeddingModel { dimensions: 2, vectors, params: String::new(), epoch_losses: vec![] };
        assert_eq!(node_cosine(&m, &id("a"), &id("a")).unwrap().value, 1.0);
        assert_eq!(node_cosine(&m, &id("a"), &id("b")).unwrap().value, 0.0);
        assert_eq!(node_cosine(&m, &id("a"), &id("c")).unwrap().value, -1.0);
        assert!(matches!(node_cosine(&m, &id("a"), &id("q")), Err(Error::MissingVector(_))));
        assert!(matches!(node_cosine(&m, &id("z"), &id("a")), Err(Error::ZeroVector(_))));
    }

    #[test]
    fn training_shape_determinism_and_persistence() {
        let g = graph(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3)]);
        let walks = generate_walks(&g, &WalkConfig { walk_length: 10, ..Default::default() }).unwrap();
        let cfg = TrainConfig { dimensions: 8, epochs: 2, ..TrainConfig::node2vec() };
        let m1 = train_node_embeddings(&walks, &cfg).unwrap();
        let m2 = train_node_embeddings(&walks, &cfg).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(m1.vectors.len(), 6);
        assert!(m1.vectors.values().all(|v| v.len() == 8));

        let mut buf = Vec::new();
        m1.write(&mut buf).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.txt");
        fs::write(&path, &buf).unwrap();
        let loaded = NodeEmbeddingModel::load(&path).unwrap();
        assert_eq!(loaded.vectors, m1.vectors);
        assert_eq!(loaded.params, m1.params);
    }

    #[test]
    fn loader_rejects_dimension_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.txt");
        fs::write(&path, "a 2 0.1 0.2\nb 3 0.1 0.2 0.3\n").unwrap();
        assert!(matches!(NodeEmbeddingModel::load(&path), Err(Error::Parse { line: 2, .. })));
        fs::write(&path, "a 3 0.1 0.2\n").unwrap();
        assert!(NodeEmbeddingModel::load(&path).is_err());
    }

    #[test]
    fn single_token_walks_are_untrainable() {
        let walks = Walks { nodes: vec![id("a"), id("b")], params: String::new(), walks: vec![vec![0], vec![1]] };
        assert!(matches!(
            train_node_embeddings(&walks, &TrainConfig::node2vec()),
            Err(Error::EmptyTraining(_))
        ));
    }
}
