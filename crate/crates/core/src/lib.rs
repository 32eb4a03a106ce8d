//! Similarity between legal case documents.
//!
//! Two families of measures score a pair of judgments:
//!
//! - network measures over the citation graph: bibliographic coupling,
//!   co-citation, dispersion and node2vec embeddings;
//! - text measures: paragraph links over TF-IDF, whole-document embeddings
//!   and thematic (rhetorical-role) similarity.
//!
//! [`evaluation`] correlates any of them, alone or folded pairwise, against
//! expert scores.
//!
//! ```
//! use lexsim::{biblio_coupling, build_graph, fixtures::toy_corpus, DocumentId};
//!
//! let g = build_graph(&toy_corpus());
//! let a = DocumentId::new("A").unwrap();
//! let b = DocumentId::new("B").unwrap();
//! assert_eq!(biblio_coupling(&g, &a, &b).unwrap().value, 0.5);
//! ```

mod alias;
pub mod corpus;
pub mod doc2vec;
pub mod error;
pub mod evaluation;
pub mod fixtures;
pub mod graph;
pub mod node2vec;
pub mod score;
pub mod sgns;
pub mod tfidf;
pub mod thematic;

/// Seed used wherever the caller does not supply one.
pub const DEFAULT_SEED: u64 = 0x5eed_1e55;

pub use corpus::{load_corpus, load_documents, tokenize, Corpus, Document, DocumentId, Stopwords, Token};
pub use doc2vec::{fulltext_similarity, infer_doc_vector, train_doc_embeddings, DocEmbeddingModel};
pub use error::{Error, Result};
pub use evaluation::{
    combine, load_pairs, pearson, run_benchmark, BenchmarkReport, Combination, ContextOptions, EvaluationPair,
    PairScorer, ScoringContext,
};
pub use graph::{biblio_coupling, build_graph, co_citation, dispersion, CitationGraph};
pub use node2vec::{generate_walks, node_cosine, train_node_embeddings, NodeEmbeddingModel, WalkConfig};
pub use score::{Aggregation, Method, SegmentRep, SimilarityScore};
pub use sgns::TrainConfig;
pub use tfidf::{fit_tfidf, paragraph_links_similarity, transform_tfidf, TfIdfModel};
pub use thematic::{segment_document, thematic_similarity, CueLexicon, RhetoricalRole, SegmentedDocument};
