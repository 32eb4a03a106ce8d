//! Runs the guide's code blocks as doc-tests, one module per chapter so a
//! failure points at its chapter.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/corpus.md")]
pub mod corpus {}
#[doc = include_str!("../../../book/src/citation-measures.md")]
pub mod citation_measures {}
#[doc = include_str!("../../../book/src/node-embeddings.md")]
pub mod node_embeddings {}
#[doc = include_str!("../../../book/src/text-similarity.md")]
pub mod text_similarity {}
#[doc = include_str!("../../../book/src/thematic.md")]
pub mod thematic {}
#[doc = include_str!("../../../book/src/evaluation.md")]
pub mod evaluation {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../README.md")]
pub mod readme {}
