//! Knowledge-graph extraction from micro-blogging posts.
//!
//! The pipeline runs in four blocks over externally produced dependency
//! parses: post normalization ([`preprocess`]), candidate entity and surface
//! triple extraction ([`entity_extract`], [`relation_extract`]), entity
//! normalization and linking ([`entity_refine`]) and relation clustering
//! ([`relation_cluster`]). [`kg_emit`] aggregates the generalized triples into
//! reified statements and writes Turtle.

pub mod corpus_io;
pub mod entity_extract;
pub mod entity_refine;
pub mod error;
pub mod kg_emit;
pub mod metrics;
pub mod pipeline;
pub mod preprocess;
pub mod relation_cluster;
pub mod relation_extract;

pub use error::{Error, Result};
