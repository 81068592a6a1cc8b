//! Neural graph database prototype.
//!
//! Answers complex logical queries (conjunction, disjunction, atomic negation)
//! over incomplete knowledge graphs with an exact symbolic engine and fuzzy
//! neuro-symbolic executors backed by a ComplEx link predictor, plus the query
//! sampling and filtered-ranking evaluation pipeline.

mod binio;
pub mod error;
pub mod kg;
pub mod query;
pub mod symbolic;
pub mod fuzzy;
pub mod rng;
pub mod embed;
pub mod engine;
pub mod eval;
pub mod sampler;
pub mod synthetic;

pub use error::{Error, Result};
