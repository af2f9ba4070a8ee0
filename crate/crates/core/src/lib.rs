//! Syntactic dialectometry over geo-referenced corpora.
//!
//! The crate covers the whole path from raw documents to dialect
//! relationships:
//!
//! * [`corpus`]: regionalize documents by domain or coordinates, select
//!   national varieties, aggregate fixed-size samples and split them.
//! * [`grammar`]: parse construction grammars, annotate tokens and count
//!   construction matches (bag-of-constructions).
//! * [`features`]: function-word and hashed n-gram encodings.
//! * [`classifier`]: one-vs-rest linear SVMs, evaluation and cross-validation.
//! * [`analysis`]: unmasking, error and weight similarity, uniqueness,
//!   grammar fit and inner/outer circle tests.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`, which the pipeline uses throughout.

pub mod analysis;
pub mod classifier;
pub mod corpus;
pub mod features;
pub mod grammar;
mod scalar;
pub mod seed;
pub mod synthetic;
mod vector;

pub use scalar::Scalar;
pub use vector::SparseVector;

pub type Vector = SparseVector<f64>;
pub type Vector32 = SparseVector<f32>;
pub type SampleVector = features::SampleVector<f64>;
pub type Model = classifier::ModelWeights<f64>;
pub type Model32 = classifier::ModelWeights<f32>;
pub type Hyperparameters = classifier::Hyperparameters<f64>;
pub type EvaluationReport = classifier::EvaluationReport<f64>;
pub type SimilarityMatrix = analysis::SimilarityMatrix<f64>;
pub type UnmaskingCurve = analysis::UnmaskingCurve<f64>;
pub type UniquenessTable = analysis::UniquenessTable<f64>;
