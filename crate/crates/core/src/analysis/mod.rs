//! Dialect relationships derived from trained models and their errors.

mod circle;
mod similarity;
mod stats;
mod uniqueness;
mod unmask;

use thiserror::Error;

use crate::classifier::ClassifierError;

pub use circle::{circle_ttest, grammar_fit, read_grouping, Circle, CircleTest, GrammarFit, GrammarFitRow};
pub use similarity::{
    cosine_similarity_matrix, cross_register_correlation, error_similarity, RegisterCorrelation, SimilarityKind,
    SimilarityMatrix,
};
pub use stats::{average_ranks, pearson, spearman, welch_t_test, WelchTest};
pub use uniqueness::{uniqueness_scores, UniquenessRow, UniquenessTable};
pub use unmask::{unmask, UnmaskingCurve, UnmaskingStep};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("need at least {needed} classes, found {found}")]
    TooFewClasses { needed: usize, found: usize },
    #[error("need at least 3 shared region pairs, found {0}")]
    TooFewPairs(usize),
    #[error("{circle} group has {found} regions, need at least 2")]
    SmallGroup { circle: Circle, found: usize },
    #[error("unknown circle {0:?} (expected inner or outer)")]
    UnknownCircle(String),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
