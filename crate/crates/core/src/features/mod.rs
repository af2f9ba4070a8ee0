//! Non-construction feature sets (function words, hashed lexical n-grams)
//! and the shared sample-vector record.

mod function_words;
mod hashing;

use std::fmt;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Source;
use crate::{Scalar, SparseVector};

pub use function_words::{function_word_vector, read_wordlist};
pub use hashing::{collision_audit, fnv1a_64, hashed_ngram_vector, ngram_index, CollisionEntry, NGRAM_SEPARATOR};

/// Hash dimensionality for lexical n-grams.
pub const DEFAULT_HASH_DIMS: usize = 30_000;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("function-word list is empty")]
    EmptyWordlist,
    #[error("n-gram order must be 1, 2 or 3, got {0}")]
    BadOrder(usize),
    #[error("hash dimensionality must be positive")]
    ZeroDims,
    #[error("vector index {index} out of range for dimensionality {dims}")]
    IndexOutOfRange { index: usize, dims: usize },
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One of the feature sets compared across languages.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureSpec {
    FunctionWords { wordlist: String },
    Cxg { grammar: String },
    Ngram { n: usize, dims: usize },
}

impl FeatureSpec {
    pub fn ngram(n: usize) -> Result<Self, FeatureError> {
        if !(1..=3).contains(&n) {
            return Err(FeatureError::BadOrder(n));
        }
        Ok(FeatureSpec::Ngram {
            n,
            dims: DEFAULT_HASH_DIMS,
        })
    }

    /// Stable identifier used in file names and vector records.
    pub fn id(&self) -> String {
        match self {
            FeatureSpec::FunctionWords { wordlist } => format!("function_words:{wordlist}"),
            FeatureSpec::Cxg { grammar } => format!("cxg:{grammar}"),
            FeatureSpec::Ngram { n, dims } => format!("ngram{n}:{dims}"),
        }
    }
}

impl fmt::Display for FeatureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// An encoded sample, persisted as one JSON line:
/// `{"id":..,"region":..,"source":..,"spec":..,"dims":..,"pairs":[[i,v],..]}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleVector<T> {
    pub id: String,
    pub region: String,
    pub source: Source,
    pub spec: String,
    pub values: SparseVector<T>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct SampleVectorRecord<T> {
    id: String,
    region: String,
    source: Source,
    spec: String,
    dims: usize,
    pairs: Vec<(usize, T)>,
}

impl<T: Scalar> SampleVector<T> {
    pub fn to_json_line(&self) -> String {
        let record = SampleVectorRecord {
            id: self.id.clone(),
            region: self.region.clone(),
            source: self.source,
            spec: self.spec.clone(),
            dims: self.values.dim(),
            pairs: self.values.entries().to_vec(),
        };
        serde_json::to_string(&record).expect("vector records serialize")
    }

    pub fn from_json_line(line: &str) -> Result<Self, serde_json::Error> {
        let r: SampleVectorRecord<T> = serde_json::from_str(line)?;
        let dims = r.dims;
        let values = SparseVector::from_pairs(dims, r.pairs).ok_or_else(|| {
            <serde_json::Error as serde::de::Error>::custom(format!("index out of range for dims {dims}"))
        })?;
        Ok(SampleVector {
            id: r.id,
            region: r.region,
            source: r.source,
            spec: r.spec,
            values,
        })
    }
}

pub fn read_vectors<T: Scalar, R: BufRead>(reader: R) -> Result<Vec<SampleVector<T>>, FeatureError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(SampleVector::from_json_line(&line).map_err(|source| FeatureError::Json { line: i + 1, source })?);
    }
    Ok(out)
}
