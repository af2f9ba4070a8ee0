//! Geo-referenced corpus handling: documents, regionalization, variety
//! selection, sample aggregation and train/dev/test splitting.

mod geo;
pub mod io;
mod representation;
mod samples;
mod varieties;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use geo::{assign_to_city, haversine_km, regionalize_domain, City, TldMap, EARTH_RADIUS_KM};
pub use representation::{representation_report, RepresentationRow};
pub use samples::{
    aggregate_corpus, aggregate_samples, split_dataset, tokenize, Aggregation, GroupSplit, Sample,
    SplitAssignment, SplitFlag, SplitPolicy, SAMPLE_WORDS,
};
pub use varieties::{select_varieties, Variety, VarietyInventory, VarietyPolicy};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("malformed domain {0:?}")]
    MalformedDomain(String),
    #[error("coordinates out of range: lat {lat}, lon {lon}")]
    InvalidCoordinates { lat: f64, lon: f64 },
    #[error("city list is empty")]
    EmptyGazetteer,
    #[error("unknown language code {0:?}")]
    UnknownLanguage(String),
    #[error("document {id}: {reason}")]
    InvalidDocument { id: String, reason: String },
    #[error("documents span more than one (language, region, source) group: {0} and {1}")]
    MixedGroup(String, String),
    #[error("negative count for region {0:?}")]
    NegativeCount(String),
    #[error("table totals are zero")]
    EmptyTable,
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Register a document was collected from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Web,
    Social,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Web => "web",
            Source::Social => "social",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where a document came from: a web domain or a geotagged post.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Origin {
    Domain(String),
    Point { lat: f64, lon: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeoDocument {
    pub id: String,
    pub text: String,
    pub language: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<String>,
    pub source: Source,
    pub origin: Origin,
}

impl GeoDocument {
    pub fn validate(&self) -> Result<(), CorpusError> {
        let invalid = |reason: &str| CorpusError::InvalidDocument {
            id: self.id.clone(),
            reason: reason.to_string(),
        };
        if self.text.trim().is_empty() {
            return Err(invalid("empty text"));
        }
        match (&self.source, &self.origin) {
            (Source::Web, Origin::Domain(_)) => Ok(()),
            (Source::Social, Origin::Point { lat, lon }) => {
                if valid_coordinates(*lat, *lon) {
                    Ok(())
                } else {
                    Err(invalid("coordinates out of range"))
                }
            }
            (Source::Web, _) => Err(invalid("web document without a domain origin")),
            (Source::Social, _) => Err(invalid("social document without a coordinate origin")),
        }
    }

    /// Group key, available once the document carries a region.
    pub fn group(&self) -> Option<GroupKey> {
        self.region.as_ref().map(|region| GroupKey {
            language: self.language.clone(),
            region: region.clone(),
            source: self.source,
        })
    }
}

pub(crate) fn valid_coordinates(lat: f64, lon: f64) -> bool {
    lat.is_finite() && lon.is_finite() && lat.abs() <= 90.0 && lon.abs() <= 180.0
}

/// A (language, region, source) cell; the unit of aggregation and splitting.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupKey {
    pub language: String,
    pub region: String,
    pub source: Source,
}

impl GroupKey {
    pub fn new(language: &str, region: &str, source: Source) -> Self {
        GroupKey {
            language: language.to_string(),
            region: region.to_string(),
            source,
        }
    }
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.language, self.region, self.source)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn document_json_ignores_unknown_fields() {
        let line = r#"{"id":"d1","text":"kia ora","language":"eng","source":"web","origin":"example.nz","crawl":"2017"}"#;
        let doc: GeoDocument = serde_json::from_str(line).unwrap();
        assert_eq!(doc.origin, Origin::Domain("example.nz".into()));
        assert!(doc.region.is_none());
        doc.validate().unwrap();

        let line = r#"{"id":"t1","text":"hi","language":"eng","source":"social","origin":{"lat":-43.5,"lon":172.6}}"#;
        let doc: GeoDocument = serde_json::from_str(line).unwrap();
        assert!(matches!(doc.origin, Origin::Point { .. }));
        doc.validate().unwrap();
    }

    #[test]
    fn document_invariants() {
        let mut doc = GeoDocument {
            id: "a".into(),
            text: "  ".into(),
            language: "eng".into(),
            region: None,
            source: Source::Web,
            origin: Origin::Domain("a.nz".into()),
        };
        assert!(doc.validate().is_err());
        doc.text = "words".into();
        doc.source = Source::Social;
        assert!(doc.validate().is_err());
        doc.origin = Origin::Point { lat: 91.0, lon: 0.0 };
        assert!(doc.validate().is_err());
        doc.origin = Origin::Point { lat: 90.0, lon: -180.0 };
        doc.validate().unwrap();
    }
}
