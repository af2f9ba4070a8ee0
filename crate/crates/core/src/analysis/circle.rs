//! Grammar fit per region and inner/outer circle comparisons.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::{welch_t_test, AnalysisError};
use crate::grammar::{construction_counts, AnnotatedToken, Grammar};
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Circle {
    Inner,
    Outer,
}

impl fmt::Display for Circle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Circle::Inner => "inner",
            Circle::Outer => "outer",
        })
    }
}

impl std::str::FromStr for Circle {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inner" => Ok(Circle::Inner),
            "outer" => Ok(Circle::Outer),
            _ => Err(AnalysisError::UnknownCircle(s.to_string())),
        }
    }
}

/// Reads a `region,circle` CSV with a header row.
pub fn read_grouping<R: Read>(reader: R) -> Result<BTreeMap<String, Circle>, AnalysisError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = BTreeMap::new();
    for row in rdr.records() {
        let row = row?;
        out.insert(row[0].to_string(), row[1].parse()?);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GrammarFitRow<T> {
    pub region: String,
    pub samples: usize,
    /// Mean total construction matches per sample.
    pub mean: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GrammarFit<T> {
    pub rows: Vec<GrammarFitRow<T>>,
    /// Regions with no samples, left out of `rows`.
    pub empty_regions: Vec<String>,
}

impl<T: Scalar> GrammarFit<T> {
    pub fn values(&self) -> BTreeMap<String, T> {
        self.rows.iter().map(|r| (r.region.clone(), r.mean)).collect()
    }
}

/// Mean number of construction matches (all constructions, overlaps
/// included) per annotated sample, by region.
pub fn grammar_fit<T: Scalar>(samples: &BTreeMap<String, Vec<Vec<AnnotatedToken>>>, grammar: &Grammar) -> GrammarFit<T> {
    use rayon::prelude::*;
    let mut rows = Vec::new();
    let mut empty_regions = Vec::new();
    for (region, docs) in samples {
        if docs.is_empty() {
            empty_regions.push(region.clone());
            continue;
        }
        let total: usize = docs
            .par_iter()
            .map(|tokens| construction_counts(tokens, grammar).iter().sum::<usize>())
            .sum();
        rows.push(GrammarFitRow {
            region: region.clone(),
            samples: docs.len(),
            mean: T::of_usize(total) / T::of_usize(docs.len()),
        });
    }
    GrammarFit { rows, empty_regions }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CircleTest<T> {
    pub t: T,
    pub df: T,
    /// Two-tailed.
    pub p: T,
    pub inner_mean: T,
    pub outer_mean: T,
    pub inner: Vec<String>,
    pub outer: Vec<String>,
    /// Regions with a value but no circle.
    pub ungrouped: Vec<String>,
    /// Set when either group has zero variance.
    pub degenerate: bool,
}

/// Welch t-test of inner-circle against outer-circle region values.
pub fn circle_ttest<T: Scalar>(
    values: &BTreeMap<String, T>,
    grouping: &BTreeMap<String, Circle>,
) -> Result<CircleTest<T>, AnalysisError> {
    let (mut inner, mut outer, mut ungrouped) = (Vec::new(), Vec::new(), Vec::new());
    for region in values.keys() {
        match grouping.get(region) {
            Some(Circle::Inner) => inner.push(region.clone()),
            Some(Circle::Outer) => outer.push(region.clone()),
            None => ungrouped.push(region.clone()),
        }
    }
    for (circle, members) in [(Circle::Inner, &inner), (Circle::Outer, &outer)] {
        if members.len() < 2 {
            return Err(AnalysisError::SmallGroup {
                circle,
                found: members.len(),
            });
        }
    }
    let pick = |rs: &[String]| rs.iter().map(|r| values[r]).collect::<Vec<T>>();
    let w = welch_t_test(&pick(&inner), &pick(&outer)).expect("both groups have two values");
    Ok(CircleTest {
        t: w.t,
        df: w.df,
        p: w.p,
        inner_mean: w.mean_a,
        outer_mean: w.mean_b,
        inner,
        outer,
        ungrouped,
        degenerate: w.degenerate,
    })
}
