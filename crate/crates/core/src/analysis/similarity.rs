//! Region-by-region similarity from confusion counts or model weights.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{pearson, AnalysisError};
use crate::classifier::{EvaluationReport, ModelWeights};
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimilarityKind {
    ErrorCounts,
    Cosine,
}

/// Symmetric region matrix. `None` marks an undefined entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SimilarityMatrix<T> {
    pub kind: SimilarityKind,
    pub regions: Vec<String>,
    pub values: Vec<Vec<Option<T>>>,
}

impl<T: Scalar> SimilarityMatrix<T> {
    pub fn index(&self, region: &str) -> Option<usize> {
        self.regions.iter().position(|r| r == region)
    }

    pub fn get(&self, a: &str, b: &str) -> Option<T> {
        self.values[self.index(a)?][self.index(b)?]
    }

    /// Region pairs `a < b` (by name) with their values.
    pub fn upper_pairs(&self) -> BTreeMap<(String, String), Option<T>> {
        let mut out = BTreeMap::new();
        for i in 0..self.regions.len() {
            for j in i + 1..self.regions.len() {
                let (a, b) = (&self.regions[i], &self.regions[j]);
                let key = if a < b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
                out.insert(key, self.values[i][j]);
            }
        }
        out
    }

    /// Long-format `region_a,region_b,value` rows over all ordered pairs;
    /// undefined entries have an empty value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("region_a,region_b,value\n");
        for (i, a) in self.regions.iter().enumerate() {
            for (j, b) in self.regions.iter().enumerate() {
                match self.values[i][j] {
                    Some(v) => out.push_str(&format!("{a},{b},{v}\n")),
                    None => out.push_str(&format!("{a},{b},\n")),
                }
            }
        }
        out
    }
}

/// Total confusions between each pair of regions, in both directions.
pub fn error_similarity<T: Scalar>(report: &EvaluationReport<T>) -> SimilarityMatrix<T> {
    let c = &report.confusion;
    let k = report.classes.len();
    let values = (0..k)
        .map(|a| {
            (0..k)
                .map(|b| Some(if a == b { T::zero() } else { T::of_usize(c[a][b] + c[b][a]) }))
                .collect()
        })
        .collect();
    SimilarityMatrix {
        kind: SimilarityKind::ErrorCounts,
        regions: report.classes.clone(),
        values,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RegisterCorrelation<T> {
    /// `None` when either side has zero variance.
    pub r: Option<T>,
    pub pairs: Vec<(String, String)>,
}

/// Pearson correlation between two matrices over the region pairs both
/// define.
pub fn cross_register_correlation<T: Scalar>(
    a: &SimilarityMatrix<T>,
    b: &SimilarityMatrix<T>,
) -> Result<RegisterCorrelation<T>, AnalysisError> {
    let bp = b.upper_pairs();
    let mut pairs = Vec::new();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (key, va) in a.upper_pairs() {
        if let (Some(x), Some(Some(y))) = (va, bp.get(&key)) {
            xs.push(x);
            ys.push(*y);
            pairs.push(key);
        }
    }
    if pairs.len() < 3 {
        return Err(AnalysisError::TooFewPairs(pairs.len()));
    }
    Ok(RegisterCorrelation {
        r: pearson(&xs, &ys),
        pairs,
    })
}

/// Cosine similarity between the class weight rows (intercepts excluded).
/// Entries involving an all-zero row are undefined.
pub fn cosine_similarity_matrix<T: Scalar>(model: &ModelWeights<T>) -> Result<SimilarityMatrix<T>, AnalysisError> {
    let k = model.classes().len();
    if k < 2 {
        return Err(AnalysisError::TooFewClasses { needed: 2, found: k });
    }
    let norms: Vec<T> = (0..k)
        .map(|c| model.row(c).iter().map(|&w| w * w).sum::<T>().sqrt())
        .collect();
    let mut values = vec![vec![None; k]; k];
    for a in 0..k {
        for b in a..k {
            if norms[a] == T::zero() || norms[b] == T::zero() {
                continue;
            }
            let v = if a == b {
                T::one()
            } else {
                let dot: T = model.row(a).iter().zip(model.row(b)).map(|(&x, &y)| x * y).sum();
                (dot / (norms[a] * norms[b])).max(-T::one()).min(T::one())
            };
            values[a][b] = Some(v);
            values[b][a] = Some(v);
        }
    }
    Ok(SimilarityMatrix {
        kind: SimilarityKind::Cosine,
        regions: model.classes().to_vec(),
        values,
    })
}
