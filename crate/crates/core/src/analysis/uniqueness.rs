//! Per-region uniqueness: how little a region's weights agree in rank with
//! every other region's.

use serde::{Deserialize, Serialize};

use super::{average_ranks, pearson, AnalysisError};
use crate::classifier::ModelWeights;
use crate::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct UniquenessRow<T> {
    pub region: String,
    /// Sum of Spearman correlations with every other region.
    pub score: T,
    /// Terms left out of the sum because a weight row is constant.
    pub undefined_terms: usize,
}

/// Rows sorted by ascending score: most unique first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct UniquenessTable<T> {
    pub rows: Vec<UniquenessRow<T>>,
}

impl<T: Scalar> UniquenessTable<T> {
    pub fn get(&self, region: &str) -> Option<&UniquenessRow<T>> {
        self.rows.iter().find(|r| r.region == region)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,region,score\n");
        for (i, r) in self.rows.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", i + 1, r.region, r.score));
        }
        out
    }
}

/// Sums, for each class, the Spearman correlations (average ranks for ties)
/// between its weight row and each other class's row.
pub fn uniqueness_scores<T: Scalar>(model: &ModelWeights<T>) -> Result<UniquenessTable<T>, AnalysisError> {
    let k = model.classes().len();
    if k < 3 {
        return Err(AnalysisError::TooFewClasses { needed: 3, found: k });
    }
    use rayon::prelude::*;
    let ranks: Vec<Vec<T>> = (0..k).into_par_iter().map(|c| average_ranks(model.row(c))).collect();
    let mut rho = vec![vec![None; k]; k];
    for a in 0..k {
        for b in a + 1..k {
            let r = pearson(&ranks[a], &ranks[b]);
            rho[a][b] = r;
            rho[b][a] = r;
        }
    }
    let mut rows: Vec<UniquenessRow<T>> = (0..k)
        .map(|a| {
            let terms: Vec<Option<T>> = (0..k).filter(|&b| b != a).map(|b| rho[a][b]).collect();
            UniquenessRow {
                region: model.classes()[a].clone(),
                score: terms.iter().flatten().copied().sum(),
                undefined_terms: terms.iter().filter(|t| t.is_none()).count(),
            }
        })
        .collect();
    rows.sort_by(|x, y| {
        x.score
            .partial_cmp(&y.score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| x.region.cmp(&y.region))
    });
    Ok(UniquenessTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn model(rows: Vec<Vec<f64>>) -> ModelWeights<f64> {
        let names = (0..rows.len()).map(|i| format!("R{i}")).collect();
        let k = rows.len();
        ModelWeights::from_rows(names, rows, vec![0.0; k]).unwrap()
    }

    #[test]
    fn identical_rows_score_two() {
        let t = uniqueness_scores(&model(vec![vec![1.0, 3.0, 2.0]; 3])).unwrap();
        for r in &t.rows {
            assert_relative_eq!(r.score, 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn reversed_row_is_most_unique() {
        let t = uniqueness_scores(&model(vec![
            vec![1.0, 2.0, 3.0, 4.0],
            vec![1.0, 2.0, 4.0, 3.0],
            vec![4.0, 3.0, 2.0, 1.0],
        ]))
        .unwrap();
        assert_eq!(t.rows[0].region, "R2");
        assert!(t.rows[0].score < t.rows[1].score);
    }

    #[test]
    fn constant_rows_are_flagged() {
        let t = uniqueness_scores(&model(vec![vec![1.0, 2.0, 3.0], vec![0.0; 3], vec![3.0, 2.0, 1.0]])).unwrap();
        let constant = t.get("R1").unwrap();
        assert_eq!((constant.score, constant.undefined_terms), (0.0, 2));
        assert_eq!(t.get("R0").unwrap().undefined_terms, 1);
        assert_relative_eq!(t.get("R0").unwrap().score, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn two_classes_are_rejected() {
        assert!(matches!(
            uniqueness_scores(&model(vec![vec![1.0, 2.0]; 2])),
            Err(AnalysisError::TooFewClasses { needed: 3, found: 2 })
        ));
    }

    proptest! {
        #[test]
        fn scores_ignore_monotone_transforms(rows in prop::collection::vec(prop::collection::vec(-3i32..3, 8), 4)) {
            let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
            let warped: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| (v * 0.7).exp() - 5.0).collect()).collect();
            let (a, b) = (uniqueness_scores(&model(rows)).unwrap(), uniqueness_scores(&model(warped)).unwrap());
            for x in &a.rows {
                let y = b.get(&x.region).unwrap();
                prop_assert!((x.score - y.score).abs() < 1e-12);
                prop_assert!(x.score.abs() <= 3.0 + 1e-12);
            }
        }
    }
}
