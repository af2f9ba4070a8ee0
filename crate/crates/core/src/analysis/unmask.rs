//! Unmasking: repeatedly drop each class's strongest features and retrain.

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::classifier::{evaluate, train, ClassifierError, Hyperparameters, ModelWeights};
use crate::{Scalar, SparseVector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct UnmaskingStep<T> {
    pub iteration: usize,
    /// Test weighted F1 of the model trained at this iteration.
    pub f1: T,
    /// Features removed after this iteration, in removal order.
    pub removed: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct UnmaskingCurve<T> {
    pub requested: usize,
    pub per_class: usize,
    pub steps: Vec<UnmaskingStep<T>>,
    /// Set when the feature space ran out before `requested` iterations.
    pub exhausted: bool,
}

impl<T: Scalar> UnmaskingCurve<T> {
    pub fn f1(&self) -> Vec<T> {
        self.steps.iter().map(|s| s.f1).collect()
    }

    pub fn total_removed(&self) -> usize {
        self.steps.iter().map(|s| s.removed.len()).sum()
    }

    /// `iteration,f1` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,f1\n");
        for s in &self.steps {
            out.push_str(&format!("{},{}\n", s.iteration, s.f1));
        }
        out
    }
}

/// Picks up to `per_class` highest and lowest surviving weights from one row.
/// Ties go to the lowest feature index.
fn extremes<T: Scalar>(row: &[T], alive: &[bool], per_class: usize) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..row.len()).filter(|&j| alive[j]).collect();
    let mut picked = Vec::with_capacity(2 * per_class);
    ids.sort_by(|&a, &b| row[b].partial_cmp(&row[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
    picked.extend(ids.iter().take(per_class));
    ids.sort_by(|&a, &b| row[a].partial_cmp(&row[b]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
    picked.extend(ids.iter().take(per_class));
    picked
}

fn masked<T: Scalar>(vectors: &[SparseVector<T>], alive: &[bool]) -> Vec<SparseVector<T>> {
    vectors.iter().map(|v| v.without(|j| !alive[j])).collect()
}

/// Runs `iterations` rounds of train, evaluate on the test set, then remove
/// each class's `per_class` maximum- and minimum-weight surviving features.
///
/// Every round retrains from scratch with the same seed, so round 0 equals a
/// plain [`train`] and [`evaluate`] with that seed. A feature selected by
/// several classes is removed once.
pub fn unmask<T: Scalar>(
    train_set: (&[SparseVector<T>], &[String]),
    test_set: (&[SparseVector<T>], &[String]),
    iterations: usize,
    per_class: usize,
    hyper: &Hyperparameters<T>,
    seed: u64,
) -> Result<UnmaskingCurve<T>, AnalysisError> {
    let dims = train_set.0.first().map_or(0, |v| v.dim());
    if let Some(v) = test_set.0.iter().find(|v| v.dim() != dims) {
        return Err(ClassifierError::DimensionMismatch {
            expected: dims,
            found: v.dim(),
        }
        .into());
    }
    let mut alive = vec![true; dims];
    let mut surviving = dims;
    let mut steps = Vec::with_capacity(iterations);
    let mut exhausted = false;
    for iteration in 0..iterations {
        if surviving == 0 {
            exhausted = true;
            break;
        }
        let (model, f1) = round(train_set, test_set, &alive, hyper, seed)?;
        let mut removed = Vec::new();
        for c in 0..model.classes().len() {
            for j in extremes(model.row(c), &alive, per_class) {
                if alive[j] {
                    alive[j] = false;
                    surviving -= 1;
                    removed.push(j);
                }
            }
        }
        steps.push(UnmaskingStep { iteration, f1, removed });
    }
    Ok(UnmaskingCurve {
        requested: iterations,
        per_class,
        steps,
        exhausted,
    })
}

fn round<T: Scalar>(
    train_set: (&[SparseVector<T>], &[String]),
    test_set: (&[SparseVector<T>], &[String]),
    alive: &[bool],
    hyper: &Hyperparameters<T>,
    seed: u64,
) -> Result<(ModelWeights<T>, T), ClassifierError> {
    let model = train(&masked(train_set.0, alive), train_set.1, hyper, seed)?;
    let report = evaluate(&model, &masked(test_set.0, alive), test_set.1)?;
    Ok((model, report.weighted_f1))
}
