use serde::{Deserialize, Serialize};

use super::{ClassifierError, ModelWeights};
use crate::{Scalar, SparseVector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ClassMetrics<T> {
    pub class: String,
    pub precision: T,
    pub recall: T,
    pub f1: T,
    /// Test samples whose true label is this class.
    pub support: usize,
    /// Set when nothing was predicted as this class (precision reported as 0).
    pub precision_undefined: bool,
    /// Set when the class has no test samples (recall reported as 0).
    pub recall_undefined: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct EvaluationReport<T> {
    pub classes: Vec<String>,
    pub per_class: Vec<ClassMetrics<T>>,
    pub weighted_f1: T,
    pub accuracy: T,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<usize>>,
    pub n_test: Vec<usize>,
}

impl<T: Scalar> EvaluationReport<T> {
    pub fn total(&self) -> usize {
        self.n_test.iter().sum()
    }

    pub fn misclassified(&self) -> usize {
        self.total() - (0..self.classes.len()).map(|i| self.confusion[i][i]).sum::<usize>()
    }
}

fn ratio<T: Scalar>(num: usize, den: usize) -> (T, bool) {
    if den == 0 {
        (T::zero(), true)
    } else {
        (T::of_usize(num) / T::of_usize(den), false)
    }
}

/// Per-class precision, recall and F1 from a confusion matrix.
pub fn report_from_confusion<T: Scalar>(
    classes: Vec<String>,
    confusion: Vec<Vec<usize>>,
) -> Result<EvaluationReport<T>, ClassifierError> {
    let k = classes.len();
    if confusion.len() != k || confusion.iter().any(|r| r.len() != k) {
        return Err(ClassifierError::BadModel("confusion matrix shape differs from class count".into()));
    }
    let n_test: Vec<usize> = confusion.iter().map(|r| r.iter().sum()).collect();
    let total: usize = n_test.iter().sum();
    if total == 0 {
        return Err(ClassifierError::EmptyTestSet);
    }
    let mut per_class = Vec::with_capacity(k);
    let mut weighted = T::zero();
    let mut correct = 0;
    for c in 0..k {
        let tp = confusion[c][c];
        let predicted: usize = (0..k).map(|r| confusion[r][c]).sum();
        let (precision, precision_undefined) = ratio::<T>(tp, predicted);
        let (recall, recall_undefined) = ratio::<T>(tp, n_test[c]);
        let (f1, _) = ratio::<T>(2 * tp, predicted + n_test[c]);
        weighted += T::of_usize(n_test[c]) * f1;
        correct += tp;
        per_class.push(ClassMetrics {
            class: classes[c].clone(),
            precision,
            recall,
            f1,
            support: n_test[c],
            precision_undefined,
            recall_undefined,
        });
    }
    let n = T::of_usize(total);
    Ok(EvaluationReport {
        classes,
        per_class,
        weighted_f1: weighted / n,
        accuracy: T::of_usize(correct) / n,
        confusion,
        n_test,
    })
}

/// Class-size-weighted mean of per-class F1.
pub fn weighted_f1<T: Scalar>(confusion: &[Vec<usize>]) -> Result<T, ClassifierError> {
    let classes = (0..confusion.len()).map(|i| i.to_string()).collect();
    Ok(report_from_confusion::<T>(classes, confusion.to_vec())?.weighted_f1)
}

/// Scores a model on labelled vectors.
pub fn evaluate<T: Scalar>(
    model: &ModelWeights<T>,
    vectors: &[SparseVector<T>],
    labels: &[String],
) -> Result<EvaluationReport<T>, ClassifierError> {
    if vectors.len() != labels.len() {
        return Err(ClassifierError::LengthMismatch {
            vectors: vectors.len(),
            labels: labels.len(),
        });
    }
    if vectors.is_empty() {
        return Err(ClassifierError::EmptyTestSet);
    }
    let k = model.classes().len();
    let mut confusion = vec![vec![0usize; k]; k];
    for (x, label) in vectors.iter().zip(labels) {
        let truth = model
            .class_index(label)
            .ok_or_else(|| ClassifierError::UnknownLabel(label.clone()))?;
        confusion[truth][model.predict_index(x)?] += 1;
    }
    report_from_confusion(model.classes().to_vec(), confusion)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("C{i}")).collect()
    }

    #[test]
    fn hand_built_three_class_matrix() {
        // F1 = 2TP / (2TP + FP + FN): 16/19, 18/21, 20/20; equal supports.
        let r = report_from_confusion::<f64>(names(3), vec![vec![8, 2, 0], vec![1, 9, 0], vec![0, 0, 10]]).unwrap();
        let expected = (16.0 / 19.0 + 18.0 / 21.0 + 1.0) / 3.0;
        assert!((r.weighted_f1 - expected).abs() < 1e-12);
        assert!((r.weighted_f1 - 359.0 / 399.0).abs() < 1e-12);
        assert!((r.per_class[0].precision - 8.0 / 9.0).abs() < 1e-15);
        assert!((r.per_class[1].recall - 0.9).abs() < 1e-15);
        assert_eq!(r.n_test, vec![10, 10, 10]);
        assert_eq!(r.misclassified(), 3);
    }

    #[test]
    fn constant_predictor_on_balanced_pair() {
        let r = report_from_confusion::<f64>(names(2), vec![vec![50, 0], vec![50, 0]]).unwrap();
        assert!((r.weighted_f1 - 1.0 / 3.0).abs() < 1e-15);
        assert!(r.per_class[1].precision_undefined);
        assert_eq!(r.per_class[1].f1, 0.0);
    }

    #[test]
    fn perfect_predictions() {
        let r = report_from_confusion::<f32>(names(3), vec![vec![4, 0, 0], vec![0, 7, 0], vec![0, 0, 1]]).unwrap();
        assert_eq!(r.weighted_f1, 1.0);
        assert!(r.per_class.iter().all(|m| m.precision == 1.0 && m.recall == 1.0));
    }

    #[test]
    fn empty_and_unknown_labels() {
        assert!(matches!(
            report_from_confusion::<f64>(names(2), vec![vec![0, 0], vec![0, 0]]),
            Err(ClassifierError::EmptyTestSet)
        ));
        let m = ModelWeights::from_rows(names(2), vec![vec![1.0f64], vec![-1.0]], vec![0.0, 0.0]).unwrap();
        let x = vec![SparseVector::from_dense(&[1.0])];
        assert!(matches!(
            evaluate(&m, &x, &["Z".to_string()]),
            Err(ClassifierError::UnknownLabel(_))
        ));
        assert!(matches!(evaluate(&m, &[], &[]), Err(ClassifierError::EmptyTestSet)));
    }

    proptest! {
        #[test]
        fn constant_classifier_closed_form(k in 2usize..8, per in 1usize..30, target in 0usize..8) {
            // Everything predicted as one class on balanced data:
            // F1 of that class = 2/(k+1), others 0, so weighted F1 = 2/(k(k+1)).
            let target = target % k;
            let confusion: Vec<Vec<usize>> = (0..k)
                .map(|_| (0..k).map(|c| if c == target { per } else { 0 }).collect())
                .collect();
            let r = report_from_confusion::<f64>(names(k), confusion).unwrap();
            let expected = 2.0 / (k as f64 * (k as f64 + 1.0));
            prop_assert!((r.weighted_f1 - expected).abs() < 1e-12);
        }

        #[test]
        fn confusion_rows_and_metric_ranges(cells in prop::collection::vec(0usize..20, 9)) {
            let confusion: Vec<Vec<usize>> = cells.chunks(3).map(|c| c.to_vec()).collect();
            prop_assume!(cells.iter().sum::<usize>() > 0);
            let r = report_from_confusion::<f64>(names(3), confusion.clone()).unwrap();
            prop_assert_eq!(r.total(), cells.iter().sum::<usize>());
            for (i, row) in confusion.iter().enumerate() {
                prop_assert_eq!(row.iter().sum::<usize>(), r.n_test[i]);
            }
            for m in &r.per_class {
                for v in [m.precision, m.recall, m.f1] {
                    prop_assert!((0.0..=1.0).contains(&v));
                }
            }
            prop_assert!((0.0..=1.0).contains(&r.weighted_f1));
        }
    }
}
