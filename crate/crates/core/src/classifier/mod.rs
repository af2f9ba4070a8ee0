//! One-vs-rest linear SVMs trained by primal subgradient descent, with
//! evaluation, cross-validation and a versioned model file.

mod cv;
mod metrics;
mod svm;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::{Scalar, SparseVector};

pub use cv::{cross_validate, stratified_folds, tune_lambda, CrossValidation, LambdaTrial};
pub use metrics::{evaluate, report_from_confusion, weighted_f1, ClassMetrics, EvaluationReport};
pub use svm::{hinge_objective, train_binary, BinaryModel};

pub const MODEL_FORMAT: &str = "dialectometry-linear-svm";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("training needs at least two classes, found {0}")]
    TooFewClasses(usize),
    #[error("{vectors} vectors but {labels} labels")]
    LengthMismatch { vectors: usize, labels: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("label {0:?} is not a model class")]
    UnknownLabel(String),
    #[error("evaluation set is empty")]
    EmptyTestSet,
    #[error("class {class:?} has {count} samples, fewer than {k} folds")]
    ClassTooSmall { class: String, count: usize, k: usize },
    #[error("invalid hyperparameter: {0}")]
    BadHyperparameter(String),
    #[error("invalid model file: {0}")]
    BadModel(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Training settings.
///
/// `lambda` is the L2 regularization strength; the step size at update `t`
/// is `1 / (lambda * t)`. `bias` is the value of a constant feature appended
/// to every vector (0 disables the intercept).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Hyperparameters<T> {
    pub lambda: T,
    pub epochs: usize,
    pub bias: T,
}

impl<T: Scalar> Default for Hyperparameters<T> {
    fn default() -> Self {
        Hyperparameters {
            lambda: T::of(1e-4),
            epochs: 10,
            bias: T::one(),
        }
    }
}

impl<T: Scalar> Hyperparameters<T> {
    pub fn validate(&self) -> Result<(), ClassifierError> {
        if self.lambda <= T::zero() || !self.lambda.is_finite() {
            return Err(ClassifierError::BadHyperparameter(format!("lambda = {}", self.lambda)));
        }
        if self.epochs == 0 {
            return Err(ClassifierError::BadHyperparameter("epochs = 0".into()));
        }
        if !self.bias.is_finite() || self.bias < T::zero() {
            return Err(ClassifierError::BadHyperparameter(format!("bias = {}", self.bias)));
        }
        Ok(())
    }
}

/// Trained one-vs-rest weights: one row per class, in class order.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelWeights<T> {
    classes: Vec<String>,
    dims: usize,
    weights: Vec<T>,
    bias: Vec<T>,
    pub hyper: Hyperparameters<T>,
    pub seed: u64,
    pub spec: String,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct ModelFile<T> {
    format: String,
    version: u32,
    classes: Vec<String>,
    spec: String,
    dims: usize,
    hyper: Hyperparameters<T>,
    seed: u64,
    bias: Vec<T>,
    /// Row-major, `classes.len() * dims` values.
    weights: Vec<T>,
}

fn check_lengths<T: Scalar>(vectors: &[SparseVector<T>], labels: &[String]) -> Result<usize, ClassifierError> {
    if vectors.len() != labels.len() {
        return Err(ClassifierError::LengthMismatch {
            vectors: vectors.len(),
            labels: labels.len(),
        });
    }
    let dims = vectors.first().map_or(0, |v| v.dim());
    if let Some(v) = vectors.iter().find(|v| v.dim() != dims) {
        return Err(ClassifierError::DimensionMismatch {
            expected: dims,
            found: v.dim(),
        });
    }
    Ok(dims)
}

/// Trains one binary SVM per class (that class against all others).
///
/// Classes are the sorted distinct labels. Each binary problem draws its
/// shuffles from a seed derived from `seed` and the class name, so results
/// do not depend on how the problems are scheduled across threads.
pub fn train<T: Scalar>(
    vectors: &[SparseVector<T>],
    labels: &[String],
    hyper: &Hyperparameters<T>,
    seed: u64,
) -> Result<ModelWeights<T>, ClassifierError> {
    hyper.validate()?;
    let dims = check_lengths(vectors, labels)?;
    let classes: Vec<String> = labels.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    if classes.len() < 2 {
        return Err(ClassifierError::TooFewClasses(classes.len()));
    }
    use rayon::prelude::*;
    let rows: Vec<BinaryModel<T>> = classes
        .par_iter()
        .map(|class| {
            let targets: Vec<bool> = labels.iter().map(|l| l == class).collect();
            let class_seed = crate::seed::derive_seed(seed, &format!("ovr:{class}"));
            train_binary(vectors, &targets, dims, hyper, class_seed)
        })
        .collect();
    let mut weights = Vec::with_capacity(classes.len() * dims);
    let mut bias = Vec::with_capacity(classes.len());
    for row in rows {
        weights.extend_from_slice(&row.weights);
        bias.push(row.bias);
    }
    Ok(ModelWeights {
        classes,
        dims,
        weights,
        bias,
        hyper: hyper.clone(),
        seed,
        spec: String::new(),
    })
}

impl<T: Scalar> ModelWeights<T> {
    /// Assembles a model from explicit rows.
    pub fn from_rows(classes: Vec<String>, rows: Vec<Vec<T>>, bias: Vec<T>) -> Result<Self, ClassifierError> {
        if classes.len() < 2 {
            return Err(ClassifierError::TooFewClasses(classes.len()));
        }
        if rows.len() != classes.len() || bias.len() != classes.len() {
            return Err(ClassifierError::BadModel("row count differs from class count".into()));
        }
        let dims = rows[0].len();
        if rows.iter().any(|r| r.len() != dims) {
            return Err(ClassifierError::BadModel("ragged weight rows".into()));
        }
        let model = ModelWeights {
            classes,
            dims,
            weights: rows.concat(),
            bias,
            hyper: Hyperparameters::default(),
            seed: 0,
            spec: String::new(),
        };
        model.check()?;
        Ok(model)
    }

    pub fn with_spec(mut self, spec: &str) -> Self {
        self.spec = spec.to_string();
        self
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn row(&self, class: usize) -> &[T] {
        &self.weights[class * self.dims..(class + 1) * self.dims]
    }

    pub fn bias(&self) -> &[T] {
        &self.bias
    }

    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == label)
    }

    pub fn scores(&self, x: &SparseVector<T>) -> Result<Vec<T>, ClassifierError> {
        if x.dim() != self.dims {
            return Err(ClassifierError::DimensionMismatch {
                expected: self.dims,
                found: x.dim(),
            });
        }
        Ok((0..self.classes.len())
            .map(|c| x.dot_dense(self.row(c)) + self.bias[c])
            .collect())
    }

    /// Index of the highest-scoring class; the earlier class wins ties.
    pub fn predict_index(&self, x: &SparseVector<T>) -> Result<usize, ClassifierError> {
        let scores = self.scores(x)?;
        let mut best = 0;
        for (c, &s) in scores.iter().enumerate().skip(1) {
            if s > scores[best] {
                best = c;
            }
        }
        Ok(best)
    }

    fn check(&self) -> Result<(), ClassifierError> {
        if self.weights.len() != self.classes.len() * self.dims || self.bias.len() != self.classes.len() {
            return Err(ClassifierError::BadModel("payload length mismatch".into()));
        }
        if self.weights.iter().chain(&self.bias).any(|w| !w.is_finite()) {
            return Err(ClassifierError::BadModel("non-finite weight".into()));
        }
        let distinct: BTreeSet<&String> = self.classes.iter().collect();
        if distinct.len() != self.classes.len() {
            return Err(ClassifierError::BadModel("duplicate class".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            classes: self.classes.clone(),
            spec: self.spec.clone(),
            dims: self.dims,
            hyper: self.hyper.clone(),
            seed: self.seed,
            bias: self.bias.clone(),
            weights: self.weights.clone(),
        };
        serde_json::to_string(&file).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ClassifierError> {
        let file: ModelFile<T> = serde_json::from_str(text)?;
        if file.format != MODEL_FORMAT {
            return Err(ClassifierError::BadModel(format!("unknown format {:?}", file.format)));
        }
        if file.version != MODEL_VERSION {
            return Err(ClassifierError::BadModel(format!("unsupported version {}", file.version)));
        }
        let model = ModelWeights {
            classes: file.classes,
            dims: file.dims,
            weights: file.weights,
            bias: file.bias,
            hyper: file.hyper,
            seed: file.seed,
            spec: file.spec,
        };
        model.check()?;
        Ok(model)
    }
}

/// Predicted region for one vector.
pub fn predict<'m, T: Scalar>(model: &'m ModelWeights<T>, x: &SparseVector<T>) -> Result<&'m str, ClassifierError> {
    Ok(&model.classes[model.predict_index(x)?])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(ls: &[&str]) -> Vec<String> {
        ls.iter().map(|s| s.to_string()).collect()
    }

    fn separable() -> (Vec<SparseVector<f64>>, Vec<String>) {
        (
            vec![SparseVector::from_dense(&[1.0, 0.0]), SparseVector::from_dense(&[-1.0, 0.0])],
            labels(&["A", "B"]),
        )
    }

    #[test]
    fn separable_pair_is_fit_exactly() {
        let (x, y) = separable();
        let model = train(&x, &y, &Hyperparameters::default(), 1).unwrap();
        assert_eq!(predict(&model, &x[0]).unwrap(), "A");
        assert_eq!(predict(&model, &x[1]).unwrap(), "B");
        for c in 0..2 {
            let targets: Vec<bool> = y.iter().map(|l| *l == model.classes()[c]).collect();
            let loss: f64 = x
                .iter()
                .zip(&targets)
                .map(|(v, &t)| {
                    let s = v.dot_dense(model.row(c)) + model.bias()[c];
                    let sign = if t { 1.0 } else { -1.0 };
                    (1.0 - sign * s).max(0.0)
                })
                .sum();
            assert_eq!(loss, 0.0);
        }
    }

    #[test]
    fn training_is_deterministic() {
        let (x, y) = separable();
        let a = train(&x, &y, &Hyperparameters::default(), 9).unwrap();
        let b = train(&x, &y, &Hyperparameters::default(), 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_class_and_dimension_errors() {
        let x = vec![SparseVector::from_dense(&[1.0f64])];
        assert!(matches!(
            train(&x, &labels(&["A"]), &Hyperparameters::default(), 0),
            Err(ClassifierError::TooFewClasses(1))
        ));
        let x = vec![SparseVector::from_dense(&[1.0f64]), SparseVector::from_dense(&[1.0, 2.0])];
        assert!(matches!(
            train(&x, &labels(&["A", "B"]), &Hyperparameters::default(), 0),
            Err(ClassifierError::DimensionMismatch { .. })
        ));
        let (x, y) = separable();
        let model = train(&x, &y, &Hyperparameters::default(), 1).unwrap();
        assert!(predict(&model, &SparseVector::zeros(3)).is_err());
    }

    #[test]
    fn zero_vector_goes_to_largest_bias() {
        let m = ModelWeights::from_rows(
            labels(&["A", "B", "C"]),
            vec![vec![1.0f64], vec![-1.0], vec![0.0]],
            vec![0.1, 0.3, 0.3],
        )
        .unwrap();
        assert_eq!(predict(&m, &SparseVector::zeros(1)).unwrap(), "B");
        let tie = ModelWeights::from_rows(labels(&["A", "B"]), vec![vec![1.0f64], vec![2.0]], vec![0.0, 0.0]).unwrap();
        assert_eq!(predict(&tie, &SparseVector::zeros(1)).unwrap(), "A");
    }

    #[test]
    fn positive_rescaling_keeps_prediction_without_bias() {
        let m = ModelWeights::from_rows(
            labels(&["A", "B", "C"]),
            vec![vec![1.0f64, -2.0, 0.5], vec![0.3, 0.3, 0.3], vec![-1.0, 2.0, 0.0]],
            vec![0.0; 3],
        )
        .unwrap();
        let x = SparseVector::from_dense(&[0.2, 0.7, -0.1]);
        let p = predict(&m, &x).unwrap();
        for k in [1e-6, 0.5, 3.0, 1e6] {
            assert_eq!(predict(&m, &x.scaled(k)).unwrap(), p);
        }
    }

    #[test]
    fn model_file_round_trip_and_validation() {
        let (x, y) = separable();
        let model = train(&x, &y, &Hyperparameters::default(), 3).unwrap().with_spec("cxg:g");
        let text = model.to_json();
        assert!(text.starts_with(r#"{"format":"dialectometry-linear-svm","version":1,"classes":["A","B"]"#));
        assert_eq!(ModelWeights::<f64>::from_json(&text).unwrap(), model);
        let broken = text.replace("\"version\":1", "\"version\":9");
        assert!(ModelWeights::<f64>::from_json(&broken).is_err());
        let short = text.replace("\"dims\":2", "\"dims\":3");
        assert!(matches!(ModelWeights::<f64>::from_json(&short), Err(ClassifierError::BadModel(_))));
    }

    #[test]
    fn bad_hyperparameters() {
        let (x, y) = separable();
        let h = Hyperparameters { lambda: 0.0, ..Default::default() };
        assert!(train(&x, &y, &h, 0).is_err());
        let h = Hyperparameters { epochs: 0, ..Hyperparameters::<f64>::default() };
        assert!(train(&x, &y, &h, 0).is_err());
    }
}
