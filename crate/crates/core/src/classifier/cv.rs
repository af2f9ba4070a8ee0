use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{evaluate, train, ClassifierError, Hyperparameters};
use crate::seed::{derive_seed, rng_from_seed};
use crate::{Scalar, SparseVector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CrossValidation<T> {
    pub k: usize,
    /// Weighted F1 of each held-out fold, in fold order.
    pub fold_f1: Vec<T>,
    pub max: T,
    pub min: T,
    pub mean: T,
}

/// Stratified fold assignment: each class's members are shuffled with a
/// class-specific seed and dealt round-robin into `k` folds.
pub fn stratified_folds(labels: &[String], k: usize, seed: u64) -> Result<Vec<usize>, ClassifierError> {
    if k < 2 {
        return Err(ClassifierError::BadHyperparameter(format!("k = {k}")));
    }
    let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    let mut fold = vec![0; labels.len()];
    for (class, mut members) in by_class {
        if members.len() < k {
            return Err(ClassifierError::ClassTooSmall {
                class: class.to_string(),
                count: members.len(),
                k,
            });
        }
        members.shuffle(&mut rng_from_seed(derive_seed(seed, &format!("fold:{class}"))));
        for (j, i) in members.into_iter().enumerate() {
            fold[i] = j % k;
        }
    }
    Ok(fold)
}

/// k-fold stratified cross-validation reporting per-fold weighted F1.
pub fn cross_validate<T: Scalar>(
    vectors: &[SparseVector<T>],
    labels: &[String],
    k: usize,
    hyper: &Hyperparameters<T>,
    seed: u64,
) -> Result<CrossValidation<T>, ClassifierError> {
    if vectors.len() != labels.len() {
        return Err(ClassifierError::LengthMismatch {
            vectors: vectors.len(),
            labels: labels.len(),
        });
    }
    let folds = stratified_folds(labels, k, seed)?;
    let mut fold_f1 = Vec::with_capacity(k);
    for f in 0..k {
        let (mut tr_x, mut tr_y, mut te_x, mut te_y) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for (i, &fi) in folds.iter().enumerate() {
            if fi == f {
                te_x.push(vectors[i].clone());
                te_y.push(labels[i].clone());
            } else {
                tr_x.push(vectors[i].clone());
                tr_y.push(labels[i].clone());
            }
        }
        let model = train(&tr_x, &tr_y, hyper, derive_seed(seed, &format!("cv-train:{f}")))?;
        fold_f1.push(evaluate(&model, &te_x, &te_y)?.weighted_f1);
    }
    let max = fold_f1.iter().copied().fold(T::neg_infinity(), T::max);
    let min = fold_f1.iter().copied().fold(T::infinity(), T::min);
    let mean = fold_f1.iter().copied().sum::<T>() / T::of_usize(k);
    Ok(CrossValidation {
        k,
        fold_f1,
        max,
        min,
        mean,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LambdaTrial<T> {
    pub lambda: T,
    pub dev_f1: T,
}

/// Picks the regularization strength with the best development-set weighted
/// F1 (earliest grid value on ties).
pub fn tune_lambda<T: Scalar>(
    train_x: &[SparseVector<T>],
    train_y: &[String],
    dev_x: &[SparseVector<T>],
    dev_y: &[String],
    grid: &[T],
    base: &Hyperparameters<T>,
    seed: u64,
) -> Result<(Hyperparameters<T>, Vec<LambdaTrial<T>>), ClassifierError> {
    let mut best: Option<(Hyperparameters<T>, T)> = None;
    let mut trials = Vec::with_capacity(grid.len());
    for &lambda in grid {
        let hyper = Hyperparameters { lambda, ..base.clone() };
        let model = train(train_x, train_y, &hyper, seed)?;
        let f1 = evaluate(&model, dev_x, dev_y)?.weighted_f1;
        trials.push(LambdaTrial { lambda, dev_f1: f1 });
        if best.as_ref().is_none_or(|(_, b)| f1 > *b) {
            best = Some((hyper, f1));
        }
    }
    let chosen = best.map(|(h, _)| h).unwrap_or_else(|| base.clone());
    Ok((chosen, trials))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn planted(per_class: usize, classes: usize) -> (Vec<SparseVector<f64>>, Vec<String>) {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for c in 0..classes {
            for i in 0..per_class {
                let noise = classes + (i % 5);
                xs.push(SparseVector::from_pairs(classes + 5, [(c, 1.0), (noise, 0.3)]).unwrap().normalized());
                ys.push(format!("R{c}"));
            }
        }
        (xs, ys)
    }

    #[test]
    fn folds_are_stratified() {
        let (_, ys) = planted(23, 3);
        let folds = stratified_folds(&ys, 10, 4).unwrap();
        for class in ["R0", "R1", "R2"] {
            let mut sizes = [0usize; 10];
            for (f, y) in folds.iter().zip(&ys) {
                if y == class {
                    sizes[*f] += 1;
                }
            }
            assert!(sizes.iter().all(|&s| s == 2 || s == 3), "{sizes:?}");
        }
    }

    #[test]
    fn separable_data_scores_one_on_every_fold() {
        let (xs, ys) = planted(20, 4);
        let cv = cross_validate(&xs, &ys, 10, &Hyperparameters::default(), 8).unwrap();
        assert_eq!(cv.fold_f1.len(), 10);
        assert!(cv.fold_f1.iter().all(|&f| f == 1.0));
        assert_eq!((cv.max, cv.min), (1.0, 1.0));
        let again = cross_validate(&xs, &ys, 10, &Hyperparameters::default(), 8).unwrap();
        assert_eq!(cv, again);
    }

    #[test]
    fn small_class_is_rejected() {
        let (xs, ys) = planted(9, 2);
        assert!(matches!(
            cross_validate(&xs, &ys, 10, &Hyperparameters::default(), 0),
            Err(ClassifierError::ClassTooSmall { count: 9, .. })
        ));
    }

    #[test]
    fn tuning_prefers_first_of_equal_scores() {
        let (xs, ys) = planted(10, 2);
        let (h, trials) = tune_lambda(&xs, &ys, &xs, &ys, &[1e-3, 1e-4], &Hyperparameters::default(), 0).unwrap();
        assert_eq!(trials.len(), 2);
        assert_eq!(h.lambda, 1e-3);
    }
}
