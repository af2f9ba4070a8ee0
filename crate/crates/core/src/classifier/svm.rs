//! Binary linear SVM: Pegasos subgradient steps on the L2-regularized hinge
//! loss, returning the average of all iterates.
//!
//! With step size `1/(lambda t)` the iterate after step `t` has the closed
//! form `w = S_t / (lambda t)`, where `S_t` sums `y x` over the margin
//! violators seen so far. Only `S` is stored, so each step costs O(nnz(x)).
//! The average iterate is `sum_t S_t / t / (lambda T)`, accumulated lazily
//! per coordinate with partial harmonic sums.

use rand::seq::SliceRandom;

use super::Hyperparameters;
use crate::seed::{derive_seed, rng_from_seed};
use crate::{Scalar, SparseVector};

#[derive(Clone, Debug, PartialEq)]
pub struct BinaryModel<T> {
    pub weights: Vec<T>,
    /// Intercept, already multiplied by the constant bias feature.
    pub bias: T,
}

impl<T: Scalar> BinaryModel<T> {
    pub fn score(&self, x: &SparseVector<T>) -> T {
        x.dot_dense(&self.weights) + self.bias
    }
}

struct LazyAverage<T> {
    sum: Vec<T>,
    acc: Vec<T>,
    mark: Vec<T>,
    harmonic: T,
}

impl<T: Scalar> LazyAverage<T> {
    fn new(dim: usize) -> Self {
        LazyAverage {
            sum: vec![T::zero(); dim],
            acc: vec![T::zero(); dim],
            mark: vec![T::zero(); dim],
            harmonic: T::zero(),
        }
    }

    fn add(&mut self, j: usize, delta: T) {
        self.acc[j] += self.sum[j] * (self.harmonic - self.mark[j]);
        self.mark[j] = self.harmonic;
        self.sum[j] += delta;
    }

    fn finish(mut self, scale: T) -> Vec<T> {
        for j in 0..self.sum.len() {
            self.acc[j] += self.sum[j] * (self.harmonic - self.mark[j]);
        }
        self.acc.into_iter().map(|a| a * scale).collect()
    }
}

/// Trains `targets[i] == true` against the rest.
///
/// Epoch `e` visits the vectors in an order drawn from
/// `derive_seed(seed, "epoch{e}")`, so a run with fewer epochs is a prefix of
/// a run with more.
pub fn train_binary<T: Scalar>(
    vectors: &[SparseVector<T>],
    targets: &[bool],
    dims: usize,
    hyper: &Hyperparameters<T>,
    seed: u64,
) -> BinaryModel<T> {
    let n = vectors.len();
    let total_steps = n * hyper.epochs;
    let lambda = hyper.lambda;
    let b = hyper.bias;
    // The last coordinate carries the constant bias feature.
    let mut avg = LazyAverage::new(dims + 1);
    let mut order: Vec<usize> = (0..n).collect();
    let mut t = 0usize;
    for epoch in 0..hyper.epochs {
        order.sort_unstable();
        order.shuffle(&mut rng_from_seed(derive_seed(seed, &format!("epoch{epoch}"))));
        for &i in &order {
            t += 1;
            let x = &vectors[i];
            let y = if targets[i] { T::one() } else { -T::one() };
            let violated = if t == 1 {
                true
            } else {
                let raw = x.dot_dense(&avg.sum[..dims]) + avg.sum[dims] * b;
                y * raw / (lambda * T::of_usize(t - 1)) < T::one()
            };
            if violated {
                for &(j, v) in x.entries() {
                    avg.add(j, y * v);
                }
                if b > T::zero() {
                    avg.add(dims, y * b);
                }
            }
            avg.harmonic += T::one() / T::of_usize(t);
        }
    }
    let mut weights = avg.finish(T::one() / (lambda * T::of_usize(total_steps.max(1))));
    let bias = weights.pop().expect("bias coordinate") * b;
    BinaryModel { weights, bias }
}

/// `lambda/2 |w|^2 + mean hinge loss`, with the intercept regularized as an
/// ordinary coordinate (matching training).
pub fn hinge_objective<T: Scalar>(
    model: &BinaryModel<T>,
    vectors: &[SparseVector<T>],
    targets: &[bool],
    hyper: &Hyperparameters<T>,
) -> T {
    let bias_weight = if hyper.bias > T::zero() { model.bias / hyper.bias } else { T::zero() };
    let norm2: T = model.weights.iter().map(|&w| w * w).sum::<T>() + bias_weight * bias_weight;
    let loss: T = vectors
        .iter()
        .zip(targets)
        .map(|(x, &t)| {
            let y = if t { T::one() } else { -T::one() };
            (T::one() - y * model.score(x)).max(T::zero())
        })
        .sum();
    hyper.lambda * norm2 / T::of(2.0) + loss / T::of_usize(vectors.len().max(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    /// Plain Pegasos with explicit dense iterates and explicit averaging.
    fn reference<T: Scalar>(
        vectors: &[SparseVector<T>],
        targets: &[bool],
        dims: usize,
        hyper: &Hyperparameters<T>,
        seed: u64,
    ) -> BinaryModel<T> {
        let n = vectors.len();
        let total = n * hyper.epochs;
        let mut w = vec![T::zero(); dims + 1];
        let mut avg = vec![T::zero(); dims + 1];
        let mut order: Vec<usize> = (0..n).collect();
        let mut t = 0;
        for epoch in 0..hyper.epochs {
            order.sort_unstable();
            order.shuffle(&mut rng_from_seed(derive_seed(seed, &format!("epoch{epoch}"))));
            for &i in &order {
                t += 1;
                let eta = T::one() / (hyper.lambda * T::of_usize(t));
                let y = if targets[i] { T::one() } else { -T::one() };
                let mut x = vectors[i].to_dense();
                x.push(hyper.bias);
                let margin = y * x.iter().zip(&w).map(|(&a, &b)| a * b).sum::<T>();
                for j in 0..=dims {
                    w[j] = (T::one() - eta * hyper.lambda) * w[j];
                    if margin < T::one() {
                        w[j] += eta * y * x[j];
                    }
                }
                for j in 0..=dims {
                    avg[j] += w[j];
                }
            }
        }
        let m = T::of_usize(total);
        let mut weights: Vec<T> = avg.into_iter().map(|a| a / m).collect();
        let bias = weights.pop().unwrap() * hyper.bias;
        BinaryModel { weights, bias }
    }

    fn random_problem(seed: u64, n: usize, dims: usize) -> (Vec<SparseVector<f64>>, Vec<bool>) {
        let mut rng = rng_from_seed(seed);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for _ in 0..n {
            let label = rng.gen_bool(0.5);
            let mut pairs: Vec<(usize, f64)> = Vec::new();
            for j in 0..dims {
                if rng.gen_bool(0.4) {
                    let shift = if label && j == 0 { 0.8 } else { 0.0 };
                    pairs.push((j, rng.gen_range(-1.0..1.0) + shift));
                }
            }
            xs.push(SparseVector::from_pairs(dims, pairs).unwrap().normalized());
            ys.push(label);
        }
        (xs, ys)
    }

    #[test]
    fn lazy_average_matches_dense_reference() {
        for seed in 0..5 {
            let (xs, ys) = random_problem(seed, 40, 6);
            let hyper = Hyperparameters {
                lambda: 0.05,
                epochs: 7,
                bias: 1.0,
            };
            let fast = train_binary(&xs, &ys, 6, &hyper, seed);
            let slow = reference(&xs, &ys, 6, &hyper, seed);
            for (a, b) in fast.weights.iter().zip(&slow.weights) {
                assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
            assert!((fast.bias - slow.bias).abs() < 1e-9);
        }
    }

    #[test]
    fn objective_does_not_increase_with_epochs() {
        let (xs, ys) = random_problem(42, 60, 5);
        let mut last = f64::INFINITY;
        for epochs in 1..=12 {
            let hyper = Hyperparameters {
                lambda: 0.1,
                epochs,
                bias: 1.0,
            };
            let m = train_binary(&xs, &ys, 5, &hyper, 3);
            let obj = hinge_objective(&m, &xs, &ys, &hyper);
            assert!(obj <= last + 1e-6, "epoch {epochs}: {obj} > {last}");
            last = obj;
        }
    }

    #[test]
    fn f32_training_tracks_f64() {
        let (xs, ys) = random_problem(7, 30, 4);
        let xs32: Vec<SparseVector<f32>> = xs
            .iter()
            .map(|v| SparseVector::from_pairs(4, v.entries().iter().map(|&(i, x)| (i, x as f32))).unwrap())
            .collect();
        let h64 = Hyperparameters { lambda: 0.1, epochs: 5, bias: 1.0 };
        let h32 = Hyperparameters { lambda: 0.1f32, epochs: 5, bias: 1.0 };
        let a = train_binary(&xs, &ys, 4, &h64, 1);
        let b = train_binary(&xs32, &ys, 4, &h32, 1);
        for (x, y) in a.weights.iter().zip(&b.weights) {
            assert!((x - *y as f64).abs() < 1e-3);
        }
    }
}
