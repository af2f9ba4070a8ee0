//! Correlation and t-test primitives.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::Scalar;

fn mean<T: Scalar>(xs: &[T]) -> T {
    xs.iter().copied().sum::<T>() / T::of_usize(xs.len())
}

/// Pearson correlation. `None` when the lengths differ, fewer than two
/// values are given, or either side has zero variance.
pub fn pearson<T: Scalar>(x: &[T], y: &[T]) -> Option<T> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == T::zero() || syy == T::zero() {
        return None;
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    Some(r.max(-T::one()).min(T::one()))
}

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn average_ranks<T: Scalar>(x: &[T]) -> Vec<T> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut ranks = vec![T::zero(); x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && x[order[j]] == x[order[i]] {
            j += 1;
        }
        // positions i..j hold ranks i+1..=j
        let rank = T::of_usize(i + j + 1) / T::of(2.0);
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        i = j;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman<T: Scalar>(x: &[T], y: &[T]) -> Option<T> {
    if x.len() != y.len() {
        return None;
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Welch two-sample t-test.
#[derive(Clone, Debug, PartialEq)]
pub struct WelchTest<T> {
    pub t: T,
    pub df: T,
    /// Two-tailed.
    pub p: T,
    pub mean_a: T,
    pub mean_b: T,
    /// Set when either sample has zero variance.
    pub degenerate: bool,
}

/// Welch's unequal-variance t-test with Welch-Satterthwaite degrees of
/// freedom. Both samples need at least two values.
pub fn welch_t_test<T: Scalar>(a: &[T], b: &[T]) -> Option<WelchTest<T>> {
    if a.len() < 2 || b.len() < 2 {
        return None;
    }
    let var = |xs: &[T], m: T| {
        xs.iter().map(|&v| (v - m) * (v - m)).sum::<T>() / T::of_usize(xs.len() - 1)
    };
    let (ma, mb) = (mean(a), mean(b));
    let (va, vb) = (var(a, ma), var(b, mb));
    let (sa, sb) = (va / T::of_usize(a.len()), vb / T::of_usize(b.len()));
    let degenerate = va == T::zero() || vb == T::zero();
    let se2 = sa + sb;
    if se2 == T::zero() {
        let (t, p) = if ma == mb {
            (T::zero(), T::one())
        } else {
            let inf = T::infinity();
            (if ma > mb { inf } else { -inf }, T::zero())
        };
        let df = T::of_usize(a.len() + b.len() - 2);
        return Some(WelchTest { t, df, p, mean_a: ma, mean_b: mb, degenerate });
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2
        / (sa * sa / T::of_usize(a.len() - 1) + sb * sb / T::of_usize(b.len() - 1));
    let dist = StudentsT::new(0.0, 1.0, df.as_f64()).ok()?;
    let p = (2.0 * dist.sf(t.as_f64().abs())).min(1.0);
    Some(WelchTest {
        t,
        df,
        p: T::of(p),
        mean_a: ma,
        mean_b: mb,
        degenerate,
    })
}
