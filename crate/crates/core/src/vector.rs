//! Sparse feature vectors.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::Scalar;

/// Sparse vector with strictly increasing indices, all `< dim`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SparseVector<T> {
    dim: usize,
    entries: Vec<(usize, T)>,
}

impl<T: Scalar> SparseVector<T> {
    pub fn zeros(dim: usize) -> Self {
        SparseVector { dim, entries: Vec::new() }
    }

    /// Builds from arbitrary (index, value) pairs: sorts, sums duplicates and
    /// drops exact zeros. Returns `None` if an index is out of range.
    pub fn from_pairs(dim: usize, pairs: impl IntoIterator<Item = (usize, T)>) -> Option<Self> {
        let mut acc: BTreeMap<usize, T> = BTreeMap::new();
        for (i, v) in pairs {
            if i >= dim {
                return None;
            }
            *acc.entry(i).or_insert_with(T::zero) += v;
        }
        let entries = acc.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        Some(SparseVector { dim, entries })
    }

    pub fn from_dense(values: &[T]) -> Self {
        SparseVector {
            dim: values.len(),
            entries: values
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(i, &v)| (i, v))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, T)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: usize) -> T {
        self.entries
            .binary_search_by_key(&index, |(i, _)| *i)
            .map(|k| self.entries[k].1)
            .unwrap_or_else(|_| T::zero())
    }

    pub fn norm(&self) -> T {
        self.entries.iter().map(|&(_, v)| v * v).sum::<T>().sqrt()
    }

    /// Scales to unit L2 norm; the zero vector stays zero.
    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > T::zero() {
            for (_, v) in &mut self.entries {
                *v /= n;
            }
        }
        self
    }

    pub fn dot_dense(&self, dense: &[T]) -> T {
        self.entries.iter().map(|&(i, v)| v * dense[i]).sum()
    }

    pub fn to_dense(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim];
        for &(i, v) in &self.entries {
            out[i] = v;
        }
        out
    }

    /// Copy without the entries for which `drop` returns true.
    pub fn without(&self, drop: impl Fn(usize) -> bool) -> Self {
        SparseVector {
            dim: self.dim,
            entries: self.entries.iter().copied().filter(|&(i, _)| !drop(i)).collect(),
        }
    }

    pub fn scaled(&self, factor: T) -> Self {
        SparseVector {
            dim: self.dim,
            entries: self.entries.iter().map(|&(i, v)| (i, v * factor)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization() {
        let v = SparseVector::from_dense(&[3.0f64, 4.0]).normalized();
        assert_eq!(v.entries(), &[(0, 0.6), (1, 0.8)]);
        assert!(SparseVector::<f64>::zeros(4).normalized().is_zero());
    }

    #[test]
    fn pairs_are_merged_and_checked() {
        let v = SparseVector::from_pairs(5, [(3, 1.0f32), (1, 2.0), (3, -1.0), (1, 0.5)]).unwrap();
        assert_eq!(v.entries(), &[(1, 2.5)]);
        assert!(SparseVector::from_pairs(2, [(2, 1.0f32)]).is_none());
    }
}
