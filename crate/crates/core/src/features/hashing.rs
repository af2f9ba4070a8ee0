use std::collections::BTreeMap;

use serde::Serialize;

use super::FeatureError;
use crate::{Scalar, SparseVector};

/// Byte placed between the tokens of an n-gram before hashing.
pub const NGRAM_SEPARATOR: u8 = 0x1f;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a.
pub fn fnv1a_64(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

/// Bucket and sign of one n-gram (already lowercased and joined).
pub fn ngram_index(ngram: &[u8], dims: usize) -> (usize, bool) {
    let h = fnv1a_64(ngram);
    ((h % dims as u64) as usize, h >> 63 == 0)
}

fn ngrams<S: AsRef<str>>(tokens: &[S], n: usize) -> impl Iterator<Item = Vec<u8>> + '_ {
    let lowered: Vec<String> = tokens.iter().map(|t| t.as_ref().to_lowercase()).collect();
    let count = lowered.len().saturating_sub(n - 1);
    (0..if lowered.len() >= n { count } else { 0 }).map(move |start| {
        let mut buf = Vec::new();
        for (k, tok) in lowered[start..start + n].iter().enumerate() {
            if k > 0 {
                buf.push(NGRAM_SEPARATOR);
            }
            buf.extend_from_slice(tok.as_bytes());
        }
        buf
    })
}

fn check(n: usize, dims: usize) -> Result<(), FeatureError> {
    if !(1..=3).contains(&n) {
        return Err(FeatureError::BadOrder(n));
    }
    if dims == 0 {
        return Err(FeatureError::ZeroDims);
    }
    Ok(())
}

/// Signed feature hashing of lowercased token n-grams, L2-normalized.
pub fn hashed_ngram_vector<T: Scalar, S: AsRef<str>>(
    tokens: &[S],
    n: usize,
    dims: usize,
) -> Result<SparseVector<T>, FeatureError> {
    check(n, dims)?;
    let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
    for gram in ngrams(tokens, n) {
        let (index, positive) = ngram_index(&gram, dims);
        *acc.entry(index).or_insert(0) += if positive { 1 } else { -1 };
    }
    let pairs = acc.into_iter().map(|(i, c)| (i, T::of(c as f64)));
    Ok(SparseVector::from_pairs(dims, pairs)
        .expect("indices are reduced modulo dims")
        .normalized())
}

/// Bucket shared by several distinct n-grams.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CollisionEntry {
    pub index: usize,
    pub ngrams: Vec<String>,
}

/// Lists buckets that received more than one distinct n-gram.
pub fn collision_audit<S: AsRef<str>>(
    tokens: &[S],
    n: usize,
    dims: usize,
) -> Result<Vec<CollisionEntry>, FeatureError> {
    check(n, dims)?;
    let mut buckets: BTreeMap<usize, std::collections::BTreeSet<String>> = BTreeMap::new();
    for gram in ngrams(tokens, n) {
        let (index, _) = ngram_index(&gram, dims);
        let readable = String::from_utf8_lossy(&gram).replace(NGRAM_SEPARATOR as char, " ");
        buckets.entry(index).or_default().insert(readable);
    }
    Ok(buckets
        .into_iter()
        .filter(|(_, g)| g.len() > 1)
        .map(|(index, g)| CollisionEntry {
            index,
            ngrams: g.into_iter().collect(),
        })
        .collect())
}
