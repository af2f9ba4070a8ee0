use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use super::{CorpusError, GeoDocument, GroupKey, Source};
use crate::seed::{derive_seed, rng_from_seed};

/// Tokens per aggregated sample.
pub const SAMPLE_WORDS: usize = 1000;

/// NFC-normalizes and splits on Unicode whitespace. Case is preserved.
pub fn tokenize(text: &str) -> Vec<String> {
    let normalized: String = text.nfc().collect();
    normalized.split_whitespace().map(str::to_string).collect()
}

/// A fixed-size block of tokens drawn from one (language, region, source) group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub id: String,
    pub language: String,
    pub region: String,
    pub source: Source,
    pub tokens: Vec<String>,
    pub member_ids: Vec<String>,
    pub seed_trace: u64,
}

impl Sample {
    pub fn group(&self) -> GroupKey {
        GroupKey::new(&self.language, &self.region, self.source)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Aggregation {
    pub samples: Vec<Sample>,
    pub total_tokens: usize,
    pub discarded_tokens: usize,
}

/// Randomly aggregates documents of one group into samples of exactly
/// `sample_words` tokens.
///
/// Documents are ordered by id, shuffled with a seed derived from `seed` and
/// the group key, and their token streams concatenated. The trailing partial
/// chunk is discarded. Input order does not affect the result.
pub fn aggregate_samples(
    documents: &[GeoDocument],
    sample_words: usize,
    seed: u64,
) -> Result<Aggregation, CorpusError> {
    let Some(first) = documents.first() else {
        return Ok(Aggregation::default());
    };
    let key = group_of(first)?;
    for doc in documents {
        let other = group_of(doc)?;
        if other != key {
            return Err(CorpusError::MixedGroup(key.to_string(), other.to_string()));
        }
    }
    assert!(sample_words > 0, "sample size must be positive");

    let mut order: Vec<&GeoDocument> = documents.iter().collect();
    order.sort_by(|a, b| a.id.cmp(&b.id).then_with(|| a.text.cmp(&b.text)));
    let group_seed = derive_seed(seed, &key.to_string());
    order.shuffle(&mut rng_from_seed(group_seed));

    let mut samples = Vec::new();
    let mut tokens: Vec<String> = Vec::with_capacity(sample_words);
    let mut members: Vec<String> = Vec::new();
    let mut total = 0;
    for doc in order {
        let doc_tokens = tokenize(&doc.text);
        total += doc_tokens.len();
        let mut rest = doc_tokens.as_slice();
        while !rest.is_empty() {
            let take = (sample_words - tokens.len()).min(rest.len());
            tokens.extend_from_slice(&rest[..take]);
            if members.last() != Some(&doc.id) {
                members.push(doc.id.clone());
            }
            rest = &rest[take..];
            if tokens.len() == sample_words {
                samples.push(Sample {
                    id: format!("{}-{}-{}-{:06}", key.language, key.region, key.source, samples.len()),
                    language: key.language.clone(),
                    region: key.region.clone(),
                    source: key.source,
                    tokens: std::mem::replace(&mut tokens, Vec::with_capacity(sample_words)),
                    member_ids: std::mem::take(&mut members),
                    seed_trace: group_seed,
                });
            }
        }
    }
    Ok(Aggregation {
        discarded_tokens: tokens.len(),
        samples,
        total_tokens: total,
    })
}

fn group_of(doc: &GeoDocument) -> Result<GroupKey, CorpusError> {
    doc.group().ok_or_else(|| CorpusError::InvalidDocument {
        id: doc.id.clone(),
        reason: "document has no region".into(),
    })
}

/// Groups documents and aggregates each group, in parallel across groups.
pub fn aggregate_corpus(
    documents: &[GeoDocument],
    sample_words: usize,
    seed: u64,
) -> Result<BTreeMap<GroupKey, Aggregation>, CorpusError> {
    let mut groups: BTreeMap<GroupKey, Vec<GeoDocument>> = BTreeMap::new();
    for doc in documents {
        groups.entry(group_of(doc)?).or_default().push(doc.clone());
    }
    let results: Vec<(GroupKey, Result<Aggregation, CorpusError>)> = groups
        .into_par_iter()
        .map(|(key, docs)| {
            let agg = aggregate_samples(&docs, sample_words, seed);
            (key, agg)
        })
        .collect();
    results.into_iter().map(|(k, r)| r.map(|a| (k, a))).collect()
}

/// Dev/train/test sizes per group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitPolicy {
    pub dev: usize,
    pub train_cap: usize,
    pub test_cap: usize,
    pub min_train: usize,
    pub min_test: usize,
    pub scale: f64,
}

impl Default for SplitPolicy {
    fn default() -> Self {
        SplitPolicy {
            dev: 2000,
            train_cap: 25_000,
            test_cap: 5000,
            min_train: 12_000,
            min_test: 2500,
            scale: 1.0,
        }
    }
}

impl SplitPolicy {
    fn scaled(&self, n: usize) -> usize {
        ((n as f64 * self.scale).round() as usize).max(1)
    }

    pub fn dev_size(&self) -> usize {
        self.scaled(self.dev)
    }
    pub fn train_cap_size(&self) -> usize {
        self.scaled(self.train_cap)
    }
    pub fn test_cap_size(&self) -> usize {
        self.scaled(self.test_cap)
    }
    pub fn min_train_size(&self) -> usize {
        self.scaled(self.min_train)
    }
    pub fn min_test_size(&self) -> usize {
        self.scaled(self.min_test)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitFlag {
    ShortDev,
    BelowMinTrain,
    BelowMinTest,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSplit {
    pub group: GroupKey,
    pub dev: Vec<String>,
    pub train: Vec<String>,
    pub test: Vec<String>,
    pub flags: Vec<SplitFlag>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub groups: Vec<GroupSplit>,
}

impl SplitAssignment {
    pub fn group(&self, key: &GroupKey) -> Option<&GroupSplit> {
        self.groups.iter().find(|g| &g.group == key)
    }
}

/// Seeded per-group split: the first `dev` shuffled samples go to
/// development, then up to `train_cap` to training and up to `test_cap` to
/// testing. Groups short of the policy minimums are flagged, not rejected.
pub fn split_dataset(samples: &[Sample], policy: &SplitPolicy, seed: u64) -> SplitAssignment {
    let mut groups: BTreeMap<GroupKey, Vec<&str>> = BTreeMap::new();
    for s in samples {
        groups.entry(s.group()).or_default().push(&s.id);
    }
    let (dev_n, train_n, test_n) = (policy.dev_size(), policy.train_cap_size(), policy.test_cap_size());
    let groups = groups
        .into_iter()
        .map(|(group, mut ids)| {
            ids.sort_unstable();
            ids.dedup();
            ids.shuffle(&mut rng_from_seed(derive_seed(seed, &format!("split:{group}"))));
            let mut rest = ids.into_iter().map(str::to_string);
            let dev: Vec<String> = rest.by_ref().take(dev_n).collect();
            let train: Vec<String> = rest.by_ref().take(train_n).collect();
            let test: Vec<String> = rest.by_ref().take(test_n).collect();
            let mut flags = Vec::new();
            if dev.len() < dev_n {
                flags.push(SplitFlag::ShortDev);
            }
            if train.len() < policy.min_train_size() {
                flags.push(SplitFlag::BelowMinTrain);
            }
            if test.len() < policy.min_test_size() {
                flags.push(SplitFlag::BelowMinTest);
            }
            GroupSplit {
                group,
                dev,
                train,
                test,
                flags,
            }
        })
        .collect();
    SplitAssignment { groups }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Origin;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn doc(id: &str, n_tokens: usize) -> GeoDocument {
        let text = (0..n_tokens).map(|i| format!("{id}w{i}")).collect::<Vec<_>>().join(" ");
        GeoDocument {
            id: id.to_string(),
            text,
            language: "eng".into(),
            region: Some("NZ".into()),
            source: Source::Social,
            origin: Origin::Point { lat: -41.0, lon: 174.0 },
        }
    }

    #[test]
    fn tokenize_normalizes_to_nfc() {
        // "e" + combining acute composes to a single code point.
        let toks = tokenize("cafe\u{301}  au\tlait\n");
        assert_eq!(toks, vec!["caf\u{e9}", "au", "lait"]);
    }

    #[test]
    fn fifty_nine_short_posts_make_one_sample() {
        let docs: Vec<_> = (0..59).map(|i| doc(&format!("t{i:02}"), 17)).collect();
        let agg = aggregate_samples(&docs, SAMPLE_WORDS, 1).unwrap();
        assert_eq!(agg.samples.len(), 1);
        assert_eq!(agg.discarded_tokens, 59 * 17 - 1000);
        assert!(agg.samples[0].member_ids.len() >= 58);
    }

    #[test]
    fn long_document_is_chunked_and_remainder_dropped() {
        let agg = aggregate_samples(&[doc("big", 2500)], SAMPLE_WORDS, 3).unwrap();
        assert_eq!(agg.samples.len(), 2);
        assert_eq!(agg.discarded_tokens, 500);
        assert_eq!(agg.samples[1].tokens[0], "bigw1000");
        assert_eq!(agg.samples[0].member_ids, vec!["big"]);
    }

    #[test]
    fn too_few_tokens_is_empty_not_error() {
        let agg = aggregate_samples(&[doc("a", 999)], SAMPLE_WORDS, 0).unwrap();
        assert!(agg.samples.is_empty());
        assert_eq!(agg.discarded_tokens, 999);
    }

    #[test]
    fn aggregation_is_seed_deterministic_and_order_free() {
        let docs: Vec<_> = (0..40).map(|i| doc(&format!("d{i}"), 90 + i)).collect();
        let a = aggregate_samples(&docs, SAMPLE_WORDS, 11).unwrap();
        let mut rev = docs.clone();
        rev.reverse();
        let b = aggregate_samples(&rev, SAMPLE_WORDS, 11).unwrap();
        assert_eq!(a, b);
        let c = aggregate_samples(&docs, SAMPLE_WORDS, 12).unwrap();
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn mixed_groups_are_rejected() {
        let mut other = doc("b", 10);
        other.region = Some("AU".into());
        assert!(matches!(
            aggregate_samples(&[doc("a", 10), other], SAMPLE_WORDS, 0),
            Err(CorpusError::MixedGroup(..))
        ));
    }

    fn samples(n: usize) -> Vec<Sample> {
        (0..n)
            .map(|i| Sample {
                id: format!("s{i:06}"),
                language: "eng".into(),
                region: "NZ".into(),
                source: Source::Web,
                tokens: vec![],
                member_ids: vec![],
                seed_trace: 0,
            })
            .collect()
    }

    #[test]
    fn split_caps_at_full_scale() {
        let split = split_dataset(&samples(32_000), &SplitPolicy::default(), 5);
        let g = &split.groups[0];
        assert_eq!((g.dev.len(), g.train.len(), g.test.len()), (2000, 25_000, 5000));
        assert!(g.flags.is_empty());
    }

    #[test]
    fn split_with_only_dev_samples_is_flagged() {
        let split = split_dataset(&samples(2000), &SplitPolicy::default(), 5);
        let g = &split.groups[0];
        assert_eq!((g.dev.len(), g.train.len(), g.test.len()), (2000, 0, 0));
        assert_eq!(g.flags, vec![SplitFlag::BelowMinTrain, SplitFlag::BelowMinTest]);
    }

    #[test]
    fn split_caps_scale_for_desk_runs() {
        let policy = SplitPolicy {
            scale: 0.01,
            ..Default::default()
        };
        let split = split_dataset(&samples(320), &policy, 5);
        let g = &split.groups[0];
        assert_eq!((g.dev.len(), g.train.len(), g.test.len()), (20, 250, 50));
    }

    proptest! {
        #[test]
        fn aggregation_conserves_tokens(lengths in prop::collection::vec(1usize..400, 0..40), seed in any::<u64>()) {
            let docs: Vec<_> = lengths.iter().enumerate().map(|(i, &n)| doc(&format!("d{i}"), n)).collect();
            let agg = aggregate_samples(&docs, SAMPLE_WORDS, seed).unwrap();
            let total: usize = lengths.iter().sum();
            prop_assert_eq!(agg.total_tokens, total);
            prop_assert!(agg.samples.iter().all(|s| s.tokens.len() == SAMPLE_WORDS));
            prop_assert_eq!(agg.samples.len() * SAMPLE_WORDS + agg.discarded_tokens, total);
            prop_assert!(agg.discarded_tokens < SAMPLE_WORDS);
        }

        #[test]
        fn split_is_a_partition(n in 0usize..600, scale in 0.005f64..0.05, seed in any::<u64>()) {
            let all = samples(n);
            let policy = SplitPolicy { scale, ..Default::default() };
            let split = split_dataset(&all, &policy, seed);
            let ids: HashSet<&str> = all.iter().map(|s| s.id.as_str()).collect();
            let mut seen = HashSet::new();
            for g in &split.groups {
                for id in g.dev.iter().chain(&g.train).chain(&g.test) {
                    prop_assert!(ids.contains(id.as_str()));
                    prop_assert!(seen.insert(id.clone()));
                }
                prop_assert!(g.train.len() <= policy.train_cap_size());
                prop_assert!(g.test.len() <= policy.test_cap_size());
            }
        }
    }
}
