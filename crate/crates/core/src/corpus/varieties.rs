use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{CorpusError, GroupKey, Source};

/// Thresholds deciding which national varieties enter the study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VarietyPolicy {
    /// Language codes the pipeline knows about.
    pub languages: Vec<String>,
    /// Languages whose varieties must clear the absolute threshold in both
    /// registers.
    pub paired_languages: Vec<String>,
    /// Absolute word threshold for paired languages, before scaling.
    pub paired_threshold: f64,
    /// Fraction of a language's per-register total used as its threshold.
    pub relative_fraction: f64,
    /// Lower bound on the relative threshold, before scaling.
    pub floor: f64,
    /// A language is dropped when fewer varieties survive.
    pub min_regions: usize,
    pub scale: f64,
}

impl Default for VarietyPolicy {
    fn default() -> Self {
        VarietyPolicy {
            languages: ["ara", "deu", "eng", "fra", "por", "rus", "spa"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            paired_languages: vec!["eng".into(), "spa".into()],
            paired_threshold: 15_000_000.0,
            relative_fraction: 0.003,
            floor: 1_000_000.0,
            min_regions: 2,
            scale: 1.0,
        }
    }
}

impl VarietyPolicy {
    pub fn is_paired(&self, language: &str) -> bool {
        self.paired_languages.iter().any(|l| l == language)
    }

    pub fn paired_threshold_words(&self) -> f64 {
        self.paired_threshold * self.scale
    }

    /// Threshold for an unpaired language in one register, given that
    /// register's total word count for the language.
    pub fn relative_threshold_words(&self, language_total: f64) -> f64 {
        (self.floor * self.scale).max(self.relative_fraction * language_total)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variety {
    pub region: String,
    /// Word counts in the registers that were checked.
    pub words: BTreeMap<Source, u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarietyInventory {
    pub language: String,
    /// `None` for paired languages, whose inventory spans both registers.
    pub source: Option<Source>,
    pub threshold: f64,
    pub varieties: Vec<Variety>,
}

impl VarietyInventory {
    pub fn regions(&self) -> impl Iterator<Item = &str> {
        self.varieties.iter().map(|v| v.region.as_str())
    }

    pub fn contains(&self, region: &str, source: Source) -> bool {
        (self.source.is_none() || self.source == Some(source)) && self.regions().any(|r| r == region)
    }
}

/// Selects national varieties from per-(language, region, source) word counts.
///
/// Paired languages yield one inventory covering both registers; every other
/// language yields one inventory per register. Inventories with fewer than
/// `policy.min_regions` varieties are omitted.
pub fn select_varieties(
    word_counts: &BTreeMap<GroupKey, u64>,
    policy: &VarietyPolicy,
) -> Result<Vec<VarietyInventory>, CorpusError> {
    let mut by_language: BTreeMap<&str, BTreeMap<&str, BTreeMap<Source, u64>>> = BTreeMap::new();
    for (key, &words) in word_counts {
        if !policy.languages.contains(&key.language) {
            return Err(CorpusError::UnknownLanguage(key.language.clone()));
        }
        *by_language
            .entry(&key.language)
            .or_default()
            .entry(&key.region)
            .or_default()
            .entry(key.source)
            .or_default() += words;
    }

    let mut out = Vec::new();
    for (language, regions) in by_language {
        if policy.is_paired(language) {
            let threshold = policy.paired_threshold_words();
            let varieties = regions
                .iter()
                .filter(|(_, words)| {
                    [Source::Web, Source::Social]
                        .iter()
                        .all(|s| words.get(s).is_some_and(|&w| w > 0 && w as f64 >= threshold))
                })
                .map(|(region, words)| Variety {
                    region: region.to_string(),
                    words: words.clone(),
                })
                .collect();
            push_if_enough(&mut out, policy, language, None, threshold, varieties);
        } else {
            let sources: BTreeSet<Source> = regions.values().flat_map(|w| w.keys().copied()).collect();
            for source in sources {
                let total: u64 = regions.values().filter_map(|w| w.get(&source)).sum();
                let threshold = policy.relative_threshold_words(total as f64);
                let varieties = regions
                    .iter()
                    .filter_map(|(region, words)| {
                        let w = *words.get(&source)?;
                        (w > 0 && w as f64 >= threshold).then(|| Variety {
                            region: region.to_string(),
                            words: BTreeMap::from([(source, w)]),
                        })
                    })
                    .collect();
                push_if_enough(&mut out, policy, language, Some(source), threshold, varieties);
            }
        }
    }
    Ok(out)
}

fn push_if_enough(
    out: &mut Vec<VarietyInventory>,
    policy: &VarietyPolicy,
    language: &str,
    source: Option<Source>,
    threshold: f64,
    varieties: Vec<Variety>,
) {
    if !varieties.is_empty() && varieties.len() >= policy.min_regions {
        out.push(VarietyInventory {
            language: language.to_string(),
            source,
            threshold,
            varieties,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const M: u64 = 1_000_000;

    fn counts(rows: &[(&str, &str, Source, u64)]) -> BTreeMap<GroupKey, u64> {
        rows.iter()
            .map(|(l, r, s, w)| (GroupKey::new(l, r, *s), *w))
            .collect()
    }

    #[test]
    fn paired_language_needs_both_registers() {
        let c = counts(&[
            ("eng", "A", Source::Web, 20 * M),
            ("eng", "A", Source::Social, 20 * M),
            ("eng", "B", Source::Web, 16 * M),
            ("eng", "B", Source::Social, 10 * M),
        ]);
        let policy = VarietyPolicy {
            min_regions: 1,
            ..Default::default()
        };
        let inv = select_varieties(&c, &policy).unwrap();
        assert_eq!(inv.len(), 1);
        assert_eq!(inv[0].source, None);
        assert_eq!(inv[0].regions().collect::<Vec<_>>(), vec!["A"]);
    }

    #[test]
    fn fourteen_paired_regions_survive() {
        let mut rows = Vec::new();
        let regions: Vec<String> = (0..20).map(|i| format!("R{i:02}")).collect();
        for (i, r) in regions.iter().enumerate() {
            let w = if i < 14 { 30 * M } else { 5 * M };
            rows.push(("eng", r.as_str(), Source::Web, w));
            rows.push(("eng", r.as_str(), Source::Social, w));
        }
        let inv = select_varieties(&counts(&rows), &VarietyPolicy::default()).unwrap();
        assert_eq!(inv[0].varieties.len(), 14);
    }

    #[test]
    fn all_zero_counts_give_empty_inventory() {
        let c = counts(&[
            ("eng", "A", Source::Web, 0),
            ("eng", "A", Source::Social, 0),
            ("fra", "FR", Source::Web, 0),
        ]);
        assert!(select_varieties(&c, &VarietyPolicy::default()).unwrap().is_empty());
    }

    #[test]
    fn unpaired_language_uses_relative_threshold_per_register() {
        // Web total 1,000M -> threshold max(1M, 3M) = 3M.
        let c = counts(&[
            ("fra", "FR", Source::Web, 900 * M),
            ("fra", "BE", Source::Web, 96 * M),
            ("fra", "CH", Source::Web, 2 * M),
            ("fra", "CA", Source::Web, 2 * M),
            ("fra", "FR", Source::Social, 50 * M),
        ]);
        let inv = select_varieties(&c, &VarietyPolicy::default()).unwrap();
        assert_eq!(inv.len(), 1, "social has a single region and is dropped");
        assert_eq!(inv[0].source, Some(Source::Web));
        assert_eq!(inv[0].threshold, 3.0 * M as f64);
        assert_eq!(inv[0].regions().collect::<Vec<_>>(), vec!["BE", "FR"]);
    }

    #[test]
    fn scale_shrinks_absolute_thresholds() {
        let c = counts(&[
            ("spa", "ES", Source::Web, 200_000),
            ("spa", "ES", Source::Social, 150_000),
            ("spa", "MX", Source::Web, 200_000),
            ("spa", "MX", Source::Social, 149_999),
        ]);
        let policy = VarietyPolicy {
            scale: 0.01,
            min_regions: 1,
            ..Default::default()
        };
        let inv = select_varieties(&c, &policy).unwrap();
        assert_eq!(inv[0].regions().collect::<Vec<_>>(), vec!["ES"]);
    }

    #[test]
    fn unknown_language_is_an_error() {
        let c = counts(&[("xxx", "A", Source::Web, M)]);
        assert!(matches!(
            select_varieties(&c, &VarietyPolicy::default()),
            Err(CorpusError::UnknownLanguage(_))
        ));
    }
}
