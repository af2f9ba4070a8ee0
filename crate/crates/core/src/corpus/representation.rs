use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::CorpusError;

/// One row of the corpus-vs-population representation audit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepresentationRow {
    pub region: String,
    pub corpus_words: f64,
    pub population: f64,
    /// Percent of the table's total words.
    pub corpus_share: f64,
    /// Percent of the table's total population.
    pub population_share: f64,
    /// `corpus_share / population_share`; `None` when the region has no
    /// population.
    pub ratio: Option<f64>,
}

/// Compares each region's share of the corpus with its share of the
/// population. Regions present in only one table count as zero in the other.
pub fn representation_report(
    corpus_counts: &BTreeMap<String, f64>,
    population: &BTreeMap<String, f64>,
) -> Result<Vec<RepresentationRow>, CorpusError> {
    for (region, &v) in corpus_counts.iter().chain(population) {
        if v < 0.0 || !v.is_finite() {
            return Err(CorpusError::NegativeCount(region.clone()));
        }
    }
    let words_total: f64 = corpus_counts.values().sum();
    let pop_total: f64 = population.values().sum();
    if words_total <= 0.0 || pop_total <= 0.0 {
        return Err(CorpusError::EmptyTable);
    }
    let regions: BTreeSet<&String> = corpus_counts.keys().chain(population.keys()).collect();
    Ok(regions
        .into_iter()
        .map(|region| {
            let words = corpus_counts.get(region).copied().unwrap_or(0.0);
            let persons = population.get(region).copied().unwrap_or(0.0);
            let corpus_share = 100.0 * words / words_total;
            let population_share = 100.0 * persons / pop_total;
            RepresentationRow {
                region: region.clone(),
                corpus_words: words,
                population: persons,
                corpus_share,
                population_share,
                ratio: (population_share > 0.0).then(|| corpus_share / population_share),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: &[(&str, f64)]) -> BTreeMap<String, f64> {
        rows.iter().map(|(r, v)| (r.to_string(), *v)).collect()
    }

    #[test]
    fn single_region_is_whole_table() {
        let rows = representation_report(&table(&[("X", 5.0)]), &table(&[("X", 9.0)])).unwrap();
        assert_eq!(rows[0].corpus_share, 100.0);
        assert_eq!(rows[0].population_share, 100.0);
        assert_eq!(rows[0].ratio, Some(1.0));
    }

    #[test]
    fn symmetric_regions_have_unit_ratios() {
        let rows = representation_report(
            &table(&[("A", 3.0), ("B", 3.0)]),
            &table(&[("A", 7.0), ("B", 7.0)]),
        )
        .unwrap();
        assert!(rows.iter().all(|r| r.ratio == Some(1.0)));
    }

    #[test]
    fn zero_population_ratio_is_flagged() {
        let rows = representation_report(&table(&[("A", 1.0), ("B", 1.0)]), &table(&[("A", 1.0)])).unwrap();
        assert_eq!(rows[1].ratio, None);
        let total: f64 = rows.iter().map(|r| r.population_share).sum();
        assert!((total - 100.0).abs() < 1e-9);
    }

    #[test]
    fn negative_counts_are_errors() {
        assert!(matches!(
            representation_report(&table(&[("A", -1.0)]), &table(&[("A", 1.0)])),
            Err(CorpusError::NegativeCount(_))
        ));
    }
}
