//! ingest, aggregate, split.

use std::collections::BTreeMap;
use std::io::BufReader;

use dialectometry::corpus::io::{read_jsonl, read_population, write_jsonl};
use dialectometry::corpus::{
    aggregate_corpus, assign_to_city, regionalize_domain, representation_report, select_varieties, split_dataset,
    tokenize, City, GeoDocument, GroupKey, Origin, Source, TldMap, VarietyInventory,
};
use serde::{Deserialize, Serialize};

use super::{data_at, load_samples, open, DOCUMENTS, SAMPLES};
use crate::artifacts::Output;
use crate::config::Config;
use crate::error::CliError;

#[derive(Debug, Default, Serialize, Deserialize)]
pub struct IngestSummary {
    pub documents: usize,
    pub invalid: usize,
    pub unmapped: usize,
    pub unknown_language: usize,
    pub located: usize,
    pub kept: usize,
}

#[derive(Serialize)]
struct WordCountRow<'a> {
    language: &'a str,
    region: &'a str,
    source: Source,
    words: u64,
}

fn locate(doc: &GeoDocument, tld: &TldMap, cities: &[City], radius_km: f64) -> Result<Option<String>, ()> {
    if let Some(r) = &doc.region {
        return Ok(Some(r.clone()));
    }
    match &doc.origin {
        Origin::Domain(d) => regionalize_domain(d, tld).map_err(|_| ()),
        Origin::Point { lat, lon } if !cities.is_empty() => assign_to_city(*lat, *lon, cities, radius_km)
            .map(|c| c.map(|c| c.country.clone()))
            .map_err(|_| ()),
        Origin::Point { .. } => Ok(None),
    }
}

/// Regionalizes the corpus, selects varieties, and keeps their documents.
pub fn ingest(config: &Config, out: &Output) -> Result<(), CliError> {
    let corpus = config
        .paths
        .corpus
        .as_ref()
        .ok_or_else(|| CliError::Config("paths.corpus is required by ingest".into()))?;
    let docs: Vec<GeoDocument> = read_jsonl(BufReader::new(open(corpus)?)).map_err(|e| data_at(corpus, e))?;
    let tld = match &config.paths.tld_map {
        Some(p) => TldMap::from_csv(open(p)?).map_err(|e| data_at(p, e))?,
        None => TldMap::new(),
    };
    let cities = match &config.paths.gazetteer {
        Some(p) => City::read_gazetteer(open(p)?).map_err(|e| data_at(p, e))?,
        None => Vec::new(),
    };
    let policy = config.variety_policy();

    let mut summary = IngestSummary {
        documents: docs.len(),
        ..Default::default()
    };
    let mut located = Vec::new();
    for mut doc in docs {
        if doc.validate().is_err() {
            summary.invalid += 1;
            continue;
        }
        match locate(&doc, &tld, &cities, config.policy.radius_km) {
            Err(()) => summary.invalid += 1,
            Ok(None) => summary.unmapped += 1,
            Ok(Some(region)) if policy.languages.contains(&doc.language) => {
                doc.region = Some(region);
                located.push(doc);
            }
            Ok(Some(_)) => summary.unknown_language += 1,
        }
    }
    summary.located = located.len();

    let mut counts: BTreeMap<GroupKey, u64> = BTreeMap::new();
    for d in &located {
        *counts.entry(d.group().expect("located")).or_default() += tokenize(&d.text).len() as u64;
    }
    let inventories = select_varieties(&counts, &policy).map_err(CliError::data)?;
    let mut kept: Vec<GeoDocument> = located
        .into_iter()
        .filter(|d| {
            let region = d.region.as_deref().expect("located");
            inventories
                .iter()
                .any(|inv| inv.language == d.language && inv.contains(region, d.source))
        })
        .collect();
    kept.sort_by(|a, b| a.id.cmp(&b.id));
    summary.kept = kept.len();

    out.reset_dir("ingest")?;
    let mut bytes = Vec::new();
    write_jsonl(&mut bytes, &kept).map_err(CliError::data)?;
    out.write(DOCUMENTS, &bytes)?;
    let rows: Vec<WordCountRow> = counts
        .iter()
        .map(|(k, &words)| WordCountRow {
            language: &k.language,
            region: &k.region,
            source: k.source,
            words,
        })
        .collect();
    out.write_records("ingest/word_counts.csv", &rows)?;
    out.write_json("ingest/varieties.json", &inventories)?;
    out.write_json("ingest/summary.json", &summary)?;

    if let Some(p) = &config.paths.population {
        let population = read_population(open(p)?).map_err(|e| data_at(p, e))?;
        for source in [Source::Web, Source::Social] {
            let mut words: BTreeMap<String, f64> = BTreeMap::new();
            for (k, &w) in counts.iter().filter(|(k, _)| k.source == source) {
                *words.entry(k.region.clone()).or_default() += w as f64;
            }
            if words.is_empty() {
                continue;
            }
            let report = representation_report(&words, &population).map_err(CliError::data)?;
            out.write_records(&format!("ingest/representation_{source}.csv"), &report)?;
            out.write_json(&format!("ingest/representation_{source}.json"), &report)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct AggregateRow<'a> {
    language: &'a str,
    region: &'a str,
    source: Source,
    samples: usize,
    total_tokens: usize,
    discarded_tokens: usize,
}

/// Cuts each variety's documents into fixed-size samples.
pub fn aggregate(config: &Config, out: &Output) -> Result<(), CliError> {
    let p = out.require(DOCUMENTS, "ingest")?;
    let docs: Vec<GeoDocument> = read_jsonl(BufReader::new(open(&p)?)).map_err(|e| data_at(&p, e))?;
    let groups = aggregate_corpus(&docs, config.policy.sample_words, config.seed).map_err(CliError::data)?;
    out.reset_dir("samples")?;
    let mut bytes = Vec::new();
    let samples: Vec<_> = groups.values().flat_map(|a| a.samples.iter().cloned()).collect();
    write_jsonl(&mut bytes, &samples).map_err(CliError::data)?;
    out.write(SAMPLES, &bytes)?;
    let rows: Vec<AggregateRow> = groups
        .iter()
        .map(|(k, a)| AggregateRow {
            language: &k.language,
            region: &k.region,
            source: k.source,
            samples: a.samples.len(),
            total_tokens: a.total_tokens,
            discarded_tokens: a.discarded_tokens,
        })
        .collect();
    out.write_records("samples/summary.csv", &rows)
}

#[derive(Serialize)]
struct SplitRow<'a> {
    language: &'a str,
    region: &'a str,
    source: Source,
    dev: usize,
    train: usize,
    test: usize,
    flags: String,
}

/// Assigns samples to dev, train and test.
pub fn split(config: &Config, out: &Output) -> Result<(), CliError> {
    let samples = load_samples(out)?;
    let assignment = split_dataset(&samples, &config.split_policy(), config.seed);
    out.reset_dir("split")?;
    out.write_json(super::ASSIGNMENT, &assignment)?;
    let rows: Vec<SplitRow> = assignment
        .groups
        .iter()
        .map(|g| SplitRow {
            language: &g.group.language,
            region: &g.group.region,
            source: g.group.source,
            dev: g.dev.len(),
            train: g.train.len(),
            test: g.test.len(),
            flags: g
                .flags
                .iter()
                .map(|f| serde_json::to_value(f).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default())
                .collect::<Vec<_>>()
                .join(";"),
        })
        .collect();
    out.write_records("split/summary.csv", &rows)
}

/// Varieties chosen by `ingest`, if it has run.
pub fn read_varieties(out: &Output) -> Result<Option<Vec<VarietyInventory>>, CliError> {
    if !out.path("ingest/varieties.json").exists() {
        return Ok(None);
    }
    out.read_json("ingest/varieties.json", "ingest").map(Some)
}
