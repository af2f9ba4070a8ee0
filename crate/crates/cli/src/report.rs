//! `report`: collates stage outputs into `report.json` and `report.md`.

use std::fmt::Write as _;

use dialectometry::classifier::ClassMetrics;
use dialectometry::corpus::{RepresentationRow, Source, VarietyInventory};
use dialectometry::SimilarityMatrix;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::artifacts::Output;
use crate::error::CliError;
use crate::stages::{
    read_varieties, CircleRow, CrossRegisterRow, CrossvalRow, EvalRow, Experiment, SimilarityFile, UniquenessEntry,
    UnmaskRow,
};

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
pub struct RegionTable {
    pub feature: String,
    pub language: String,
    pub source: Source,
    pub per_class: Vec<ClassMetrics<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PairValue {
    pub region_a: String,
    pub region_b: String,
    pub value: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SimilaritySummary {
    pub feature: String,
    pub language: String,
    pub source: Source,
    /// Highest cosine similarity first.
    pub most_similar: Vec<PairValue>,
    /// Most mutual errors first.
    pub most_confused: Vec<PairValue>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Report {
    pub version: u32,
    pub varieties: Vec<VarietyInventory>,
    pub representation: Vec<(Source, Vec<RepresentationRow>)>,
    pub classification: Vec<EvalRow>,
    pub crossval: Vec<CrossvalRow>,
    pub regions: Vec<RegionTable>,
    pub unmasking: Vec<UnmaskRow>,
    pub similarity: Vec<SimilaritySummary>,
    pub cross_register: Vec<CrossRegisterRow>,
    pub uniqueness: Vec<UniquenessEntry>,
    pub circle_tests: Vec<CircleRow>,
}

const TOP_PAIRS: usize = 3;

fn optional<T: DeserializeOwned>(out: &Output, rel: &str, stage: &'static str) -> Result<Option<T>, CliError> {
    if out.path(rel).exists() {
        out.read_json(rel, stage).map(Some)
    } else {
        Ok(None)
    }
}

/// The highest-valued defined pairs, ties broken by name.
fn top_pairs(m: &SimilarityMatrix) -> Vec<PairValue> {
    let mut pairs: Vec<PairValue> = m
        .upper_pairs()
        .into_iter()
        .filter_map(|((a, b), v)| {
            v.map(|value| PairValue {
                region_a: a,
                region_b: b,
                value,
            })
        })
        .collect();
    pairs.sort_by(|x, y| {
        y.value
            .partial_cmp(&x.value)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| (&x.region_a, &x.region_b).cmp(&(&y.region_a, &y.region_b)))
    });
    pairs.truncate(TOP_PAIRS);
    pairs
}

pub fn collect(out: &Output) -> Result<Report, CliError> {
    let classification: Vec<EvalRow> = out.read_json("eval/summary.json", "evaluate")?;
    let mut representation = Vec::new();
    for source in [Source::Web, Source::Social] {
        if let Some(rows) = optional(out, &format!("ingest/representation_{source}.json"), "ingest")? {
            representation.push((source, rows));
        }
    }
    let mut regions = Vec::new();
    let mut similarity = Vec::new();
    for row in &classification {
        let e = Experiment {
            feature: row.feature.clone(),
            language: row.language.clone(),
            source: row.source,
        };
        if let Some(report) = optional::<dialectometry::EvaluationReport>(out, &e.rel("eval", ".json"), "evaluate")? {
            regions.push(RegionTable {
                feature: e.feature.clone(),
                language: e.language.clone(),
                source: e.source,
                per_class: report.per_class,
            });
        }
        if let Some(file) = optional::<SimilarityFile>(out, &e.rel("similarity", ".json"), "similarity")? {
            similarity.push(SimilaritySummary {
                feature: e.feature.clone(),
                language: e.language.clone(),
                source: e.source,
                most_similar: file.cosine.as_ref().map(top_pairs).unwrap_or_default(),
                most_confused: file.errors.as_ref().map(top_pairs).unwrap_or_default(),
            });
        }
    }
    Ok(Report {
        version: REPORT_VERSION,
        varieties: read_varieties(out)?.unwrap_or_default(),
        representation,
        classification,
        crossval: optional(out, "crossval/summary.json", "crossval")?.unwrap_or_default(),
        regions,
        unmasking: optional(out, "unmask/summary.json", "unmask")?.unwrap_or_default(),
        similarity,
        cross_register: optional(out, "similarity/cross_register.json", "similarity")?.unwrap_or_default(),
        uniqueness: optional(out, "uniqueness/summary.json", "uniqueness")?.unwrap_or_default(),
        circle_tests: optional(out, "circle/tests.json", "circle-test")?.unwrap_or_default(),
    })
}

fn num(v: f64) -> String {
    format!("{v:.3}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_else(|| "-".into())
}

fn table(md: &mut String, header: &[&str], rows: &[Vec<String>]) {
    let _ = writeln!(md, "| {} |", header.join(" | "));
    let _ = writeln!(md, "|{}", "---|".repeat(header.len()));
    for r in rows {
        let _ = writeln!(md, "| {} |", r.join(" | "));
    }
    md.push('\n');
}

pub fn markdown(r: &Report) -> String {
    let mut md = String::from("# Dialectometry report\n\n");

    if !r.varieties.is_empty() {
        md.push_str("## Varieties\n\n");
        let rows: Vec<Vec<String>> = r
            .varieties
            .iter()
            .map(|v| {
                vec![
                    v.language.clone(),
                    v.source.map_or("web+social".to_string(), |s| s.to_string()),
                    v.varieties.len().to_string(),
                    v.regions().collect::<Vec<_>>().join(", "),
                ]
            })
            .collect();
        table(&mut md, &["Language", "Source", "N", "Regions"], &rows);
    }

    for (source, rows) in &r.representation {
        let _ = writeln!(md, "## Representation ({source})\n");
        let rows: Vec<Vec<String>> = rows
            .iter()
            .map(|x| {
                vec![
                    x.region.clone(),
                    format!("{}", x.corpus_words),
                    format!("{:.1}%", x.corpus_share),
                    format!("{:.1}%", x.population_share),
                    opt(x.ratio),
                ]
            })
            .collect();
        table(&mut md, &["Region", "Words", "Corpus", "Population", "Ratio"], &rows);
    }

    md.push_str("## Classification (weighted F1)\n\n");
    let rows: Vec<Vec<String>> = r
        .classification
        .iter()
        .map(|x| {
            vec![
                x.feature.clone(),
                x.language.clone(),
                x.source.to_string(),
                x.classes.to_string(),
                x.test_samples.to_string(),
                num(x.weighted_f1),
            ]
        })
        .collect();
    table(&mut md, &["Feature", "Language", "Source", "Regions", "Test", "F1"], &rows);

    if !r.crossval.is_empty() {
        md.push_str("## Cross-validation\n\n");
        let rows: Vec<Vec<String>> = r
            .crossval
            .iter()
            .map(|x| {
                vec![
                    x.feature.clone(),
                    x.language.clone(),
                    x.source.to_string(),
                    x.folds.to_string(),
                    opt(x.max),
                    opt(x.min),
                    opt(x.mean),
                ]
            })
            .collect();
        table(&mut md, &["Feature", "Language", "Source", "Folds", "Max", "Min", "Mean"], &rows);
    }

    for t in &r.regions {
        let _ = writeln!(md, "## Regions: {} {} {}\n", t.feature, t.language, t.source);
        let rows: Vec<Vec<String>> = t
            .per_class
            .iter()
            .map(|m| vec![m.class.clone(), num(m.precision), num(m.recall), num(m.f1), m.support.to_string()])
            .collect();
        table(&mut md, &["Region", "Precision", "Recall", "F1", "Support"], &rows);
    }

    if !r.unmasking.is_empty() {
        md.push_str("## Unmasking\n\n");
        let rows: Vec<Vec<String>> = r
            .unmasking
            .iter()
            .map(|x| {
                vec![
                    x.feature.clone(),
                    x.language.clone(),
                    x.source.to_string(),
                    x.iterations.to_string(),
                    opt(x.first_f1),
                    opt(x.last_f1),
                    x.removed.to_string(),
                    if x.exhausted { "yes" } else { "no" }.to_string(),
                ]
            })
            .collect();
        table(
            &mut md,
            &["Feature", "Language", "Source", "Iterations", "First F1", "Last F1", "Removed", "Exhausted"],
            &rows,
        );
    }

    if !r.similarity.is_empty() {
        md.push_str("## Most similar regions\n\n");
        let mut rows = Vec::new();
        for s in &r.similarity {
            let pairs = |ps: &[PairValue]| {
                ps.iter()
                    .map(|p| format!("{}-{} ({})", p.region_a, p.region_b, num(p.value)))
                    .collect::<Vec<_>>()
                    .join(", ")
            };
            rows.push(vec![
                s.feature.clone(),
                s.language.clone(),
                s.source.to_string(),
                pairs(&s.most_similar),
                pairs(&s.most_confused),
            ]);
        }
        table(&mut md, &["Feature", "Language", "Source", "Cosine", "Errors"], &rows);
    }

    if !r.cross_register.is_empty() {
        md.push_str("## Cross-register error correlation\n\n");
        let rows: Vec<Vec<String>> = r
            .cross_register
            .iter()
            .map(|x| vec![x.feature.clone(), x.language.clone(), x.pairs.to_string(), opt(x.r)])
            .collect();
        table(&mut md, &["Feature", "Language", "Pairs", "Pearson r"], &rows);
    }

    for u in &r.uniqueness {
        let _ = writeln!(md, "## Uniqueness: {} {} {}\n", u.feature, u.language, u.source);
        let rows: Vec<Vec<String>> = u
            .table
            .rows
            .iter()
            .enumerate()
            .map(|(i, x)| vec![(i + 1).to_string(), x.region.clone(), format!("{:.2}", x.score)])
            .collect();
        table(&mut md, &["Rank", "Region", "Score"], &rows);
    }

    if !r.circle_tests.is_empty() {
        md.push_str("## Inner vs outer circle\n\n");
        let rows: Vec<Vec<String>> = r
            .circle_tests
            .iter()
            .map(|x| {
                vec![
                    x.feature.clone(),
                    x.language.clone(),
                    x.source.to_string(),
                    x.measure.clone(),
                    format!("{}/{}", x.inner, x.outer),
                    opt(x.inner_mean),
                    opt(x.outer_mean),
                    opt(x.t),
                    x.p.map_or("-".into(), |p| format!("{p:.4}")),
                ]
            })
            .collect();
        table(
            &mut md,
            &["Feature", "Language", "Source", "Measure", "Inner/Outer", "Inner mean", "Outer mean", "t", "p"],
            &rows,
        );
    }
    md
}

pub fn report(out: &Output) -> Result<(), CliError> {
    let r = collect(out)?;
    out.write_json("report.json", &r)?;
    out.write("report.md", markdown(&r).as_bytes())
}
