//! unmask, similarity, uniqueness, circle-test.

use std::collections::BTreeMap;

use dialectometry::analysis::{
    circle_ttest, cosine_similarity_matrix, cross_register_correlation, error_similarity, grammar_fit, read_grouping,
    uniqueness_scores, unmask as unmask_curve, AnalysisError, Circle, GrammarFitRow,
};
use dialectometry::corpus::Source;
use dialectometry::grammar::AnnotatedToken;
use dialectometry::{SimilarityMatrix, UniquenessTable};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::read_report;
use super::{data_at, load_experiments, load_grammar, load_model, load_samples, open, Experiment};
use crate::artifacts::Output;
use crate::config::{Config, FeatureKind};
use crate::error::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UnmaskRow {
    pub feature: String,
    pub language: String,
    pub source: Source,
    pub iterations: usize,
    pub first_f1: Option<f64>,
    pub last_f1: Option<f64>,
    pub removed: usize,
    pub exhausted: bool,
}

/// Unmasking curves for the configured feature set, one per language and
/// register, trained with each model's own settings and seed.
pub fn unmask(config: &Config, out: &Output) -> Result<(), CliError> {
    let feature = config
        .unmask_feature()
        .ok_or_else(|| CliError::Config("no feature sets configured".into()))?;
    out.require("models", "train")?;
    let experiments = load_experiments(out, Some(&feature.name))?;
    out.reset_dir("unmask")?;
    let mut rows = Vec::new();
    for (e, data) in &experiments {
        let Some(model) = load_model(out, e)? else { continue };
        let test = data.test.known_to(&model);
        if test.is_empty() {
            continue;
        }
        let curve = unmask_curve(
            data.train.as_pair(),
            test.as_pair(),
            config.analysis.unmask_iterations,
            config.analysis.unmask_per_class,
            &model.hyper,
            model.seed,
        )
        .map_err(CliError::data)?;
        let stem = format!("unmask/{}-{}", e.language, e.source);
        out.write(&format!("{stem}.csv"), curve.to_csv().as_bytes())?;
        out.write_json(&format!("{stem}.json"), &curve)?;
        let f1 = curve.f1();
        rows.push(UnmaskRow {
            feature: e.feature.clone(),
            language: e.language.clone(),
            source: e.source,
            iterations: curve.steps.len(),
            first_f1: f1.first().copied(),
            last_f1: f1.last().copied(),
            removed: curve.total_removed(),
            exhausted: curve.exhausted,
        });
    }
    out.write_records("unmask/summary.csv", &rows)?;
    out.write_json("unmask/summary.json", &rows)
}

#[derive(Serialize, Deserialize)]
pub struct SimilarityFile {
    pub errors: Option<SimilarityMatrix>,
    pub cosine: Option<SimilarityMatrix>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CrossRegisterRow {
    pub feature: String,
    pub language: String,
    pub pairs: usize,
    pub r: Option<f64>,
    pub note: String,
}

/// Error-count and cosine matrices per experiment, and the correlation of
/// error matrices across registers.
pub fn similarity(_config: &Config, out: &Output) -> Result<(), CliError> {
    out.require("eval", "evaluate")?;
    let experiments = load_experiments(out, None)?;
    out.reset_dir("similarity")?;
    let mut errors: BTreeMap<(String, String), BTreeMap<Source, SimilarityMatrix>> = BTreeMap::new();
    for (e, _) in &experiments {
        let report = read_report(out, e)?;
        let model = load_model(out, e)?;
        let err = report.as_ref().map(error_similarity);
        let cos = match &model {
            Some(m) => match cosine_similarity_matrix(m) {
                Ok(c) => Some(c),
                Err(AnalysisError::TooFewClasses { .. }) => None,
                Err(x) => return Err(CliError::data(x)),
            },
            None => None,
        };
        if let Some(m) = &err {
            out.write(&e.rel("similarity", ".errors.csv"), m.to_csv().as_bytes())?;
            errors
                .entry((e.feature.clone(), e.language.clone()))
                .or_default()
                .insert(e.source, m.clone());
        }
        if let Some(m) = &cos {
            out.write(&e.rel("similarity", ".cosine.csv"), m.to_csv().as_bytes())?;
        }
        if err.is_some() || cos.is_some() {
            out.write_json(&e.rel("similarity", ".json"), &SimilarityFile { errors: err, cosine: cos })?;
        }
    }
    let mut rows = Vec::new();
    for ((feature, language), by_source) in &errors {
        let (Some(web), Some(social)) = (by_source.get(&Source::Web), by_source.get(&Source::Social)) else {
            continue;
        };
        let mut row = CrossRegisterRow {
            feature: feature.clone(),
            language: language.clone(),
            pairs: 0,
            r: None,
            note: String::new(),
        };
        match cross_register_correlation(web, social) {
            Ok(c) => {
                row.pairs = c.pairs.len();
                row.r = c.r;
                if c.r.is_none() {
                    row.note = "zero variance".into();
                }
            }
            Err(x @ AnalysisError::TooFewPairs(n)) => {
                row.pairs = n;
                row.note = x.to_string();
            }
            Err(x) => return Err(CliError::data(x)),
        }
        rows.push(row);
    }
    out.write_records("similarity/cross_register.csv", &rows)?;
    out.write_json("similarity/cross_register.json", &rows)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UniquenessEntry {
    pub feature: String,
    pub language: String,
    pub source: Source,
    pub table: UniquenessTable,
}

/// Spearman-sum uniqueness for every model with at least three regions.
pub fn uniqueness(_config: &Config, out: &Output) -> Result<(), CliError> {
    out.require("models", "train")?;
    let experiments = load_experiments(out, None)?;
    out.reset_dir("uniqueness")?;
    let mut entries = Vec::new();
    for (e, _) in &experiments {
        let Some(model) = load_model(out, e)? else { continue };
        let table = match uniqueness_scores(&model) {
            Ok(t) => t,
            Err(AnalysisError::TooFewClasses { .. }) => continue,
            Err(x) => return Err(CliError::data(x)),
        };
        out.write(&e.rel("uniqueness", ".csv"), table.to_csv().as_bytes())?;
        entries.push(UniquenessEntry {
            feature: e.feature.clone(),
            language: e.language.clone(),
            source: e.source,
            table,
        });
    }
    out.write_json("uniqueness/summary.json", &entries)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CircleRow {
    pub feature: String,
    pub language: String,
    pub source: Source,
    pub measure: String,
    pub inner: usize,
    pub outer: usize,
    pub inner_mean: Option<f64>,
    pub outer_mean: Option<f64>,
    pub t: Option<f64>,
    pub df: Option<f64>,
    pub p: Option<f64>,
    pub degenerate: bool,
    pub note: String,
}

fn test_row(e: &Experiment, measure: &str, values: &BTreeMap<String, f64>, grouping: &BTreeMap<String, Circle>) -> Result<CircleRow, CliError> {
    let count = |c: Circle| values.keys().filter(|r| grouping.get(*r) == Some(&c)).count();
    let mut row = CircleRow {
        feature: e.feature.clone(),
        language: e.language.clone(),
        source: e.source,
        measure: measure.to_string(),
        inner: count(Circle::Inner),
        outer: count(Circle::Outer),
        inner_mean: None,
        outer_mean: None,
        t: None,
        df: None,
        p: None,
        degenerate: false,
        note: String::new(),
    };
    match circle_ttest(values, grouping) {
        Ok(t) => {
            row.inner_mean = Some(t.inner_mean);
            row.outer_mean = Some(t.outer_mean);
            row.t = Some(t.t);
            row.df = Some(t.df);
            row.p = Some(t.p);
            row.degenerate = t.degenerate;
        }
        Err(x @ AnalysisError::SmallGroup { .. }) => row.note = x.to_string(),
        Err(x) => return Err(CliError::data(x)),
    }
    Ok(row)
}

/// Inner- against outer-circle t-tests on per-region F1, uniqueness and,
/// for construction features, grammar fit.
pub fn circle_test(config: &Config, out: &Output) -> Result<(), CliError> {
    let path = config
        .paths
        .grouping
        .as_ref()
        .ok_or_else(|| CliError::Config("paths.grouping is required by circle-test".into()))?;
    let grouping = read_grouping(open(path)?).map_err(|e| data_at(path, e))?;
    out.require("eval", "evaluate")?;
    let experiments = load_experiments(out, None)?;
    let samples = load_samples(out)?;
    out.reset_dir("circle")?;
    let mut rows = Vec::new();
    for (e, _) in &experiments {
        let Some(report) = read_report(out, e)? else { continue };
        let f1: BTreeMap<String, f64> = report.per_class.iter().map(|m| (m.class.clone(), m.f1)).collect();
        rows.push(test_row(e, "f1", &f1, &grouping)?);

        if let Some(model) = load_model(out, e)? {
            if let Ok(t) = uniqueness_scores(&model) {
                let u: BTreeMap<String, f64> = t.rows.iter().map(|r| (r.region.clone(), r.score)).collect();
                rows.push(test_row(e, "uniqueness", &u, &grouping)?);
            }
        }

        let Some(f) = config.feature(&e.feature) else { continue };
        let (FeatureKind::Cxg, Some(gpath)) = (f.kind, f.files.get(&e.language)) else { continue };
        let (annotator, grammar) = load_grammar(&config.languages[&e.language], gpath)?;
        let mut by_region: BTreeMap<String, Vec<Vec<AnnotatedToken>>> =
            report.classes.iter().map(|c| (c.clone(), Vec::new())).collect();
        let annotated: Vec<(String, Vec<AnnotatedToken>)> = samples
            .par_iter()
            .filter(|s| s.language == e.language && s.source == e.source && by_region.contains_key(&s.region))
            .map(|s| (s.region.clone(), annotator.annotate(&s.tokens)))
            .collect();
        for (region, tokens) in annotated {
            by_region.get_mut(&region).expect("filtered").push(tokens);
        }
        let fit = grammar_fit::<f64>(&by_region, &grammar);
        out.write_records::<GrammarFitRow<f64>>(&e.rel("circle/grammar_fit", ".csv"), &fit.rows)?;
        rows.push(test_row(e, "grammar_fit", &fit.values(), &grouping)?);
    }
    out.write_records("circle/tests.csv", &rows)?;
    out.write_json("circle/tests.json", &rows)
}
