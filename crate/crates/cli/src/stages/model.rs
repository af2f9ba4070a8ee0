//! extract, train, evaluate, crossval.

use std::collections::BTreeSet;
use std::io::BufReader;

use dialectometry::classifier::{
    cross_validate, evaluate as score, train as fit, tune_lambda, ClassMetrics, ClassifierError, LambdaTrial,
};
use dialectometry::corpus::{Sample, Source};
use dialectometry::features::{function_word_vector, hashed_ngram_vector, read_wordlist, SampleVector};
use dialectometry::grammar::{extract_cxg_features, Annotator, Grammar};
use dialectometry::seed::derive_seed;
use dialectometry::{EvaluationReport, Vector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{data_at, experiment_seed, load_experiments, load_grammar, load_model, load_samples, open, Experiment};
use crate::artifacts::Output;
use crate::config::{Config, FeatureConfig, FeatureKind};
use crate::error::CliError;

enum Encoder {
    Cxg(Annotator, Grammar),
    Words(Vec<String>),
    Ngram(usize, usize),
}

impl Encoder {
    fn for_language(config: &Config, f: &FeatureConfig, language: &str) -> Result<Option<Encoder>, CliError> {
        let file = f.files.get(language);
        Ok(match (f.kind, file) {
            (FeatureKind::Ngram, _) => Some(Encoder::Ngram(f.n.unwrap_or(1), f.hash_dims())),
            (_, None) => None,
            (FeatureKind::Cxg, Some(g)) => {
                let (annotator, grammar) = load_grammar(&config.languages[language], g)?;
                Some(Encoder::Cxg(annotator, grammar))
            }
            (FeatureKind::FunctionWords, Some(p)) => {
                let words = read_wordlist(BufReader::new(open(p)?)).map_err(|e| data_at(p, e))?;
                Some(Encoder::Words(words))
            }
        })
    }

    fn encode(&self, s: &Sample) -> Result<Vector, CliError> {
        match self {
            Encoder::Cxg(a, g) => extract_cxg_features(&a.annotate(&s.tokens), &s.language, g).map_err(CliError::data),
            Encoder::Words(w) => function_word_vector(&s.tokens, w).map_err(CliError::data),
            Encoder::Ngram(n, dims) => hashed_ngram_vector(&s.tokens, *n, *dims).map_err(CliError::data),
        }
    }
}

/// Encodes every sample with every configured feature set.
pub fn extract(config: &Config, out: &Output) -> Result<(), CliError> {
    let samples = load_samples(out)?;
    let languages: BTreeSet<&str> = samples.iter().map(|s| s.language.as_str()).collect();
    out.reset_dir("features")?;
    for f in &config.features {
        for &language in &languages {
            let Some(encoder) = Encoder::for_language(config, f, language)? else { continue };
            let lines: Vec<String> = samples
                .par_iter()
                .filter(|s| s.language == language)
                .map(|s| {
                    let values = encoder.encode(s)?;
                    let v = SampleVector {
                        id: s.id.clone(),
                        region: s.region.clone(),
                        source: s.source,
                        spec: f.name.clone(),
                        values,
                    };
                    Ok(v.to_json_line() + "\n")
                })
                .collect::<Result<_, CliError>>()?;
            out.write(&format!("features/{}/{language}.jsonl", f.name), lines.concat().as_bytes())?;
        }
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TrainRow {
    pub feature: String,
    pub language: String,
    pub source: Source,
    pub classes: usize,
    pub train_samples: usize,
    pub lambda: Option<f64>,
    pub note: String,
}

/// Fits one model per experiment, tuning lambda on dev when a grid is set.
pub fn train(config: &Config, out: &Output) -> Result<(), CliError> {
    let experiments = load_experiments(out, None)?;
    out.reset_dir("models")?;
    let mut rows = Vec::new();
    for (e, data) in &experiments {
        let mut row = TrainRow {
            feature: e.feature.clone(),
            language: e.language.clone(),
            source: e.source,
            classes: data.train.classes().len(),
            train_samples: data.train.len(),
            lambda: None,
            note: String::new(),
        };
        if row.classes < 2 {
            row.note = "fewer than two regions in training data".into();
            rows.push(row);
            continue;
        }
        let seed = experiment_seed(config, e);
        let mut hyper = config.hyperparameters();
        let grid = &config.classifier.lambda_grid;
        let train_classes = data.train.classes();
        if !grid.is_empty() {
            let mut dev = super::Labelled::default();
            for (x, y) in data.dev.x.iter().zip(&data.dev.y) {
                if train_classes.contains(y.as_str()) {
                    dev.push(x.clone(), y.clone());
                }
            }
            if dev.is_empty() {
                row.note = "no dev samples; lambda not tuned".into();
            } else {
                let (best, trials) =
                    tune_lambda(&data.train.x, &data.train.y, &dev.x, &dev.y, grid, &hyper, seed).map_err(CliError::data)?;
                hyper = best;
                out.write_records::<LambdaTrial<f64>>(&e.rel("models", ".tuning.csv"), &trials)?;
            }
        }
        let model = fit(&data.train.x, &data.train.y, &hyper, seed)
            .map_err(CliError::data)?
            .with_spec(&e.feature);
        out.write(&e.rel("models", ".json"), model.to_json().as_bytes())?;
        row.lambda = Some(hyper.lambda);
        rows.push(row);
    }
    out.write_records("models/summary.csv", &rows)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvalRow {
    pub feature: String,
    pub language: String,
    pub source: Source,
    pub classes: usize,
    pub test_samples: usize,
    pub weighted_f1: f64,
    pub accuracy: f64,
}

#[derive(Serialize)]
struct ClassRow<'a> {
    region: &'a str,
    precision: f64,
    recall: f64,
    f1: f64,
    support: usize,
}

/// Scores every model on its test split.
pub fn evaluate(_config: &Config, out: &Output) -> Result<(), CliError> {
    out.require("models", "train")?;
    let experiments = load_experiments(out, None)?;
    out.reset_dir("eval")?;
    let mut rows = Vec::new();
    for (e, data) in &experiments {
        let Some(model) = load_model(out, e)? else { continue };
        let test = data.test.known_to(&model);
        if test.is_empty() {
            continue;
        }
        let report = score(&model, &test.x, &test.y).map_err(CliError::data)?;
        out.write_json(&e.rel("eval", ".json"), &report)?;
        let class_rows: Vec<ClassRow> = report.per_class.iter().map(class_row).collect();
        out.write_records(&e.rel("eval", ".csv"), &class_rows)?;
        rows.push(EvalRow {
            feature: e.feature.clone(),
            language: e.language.clone(),
            source: e.source,
            classes: report.classes.len(),
            test_samples: report.total(),
            weighted_f1: report.weighted_f1,
            accuracy: report.accuracy,
        });
    }
    out.write_records("eval/summary.csv", &rows)?;
    out.write_json("eval/summary.json", &rows)
}

fn class_row(m: &ClassMetrics<f64>) -> ClassRow<'_> {
    ClassRow {
        region: &m.class,
        precision: m.precision,
        recall: m.recall,
        f1: m.f1,
        support: m.support,
    }
}

pub fn read_report(out: &Output, e: &Experiment) -> Result<Option<EvaluationReport>, CliError> {
    let rel = e.rel("eval", ".json");
    if !out.path(&rel).exists() {
        return Ok(None);
    }
    out.read_json(&rel, "evaluate").map(Some)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CrossvalRow {
    pub feature: String,
    pub language: String,
    pub source: Source,
    pub folds: usize,
    pub max: Option<f64>,
    pub min: Option<f64>,
    pub mean: Option<f64>,
    pub note: String,
}

/// Stratified k-fold cross-validation on each training split.
pub fn crossval(config: &Config, out: &Output) -> Result<(), CliError> {
    let experiments = load_experiments(out, None)?;
    out.reset_dir("crossval")?;
    let k = config.analysis.cv_folds;
    let mut rows = Vec::new();
    for (e, data) in &experiments {
        let hyper = match load_model(out, e)? {
            Some(m) => m.hyper.clone(),
            None => config.hyperparameters(),
        };
        let seed = derive_seed(experiment_seed(config, e), "crossval");
        let mut row = CrossvalRow {
            feature: e.feature.clone(),
            language: e.language.clone(),
            source: e.source,
            folds: k,
            max: None,
            min: None,
            mean: None,
            note: String::new(),
        };
        match cross_validate(&data.train.x, &data.train.y, k, &hyper, seed) {
            Ok(cv) => {
                (row.max, row.min, row.mean) = (Some(cv.max), Some(cv.min), Some(cv.mean));
                out.write_json(&e.rel("crossval", ".json"), &cv)?;
            }
            Err(err @ (ClassifierError::ClassTooSmall { .. } | ClassifierError::TooFewClasses(_))) => {
                row.note = err.to_string();
            }
            Err(err) => return Err(CliError::data(err)),
        }
        rows.push(row);
    }
    out.write_records("crossval/summary.csv", &rows)?;
    out.write_json("crossval/summary.json", &rows)
}
