//! Pipeline stages. Each reads the artifacts of earlier stages from the
//! output directory and replaces its own subdirectory.

mod analysis;
mod corpus;
mod model;

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::BufReader;
use std::path::Path;
use std::sync::Arc;

use dialectometry::classifier::ModelWeights;
use dialectometry::corpus::io::read_jsonl;
use dialectometry::corpus::{Sample, Source, SplitAssignment};
use dialectometry::features::read_vectors;
use dialectometry::grammar::{parse_grammar, Annotator, Grammar, Lexicon, Tagset};
use dialectometry::{SparseVector, Vector};

use crate::artifacts::Output;
use crate::config::{Config, LanguageFiles};
use crate::error::CliError;

pub use analysis::{
    circle_test, similarity, uniqueness, unmask, CircleRow, CrossRegisterRow, SimilarityFile, UniquenessEntry, UnmaskRow,
};
pub use corpus::{aggregate, ingest, read_varieties, split, IngestSummary};
pub use model::{crossval, evaluate, extract, train, CrossvalRow, EvalRow, TrainRow};

pub const DOCUMENTS: &str = "ingest/documents.jsonl";
pub const SAMPLES: &str = "samples/samples.jsonl";
pub const ASSIGNMENT: &str = "split/assignment.json";

/// One classification problem: a feature set on one language and register.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Experiment {
    pub feature: String,
    pub language: String,
    pub source: Source,
}

impl Experiment {
    /// `dir/feature/language-source` plus `ext`.
    pub fn rel(&self, dir: &str, ext: &str) -> String {
        format!("{dir}/{}/{}-{}{ext}", self.feature, self.language, self.source)
    }

    pub fn id(&self) -> String {
        format!("{}/{}-{}", self.feature, self.language, self.source)
    }
}

#[derive(Default)]
pub struct Labelled {
    pub x: Vec<Vector>,
    pub y: Vec<String>,
}

impl Labelled {
    fn push(&mut self, x: Vector, y: String) {
        self.x.push(x);
        self.y.push(y);
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn classes(&self) -> BTreeSet<&str> {
        self.y.iter().map(String::as_str).collect()
    }

    /// Keeps only samples whose label is one of the model's classes.
    pub fn known_to(&self, model: &ModelWeights<f64>) -> Labelled {
        let mut out = Labelled::default();
        for (x, y) in self.x.iter().zip(&self.y) {
            if model.class_index(y).is_some() {
                out.push(x.clone(), y.clone());
            }
        }
        out
    }

    pub fn as_pair(&self) -> (&[SparseVector<f64>], &[String]) {
        (&self.x, &self.y)
    }
}

#[derive(Default)]
pub struct Splits {
    pub dev: Labelled,
    pub train: Labelled,
    pub test: Labelled,
}

#[derive(Clone, Copy)]
enum Role {
    Dev,
    Train,
    Test,
}

/// Every extracted experiment with its split data, in a fixed order.
pub fn load_experiments(out: &Output, feature: Option<&str>) -> Result<Vec<(Experiment, Splits)>, CliError> {
    out.require("features", "extract")?;
    let assignment: SplitAssignment = out.read_json(ASSIGNMENT, "split")?;
    let mut role: BTreeMap<&str, Role> = BTreeMap::new();
    for g in &assignment.groups {
        for (ids, r) in [(&g.dev, Role::Dev), (&g.train, Role::Train), (&g.test, Role::Test)] {
            for id in ids {
                role.insert(id.as_str(), r);
            }
        }
    }
    let mut experiments = Vec::new();
    for name in out.subdirs("features")? {
        if feature.is_some_and(|f| f != name) {
            continue;
        }
        for file in out.list(&format!("features/{name}"), ".jsonl")? {
            let language = file.trim_end_matches(".jsonl").to_string();
            let path = out.path(&format!("features/{name}/{file}"));
            let vectors = read_vectors::<f64, _>(BufReader::new(open(&path)?)).map_err(|e| data_at(&path, e))?;
            let mut by_source: BTreeMap<Source, Splits> = BTreeMap::new();
            for v in vectors {
                let Some(&r) = role.get(v.id.as_str()) else { continue };
                let s = by_source.entry(v.source).or_default();
                let target = match r {
                    Role::Dev => &mut s.dev,
                    Role::Train => &mut s.train,
                    Role::Test => &mut s.test,
                };
                target.push(v.values, v.region);
            }
            for (source, splits) in by_source {
                let e = Experiment {
                    feature: name.clone(),
                    language: language.clone(),
                    source,
                };
                experiments.push((e, splits));
            }
        }
    }
    Ok(experiments)
}

pub fn load_model(out: &Output, e: &Experiment) -> Result<Option<ModelWeights<f64>>, CliError> {
    let p = out.path(&e.rel("models", ".json"));
    if !p.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&p).map_err(|e| io_at(&p, e))?;
    ModelWeights::from_json(&text).map(Some).map_err(|e| data_at(&p, e))
}

pub fn load_samples(out: &Output) -> Result<Vec<Sample>, CliError> {
    let p = out.require(SAMPLES, "aggregate")?;
    read_jsonl(BufReader::new(open(&p)?)).map_err(|e| data_at(&p, e))
}

pub fn open(p: &Path) -> Result<File, CliError> {
    File::open(p).map_err(|e| io_at(p, e))
}

pub fn io_at(p: &Path, source: std::io::Error) -> CliError {
    CliError::Io {
        context: p.display().to_string(),
        source,
    }
}

pub fn data_at(p: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{}: {e}", p.display()))
}

/// Tagset, lexicons and grammar for construction matching in one language.
pub fn load_grammar(files: &LanguageFiles, grammar: &Path) -> Result<(Annotator, Grammar), CliError> {
    let tagset = Arc::new(Tagset::read(open(&files.tagset)?).map_err(|e| data_at(&files.tagset, e))?);
    let pos = Lexicon::pos_from_csv(open(&files.pos_lexicon)?, &tagset).map_err(|e| data_at(&files.pos_lexicon, e))?;
    let sem = match &files.sem_lexicon {
        Some(p) => Lexicon::sem_from_csv(open(p)?, &tagset).map_err(|e| data_at(p, e))?,
        None => Lexicon::new(),
    };
    let text = std::fs::read_to_string(grammar).map_err(|e| io_at(grammar, e))?;
    let g = parse_grammar(&text, tagset.clone()).map_err(|e| data_at(grammar, e))?;
    Ok((Annotator { tagset, pos, sem }, g))
}

/// Seed for everything trained on one experiment.
pub fn experiment_seed(config: &Config, e: &Experiment) -> u64 {
    dialectometry::seed::derive_seed(config.seed, &format!("train:{}", e.id()))
}
