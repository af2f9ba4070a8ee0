//! Run configuration: a TOML file whose relative paths resolve against the
//! file's own directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use dialectometry::classifier::Hyperparameters;
use dialectometry::corpus::{SplitPolicy, VarietyPolicy, SAMPLE_WORDS};
use dialectometry::features::DEFAULT_HASH_DIMS;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Prefix of the environment variables that override input paths, e.g.
/// `DIALECTOMETRY_CORPUS` or `DIALECTOMETRY_OUTPUT`.
pub const ENV_PREFIX: &str = "DIALECTOMETRY_";

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: u64,
    #[serde(default = "default_scale")]
    scale: f64,
    #[serde(default = "default_output")]
    output: PathBuf,
    #[serde(default)]
    paths: Paths,
    #[serde(default)]
    languages: BTreeMap<String, LanguageFiles>,
    #[serde(default)]
    features: Vec<FeatureConfig>,
    #[serde(default)]
    policy: PolicyConfig,
    #[serde(default)]
    classifier: ClassifierConfig,
    #[serde(default)]
    analysis: AnalysisConfig,
}

fn default_scale() -> f64 {
    1.0
}

fn default_output() -> PathBuf {
    PathBuf::from("output")
}

/// Corpus-level inputs. Only `corpus` is needed by `ingest`; the others
/// enable optional steps.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub corpus: Option<PathBuf>,
    /// `tld,region` CSV; an empty region excludes the TLD.
    pub tld_map: Option<PathBuf>,
    /// `name,lat,lon,country` CSV.
    pub gazetteer: Option<PathBuf>,
    /// `region,persons` CSV.
    pub population: Option<PathBuf>,
    /// `region,circle` CSV.
    pub grouping: Option<PathBuf>,
}

/// Annotation resources for one language.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LanguageFiles {
    pub tagset: PathBuf,
    pub pos_lexicon: PathBuf,
    pub sem_lexicon: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Cxg,
    FunctionWords,
    Ngram,
}

/// One feature set. `files` maps a language to its grammar or word list;
/// languages without an entry are skipped for that set.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureConfig {
    pub name: String,
    pub kind: FeatureKind,
    #[serde(default)]
    pub files: BTreeMap<String, PathBuf>,
    pub n: Option<usize>,
    pub dims: Option<usize>,
}

impl FeatureConfig {
    pub fn hash_dims(&self) -> usize {
        self.dims.unwrap_or(DEFAULT_HASH_DIMS)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyConfig {
    pub sample_words: usize,
    pub radius_km: f64,
    pub languages: Vec<String>,
    pub paired_languages: Vec<String>,
    pub paired_threshold: f64,
    pub relative_fraction: f64,
    pub floor: f64,
    pub min_regions: usize,
    pub dev: usize,
    pub train_cap: usize,
    pub test_cap: usize,
    pub min_train: usize,
    pub min_test: usize,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        let v = VarietyPolicy::default();
        let s = SplitPolicy::default();
        PolicyConfig {
            sample_words: SAMPLE_WORDS,
            radius_km: 50.0,
            languages: v.languages,
            paired_languages: v.paired_languages,
            paired_threshold: v.paired_threshold,
            relative_fraction: v.relative_fraction,
            floor: v.floor,
            min_regions: v.min_regions,
            dev: s.dev,
            train_cap: s.train_cap,
            test_cap: s.test_cap,
            min_train: s.min_train,
            min_test: s.min_test,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierConfig {
    pub lambda: f64,
    pub epochs: usize,
    pub bias: f64,
    /// When non-empty, `train` picks lambda from this grid on the dev split.
    pub lambda_grid: Vec<f64>,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        let h = Hyperparameters::<f64>::default();
        ClassifierConfig {
            lambda: h.lambda,
            epochs: h.epochs,
            bias: h.bias,
            lambda_grid: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub unmask_iterations: usize,
    pub unmask_per_class: usize,
    /// Feature set to unmask; the first configured set when absent.
    pub unmask_feature: Option<String>,
    pub cv_folds: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            unmask_iterations: 100,
            unmask_per_class: 1,
            unmask_feature: None,
            cv_folds: 10,
        }
    }
}

/// Validated configuration with absolute paths and overrides applied.
#[derive(Clone, Debug)]
pub struct Config {
    pub seed: u64,
    pub scale: f64,
    pub output: PathBuf,
    pub paths: Paths,
    pub languages: BTreeMap<String, LanguageFiles>,
    pub features: Vec<FeatureConfig>,
    pub policy: PolicyConfig,
    pub classifier: ClassifierConfig,
    pub analysis: AnalysisConfig,
    /// SHA-256 of the configuration file bytes.
    pub config_sha256: String,
}

/// Settings that shape every run, as written to the manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub scale: f64,
    pub sample_words: usize,
    pub dev_samples: usize,
    pub train_cap: usize,
    pub test_cap: usize,
    pub min_train: usize,
    pub min_test: usize,
    pub paired_threshold_words: f64,
    pub relative_floor_words: f64,
    pub relative_fraction: f64,
    pub radius_km: f64,
    /// Per n-gram feature set.
    pub hash_dims: BTreeMap<String, usize>,
    pub default_hash_dims: usize,
    pub unmask_iterations: usize,
    pub unmask_per_class: usize,
    pub unmask_max_removals_per_class: usize,
    pub cv_folds: usize,
    pub lambda: f64,
    pub epochs: usize,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn env_path(key: &str) -> Option<PathBuf> {
    std::env::var_os(format!("{ENV_PREFIX}{}", key.to_ascii_uppercase())).map(PathBuf::from)
}

impl Config {
    /// Reads and validates a configuration file. `scale` overrides the file's
    /// value when given.
    pub fn load(path: &Path, scale: Option<f64>) -> Result<Config, CliError> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let text = std::str::from_utf8(&bytes)
            .map_err(|_| CliError::Config(format!("{} is not UTF-8", path.display())))?;
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let config_sha256 = hex::encode(Sha256::digest(&bytes));
        Config::from_raw(raw, &base, scale, config_sha256)
    }

    fn from_raw(raw: RawConfig, base: &Path, scale: Option<f64>, config_sha256: String) -> Result<Config, CliError> {
        let pick = |key: &str, p: &Option<PathBuf>| env_path(key).or_else(|| p.as_deref().map(|p| resolve(base, p)));
        let paths = Paths {
            corpus: pick("corpus", &raw.paths.corpus),
            tld_map: pick("tld_map", &raw.paths.tld_map),
            gazetteer: pick("gazetteer", &raw.paths.gazetteer),
            population: pick("population", &raw.paths.population),
            grouping: pick("grouping", &raw.paths.grouping),
        };
        let output = env_path("output").unwrap_or_else(|| resolve(base, &raw.output));
        let languages = raw
            .languages
            .into_iter()
            .map(|(lang, f)| {
                let files = LanguageFiles {
                    tagset: resolve(base, &f.tagset),
                    pos_lexicon: resolve(base, &f.pos_lexicon),
                    sem_lexicon: f.sem_lexicon.map(|p| resolve(base, &p)),
                };
                (lang, files)
            })
            .collect();
        let features = raw
            .features
            .into_iter()
            .map(|mut f| {
                f.files = f.files.into_iter().map(|(l, p)| (l, resolve(base, &p))).collect();
                f
            })
            .collect();
        let config = Config {
            seed: raw.seed,
            scale: scale.unwrap_or(raw.scale),
            output,
            paths,
            languages,
            features,
            policy: raw.policy,
            classifier: raw.classifier,
            analysis: raw.analysis,
            config_sha256,
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return bad(format!("scale must be positive, got {}", self.scale));
        }
        if self.policy.sample_words == 0 {
            return bad("policy.sample_words must be positive".into());
        }
        if self.analysis.cv_folds < 2 {
            return bad("analysis.cv_folds must be at least 2".into());
        }
        if self.analysis.unmask_per_class == 0 {
            return bad("analysis.unmask_per_class must be positive".into());
        }
        self.hyperparameters()
            .validate()
            .or_else(|e| bad(format!("classifier: {e}")))?;
        if self.classifier.lambda_grid.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return bad("classifier.lambda_grid values must be positive".into());
        }
        let mut names = std::collections::BTreeSet::new();
        for f in &self.features {
            if f.name.is_empty() || !f.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return bad(format!("feature name {:?} must be non-empty [A-Za-z0-9_-]", f.name));
            }
            if !names.insert(f.name.as_str()) {
                return bad(format!("feature name {:?} is used twice", f.name));
            }
            match f.kind {
                FeatureKind::Ngram => {
                    if !(1..=3).contains(&f.n.unwrap_or(0)) {
                        return bad(format!("feature {}: n must be 1, 2 or 3", f.name));
                    }
                    if f.hash_dims() == 0 {
                        return bad(format!("feature {}: dims must be positive", f.name));
                    }
                }
                FeatureKind::Cxg | FeatureKind::FunctionWords => {
                    if f.files.is_empty() {
                        return bad(format!("feature {}: no files configured", f.name));
                    }
                }
            }
            if f.kind == FeatureKind::Cxg {
                if let Some(lang) = f.files.keys().find(|l| !self.languages.contains_key(*l)) {
                    return bad(format!("feature {}: no [languages.{lang}] annotation resources", f.name));
                }
            }
        }
        if let Some(name) = &self.analysis.unmask_feature {
            if !names.contains(name.as_str()) {
                return bad(format!("analysis.unmask_feature {name:?} is not a configured feature"));
            }
        }
        for p in self.input_paths() {
            if !p.is_file() {
                return bad(format!("input file {} does not exist", p.display()));
            }
        }
        Ok(())
    }

    fn input_paths(&self) -> Vec<&Path> {
        let p = &self.paths;
        let mut out: Vec<&Path> = [&p.corpus, &p.tld_map, &p.gazetteer, &p.population, &p.grouping]
            .into_iter()
            .flatten()
            .map(PathBuf::as_path)
            .collect();
        for l in self.languages.values() {
            out.push(&l.tagset);
            out.push(&l.pos_lexicon);
            out.extend(l.sem_lexicon.as_deref());
        }
        for f in &self.features {
            out.extend(f.files.values().map(PathBuf::as_path));
        }
        out
    }

    pub fn variety_policy(&self) -> VarietyPolicy {
        let p = &self.policy;
        VarietyPolicy {
            languages: p.languages.clone(),
            paired_languages: p.paired_languages.clone(),
            paired_threshold: p.paired_threshold,
            relative_fraction: p.relative_fraction,
            floor: p.floor,
            min_regions: p.min_regions,
            scale: self.scale,
        }
    }

    pub fn split_policy(&self) -> SplitPolicy {
        let p = &self.policy;
        SplitPolicy {
            dev: p.dev,
            train_cap: p.train_cap,
            test_cap: p.test_cap,
            min_train: p.min_train,
            min_test: p.min_test,
            scale: self.scale,
        }
    }

    pub fn hyperparameters(&self) -> Hyperparameters<f64> {
        Hyperparameters {
            lambda: self.classifier.lambda,
            epochs: self.classifier.epochs,
            bias: self.classifier.bias,
        }
    }

    pub fn feature(&self, name: &str) -> Option<&FeatureConfig> {
        self.features.iter().find(|f| f.name == name)
    }

    pub fn unmask_feature(&self) -> Option<&FeatureConfig> {
        match &self.analysis.unmask_feature {
            Some(name) => self.feature(name),
            None => self.features.first(),
        }
    }

    pub fn constants(&self) -> Constants {
        let split = self.split_policy();
        let variety = self.variety_policy();
        Constants {
            scale: self.scale,
            sample_words: self.policy.sample_words,
            dev_samples: split.dev_size(),
            train_cap: split.train_cap_size(),
            test_cap: split.test_cap_size(),
            min_train: split.min_train_size(),
            min_test: split.min_test_size(),
            paired_threshold_words: variety.paired_threshold_words(),
            relative_floor_words: variety.floor * variety.scale,
            relative_fraction: variety.relative_fraction,
            radius_km: self.policy.radius_km,
            hash_dims: self
                .features
                .iter()
                .filter(|f| f.kind == FeatureKind::Ngram)
                .map(|f| (f.name.clone(), f.hash_dims()))
                .collect(),
            default_hash_dims: DEFAULT_HASH_DIMS,
            unmask_iterations: self.analysis.unmask_iterations,
            unmask_per_class: self.analysis.unmask_per_class,
            unmask_max_removals_per_class: 2 * self.analysis.unmask_per_class,
            cv_folds: self.analysis.cv_folds,
            lambda: self.classifier.lambda,
            epochs: self.classifier.epochs,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, scale: Option<f64>) -> Result<Config, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        Config::from_raw(raw, Path::new("/base"), scale, String::new())
    }

    #[test]
    fn defaults_fill_every_section() {
        let c = parse("seed = 7\n", None).unwrap();
        let k = c.constants();
        assert_eq!((k.sample_words, k.dev_samples, k.train_cap, k.test_cap), (1000, 2000, 25000, 5000));
        assert_eq!((k.unmask_iterations, k.unmask_max_removals_per_class, k.cv_folds), (100, 2, 10));
        assert_eq!(c.output, PathBuf::from("/base/output"));
    }

    #[test]
    fn scale_flag_overrides_file() {
        let c = parse("seed = 1\nscale = 0.5\n", Some(0.01)).unwrap();
        let k = c.constants();
        assert_eq!((k.dev_samples, k.train_cap, k.test_cap), (20, 250, 50));
        assert_eq!(k.paired_threshold_words, 150_000.0);
        assert_eq!(k.sample_words, 1000);
    }

    #[test]
    fn invalid_settings_are_rejected() {
        for text in [
            "scale = 1.0\n",
            "seed = 1\nscale = 0\n",
            "seed = 1\nbogus = 2\n",
            "seed = 1\n[analysis]\ncv_folds = 1\n",
            "seed = 1\n[classifier]\nlambda = -1.0\n",
            "seed = 1\n[[features]]\nname = \"x\"\nkind = \"ngram\"\nn = 4\n",
            "seed = 1\n[[features]]\nname = \"x\"\nkind = \"cxg\"\nfiles = { eng = \"g.txt\" }\n",
            "seed = 1\n[paths]\ncorpus = \"missing.jsonl\"\n",
        ] {
            assert!(matches!(parse(text, None), Err(CliError::Config(_))), "{text}");
        }
    }

    #[test]
    fn relative_paths_resolve_against_the_file() {
        assert_eq!(resolve(Path::new("/a/b"), Path::new("c.csv")), PathBuf::from("/a/b/c.csv"));
        assert_eq!(resolve(Path::new("/a/b"), Path::new("/c.csv")), PathBuf::from("/c.csv"));
    }
}
