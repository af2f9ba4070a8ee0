//! Synthetic desk-scale project used by the CLI tests: a planted-dialect
//! corpus over four English regions in both registers, with every input file
//! the pipeline reads.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dialectometry::corpus::{GeoDocument, Origin, Source};
use dialectometry::seed::rng_from_seed;
use dialectometry::synthetic::{PlantedConfig, PlantedDialects};

pub const REGIONS: [(&str, &str, f64, f64); 4] = [
    ("AU", "au", -33.87, 151.21),
    ("GB", "uk", 51.51, -0.13),
    ("IE", "ie", 53.35, -6.26),
    ("NZ", "nz", -36.85, 174.76),
];

pub const DOC_TOKENS: usize = 500;

pub struct Fixture {
    pub dir: PathBuf,
    pub config: PathBuf,
}

pub struct FixtureOptions {
    pub samples_per_group: usize,
    pub unmask_iterations: usize,
    pub seed: u64,
}

impl Default for FixtureOptions {
    fn default() -> Self {
        FixtureOptions {
            samples_per_group: 32,
            unmask_iterations: 5,
            seed: 7,
        }
    }
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

impl Fixture {
    pub fn new(dir: &Path, opts: &FixtureOptions) -> Fixture {
        let planted = PlantedDialects::new(
            PlantedConfig {
                regions: REGIONS.iter().map(|r| r.0.to_string()).collect(),
                ..PlantedConfig::default()
            },
            opts.seed,
        );
        write(dir, "tagset.txt", &planted.tagset_text());
        write(dir, "pos.csv", &planted.pos_lexicon_csv());
        write(dir, "sem.csv", &planted.sem_lexicon_csv());
        write(dir, "grammar.txt", planted.grammar_text());
        write(dir, "function_words.txt", "w00\nw01\nw02\nw03\nw04\nw05\nw06\nw07\n");

        let mut tld = String::from("tld,region\ncom,\n");
        let mut cities = String::from("name,lat,lon,country\n");
        let mut population = String::from("region,persons\n");
        let mut grouping = String::from("region,circle\n");
        for (i, (region, suffix, lat, lon)) in REGIONS.iter().enumerate() {
            tld.push_str(&format!("{suffix},{region}\n"));
            cities.push_str(&format!("City{region},{lat},{lon},{region}\n"));
            population.push_str(&format!("{region},{}\n", (i + 1) * 1_000_000));
            grouping.push_str(&format!("{region},{}\n", if i < 2 { "inner" } else { "outer" }));
        }
        write(dir, "tld.csv", &tld);
        write(dir, "cities.csv", &cities);
        write(dir, "population.csv", &population);
        write(dir, "grouping.csv", &grouping);

        let docs_per_group = opts.samples_per_group * 1000 / DOC_TOKENS;
        let mut rng = rng_from_seed(opts.seed ^ 0x5eed);
        let mut lines = String::new();
        let mut push = |doc: GeoDocument| {
            lines.push_str(&serde_json::to_string(&doc).unwrap());
            lines.push('\n');
        };
        for (r, (region, suffix, lat, lon)) in REGIONS.iter().enumerate() {
            for d in 0..docs_per_group {
                for source in [Source::Web, Source::Social] {
                    let origin = match source {
                        Source::Web => Origin::Domain(format!("site{d}.{suffix}")),
                        Source::Social => Origin::Point {
                            lat: lat + (d % 7) as f64 * 0.01,
                            lon: lon - (d % 5) as f64 * 0.01,
                        },
                    };
                    push(GeoDocument {
                        id: format!("{region}-{source}-{d:04}"),
                        text: planted.tokens(r, DOC_TOKENS, &mut rng).join(" "),
                        language: "eng".into(),
                        region: None,
                        source,
                        origin,
                    });
                }
            }
        }
        // Unmapped and invalid records that ingest must skip.
        push(GeoDocument {
            id: "zz-unmapped".into(),
            text: "w00 w01".into(),
            language: "eng".into(),
            region: None,
            source: Source::Web,
            origin: Origin::Domain("example.com".into()),
        });
        push(GeoDocument {
            id: "zz-empty".into(),
            text: " ".into(),
            language: "eng".into(),
            region: None,
            source: Source::Social,
            origin: Origin::Point { lat: 0.0, lon: 0.0 },
        });
        write(dir, "corpus.jsonl", &lines);

        let config = format!(
            r#"seed = {seed}
scale = 0.001
output = "out"

[paths]
corpus = "corpus.jsonl"
tld_map = "tld.csv"
gazetteer = "cities.csv"
population = "population.csv"
grouping = "grouping.csv"

[languages.eng]
tagset = "tagset.txt"
pos_lexicon = "pos.csv"
sem_lexicon = "sem.csv"

[[features]]
name = "cxg"
kind = "cxg"
files = {{ eng = "grammar.txt" }}

[[features]]
name = "fw"
kind = "function_words"
files = {{ eng = "function_words.txt" }}

[[features]]
name = "ngram"
kind = "ngram"
n = 2
dims = 512

[policy]
languages = ["eng"]
paired_languages = ["eng"]

[classifier]
epochs = 10

[analysis]
unmask_iterations = {unmask}
cv_folds = 3
"#,
            seed = opts.seed,
            unmask = opts.unmask_iterations,
        );
        write(dir, "dialectometry.toml", &config);
        Fixture {
            dir: dir.to_path_buf(),
            config: dir.join("dialectometry.toml"),
        }
    }

    pub fn out(&self) -> PathBuf {
        self.dir.join("out")
    }

    /// Runs the binary with `-c <config>` followed by `args`.
    pub fn run(&self, args: &[&str]) -> Output {
        run_bin(&[&["-c", self.config.to_str().unwrap()], args].concat())
    }
}

pub fn run_bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dialectometry"))
        .args(args)
        .env_remove("DIALECTOMETRY_CORPUS")
        .env_remove("DIALECTOMETRY_OUTPUT")
        .output()
        .unwrap()
}

pub const PIPELINE: [&str; 12] = [
    "ingest",
    "aggregate",
    "split",
    "extract",
    "train",
    "evaluate",
    "crossval",
    "unmask",
    "similarity",
    "uniqueness",
    "circle-test",
    "report",
];

/// Every file under `root` as (relative path, bytes), sorted by path.
pub fn snapshot(root: &Path) -> Vec<(String, Vec<u8>)> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<(String, Vec<u8>)>) {
        for entry in fs::read_dir(dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
                out.push((rel, fs::read(&p).unwrap()));
            }
        }
    }
    let mut out = Vec::new();
    walk(root, root, &mut out);
    out.sort();
    out
}
