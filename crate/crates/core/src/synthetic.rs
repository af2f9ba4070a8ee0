//! Seeded generators for planted-dialect corpora.
//!
//! Two levels are provided. [`PlantedDialects`] writes token streams in
//! which each region over-uses its own subset of a generated construction
//! grammar; the streams go through the regular annotation and matching path.
//! [`generate_vectors`] skips text entirely and draws count vectors from
//! per-region feature profiles.

use std::sync::Arc;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::grammar::{parse_grammar, Annotator, Grammar, Lexicon, Tagset};
use crate::seed::rng_from_seed;
use crate::{Scalar, SparseVector};

#[derive(Clone, Debug)]
pub struct PlantedConfig {
    pub language: String,
    pub regions: Vec<String>,
    pub constructions: usize,
    /// Constructions each region over-uses; region `r` gets ids
    /// `r * biased_per_region ..` (mod the grammar size).
    pub biased_per_region: usize,
    /// Draw weight of a favoured construction relative to any other.
    pub bias_ratio: f64,
    pub tags: usize,
    pub slots: usize,
    /// Construction tokens planted per 1,000 tokens of text.
    pub instances_per_thousand: usize,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig {
            language: "eng".into(),
            regions: ["AU", "GB", "IE", "NZ"].iter().map(|s| s.to_string()).collect(),
            constructions: 100,
            biased_per_region: 25,
            bias_ratio: 3.0,
            tags: 40,
            slots: 3,
            instances_per_thousand: 60,
        }
    }
}

/// A generated grammar, lexicons and region-biased text source.
#[derive(Clone, Debug)]
pub struct PlantedDialects {
    pub config: PlantedConfig,
    pub tagset: Arc<Tagset>,
    pub annotator: Annotator,
    pub grammar: Grammar,
    grammar_text: String,
    /// Word sequence realizing each construction.
    realizations: Vec<Vec<String>>,
    vocabulary: Vec<String>,
    construction_weights: Vec<WeightedIndex<f64>>,
}

fn word(tag: usize) -> String {
    format!("w{tag:02}")
}

fn tag_label(tag: usize) -> String {
    format!("t{tag:02}")
}

impl PlantedDialects {
    pub fn new(config: PlantedConfig, seed: u64) -> Self {
        assert!(config.tags >= 2 && config.slots >= 2 && config.constructions > 0);
        let mut rng = rng_from_seed(seed);
        let mut tagset = Tagset::new();
        for t in 0..config.tags {
            tagset.declare_pos(&tag_label(t), &[]);
        }
        tagset.declare_sem("planted", &[]);
        let tagset = Arc::new(tagset);

        // Distinct random tag sequences.
        let mut seqs: Vec<Vec<usize>> = Vec::new();
        while seqs.len() < config.constructions {
            let s: Vec<usize> = (0..config.slots).map(|_| rng.gen_range(0..config.tags)).collect();
            if !seqs.contains(&s) {
                seqs.push(s);
            }
        }
        let mut grammar_text = format!("@language {}\n@variant CxG-2\n", config.language);
        for s in &seqs {
            let line: Vec<String> = s.iter().map(|&t| format!("SYN:{}", tag_label(t))).collect();
            grammar_text.push_str(&line.join(" --- "));
            grammar_text.push('\n');
        }
        let grammar = parse_grammar(&grammar_text, tagset.clone()).expect("generated grammar parses");

        let mut pos = Lexicon::new();
        for t in 0..config.tags {
            pos.insert(&word(t), tagset.pos(&tag_label(t)).expect("declared"));
        }
        let annotator = Annotator {
            tagset: tagset.clone(),
            pos,
            sem: Lexicon::new(),
        };
        let realizations = seqs.iter().map(|s| s.iter().map(|&t| word(t)).collect()).collect();
        let vocabulary = (0..config.tags).map(word).collect();

        let n = config.constructions;
        let construction_weights = (0..config.regions.len())
            .map(|r| {
                let mut w = vec![1.0; n];
                for k in 0..config.biased_per_region.min(n) {
                    w[(r * config.biased_per_region + k) % n] = config.bias_ratio;
                }
                WeightedIndex::new(w).expect("positive weights")
            })
            .collect();

        PlantedDialects {
            config,
            tagset,
            annotator,
            grammar,
            grammar_text,
            realizations,
            vocabulary,
            construction_weights,
        }
    }

    /// `len` tokens of region `region`'s text.
    pub fn tokens(&self, region: usize, len: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
        let planted = len * self.config.instances_per_thousand / 1000;
        let mut segments: Vec<Vec<String>> = Vec::new();
        let mut used = 0;
        for _ in 0..planted {
            let c = self.construction_weights[region].sample(rng);
            let r = &self.realizations[c];
            if used + r.len() > len {
                break;
            }
            used += r.len();
            segments.push(r.clone());
        }
        while used < len {
            segments.push(vec![self.vocabulary.choose(rng).expect("vocabulary").clone()]);
            used += 1;
        }
        segments.shuffle(rng);
        segments.concat()
    }

    pub fn grammar_text(&self) -> &str {
        &self.grammar_text
    }

    pub fn tagset_text(&self) -> String {
        let mut out = String::from("# generated tagset\n");
        for l in self.tagset.pos_labels() {
            out.push_str(&format!("pos {l}\n"));
        }
        for l in self.tagset.sem_labels() {
            out.push_str(&format!("sem {l}\n"));
        }
        out
    }

    pub fn pos_lexicon_csv(&self) -> String {
        let mut out = String::from("form,tag\n");
        for t in 0..self.config.tags {
            out.push_str(&format!("{},{}\n", word(t), tag_label(t)));
        }
        out
    }

    pub fn sem_lexicon_csv(&self) -> String {
        "form,tag\n".to_string()
    }

    /// Bag-of-constructions vectors for `per_region` samples of `len` tokens
    /// per region, labelled by region name.
    pub fn vectors<T: Scalar>(&self, per_region: usize, len: usize, seed: u64) -> (Vec<SparseVector<T>>, Vec<String>) {
        let mut rng = rng_from_seed(seed);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (r, name) in self.config.regions.iter().enumerate() {
            for _ in 0..per_region {
                let tokens = self.tokens(r, len, &mut rng);
                let annotated = self.annotator.annotate(&tokens);
                let v = crate::grammar::extract_cxg_features(&annotated, &self.config.language, &self.grammar)
                    .expect("language matches");
                xs.push(v);
                ys.push(name.clone());
            }
        }
        (xs, ys)
    }
}

/// Feature profile of one synthetic region.
#[derive(Clone, Debug)]
pub struct RegionProfile {
    pub name: String,
    /// Relative draw weight of every feature.
    pub weights: Vec<f64>,
    /// Counts added to every sample of the region.
    pub fixed: Vec<(usize, f64)>,
}

impl RegionProfile {
    pub fn uniform(name: &str, dims: usize) -> Self {
        RegionProfile {
            name: name.to_string(),
            weights: vec![1.0; dims],
            fixed: Vec::new(),
        }
    }

    /// Multiplies the weight of `features` by `ratio`.
    pub fn biased(mut self, features: impl IntoIterator<Item = usize>, ratio: f64) -> Self {
        for f in features {
            self.weights[f] *= ratio;
        }
        self
    }

    pub fn with_fixed(mut self, feature: usize, count: f64) -> Self {
        self.fixed.push((feature, count));
        self
    }
}

/// `per_region` L2-normalized count vectors per profile, each built from
/// `events` weighted feature draws plus the profile's fixed counts.
pub fn generate_vectors<T: Scalar>(
    profiles: &[RegionProfile],
    per_region: usize,
    events: usize,
    seed: u64,
) -> (Vec<SparseVector<T>>, Vec<String>) {
    let mut rng = rng_from_seed(seed);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for p in profiles {
        let dims = p.weights.len();
        let dist = WeightedIndex::new(&p.weights).expect("positive weights");
        for _ in 0..per_region {
            let mut pairs: Vec<(usize, T)> = (0..events).map(|_| (dist.sample(&mut rng), T::one())).collect();
            pairs.extend(p.fixed.iter().map(|&(f, c)| (f, T::of(c))));
            xs.push(SparseVector::from_pairs(dims, pairs).expect("features in range").normalized());
            ys.push(p.name.clone());
        }
    }
    (xs, ys)
}
