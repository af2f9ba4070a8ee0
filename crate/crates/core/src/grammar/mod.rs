//! Construction grammars: slot-constraint sequences over annotated tokens.
//!
//! A construction such as
//!
//! ```text
//! SYN:noun --- SEM-SYN:transfer[V] --- SEM-SYN:animate[N] --- SYN:noun
//! ```
//!
//! matches any run of consecutive tokens whose annotations satisfy each slot
//! in turn. A sample is encoded as the vector of per-construction match
//! counts (a bag of constructions).

mod annotate;
mod matcher;
mod parse;
mod tagset;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use annotate::{annotate, AnnotatedToken, Annotator, Lexicon};
pub use matcher::{construction_counts, extract_cxg_features, match_construction, MatchResult};
pub use parse::parse_grammar;
pub use tagset::{PosTag, SemTag, Tagset};

#[derive(Debug, Error)]
pub enum GrammarError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("grammar contains no constructions")]
    Empty,
    #[error("grammar language {grammar:?} does not match sample language {sample:?}")]
    LanguageMismatch { grammar: String, sample: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One slot of a construction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SlotConstraint {
    /// Part of speech.
    Syn(PosTag),
    /// Semantic domain and part of speech jointly.
    SemSyn { sem: SemTag, pos: PosTag },
    /// Literal lowercase word forms, one token per word.
    Lex(Vec<String>),
}

impl SlotConstraint {
    /// Number of tokens the slot consumes.
    pub fn width(&self) -> usize {
        match self {
            SlotConstraint::Lex(words) => words.len(),
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Construction {
    pub id: usize,
    pub slots: Vec<SlotConstraint>,
}

impl Construction {
    /// Tokens spanned by one match.
    pub fn width(&self) -> usize {
        self.slots.iter().map(SlotConstraint::width).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GrammarVariant {
    /// Frequency-based slot selection.
    #[serde(rename = "CxG-1")]
    CxG1,
    /// Association-based slot selection.
    #[serde(rename = "CxG-2")]
    CxG2,
}

impl fmt::Display for GrammarVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GrammarVariant::CxG1 => "CxG-1",
            GrammarVariant::CxG2 => "CxG-2",
        })
    }
}

impl FromStr for GrammarVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "").as_str() {
            "cxg1" => Ok(GrammarVariant::CxG1),
            "cxg2" => Ok(GrammarVariant::CxG2),
            _ => Err(format!("unknown grammar variant {s:?}")),
        }
    }
}

/// An immutable construction inventory for one language.
#[derive(Clone, Debug, PartialEq)]
pub struct Grammar {
    pub language: String,
    pub variant: GrammarVariant,
    tagset: Arc<Tagset>,
    constructions: Vec<Construction>,
}

impl Grammar {
    /// Ids are reassigned in list order.
    pub fn new(
        language: &str,
        variant: GrammarVariant,
        tagset: Arc<Tagset>,
        constructions: Vec<Vec<SlotConstraint>>,
    ) -> Result<Self, GrammarError> {
        if constructions.is_empty() {
            return Err(GrammarError::Empty);
        }
        let constructions = constructions
            .into_iter()
            .enumerate()
            .map(|(id, slots)| {
                if slots.len() < 2 {
                    return Err(GrammarError::Parse {
                        line: 0,
                        message: format!("construction {id} has fewer than two slots"),
                    });
                }
                Ok(Construction { id, slots })
            })
            .collect::<Result<_, _>>()?;
        Ok(Grammar {
            language: language.to_string(),
            variant,
            tagset,
            constructions,
        })
    }

    pub fn constructions(&self) -> &[Construction] {
        &self.constructions
    }

    pub fn len(&self) -> usize {
        self.constructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constructions.is_empty()
    }

    pub fn tagset(&self) -> &Arc<Tagset> {
        &self.tagset
    }

    /// Renders a slot in grammar-file notation.
    pub fn slot_text(&self, slot: &SlotConstraint) -> String {
        match slot {
            SlotConstraint::Syn(p) => format!("SYN:{}", self.tagset.pos_label(*p)),
            SlotConstraint::SemSyn { sem, pos } => {
                format!("SEM-SYN:{}[{}]", self.tagset.sem_label(*sem), self.tagset.pos_label(*pos))
            }
            SlotConstraint::Lex(words) => format!("LEX:\"{}\"", words.join(" ")),
        }
    }

    pub fn construction_text(&self, c: &Construction) -> String {
        c.slots.iter().map(|s| self.slot_text(s)).collect::<Vec<_>>().join(" --- ")
    }

    /// Serializes to the grammar file format accepted by [`parse_grammar`].
    pub fn to_text(&self) -> String {
        let mut out = format!("@language {}\n@variant {}\n", self.language, self.variant);
        for c in &self.constructions {
            out.push_str(&self.construction_text(c));
            out.push('\n');
        }
        out
    }
}
