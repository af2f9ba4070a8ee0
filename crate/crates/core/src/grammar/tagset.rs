use std::collections::HashMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::GrammarError;

/// Interned part-of-speech label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PosTag(pub u16);

/// Interned semantic-domain label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SemTag(pub u16);

/// Declared POS and semantic labels.
///
/// Declaration file, one label per line with optional aliases:
///
/// ```text
/// # kind canonical [alias ...]
/// pos noun N
/// pos verb V
/// sem animate
/// ```
///
/// Lookups are case-insensitive and resolve aliases to the canonical label.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Tagset {
    pos: Vec<String>,
    sem: Vec<String>,
    pos_index: HashMap<String, PosTag>,
    sem_index: HashMap<String, SemTag>,
}

impl Tagset {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a tagset from canonical labels without aliases.
    pub fn from_labels<P: AsRef<str>, S: AsRef<str>>(pos: &[P], sem: &[S]) -> Self {
        let mut t = Tagset::new();
        for p in pos {
            t.declare_pos(p.as_ref(), &[]);
        }
        for s in sem {
            t.declare_sem(s.as_ref(), &[]);
        }
        t
    }

    pub fn declare_pos(&mut self, label: &str, aliases: &[&str]) -> PosTag {
        if let Some(&t) = self.pos_index.get(&label.to_lowercase()) {
            return t;
        }
        let tag = PosTag(self.pos.len() as u16);
        self.pos.push(label.to_string());
        for name in std::iter::once(&label).chain(aliases) {
            self.pos_index.entry(name.to_lowercase()).or_insert(tag);
        }
        tag
    }

    pub fn declare_sem(&mut self, label: &str, aliases: &[&str]) -> SemTag {
        if let Some(&t) = self.sem_index.get(&label.to_lowercase()) {
            return t;
        }
        let tag = SemTag(self.sem.len() as u16);
        self.sem.push(label.to_string());
        for name in std::iter::once(&label).chain(aliases) {
            self.sem_index.entry(name.to_lowercase()).or_insert(tag);
        }
        tag
    }

    pub fn parse(text: &str) -> Result<Self, GrammarError> {
        let mut t = Tagset::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let kind = parts.next().unwrap_or_default();
            let Some(label) = parts.next() else {
                return Err(GrammarError::Parse {
                    line: i + 1,
                    message: "missing label".into(),
                });
            };
            let aliases: Vec<&str> = parts.collect();
            match kind.to_ascii_lowercase().as_str() {
                "pos" => {
                    t.declare_pos(label, &aliases);
                }
                "sem" => {
                    t.declare_sem(label, &aliases);
                }
                other => {
                    return Err(GrammarError::Parse {
                        line: i + 1,
                        message: format!("unknown tag kind {other:?}, expected pos or sem"),
                    })
                }
            }
        }
        Ok(t)
    }

    pub fn read<R: Read>(mut reader: R) -> Result<Self, GrammarError> {
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        Self::parse(&text)
    }

    pub fn pos(&self, label: &str) -> Option<PosTag> {
        self.pos_index.get(&label.to_lowercase()).copied()
    }

    pub fn sem(&self, label: &str) -> Option<SemTag> {
        self.sem_index.get(&label.to_lowercase()).copied()
    }

    pub fn pos_label(&self, tag: PosTag) -> &str {
        &self.pos[tag.0 as usize]
    }

    pub fn sem_label(&self, tag: SemTag) -> &str {
        &self.sem[tag.0 as usize]
    }

    pub fn pos_labels(&self) -> &[String] {
        &self.pos
    }

    pub fn sem_labels(&self) -> &[String] {
        &self.sem
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aliases_resolve_to_canonical_labels() {
        let t = Tagset::parse("# tags\npos noun N\npos V verb\nsem animate\n").unwrap();
        assert_eq!(t.pos("N"), t.pos("noun"));
        assert_eq!(t.pos("VERB"), t.pos("v"));
        assert_eq!(t.pos_label(t.pos("n").unwrap()), "noun");
        assert!(t.sem("transfer").is_none());
    }

    #[test]
    fn bad_declarations() {
        assert!(Tagset::parse("pos\n").is_err());
        assert!(Tagset::parse("lemma x\n").is_err());
    }
}
