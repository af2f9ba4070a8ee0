use std::collections::HashMap;
use std::io::Read;
use std::sync::Arc;

use serde::Deserialize;

use super::{GrammarError, PosTag, SemTag, Tagset};

/// A token with its part of speech and semantic domain; `None` is UNK.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnotatedToken {
    pub form: String,
    pub pos: Option<PosTag>,
    pub sem: Option<SemTag>,
}

impl AnnotatedToken {
    pub fn new(form: &str, pos: Option<PosTag>, sem: Option<SemTag>) -> Self {
        AnnotatedToken {
            form: form.to_lowercase(),
            pos,
            sem,
        }
    }
}

/// Lowercase word form to a single tag. The first entry for a form wins.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Lexicon<T> {
    entries: HashMap<String, T>,
}

#[derive(Deserialize)]
struct LexiconRow {
    form: String,
    tag: String,
}

impl<T: Copy> Lexicon<T> {
    pub fn new() -> Self {
        Lexicon {
            entries: HashMap::new(),
        }
    }

    pub fn insert(&mut self, form: &str, tag: T) {
        self.entries.entry(form.to_lowercase()).or_insert(tag);
    }

    pub fn get(&self, form: &str) -> Option<T> {
        self.entries
            .get(form)
            .or_else(|| self.entries.get(&form.to_lowercase()))
            .copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn from_csv<R: Read>(
        reader: R,
        resolve: impl Fn(&str) -> Option<T>,
        kind: &str,
    ) -> Result<Self, GrammarError> {
        let mut lex = Lexicon::new();
        let mut rdr = csv::Reader::from_reader(reader);
        for (i, row) in rdr.deserialize().enumerate() {
            let row: LexiconRow = row?;
            let tag = resolve(row.tag.trim()).ok_or_else(|| GrammarError::Parse {
                line: i + 2,
                message: format!("undeclared {kind} tag {:?}", row.tag),
            })?;
            lex.insert(row.form.trim(), tag);
        }
        Ok(lex)
    }
}

impl Lexicon<PosTag> {
    /// Reads a `form,tag` CSV; tags must be declared POS labels.
    pub fn pos_from_csv<R: Read>(reader: R, tagset: &Tagset) -> Result<Self, GrammarError> {
        Self::from_csv(reader, |t| tagset.pos(t), "part-of-speech")
    }
}

impl Lexicon<SemTag> {
    /// Reads a `form,tag` CSV; tags must be declared semantic labels.
    pub fn sem_from_csv<R: Read>(reader: R, tagset: &Tagset) -> Result<Self, GrammarError> {
        Self::from_csv(reader, |t| tagset.sem(t), "semantic")
    }
}

/// Lexicon lookup with no disambiguation. Length is preserved and forms
/// are lowercased.
pub fn annotate<S: AsRef<str>>(
    tokens: &[S],
    pos_lexicon: &Lexicon<PosTag>,
    sem_lexicon: &Lexicon<SemTag>,
) -> Vec<AnnotatedToken> {
    tokens
        .iter()
        .map(|t| {
            let form = t.as_ref().to_lowercase();
            AnnotatedToken {
                pos: pos_lexicon.get(&form),
                sem: sem_lexicon.get(&form),
                form,
            }
        })
        .collect()
}

/// Tagset plus both lexicons for one language.
#[derive(Clone, Debug)]
pub struct Annotator {
    pub tagset: Arc<Tagset>,
    pub pos: Lexicon<PosTag>,
    pub sem: Lexicon<SemTag>,
}

impl Annotator {
    pub fn annotate<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<AnnotatedToken> {
        annotate(tokens, &self.pos, &self.sem)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn annotator() -> Annotator {
        let tagset = Arc::new(
            Tagset::parse("pos noun N\npos V\npos pron\nsem human\nsem transfer\nsem animate\nsem object\n").unwrap(),
        );
        let pos = Lexicon::pos_from_csv(
            "form,tag\nhe,pron\ngave,V\nbill,noun\ncoffee,N\nbill,V\n".as_bytes(),
            &tagset,
        )
        .unwrap();
        let sem = Lexicon::sem_from_csv(
            "form,tag\nhe,human\ngave,transfer\nbill,animate\ncoffee,object\n".as_bytes(),
            &tagset,
        )
        .unwrap();
        Annotator { tagset, pos, sem }
    }

    #[test]
    fn lexicon_lookup_is_case_insensitive() {
        let a = annotator();
        let out = a.annotate(&["He", "gave", "Bill", "coffee"]);
        let t = &a.tagset;
        let pos: Vec<&str> = out.iter().map(|x| t.pos_label(x.pos.unwrap())).collect();
        let sem: Vec<&str> = out.iter().map(|x| t.sem_label(x.sem.unwrap())).collect();
        assert_eq!(pos, ["pron", "V", "noun", "noun"]);
        assert_eq!(sem, ["human", "transfer", "animate", "object"]);
        assert_eq!(out[0].form, "he");
    }

    #[test]
    fn unknown_and_empty() {
        let a = annotator();
        assert!(a.annotate::<&str>(&[]).is_empty());
        let out = a.annotate(&["zyzzyva"]);
        assert_eq!(out[0], AnnotatedToken::new("zyzzyva", None, None));
    }

    #[test]
    fn undeclared_lexicon_tag_is_rejected() {
        let t = Tagset::from_labels(&["noun"], &["animate"]);
        assert!(Lexicon::pos_from_csv("form,tag\ncat,adj\n".as_bytes(), &t).is_err());
    }
}
