use std::collections::HashMap;

use super::{AnnotatedToken, Construction, Grammar, GrammarError, PosTag, SlotConstraint};
use crate::{Scalar, SparseVector};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MatchResult {
    pub count: usize,
    /// Half-open token spans, in start order.
    pub spans: Vec<(usize, usize)>,
}

fn slot_matches(slot: &SlotConstraint, tokens: &[AnnotatedToken], at: usize) -> Option<usize> {
    match slot {
        SlotConstraint::Syn(pos) => {
            let t = tokens.get(at)?;
            (t.pos == Some(*pos)).then_some(at + 1)
        }
        SlotConstraint::SemSyn { sem, pos } => {
            let t = tokens.get(at)?;
            (t.pos == Some(*pos) && t.sem == Some(*sem)).then_some(at + 1)
        }
        SlotConstraint::Lex(words) => {
            let window = tokens.get(at..at + words.len())?;
            window
                .iter()
                .zip(words)
                .all(|(t, w)| t.form == *w)
                .then_some(at + words.len())
        }
    }
}

fn match_at(c: &Construction, tokens: &[AnnotatedToken], start: usize) -> Option<usize> {
    c.slots
        .iter()
        .try_fold(start, |at, slot| slot_matches(slot, tokens, at))
}

/// Every start position where all slots match consecutively. Overlapping
/// matches are all counted.
pub fn match_construction(c: &Construction, tokens: &[AnnotatedToken]) -> MatchResult {
    let spans: Vec<(usize, usize)> = (0..tokens.len())
        .filter_map(|start| match_at(c, tokens, start).map(|end| (start, end)))
        .collect();
    MatchResult {
        count: spans.len(),
        spans,
    }
}

/// Constructions bucketed by what their first slot requires, so each start
/// position only tries candidates that can begin there.
struct FirstSlotIndex<'g> {
    by_pos: HashMap<PosTag, Vec<&'g Construction>>,
    by_word: HashMap<&'g str, Vec<&'g Construction>>,
}

impl<'g> FirstSlotIndex<'g> {
    fn new(grammar: &'g Grammar) -> Self {
        let mut by_pos: HashMap<PosTag, Vec<&Construction>> = HashMap::new();
        let mut by_word: HashMap<&str, Vec<&Construction>> = HashMap::new();
        for c in grammar.constructions() {
            match &c.slots[0] {
                SlotConstraint::Syn(p) | SlotConstraint::SemSyn { pos: p, .. } => {
                    by_pos.entry(*p).or_default().push(c)
                }
                SlotConstraint::Lex(words) => by_word.entry(words[0].as_str()).or_default().push(c),
            }
        }
        FirstSlotIndex { by_pos, by_word }
    }
}

/// Raw match count of every construction in `grammar`, in id order.
pub fn construction_counts(tokens: &[AnnotatedToken], grammar: &Grammar) -> Vec<usize> {
    let index = FirstSlotIndex::new(grammar);
    let mut counts = vec![0usize; grammar.len()];
    for (start, token) in tokens.iter().enumerate() {
        let by_pos = token.pos.and_then(|p| index.by_pos.get(&p));
        let by_word = index.by_word.get(token.form.as_str());
        for c in by_pos.into_iter().chain(by_word).flatten() {
            if match_at(c, tokens, start).is_some() {
                counts[c.id] += 1;
            }
        }
    }
    counts
}

/// Bag-of-constructions encoding: per-construction counts, L2-normalized.
pub fn extract_cxg_features<T: Scalar>(
    tokens: &[AnnotatedToken],
    sample_language: &str,
    grammar: &Grammar,
) -> Result<SparseVector<T>, GrammarError> {
    if sample_language != grammar.language {
        return Err(GrammarError::LanguageMismatch {
            grammar: grammar.language.clone(),
            sample: sample_language.to_string(),
        });
    }
    let counts = construction_counts(tokens, grammar);
    let pairs = counts
        .iter()
        .enumerate()
        .filter(|(_, &n)| n > 0)
        .map(|(i, &n)| (i, T::of_usize(n)));
    Ok(SparseVector::from_pairs(grammar.len(), pairs)
        .expect("construction ids are below grammar length")
        .normalized())
}
