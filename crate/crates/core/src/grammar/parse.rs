use std::sync::Arc;

use super::{Grammar, GrammarError, GrammarVariant, SlotConstraint, Tagset};

/// Parses a grammar file.
///
/// ```text
/// @language eng
/// @variant CxG-2
/// # one construction per line, slots separated by ---
/// SYN:noun --- SEM-SYN:transfer[V] --- SEM-SYN:animate[N] --- SYN:noun
/// [SYN:noun --- LEX:"give" --- SEM-SYN:animate[N] --- LEX:"a hand"]
/// ```
///
/// `@language` is required; `@variant` defaults to CxG-2. Every tag must be
/// declared in `tagset`. Construction ids follow file order.
pub fn parse_grammar(text: &str, tagset: Arc<Tagset>) -> Result<Grammar, GrammarError> {
    let mut language = None;
    let mut variant = GrammarVariant::CxG2;
    let mut constructions = Vec::new();
    let mut first_line = 0;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |message: String| GrammarError::Parse { line: line_no, message };
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(directive) = line.strip_prefix('@') {
            let (key, value) = directive.split_once(char::is_whitespace).unwrap_or((directive, ""));
            let value = value.trim();
            match key {
                "language" if !value.is_empty() => language = Some(value.to_string()),
                "variant" => variant = value.parse().map_err(err)?,
                _ => return Err(err(format!("unknown directive {line:?}"))),
            }
            continue;
        }
        let body = match line.strip_prefix('[') {
            Some(inner) => inner
                .strip_suffix(']')
                .ok_or_else(|| err("unterminated '['".into()))?,
            None => line,
        };
        let slots = body
            .split("---")
            .map(|slot| parse_slot(slot.trim(), &tagset).map_err(&err))
            .collect::<Result<Vec<_>, _>>()?;
        if slots.len() < 2 {
            return Err(err("a construction needs at least two slots".into()));
        }
        if constructions.is_empty() {
            first_line = line_no;
        }
        constructions.push(slots);
    }

    if constructions.is_empty() {
        return Err(GrammarError::Empty);
    }
    let language = language.ok_or(GrammarError::Parse {
        line: first_line,
        message: "missing @language directive".into(),
    })?;
    Grammar::new(&language, variant, tagset, constructions)
}

fn parse_slot(slot: &str, tagset: &Tagset) -> Result<SlotConstraint, String> {
    if slot.is_empty() {
        return Err("empty slot".into());
    }
    let (kind, value) = slot
        .split_once(':')
        .ok_or_else(|| format!("slot {slot:?} has no KIND: prefix"))?;
    let value = value.trim();
    let pos = |label: &str| {
        tagset
            .pos(label)
            .ok_or_else(|| format!("undeclared part-of-speech tag {label:?}"))
    };
    match kind.trim() {
        "SYN" => Ok(SlotConstraint::Syn(pos(value)?)),
        "SEM-SYN" => {
            let (sem_label, rest) = value
                .split_once('[')
                .ok_or_else(|| format!("SEM-SYN slot {value:?} needs the form sem[pos]"))?;
            let pos_label = rest
                .strip_suffix(']')
                .ok_or_else(|| format!("SEM-SYN slot {value:?} needs the form sem[pos]"))?;
            let sem = tagset
                .sem(sem_label.trim())
                .ok_or_else(|| format!("undeclared semantic tag {:?}", sem_label.trim()))?;
            Ok(SlotConstraint::SemSyn {
                sem,
                pos: pos(pos_label.trim())?,
            })
        }
        "LEX" => {
            let literal = value
                .strip_prefix('"')
                .and_then(|v| v.strip_suffix('"'))
                .ok_or_else(|| format!("LEX literal {value:?} must be double-quoted"))?;
            let words: Vec<String> = literal.split_whitespace().map(str::to_lowercase).collect();
            if words.is_empty() {
                return Err("empty LEX literal".into());
            }
            Ok(SlotConstraint::Lex(words))
        }
        other => Err(format!("unknown slot kind {other:?}")),
    }
}
