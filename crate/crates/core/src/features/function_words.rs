use std::collections::HashMap;
use std::io::BufRead;

use super::FeatureError;
use crate::{Scalar, SparseVector};

/// Reads a function-word list: one form per line, `#` comments, blank lines
/// skipped. Forms are lowercased and duplicates dropped, keeping first order.
pub fn read_wordlist<R: BufRead>(reader: R) -> Result<Vec<String>, FeatureError> {
    let mut words: Vec<String> = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let w = line.trim();
        if w.is_empty() || w.starts_with('#') {
            continue;
        }
        let w = w.to_lowercase();
        if !words.contains(&w) {
            words.push(w);
        }
    }
    Ok(words)
}

/// Counts of each listed function word (case-insensitive), L2-normalized.
pub fn function_word_vector<T: Scalar, S: AsRef<str>>(
    tokens: &[S],
    wordlist: &[String],
) -> Result<SparseVector<T>, FeatureError> {
    if wordlist.is_empty() {
        return Err(FeatureError::EmptyWordlist);
    }
    let index: HashMap<&str, usize> = wordlist.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
    let mut counts = vec![0usize; wordlist.len()];
    for t in tokens {
        if let Some(&i) = index.get(t.as_ref().to_lowercase().as_str()) {
            counts[i] += 1;
        }
    }
    let pairs = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| (i, T::of_usize(c)));
    Ok(SparseVector::from_pairs(wordlist.len(), pairs)
        .expect("wordlist indices in range")
        .normalized())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn list(words: &[&str]) -> Vec<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn single_word_sample() {
        let tokens = vec!["the"; 1000];
        let v: SparseVector<f64> = function_word_vector(&tokens, &list(&["the", "of"])).unwrap();
        assert_eq!(v.to_dense(), vec![1.0, 0.0]);
    }

    #[test]
    fn counts_three_four() {
        let mut tokens = vec!["The"; 3];
        tokens.extend(["of"; 4]);
        tokens.push("cat");
        let v: SparseVector<f64> = function_word_vector(&tokens, &list(&["the", "of"])).unwrap();
        assert_eq!(v.to_dense(), vec![0.6, 0.8]);
    }

    #[test]
    fn absent_words_and_empty_list() {
        let v: SparseVector<f32> = function_word_vector(&["cat"], &list(&["the"])).unwrap();
        assert!(v.is_zero());
        assert!(matches!(
            function_word_vector::<f32, _>(&["cat"], &[]),
            Err(FeatureError::EmptyWordlist)
        ));
    }

    #[test]
    fn wordlist_file() {
        let words = read_wordlist("# en\nThe\n\nof\nthe\n".as_bytes()).unwrap();
        assert_eq!(words, list(&["the", "of"]));
    }
}
