//! Background n-gram statistics (n = 1..3) for novelty features.
//!
//! Counts must be accumulated from the training split only; the unseen
//! fraction of a held-out comment then measures how much of its phrasing
//! the training corpus never produced.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::TokenizedComment;

const JOIN: char = '\u{1f}';

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct NgramBackground {
    /// counts[n-1]: joined n-gram -> count.
    counts: [BTreeMap<String, u64>; 3],
    pub total: [u64; 3],
    pub vocab_size: usize,
}

impl NgramBackground {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one document's word tokens (punctuation excluded upstream).
    pub fn add_doc(&mut self, tokens: &[&str]) {
        for n in 1..=3usize {
            if tokens.len() < n {
                continue;
            }
            for gram in tokens.windows(n) {
                *self.counts[n - 1].entry(join(gram)).or_insert(0) += 1;
                self.total[n - 1] += 1;
            }
        }
        self.vocab_size = self.counts[0].len();
    }

    pub fn build<'a>(docs: impl IntoIterator<Item = Vec<&'a str>>) -> Self {
        let mut bg = Self::new();
        for doc in docs {
            bg.add_doc(&doc);
        }
        bg
    }

    pub fn contains(&self, gram: &[&str]) -> bool {
        debug_assert!((1..=3).contains(&gram.len()));
        self.counts[gram.len() - 1].contains_key(&join(gram))
    }
}

fn join(gram: &[&str]) -> String {
    gram.join(&JOIN.to_string())
}

/// Fraction of the comment's n-grams absent from the background, for
/// n = 1, 2, 3. A comment with fewer than n tokens scores 0 for that n.
pub fn unseen_fractions(tc: &TokenizedComment, bg: &NgramBackground) -> [f64; 3] {
    let tokens = tc.word_tokens();
    unseen_fractions_of(&tokens, bg)
}

pub fn unseen_fractions_of(tokens: &[&str], bg: &NgramBackground) -> [f64; 3] {
    let mut out = [0.0; 3];
    for n in 1..=3usize {
        if tokens.len() < n {
            continue;
        }
        let mut unseen = 0usize;
        let mut total = 0usize;
        for gram in tokens.windows(n) {
            total += 1;
            if !bg.contains(gram) {
                unseen += 1;
            }
        }
        out[n - 1] = unseen as f64 / total as f64;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textprep::Tokenizer;

    #[test]
    fn fully_seen_comment_scores_zero() {
        let bg = NgramBackground::build([vec!["a", "b", "c"]]);
        let fracs = unseen_fractions_of(&["a", "b", "c"], &bg);
        assert_eq!(fracs, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn invented_words_score_one() {
        let bg = NgramBackground::build([vec!["a", "b", "c"]]);
        let fracs = unseen_fractions_of(&["zz", "yy", "xx"], &bg);
        assert_eq!(fracs, [1.0, 1.0, 1.0]);
    }

    #[test]
    fn half_unseen_bigram() {
        let mut bg = NgramBackground::new();
        bg.add_doc(&["a", "b"]);
        let fracs = unseen_fractions_of(&["a", "b", "c"], &bg);
        assert!((fracs[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn short_comments_default_to_zero() {
        let bg = NgramBackground::build([vec!["a", "b", "c"]]);
        assert_eq!(unseen_fractions_of(&["a"], &bg), [0.0, 0.0, 0.0]);
        assert_eq!(unseen_fractions_of(&[], &bg), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn background_containing_the_comment_gives_zero() {
        let tok = Tokenizer::bundled();
        let texts = [
            "the cat sat on the mat",
            "why did the cat sit there?",
            "see http://cats.example and judge",
        ];
        let mut bg = NgramBackground::new();
        let tcs: Vec<_> = texts.iter().map(|t| tok.tokenize(t)).collect();
        for tc in &tcs {
            bg.add_doc(&tc.word_tokens());
        }
        for tc in &tcs {
            assert_eq!(unseen_fractions(tc, &bg), [0.0, 0.0, 0.0]);
        }
    }
}
