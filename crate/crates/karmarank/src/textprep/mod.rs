//! Tokenization, sentence splitting, coarse POS tagging, heuristic entity
//! counting, and background n-gram statistics.
//!
//! The tagger is a lexicon + suffix-rule tagger over a closed set of 12
//! coarse tags; everything here is deterministic and stateless after the
//! lexicons are loaded.

mod ngrams;

pub use ngrams::{unseen_fractions, NgramBackground};

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const URL_SENTINEL: &str = "<URL>";

/// Coarse POS tag set. Pronouns are split by person because first- and
/// second-person use behaves differently in community response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PosTag {
    Det,
    Noun,
    Verb,
    Adj,
    Adv,
    Pron1,
    Pron2,
    Pron3,
    Prep,
    Conj,
    Num,
    Other,
}

impl PosTag {
    pub const ALL: [PosTag; 12] = [
        PosTag::Det,
        PosTag::Noun,
        PosTag::Verb,
        PosTag::Adj,
        PosTag::Adv,
        PosTag::Pron1,
        PosTag::Pron2,
        PosTag::Pron3,
        PosTag::Prep,
        PosTag::Conj,
        PosTag::Num,
        PosTag::Other,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PosTag::Det => "DET",
            PosTag::Noun => "NOUN",
            PosTag::Verb => "VERB",
            PosTag::Adj => "ADJ",
            PosTag::Adv => "ADV",
            PosTag::Pron1 => "PRON1",
            PosTag::Pron2 => "PRON2",
            PosTag::Pron3 => "PRON3",
            PosTag::Prep => "PREP",
            PosTag::Conj => "CONJ",
            PosTag::Num => "NUM",
            PosTag::Other => "OTHER",
        }
    }

    fn parse(s: &str) -> Option<PosTag> {
        Some(match s {
            "DET" => PosTag::Det,
            "NOUN" => PosTag::Noun,
            "VERB" => PosTag::Verb,
            "ADJ" => PosTag::Adj,
            "ADV" => PosTag::Adv,
            "PRON1" => PosTag::Pron1,
            "PRON2" => PosTag::Pron2,
            "PRON3" => PosTag::Pron3,
            "PREP" => PosTag::Prep,
            "CONJ" => PosTag::Conj,
            "NUM" => PosTag::Num,
            "OTHER" => PosTag::Other,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PunctClass {
    Period,
    Comma,
    Exclaim,
    Question,
    Quote,
    Other,
}

impl PunctClass {
    pub const ALL: [PunctClass; 6] = [
        PunctClass::Period,
        PunctClass::Comma,
        PunctClass::Exclaim,
        PunctClass::Question,
        PunctClass::Quote,
        PunctClass::Other,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PunctClass::Period => "period",
            PunctClass::Comma => "comma",
            PunctClass::Exclaim => "exclaim",
            PunctClass::Question => "question",
            PunctClass::Quote => "quote",
            PunctClass::Other => "other",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Word,
    Url,
    Punct(PunctClass),
}

/// Tokenized text with tags, sentence spans and punctuation counts.
/// `tags.len() == tokens.len()` and the sentence spans partition the
/// token list.
#[derive(Debug, Clone)]
pub struct TokenizedComment {
    pub tokens: Vec<String>,
    pub kinds: Vec<TokenKind>,
    pub tags: Vec<PosTag>,
    /// Half-open `[start, end)` token spans.
    pub sentences: Vec<(usize, usize)>,
    pub urls: usize,
    pub punct_counts: BTreeMap<PunctClass, usize>,
}

impl TokenizedComment {
    pub fn word_tokens(&self) -> Vec<&str> {
        self.tokens
            .iter()
            .zip(&self.kinds)
            .filter(|(_, k)| matches!(k, TokenKind::Word | TokenKind::Url))
            .map(|(t, _)| t.as_str())
            .collect()
    }

    pub fn sentence(&self, i: usize) -> &[String] {
        let (s, e) = self.sentences[i];
        &self.tokens[s..e]
    }
}

/// Counts per coarse tag; totals to the token count.
pub fn pos_counts(tc: &TokenizedComment) -> BTreeMap<PosTag, usize> {
    let mut counts = BTreeMap::new();
    for tag in &tc.tags {
        *counts.entry(*tag).or_insert(0) += 1;
    }
    counts
}

pub struct Tokenizer {
    stopwords: HashSet<String>,
    lexicon: HashMap<String, PosTag>,
    /// Sorted longest-suffix-first.
    suffix_rules: Vec<(String, PosTag)>,
}

impl Default for Tokenizer {
    fn default() -> Self {
        Self::bundled()
    }
}

impl Tokenizer {
    /// Tokenizer backed by the word lists shipped in the crate.
    pub fn bundled() -> Self {
        Self::from_strs(
            include_str!("../../data/stopwords.txt"),
            include_str!("../../data/pos_lexicon.txt"),
            include_str!("../../data/suffix_rules.txt"),
        )
        .expect("bundled lexicons parse")
    }

    pub fn from_files(stopwords: &Path, lexicon: &Path, suffixes: &Path) -> Result<Self> {
        Self::from_strs(
            &std::fs::read_to_string(stopwords)?,
            &std::fs::read_to_string(lexicon)?,
            &std::fs::read_to_string(suffixes)?,
        )
    }

    fn from_strs(stopwords: &str, lexicon: &str, suffixes: &str) -> Result<Self> {
        let stop = data_lines(stopwords)
            .map(|l| l.to_lowercase())
            .collect::<HashSet<_>>();
        let mut lex = HashMap::new();
        for line in data_lines(lexicon) {
            let mut parts = line.split_whitespace();
            let (Some(word), Some(tag)) = (parts.next(), parts.next()) else {
                return Err(Error::Parse(format!("bad lexicon line: {line}")));
            };
            let tag = PosTag::parse(tag)
                .ok_or_else(|| Error::Parse(format!("unknown tag in lexicon: {tag}")))?;
            lex.insert(word.to_lowercase(), tag);
        }
        let mut rules = Vec::new();
        for line in data_lines(suffixes) {
            let mut parts = line.split_whitespace();
            let (Some(suffix), Some(tag)) = (parts.next(), parts.next()) else {
                return Err(Error::Parse(format!("bad suffix line: {line}")));
            };
            let tag = PosTag::parse(tag)
                .ok_or_else(|| Error::Parse(format!("unknown tag in suffixes: {tag}")))?;
            rules.push((suffix.to_lowercase(), tag));
        }
        rules.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.0.cmp(&b.0)));
        Ok(Tokenizer {
            stopwords: stop,
            lexicon: lex,
            suffix_rules: rules,
        })
    }

    pub fn is_stopword(&self, word: &str) -> bool {
        self.stopwords.contains(word)
    }

    /// Lowercased tokens with URLs collapsed to a sentinel, punctuation
    /// kept as classified tokens, sentence spans and POS tags filled in.
    pub fn tokenize(&self, body: &str) -> TokenizedComment {
        let raw = scan(body);
        let mut tokens = Vec::with_capacity(raw.len());
        let mut kinds = Vec::with_capacity(raw.len());
        let mut urls = 0;
        let mut punct_counts = BTreeMap::new();
        for t in &raw {
            match t.kind {
                TokenKind::Url => {
                    urls += 1;
                    tokens.push(URL_SENTINEL.to_string());
                }
                TokenKind::Punct(class) => {
                    *punct_counts.entry(class).or_insert(0) += 1;
                    tokens.push(t.text.clone());
                }
                TokenKind::Word => tokens.push(t.text.to_lowercase()),
            }
            kinds.push(t.kind);
        }
        let sentences = sentence_spans(&kinds);
        let tags = tokens
            .iter()
            .zip(&kinds)
            .map(|(tok, kind)| self.tag(tok, *kind))
            .collect();
        TokenizedComment {
            tokens,
            kinds,
            tags,
            sentences,
            urls,
            punct_counts,
        }
    }

    fn tag(&self, token: &str, kind: TokenKind) -> PosTag {
        match kind {
            TokenKind::Url | TokenKind::Punct(_) => return PosTag::Other,
            TokenKind::Word => {}
        }
        if !token.is_empty() && token.chars().all(|c| c.is_ascii_digit()) {
            return PosTag::Num;
        }
        if let Some(&tag) = self.lexicon.get(token) {
            return tag;
        }
        for (suffix, tag) in &self.suffix_rules {
            if token.len() > suffix.len() + 1 && token.ends_with(suffix.as_str()) {
                return *tag;
            }
        }
        PosTag::Noun
    }

    /// Heuristic named-entity count: capitalized (not all-caps) word tokens
    /// that are neither sentence-initial nor stopwords. Needs the original
    /// casing, which `tokenize` discards.
    pub fn entity_count(&self, tc: &TokenizedComment, original_case_text: &str) -> usize {
        let raw = scan(original_case_text);
        debug_assert_eq!(raw.len(), tc.tokens.len(), "entity_count text mismatch");
        let kinds: Vec<TokenKind> = raw.iter().map(|t| t.kind).collect();
        let spans = if raw.len() == tc.tokens.len() {
            tc.sentences.clone()
        } else {
            sentence_spans(&kinds)
        };
        let mut initial = HashSet::new();
        for (s, e) in &spans {
            if let Some(i) = (*s..*e).find(|&i| kinds[i] == TokenKind::Word) {
                initial.insert(i);
            }
        }
        raw.iter()
            .enumerate()
            .filter(|(i, t)| {
                t.kind == TokenKind::Word
                    && !initial.contains(i)
                    && t.text.chars().next().is_some_and(|c| c.is_uppercase())
                    && t.text.chars().any(|c| c.is_lowercase())
                    && !self.stopwords.contains(&t.text.to_lowercase())
            })
            .count()
    }
}

pub(crate) fn data_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

struct RawToken {
    text: String,
    kind: TokenKind,
}

fn classify_punct(c: char) -> PunctClass {
    match c {
        '.' => PunctClass::Period,
        ',' => PunctClass::Comma,
        '!' => PunctClass::Exclaim,
        '?' => PunctClass::Question,
        '"' | '\'' | '`' | '\u{201c}' | '\u{201d}' | '\u{2018}' | '\u{2019}' => PunctClass::Quote,
        _ => PunctClass::Other,
    }
}

fn is_url_start(chars: &[char], i: usize) -> bool {
    let rest: String = chars[i..].iter().take(8).collect::<String>().to_lowercase();
    rest.starts_with("http://") || rest.starts_with("https://") || rest.starts_with("www.")
}

/// Case-preserving scanner shared by `tokenize` and `entity_count`;
/// identical boundaries for the same input.
fn scan(text: &str) -> Vec<RawToken> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if is_url_start(&chars, i) {
            let mut j = i;
            while j < chars.len() && !chars[j].is_whitespace() {
                j += 1;
            }
            // Trailing punctuation belongs to the sentence, not the URL.
            let mut end = j;
            while end > i + 4 && matches!(chars[end - 1], '.' | ',' | '!' | '?' | ';' | ':' | ')' | '"' | '\'') {
                end -= 1;
            }
            out.push(RawToken {
                text: chars[i..end].iter().collect(),
                kind: TokenKind::Url,
            });
            for &p in &chars[end..j] {
                out.push(RawToken {
                    text: p.to_string(),
                    kind: TokenKind::Punct(classify_punct(p)),
                });
            }
            i = j;
            continue;
        }
        if c.is_alphanumeric() {
            let mut j = i + 1;
            loop {
                while j < chars.len() && chars[j].is_alphanumeric() {
                    j += 1;
                }
                // Keep internal apostrophes/hyphens: don't, well-known.
                if j < chars.len()
                    && matches!(chars[j], '\'' | '\u{2019}' | '-' | '_')
                    && j + 1 < chars.len()
                    && chars[j + 1].is_alphanumeric()
                {
                    j += 2;
                } else {
                    break;
                }
            }
            out.push(RawToken {
                text: chars[i..j].iter().collect(),
                kind: TokenKind::Word,
            });
            i = j;
            continue;
        }
        out.push(RawToken {
            text: c.to_string(),
            kind: TokenKind::Punct(classify_punct(c)),
        });
        i += 1;
    }
    out
}

fn is_sentence_final(kind: TokenKind) -> bool {
    matches!(
        kind,
        TokenKind::Punct(PunctClass::Period)
            | TokenKind::Punct(PunctClass::Exclaim)
            | TokenKind::Punct(PunctClass::Question)
    )
}

/// A sentence ends after a maximal run of sentence-final punctuation.
fn sentence_spans(kinds: &[TokenKind]) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < kinds.len() {
        if is_sentence_final(kinds[i]) && (i + 1 == kinds.len() || !is_sentence_final(kinds[i + 1]))
        {
            spans.push((start, i + 1));
            start = i + 1;
        }
        i += 1;
    }
    if start < kinds.len() {
        spans.push((start, kinds.len()));
    }
    spans
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tok() -> Tokenizer {
        Tokenizer::bundled()
    }

    #[test]
    fn tokenize_url_and_sentences() {
        let tc = tok().tokenize("I agree. See http://x.y!");
        assert_eq!(tc.tokens, vec!["i", "agree", ".", "see", "<URL>", "!"]);
        assert_eq!(tc.urls, 1);
        assert_eq!(tc.sentences.len(), 2);
        assert_eq!(tc.sentences, vec![(0, 3), (3, 6)]);
    }

    #[test]
    fn empty_body_is_valid() {
        let tc = tok().tokenize("");
        assert_eq!(tc.tokens.len(), 0);
        assert_eq!(tc.sentences.len(), 0);
    }

    #[test]
    fn repeated_question_marks_are_counted() {
        let tc = tok().tokenize("Why???");
        assert_eq!(tc.punct_counts[&PunctClass::Question], 3);
        assert_eq!(tc.sentences.len(), 1);
    }

    #[test]
    fn pos_counts_basic() {
        let tc = tok().tokenize("the cat runs");
        let counts = pos_counts(&tc);
        assert_eq!(counts[&PosTag::Det], 1);
        assert_eq!(counts[&PosTag::Noun], 1);
        assert_eq!(counts[&PosTag::Verb], 1);
    }

    #[test]
    fn unknown_tokens_default_to_noun() {
        let tc = tok().tokenize("xyzzq blorv frump");
        assert!(tc.tags.iter().all(|t| *t == PosTag::Noun));
    }

    #[test]
    fn pronoun_subclasses() {
        let tc = tok().tokenize("i think you are wrong");
        let counts = pos_counts(&tc);
        assert_eq!(counts[&PosTag::Pron1], 1);
        assert_eq!(counts[&PosTag::Pron2], 1);
    }

    #[test]
    fn suffix_rules_fire() {
        let tc = tok().tokenize("regularization crunching smoothly");
        assert_eq!(tc.tags[0], PosTag::Noun); // -ation
        assert_eq!(tc.tags[1], PosTag::Verb); // -ing
        assert_eq!(tc.tags[2], PosTag::Adv); // -ly
    }

    #[test]
    fn entity_count_basic() {
        let t = tok();
        let text = "I met Obama in Paris.";
        let tc = t.tokenize(text);
        assert_eq!(t.entity_count(&tc, text), 2);
    }

    #[test]
    fn entity_count_lowercase_and_shouting() {
        let t = tok();
        for text in ["nothing to see here", "HELLO WORLD"] {
            let tc = t.tokenize(text);
            assert_eq!(t.entity_count(&tc, text), 0, "{text}");
        }
    }

    #[test]
    fn pos_counts_total_matches_token_count() {
        let t = tok();
        for text in [
            "The quick brown fox, jumping over 3 lazy dogs!",
            "what?? no way... see www.example.com",
            "",
            "don't stop",
        ] {
            let tc = t.tokenize(text);
            let total: usize = pos_counts(&tc).values().sum();
            assert_eq!(total, tc.tokens.len(), "{text}");
        }
    }

    #[test]
    fn sentence_spans_partition_tokens() {
        let t = tok();
        for text in [
            "One. Two! Three?",
            "no final punctuation",
            "ellipsis... then more!!",
            "?!",
        ] {
            let tc = t.tokenize(text);
            let mut covered = 0;
            for (s, e) in &tc.sentences {
                assert_eq!(*s, covered);
                assert!(e > s);
                covered = *e;
            }
            assert_eq!(covered, tc.tokens.len(), "{text}");
        }
    }

    #[test]
    fn tokenization_is_deterministic() {
        let t = tok();
        let text = "Some MIXED case text... with http://a.b/c and don't!";
        let a = t.tokenize(text);
        let b = t.tokenize(text);
        assert_eq!(a.tokens, b.tokens);
        assert_eq!(a.sentences, b.sentences);
        assert_eq!(a.tags, b.tags);
    }
}
