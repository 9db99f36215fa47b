//! Lexicon-based polarity, subjectivity and negative-word counting.
//!
//! Text-level polarity and subjectivity are the mean over tokens found in
//! the lexicon, so every comment scores within [-1, 1] and [0, 1]. Words not
//! in the lexicon contribute nothing. Negative words are counted against a
//! separate list, independent of polarity.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};

const DEFAULT_LEXICON: &str = include_str!("../data/lexicon.tsv");
const DEFAULT_NEGATIVE_WORDS: &str = include_str!("../data/negative_words.txt");

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LexiconEntry {
    pub polarity: f64,
    pub subjectivity: f64,
}

#[derive(Debug, Clone, Default)]
pub struct SentimentLexicon {
    entries: HashMap<String, LexiconEntry>,
    negative_words: HashSet<String>,
}

/// Per-text aggregate computed in one tokenization pass.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TextScore {
    pub polarity: f64,
    pub subjectivity: f64,
    pub negative_words: u64,
}

impl SentimentLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// The lexicon and negative-word list bundled with the crate.
    pub fn bundled() -> Self {
        Self::parse(DEFAULT_LEXICON, DEFAULT_NEGATIVE_WORDS).expect("bundled lexicon is valid")
    }

    pub fn insert(&mut self, word: &str, polarity: f64, subjectivity: f64) -> Result<()> {
        validate_word(word).map_err(|m| Error::Config(m.to_string()))?;
        if !(-1.0..=1.0).contains(&polarity) || !(0.0..=1.0).contains(&subjectivity) {
            return Err(Error::Config(format!(
                "lexicon entry {word:?} out of range: polarity {polarity}, subjectivity {subjectivity}"
            )));
        }
        self.entries
            .insert(word.to_string(), LexiconEntry { polarity, subjectivity });
        Ok(())
    }

    pub fn insert_negative(&mut self, word: &str) -> Result<()> {
        validate_word(word).map_err(|m| Error::Config(m.to_string()))?;
        self.negative_words.insert(word.to_string());
        Ok(())
    }

    /// Parses the TSV lexicon (`word\tpolarity\tsubjectivity`) and the
    /// one-word-per-line negative list. `#` lines and blank lines are skipped.
    pub fn parse(lexicon_tsv: &str, negative_words: &str) -> Result<Self> {
        let mut lex = SentimentLexicon::new();
        for (no, line) in content_lines(lexicon_tsv) {
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(Error::parse(
                    "lexicon",
                    no,
                    "expected word<TAB>polarity<TAB>subjectivity",
                ));
            }
            let polarity: f64 = fields[1]
                .trim()
                .parse()
                .map_err(|_| Error::parse("lexicon", no, format!("bad polarity {:?}", fields[1])))?;
            let subjectivity: f64 = fields[2]
                .trim()
                .parse()
                .map_err(|_| Error::parse("lexicon", no, format!("bad subjectivity {:?}", fields[2])))?;
            lex.insert(fields[0], polarity, subjectivity)
                .map_err(|e| Error::parse("lexicon", no, e.to_string()))?;
        }
        for (no, line) in content_lines(negative_words) {
            lex.insert_negative(line.trim())
                .map_err(|e| Error::parse("negative words", no, e.to_string()))?;
        }
        Ok(lex)
    }

    pub fn entry(&self, word: &str) -> Option<LexiconEntry> {
        self.entries.get(word).copied()
    }

    pub fn is_negative(&self, word: &str) -> bool {
        self.negative_words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = (&str, LexiconEntry)> {
        self.entries.iter().map(|(w, e)| (w.as_str(), *e))
    }

    pub fn negative_words(&self) -> impl Iterator<Item = &str> {
        self.negative_words.iter().map(String::as_str)
    }

    /// Polarity, subjectivity and negative-word count in a single pass.
    pub fn score(&self, text: &str) -> TextScore {
        let mut pol = 0.0;
        let mut subj = 0.0;
        let mut matched = 0usize;
        let mut negative = 0u64;
        let mut buf = String::new();
        for_each_token(text, &mut buf, |tok| {
            if let Some(e) = self.entries.get(tok) {
                pol += e.polarity;
                subj += e.subjectivity;
                matched += 1;
            }
            if self.negative_words.contains(tok) {
                negative += 1;
            }
        });
        if matched == 0 {
            return TextScore {
                negative_words: negative,
                ..TextScore::default()
            };
        }
        let n = matched as f64;
        TextScore {
            polarity: (pol / n).clamp(-1.0, 1.0),
            subjectivity: (subj / n).clamp(0.0, 1.0),
            negative_words: negative,
        }
    }

    pub fn polarity(&self, text: &str) -> f64 {
        self.score(text).polarity
    }

    pub fn subjectivity(&self, text: &str) -> f64 {
        self.score(text).subjectivity
    }

    pub fn negative_word_count(&self, text: &str) -> u64 {
        self.score(text).negative_words
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty())
}

fn validate_word(word: &str) -> std::result::Result<(), &'static str> {
    if word.is_empty() {
        return Err("empty word");
    }
    if word.chars().any(char::is_whitespace) {
        return Err("word contains whitespace");
    }
    if word.chars().any(|c| c.to_lowercase().ne(std::iter::once(c))) {
        return Err("word is not lowercase");
    }
    Ok(())
}

fn for_each_token(text: &str, buf: &mut String, mut f: impl FnMut(&str)) {
    buf.clear();
    for c in text.chars() {
        if c.is_alphanumeric() {
            buf.extend(c.to_lowercase());
        } else if !buf.is_empty() {
            f(buf);
            buf.clear();
        }
    }
    if !buf.is_empty() {
        f(buf);
        buf.clear();
    }
}

/// Splits on any non-alphanumeric character and lowercases each token.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut buf = String::new();
    for_each_token(text, &mut buf, |t| out.push(t.to_string()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lex() -> SentimentLexicon {
        let mut l = SentimentLexicon::new();
        l.insert("bad", -0.7, 0.6).unwrap();
        l.insert("nice", 0.5, 0.4).unwrap();
        l.insert_negative("idiot").unwrap();
        l
    }

    #[test]
    fn tokenize_rules() {
        assert_eq!(tokenize("You're SO dumb!!"), vec!["you", "re", "so", "dumb"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("a-b a"), vec!["a", "b", "a"]);
    }

    #[test]
    fn polarity_examples() {
        let l = lex();
        assert_eq!(l.polarity(""), 0.0);
        assert_eq!(l.polarity("bad bad"), -0.7);
        // matched tokens: bad, nice -> (-0.7 + 0.5) / 2
        assert!((l.polarity("bad nice day") - (-0.1)).abs() < 1e-12);
    }

    #[test]
    fn subjectivity_examples() {
        let l = lex();
        assert_eq!(l.subjectivity(""), 0.0);
        assert_eq!(l.subjectivity("bad"), 0.6);
        assert!((l.subjectivity("bad nice") - 0.5).abs() < 1e-12);
    }

    #[test]
    fn negative_counts() {
        let l = lex();
        assert_eq!(l.negative_word_count("idiot idiot"), 2);
        assert_eq!(l.negative_word_count("hello world"), 0);

        let mut l2 = SentimentLexicon::new();
        l2.insert_negative("loser").unwrap();
        l2.insert_negative("ugly").unwrap();
        let text = "you ugly little LOSER haha";
        let oracle = text
            .split_whitespace()
            .filter(|w| ["loser", "ugly"].contains(&w.to_lowercase().as_str()))
            .count() as u64;
        assert_eq!(oracle, 2);
        assert_eq!(l2.negative_word_count(text), oracle);
    }

    #[test]
    fn parse_files() {
        let l = SentimentLexicon::parse("# header\nbad\t-0.7\t0.6\n\nnice\t0.5\t0.4\n", "# neg\nidiot\n").unwrap();
        assert_eq!(l.len(), 2);
        assert!(l.is_negative("idiot"));
        assert!(SentimentLexicon::parse("bad\t-1.5\t0.6\n", "").is_err());
        assert!(SentimentLexicon::parse("bad -0.5 0.6\n", "").is_err());
        assert!(SentimentLexicon::parse("Bad\t-0.5\t0.6\n", "").is_err());
    }

    #[test]
    fn bundled_lexicon_loads() {
        let l = SentimentLexicon::bundled();
        assert!(l.len() > 20);
        assert!(l.negative_words().count() > 10);
    }

    fn arb_lexicon() -> impl Strategy<Value = SentimentLexicon> {
        prop::collection::vec(("[a-e]{1,3}", -1.0f64..=1.0, 0.0f64..=1.0, any::<bool>()), 0..12).prop_map(|rows| {
            let mut l = SentimentLexicon::new();
            for (w, p, s, neg) in rows {
                l.insert(&w, p, s).unwrap();
                if neg {
                    l.insert_negative(&w).unwrap();
                }
            }
            l
        })
    }

    proptest! {
        #[test]
        fn scores_stay_in_range(lex in arb_lexicon(), text in "[a-e ,.!]{0,60}") {
            let s = lex.score(&text);
            prop_assert!((-1.0..=1.0).contains(&s.polarity));
            prop_assert!((0.0..=1.0).contains(&s.subjectivity));
        }

        #[test]
        fn token_order_irrelevant(lex in arb_lexicon(), words in prop::collection::vec("[a-e]{1,3}", 0..15), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = words.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let a = lex.score(&words.join(" "));
            let b = lex.score(&shuffled.join(" "));
            prop_assert!((a.polarity - b.polarity).abs() < 1e-12);
            prop_assert!((a.subjectivity - b.subjectivity).abs() < 1e-12);
            prop_assert_eq!(a.negative_words, b.negative_words);
        }

        #[test]
        fn unknown_token_changes_nothing(lex in arb_lexicon(), text in "[a-e ]{0,40}") {
            let a = lex.score(&text);
            let b = lex.score(&format!("{text} zzzz"));
            prop_assert_eq!(a.polarity, b.polarity);
            prop_assert_eq!(a.subjectivity, b.subjectivity);
        }
    }
}
