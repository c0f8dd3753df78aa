//! Tokenization and n-gram enumeration.
//!
//! Words are maximal runs of letters and digits. An apostrophe or hyphen
//! stays inside a word when it sits between two word characters, so
//! `Shelley's` and `well-known` are single tokens. Every other visible
//! character becomes a one-character token. Whitespace and control
//! characters only separate. Case is preserved.

use std::fmt;

use serde::{Deserialize, Serialize};
use unicode_normalization::char::is_combining_mark;

use crate::error::{Error, Result};

/// Highest n-gram order the index supports.
pub const MAX_ORDER: usize = 5;

/// Inclusive range of accepted print years.
pub const MIN_YEAR: i32 = 1400;
pub const MAX_YEAR: i32 = 2100;

/// A single non-empty token without whitespace.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Token(String);

impl Token {
    pub fn new(text: impl Into<String>) -> Result<Self> {
        let text = text.into();
        if text.is_empty() {
            return Err(Error::Parameter("token must not be empty".into()));
        }
        if text.chars().any(is_separator) {
            return Err(Error::Parameter(format!(
                "token `{}` contains whitespace",
                text.escape_debug()
            )));
        }
        Ok(Token(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Token {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        Token::new(value)
    }
}

impl From<Token> for String {
    fn from(token: Token) -> Self {
        token.0
    }
}

impl AsRef<str> for Token {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A contiguous token sequence of order `1..=MAX_ORDER`, held in its
/// canonical form (tokens joined by a single space).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Ngram {
    text: String,
    order: usize,
}

impl Ngram {
    pub fn from_tokens<T: AsRef<str>>(tokens: &[T]) -> Result<Self> {
        check_order(tokens.len())?;
        let mut text = String::new();
        for (i, token) in tokens.iter().enumerate() {
            let token = token.as_ref();
            if token.is_empty() || token.chars().any(is_separator) {
                return Err(Error::Parameter(format!(
                    "`{}` is not a valid token",
                    token.escape_debug()
                )));
            }
            if i > 0 {
                text.push(' ');
            }
            text.push_str(token);
        }
        Ok(Ngram {
            text,
            order: tokens.len(),
        })
    }

    /// Parses the canonical form.
    pub fn parse(text: &str) -> Result<Self> {
        let tokens: Vec<&str> = text.split(' ').collect();
        Ngram::from_tokens(&tokens)
    }

    /// Builds an n-gram from arbitrary whitespace-separated text.
    pub fn from_words(text: &str) -> Result<Self> {
        let tokens: Vec<&str> = text.split(is_separator).filter(|t| !t.is_empty()).collect();
        if tokens.is_empty() {
            return Err(Error::Parameter("empty n-gram".into()));
        }
        Ngram::from_tokens(&tokens)
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.text.split(' ')
    }
}

impl TryFrom<String> for Ngram {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        Ngram::parse(&value)
    }
}

impl From<Ngram> for String {
    fn from(ngram: Ngram) -> Self {
        ngram.text
    }
}

impl fmt::Display for Ngram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// Identity and print year of one corpus volume.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentMeta {
    pub doc_id: String,
    pub title: String,
    pub year: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language: Option<String>,
}

/// One n-gram together with the token offset where it starts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NgramOccurrence {
    pub start: usize,
    pub ngram: Ngram,
}

pub(crate) fn check_order(order: usize) -> Result<()> {
    if (1..=MAX_ORDER).contains(&order) {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "order must be in 1..={MAX_ORDER}, got {order}"
        )))
    }
}

pub(crate) fn is_separator(c: char) -> bool {
    c.is_whitespace() || c.is_control()
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

fn is_joiner(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '-' | '\u{2010}' | '\u{2011}')
}

/// Splits text into tokens borrowed from the input.
pub fn tokenize_str(text: &str) -> Vec<&str> {
    let mut tokens = Vec::new();
    let mut word_start: Option<usize> = None;
    let mut chars = text.char_indices().peekable();

    while let Some((i, c)) = chars.next() {
        if let Some(start) = word_start {
            if is_word_char(c) || is_combining_mark(c) {
                continue;
            }
            if is_joiner(c) && chars.peek().is_some_and(|&(_, next)| is_word_char(next)) {
                continue;
            }
            tokens.push(&text[start..i]);
            word_start = None;
        }
        if is_separator(c) {
            continue;
        }
        if is_word_char(c) {
            word_start = Some(i);
        } else {
            tokens.push(&text[i..i + c.len_utf8()]);
        }
    }
    if let Some(start) = word_start {
        tokens.push(&text[start..]);
    }
    tokens
}

/// Splits text into owned [`Token`]s.
pub fn tokenize(text: &str) -> Vec<Token> {
    tokenize_str(text)
        .into_iter()
        .map(|t| Token(t.to_owned()))
        .collect()
}

/// Calls `f(order, start, window)` for every contiguous window of length
/// `1..=max_order`, order by order, in document order within each order.
pub(crate) fn for_each_window<'a, T, F>(tokens: &'a [T], max_order: usize, mut f: F)
where
    F: FnMut(usize, usize, &'a [T]),
{
    for order in 1..=max_order {
        if tokens.len() < order {
            break;
        }
        for (start, window) in tokens.windows(order).enumerate() {
            f(order, start, window);
        }
    }
}

/// Enumerates every n-gram of order `1..=max_order`.
pub fn extract_ngrams<T: AsRef<str>>(
    tokens: &[T],
    max_order: usize,
) -> Result<Vec<NgramOccurrence>> {
    check_order(max_order)?;
    let mut out = Vec::new();
    for_each_window(tokens, max_order, |_, start, window| {
        out.push(NgramOccurrence {
            start,
            ngram: Ngram {
                text: join(window),
                order: window.len(),
            },
        });
    });
    Ok(out)
}

pub(crate) fn join<T: AsRef<str>>(tokens: &[T]) -> String {
    let len = tokens.iter().map(|t| t.as_ref().len() + 1).sum::<usize>();
    let mut text = String::with_capacity(len);
    for (i, token) in tokens.iter().enumerate() {
        if i > 0 {
            text.push(' ');
        }
        text.push_str(token.as_ref());
    }
    text
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    /// Character-walk oracle: classify each char, then group.
    fn oracle_tokenize(text: &str) -> Vec<String> {
        let chars: Vec<char> = text.chars().collect();
        let mut out = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() || c.is_control() {
                i += 1;
            } else if c.is_alphanumeric() {
                let mut word = String::new();
                word.push(c);
                i += 1;
                loop {
                    match chars.get(i) {
                        Some(&d) if d.is_alphanumeric() || is_combining_mark(d) => {
                            word.push(d);
                            i += 1;
                        }
                        Some(&d)
                            if is_joiner(d)
                                && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric()) =>
                        {
                            word.push(d);
                            i += 1;
                        }
                        _ => break,
                    }
                }
                out.push(word);
            } else {
                out.push(c.to_string());
                i += 1;
            }
        }
        out
    }

    #[test]
    fn whitespace_split() {
        assert_eq!(tokenize_str("the cat sat"), ["the", "cat", "sat"]);
    }

    #[test]
    fn apostrophe_and_punctuation() {
        let expected = ["Shelley's", "novel", ",", "1818", "."];
        assert_eq!(tokenize_str("Shelley's novel, 1818."), expected);
        assert_eq!(oracle_tokenize("Shelley's novel, 1818."), expected);
    }

    #[test]
    fn empty_text() {
        assert!(tokenize("").is_empty());
        assert!(tokenize(" \n\t ").is_empty());
    }

    #[test]
    fn joiners_only_inside_words() {
        assert_eq!(tokenize_str("well-known"), ["well-known"]);
        assert_eq!(tokenize_str("-dash"), ["-", "dash"]);
        assert_eq!(tokenize_str("rock-"), ["rock", "-"]);
        assert_eq!(tokenize_str("a--b"), ["a", "-", "-", "b"]);
        assert_eq!(tokenize_str("'tis"), ["'", "tis"]);
        assert_eq!(tokenize_str("Frankenstein\u{2019}s"), ["Frankenstein\u{2019}s"]);
    }

    #[test]
    fn case_and_unicode_preserved() {
        assert_eq!(tokenize_str("Mésomorphes ÉTATS"), ["Mésomorphes", "ÉTATS"]);
        // e + combining acute stays in the word
        assert_eq!(tokenize_str("Me\u{301}so"), ["Me\u{301}so"]);
        assert_eq!(tokenize_str("смектик, 液晶"), ["смектик", ",", "液晶"]);
    }

    #[test]
    fn ngrams_brute_force_example() {
        let got: Vec<String> = extract_ngrams(&["a", "b", "c"], 2)
            .unwrap()
            .into_iter()
            .map(|o| o.ngram.to_string())
            .collect();
        assert_eq!(got, ["a", "b", "c", "a b", "b c"]);
    }

    #[test]
    fn ngrams_short_and_empty_input() {
        let got = extract_ngrams(&["a"], 3).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].ngram.as_str(), "a");
        assert!(extract_ngrams::<&str>(&[], 5).unwrap().is_empty());
    }

    #[test]
    fn invalid_max_order() {
        assert!(matches!(
            extract_ngrams(&["a"], 0),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            extract_ngrams(&["a"], 6),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn ngram_parse_and_validation() {
        let g = Ngram::parse("Sherlock Holmes").unwrap();
        assert_eq!(g.order(), 2);
        assert_eq!(g.tokens().collect::<Vec<_>>(), ["Sherlock", "Holmes"]);
        assert!(Ngram::parse("").is_err());
        assert!(Ngram::parse("a  b").is_err());
        assert!(Ngram::parse("a b c d e f").is_err());
        assert_eq!(Ngram::from_words("  a\tb ").unwrap().as_str(), "a b");
        assert!(Token::new("a b").is_err());
        assert!(Token::new("").is_err());
    }

    proptest! {
        #[test]
        fn tokenizer_matches_oracle(text in "[a-zA-Zé0-9 ,.'\\-’\u{301}\n!?;]{0,60}") {
            let got: Vec<String> = tokenize_str(&text).into_iter().map(str::to_owned).collect();
            prop_assert_eq!(got, oracle_tokenize(&text));
        }

        #[test]
        fn tokens_round_trip(text in "\\PC{0,40}") {
            for token in tokenize(&text) {
                prop_assert!(!token.as_str().chars().any(char::is_whitespace));
                prop_assert_eq!(tokenize(token.as_str()), vec![token.clone()]);
            }
        }

        #[test]
        fn window_counts(len in 0usize..40, max_order in 1usize..=5) {
            let tokens: Vec<String> = (0..len).map(|i| format!("t{}", i % 7)).collect();
            let grams = extract_ngrams(&tokens, max_order).unwrap();
            for n in 1..=max_order {
                let count = grams.iter().filter(|o| o.ngram.order() == n).count();
                prop_assert_eq!(count, (len + 1).saturating_sub(n));
            }
            for occ in &grams {
                let window = &tokens[occ.start..occ.start + occ.ngram.order()];
                prop_assert!(occ.ngram.tokens().eq(window.iter().map(String::as_str)));
            }
        }

        #[test]
        fn canonical_form_is_stable(words in proptest::collection::vec("[a-zA-Z0-9]{1,6}", 1..=5)) {
            let g = Ngram::from_tokens(&words).unwrap();
            prop_assert_eq!(Ngram::parse(g.as_str()).unwrap(), g.clone());
            prop_assert_eq!(tokenize_str(g.as_str()), words.iter().map(String::as_str).collect::<Vec<_>>());
        }
    }
}
