//! Alphabets, words and length-lexicographic word enumeration.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A word is a sequence of letter indices into an [`Alphabet`].
pub type Word = Vec<usize>;

/// Ordered list of letter names. Letter order defines the lexicographic
/// order used for enumeration and witness tie-breaking.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Alphabet {
    letters: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(letters: impl IntoIterator<Item = S>) -> Result<Self> {
        let letters: Vec<String> = letters.into_iter().map(Into::into).collect();
        for (i, l) in letters.iter().enumerate() {
            if l.is_empty() {
                return Err(Error::InvalidAutomaton("empty letter name".into()));
            }
            if letters[..i].contains(l) {
                return Err(Error::InvalidAutomaton(format!("duplicate letter `{l}`")));
            }
        }
        Ok(Alphabet { letters })
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[String] {
        &self.letters
    }

    pub fn index_of(&self, letter: &str) -> Option<usize> {
        self.letters.iter().position(|l| l == letter)
    }

    pub fn name(&self, index: usize) -> &str {
        &self.letters[index]
    }

    /// True when both alphabets contain the same letters, in any order.
    pub fn same_letters(&self, other: &Alphabet) -> bool {
        self.len() == other.len() && self.letters.iter().all(|l| other.index_of(l).is_some())
    }

    /// Index map sending each of our letters to the matching letter of `other`.
    pub fn mapping_to(&self, other: &Alphabet) -> Result<Vec<usize>> {
        if !self.same_letters(other) {
            return Err(Error::AlphabetMismatch {
                left: self.letters.clone(),
                right: other.letters.clone(),
            });
        }
        Ok(self
            .letters
            .iter()
            .map(|l| other.index_of(l).expect("checked above"))
            .collect())
    }

    fn single_char(&self) -> bool {
        self.letters.iter().all(|l| l.chars().count() == 1)
    }

    /// Parses a word. Single-character alphabets take the word as a plain
    /// string (`"abba"`); otherwise letters are separated by whitespace or
    /// commas (`"a1 a2"`). The empty string and `ε` denote the empty word.
    pub fn parse(&self, text: &str) -> Result<Word> {
        let text = text.trim();
        if text.is_empty() || text == "ε" {
            return Ok(Vec::new());
        }
        let lookup = |tok: &str| {
            self.index_of(tok)
                .ok_or_else(|| Error::UnknownLetter(tok.to_string()))
        };
        if self.single_char() && !text.contains([' ', ',']) {
            text.chars().map(|c| lookup(&c.to_string())).collect()
        } else {
            text.split([' ', ','])
                .filter(|t| !t.is_empty())
                .map(lookup)
                .collect()
        }
    }

    pub fn format(&self, word: &[usize]) -> String {
        if word.is_empty() {
            return "ε".to_string();
        }
        let sep = if self.single_char() { "" } else { " " };
        word.iter()
            .map(|&i| self.letters[i].as_str())
            .collect::<Vec<_>>()
            .join(sep)
    }

    pub fn check(&self, word: &[usize]) -> Result<()> {
        match word.iter().find(|&&i| i >= self.len()) {
            Some(&index) => Err(Error::LetterOutOfRange {
                index,
                size: self.len(),
            }),
            None => Ok(()),
        }
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.letters.join(","))
    }
}

/// Iterator over all words of length `<= max_len` over `size` letters,
/// shortest first, then lexicographically.
#[derive(Debug, Clone)]
pub struct Corpus {
    size: usize,
    max_len: usize,
    next: Option<Word>,
}

impl Iterator for Corpus {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        // odometer increment, growing the length on overflow
        let mut pos = succ.len();
        loop {
            if pos == 0 {
                if succ.len() < self.max_len && self.size > 0 {
                    succ = vec![0; succ.len() + 1];
                    self.next = Some(succ);
                }
                break;
            }
            pos -= 1;
            succ[pos] += 1;
            if succ[pos] < self.size {
                self.next = Some(succ);
                break;
            }
            succ[pos] = 0;
        }
        Some(current)
    }
}

pub fn generate_corpus(alphabet_size: usize, max_len: usize) -> Corpus {
    Corpus {
        size: alphabet_size,
        max_len,
        next: Some(Vec::new()),
    }
}

/// Number of words of length `<= max_len` over `size` letters.
pub fn corpus_size(size: usize, max_len: usize) -> usize {
    (0..=max_len).map(|k| size.pow(k as u32)).sum()
}

/// Orders words shortest first, then lexicographically.
pub fn length_lex_cmp(a: &[usize], b: &[usize]) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}
