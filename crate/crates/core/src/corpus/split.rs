//! Rule-based sentence splitting.
//!
//! A sentence boundary is a terminal mark (`.`, `!`, `?`, `…`) followed by
//! whitespace and then an uppercase letter, an opening quote, or a digit.
//! A configurable abbreviation list ("Dr.", "No.", ...) suppresses splits
//! after known abbreviations. The remainder of the text is always flushed
//! as a final sentence, so no non-whitespace character is ever dropped.

use super::normalize_whitespace;
use super::RawDocument;

/// Abbreviations that never end a sentence. Case-sensitive, dot included.
pub const DEFAULT_ABBREVIATIONS: &[&str] = &["Dr.", "Mr.", "Mrs.", "Prof.", "St.", "No.", "vs."];

fn is_terminal(c: char) -> bool {
    matches!(c, '.' | '!' | '?' | '\u{2026}')
}

fn is_opening_quote(c: char) -> bool {
    matches!(c, '"' | '\'' | '\u{2018}' | '\u{201C}' | '\u{00AB}')
}

fn is_sentence_starter(c: char) -> bool {
    c.is_uppercase() || c.is_numeric() || is_opening_quote(c)
}

/// Deterministic sentence splitter with an abbreviation guard list.
#[derive(Debug, Clone)]
pub struct SentenceSplitter {
    abbreviations: Vec<String>,
}

impl Default for SentenceSplitter {
    fn default() -> Self {
        Self::new(DEFAULT_ABBREVIATIONS.iter().map(|s| s.to_string()))
    }
}

impl SentenceSplitter {
    pub fn new(abbreviations: impl IntoIterator<Item = String>) -> Self {
        Self {
            abbreviations: abbreviations.into_iter().collect(),
        }
    }

    /// Split `text` into sentences. Whitespace runs are collapsed first,
    /// so the output never contains newlines or doubled spaces.
    pub fn split(&self, text: &str) -> Vec<String> {
        let text = normalize_whitespace(text);
        if text.is_empty() {
            return Vec::new();
        }
        let chars: Vec<char> = text.chars().collect();
        let mut sentences = Vec::new();
        let mut start = 0;
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if is_terminal(c) && !(c == '.' && self.is_guarded(&chars, start, i)) {
                // Look past the whitespace run for a sentence starter.
                let mut j = i + 1;
                while j < chars.len() && chars[j].is_whitespace() {
                    j += 1;
                }
                if j > i + 1 && j < chars.len() && is_sentence_starter(chars[j]) {
                    sentences.push(chars[start..=i].iter().collect());
                    start = j;
                    i = j;
                    continue;
                }
            }
            i += 1;
        }
        if start < chars.len() {
            let tail: String = chars[start..].iter().collect();
            let tail = tail.trim();
            if !tail.is_empty() {
                sentences.push(tail.to_string());
            }
        }
        sentences
    }

    /// Does the word ending at the dot `chars[dot]` match an abbreviation?
    fn is_guarded(&self, chars: &[char], start: usize, dot: usize) -> bool {
        let mut w = dot;
        while w > start && !chars[w - 1].is_whitespace() {
            w -= 1;
        }
        // Strip leading punctuation such as an opening parenthesis or quote.
        while w < dot && !chars[w].is_alphanumeric() {
            w += 1;
        }
        let word: String = chars[w..=dot].iter().collect();
        self.abbreviations.iter().any(|a| a == &word)
    }
}

/// Split a document into sentence strings with the default splitter.
pub fn split_sentences(doc: &RawDocument) -> Vec<String> {
    SentenceSplitter::default().split(&doc.text)
}
