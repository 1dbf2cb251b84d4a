//! Corpus ingestion and cleaning: raw documents in, one-sentence-per-line
//! corpora out.
//!
//! The pipeline is split → tokenize → length-filter. Sentences shorter than
//! `min_words` or longer than `max_words` tokens are dropped, as are empty
//! lines; everything else is kept in input order. Duplicates are kept unless
//! deduplication is explicitly requested.

pub mod split;
pub mod tokenize;

pub use split::{split_sentences, SentenceSplitter, DEFAULT_ABBREVIATIONS};
pub use tokenize::{count_words, tokenize_words};

use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One ingested document, the unit of input for sentence splitting.
#[derive(Debug, Clone)]
pub struct RawDocument {
    pub doc_id: String,
    pub text: String,
}

impl RawDocument {
    pub fn new(doc_id: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            doc_id: doc_id.into(),
            text: text.into(),
        }
    }
}

/// One corpus line: position, text, and its token count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub index: usize,
    pub text: String,
    pub token_count: usize,
}

/// Ordered, indexable monolingual sentence list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub language_tag: String,
    pub sentences: Vec<Sentence>,
}

impl Corpus {
    /// Build a corpus from raw sentence texts. Whitespace is normalized,
    /// indices are assigned contiguously, token counts are computed here.
    /// No filtering is applied; use [`clean_corpus`] for that.
    pub fn from_texts(
        language_tag: impl Into<String>,
        texts: impl IntoIterator<Item = String>,
    ) -> Self {
        let sentences = texts
            .into_iter()
            .enumerate()
            .map(|(index, raw)| {
                let text = normalize_whitespace(&raw);
                let token_count = count_words(&text);
                Sentence {
                    index,
                    text,
                    token_count,
                }
            })
            .collect();
        Self {
            language_tag: language_tag.into(),
            sentences,
        }
    }

    /// Read a one-sentence-per-line corpus file.
    pub fn from_lines_file(path: impl AsRef<Path>, language_tag: &str) -> io::Result<Self> {
        let file = fs::File::open(path)?;
        let lines: Vec<String> = BufReader::new(file).lines().collect::<io::Result<_>>()?;
        Ok(Self::from_texts(language_tag, lines))
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn text(&self, index: usize) -> &str {
        &self.sentences[index].text
    }

    /// Write the corpus one sentence per line with LF endings.
    pub fn write_sentences<W: Write>(&self, mut w: W) -> io::Result<()> {
        for s in &self.sentences {
            w.write_all(s.text.as_bytes())?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Accounting for one cleaning run. Drop reasons are exclusive, so the
/// counters always sum to `n_raw`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrepReport {
    pub n_raw: usize,
    pub n_kept: usize,
    pub n_dropped_short: usize,
    pub n_dropped_long: usize,
    pub n_dropped_empty: usize,
    /// Only non-zero when deduplication is enabled.
    pub n_dropped_duplicate: usize,
}

/// Filtering configuration for [`clean_corpus`].
#[derive(Debug, Clone)]
pub struct CleanOptions {
    pub language_tag: String,
    pub min_words: usize,
    pub max_words: usize,
    pub dedup: bool,
}

impl Default for CleanOptions {
    fn default() -> Self {
        Self {
            language_tag: "und".to_string(),
            min_words: 5,
            max_words: 80,
            dedup: false,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PrepError {
    #[error("min_words ({min}) exceeds max_words ({max})")]
    MinExceedsMax { min: usize, max: usize },
    #[error("min_words must be at least 1")]
    MinWordsZero,
}

/// Collapse internal whitespace runs to single spaces and trim the ends.
pub fn normalize_whitespace(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut pending_space = false;
    for c in s.chars() {
        if c.is_whitespace() {
            pending_space = !out.is_empty();
        } else {
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
            out.push(c);
        }
    }
    out
}

/// Length-filter raw sentence texts into a corpus plus a drop report.
///
/// Kept sentences preserve input order and satisfy
/// `min_words <= token_count <= max_words`. Each dropped sentence is
/// counted under exactly one reason.
pub fn clean_corpus(
    texts: &[String],
    opts: &CleanOptions,
) -> Result<(Corpus, PrepReport), PrepError> {
    if opts.min_words == 0 {
        return Err(PrepError::MinWordsZero);
    }
    if opts.min_words > opts.max_words {
        return Err(PrepError::MinExceedsMax {
            min: opts.min_words,
            max: opts.max_words,
        });
    }

    let mut report = PrepReport {
        n_raw: texts.len(),
        ..PrepReport::default()
    };
    let mut kept: Vec<(String, usize)> = Vec::new();
    let mut seen: std::collections::HashSet<String> = std::collections::HashSet::new();

    for raw in texts {
        let text = normalize_whitespace(raw);
        if text.is_empty() {
            report.n_dropped_empty += 1;
            continue;
        }
        let token_count = count_words(&text);
        if token_count < opts.min_words {
            report.n_dropped_short += 1;
        } else if token_count > opts.max_words {
            report.n_dropped_long += 1;
        } else if opts.dedup && !seen.insert(text.clone()) {
            report.n_dropped_duplicate += 1;
        } else {
            kept.push((text, token_count));
        }
    }

    report.n_kept = kept.len();
    let sentences = kept
        .into_iter()
        .enumerate()
        .map(|(index, (text, token_count))| Sentence {
            index,
            text,
            token_count,
        })
        .collect();
    let corpus = Corpus {
        language_tag: opts.language_tag.clone(),
        sentences,
    };
    Ok((corpus, report))
}

/// Split documents into sentences and clean the result in one pass.
/// Documents are processed in parallel, but the output keeps document
/// order and, within a document, sentence order.
pub fn prepare_documents(
    docs: &[RawDocument],
    splitter: &SentenceSplitter,
    opts: &CleanOptions,
) -> Result<(Corpus, PrepReport), PrepError> {
    let per_doc: Vec<Vec<String>> = docs
        .par_iter()
        .map(|doc| splitter.split(&doc.text))
        .collect();
    let texts: Vec<String> = per_doc.into_iter().flatten().collect();
    clean_corpus(&texts, opts)
}

/// Read documents from a directory of `.txt` files (one document per file,
/// lexicographic filename order) or from a single file in which documents
/// are separated by blank lines.
pub fn read_documents(path: impl AsRef<Path>) -> io::Result<Vec<RawDocument>> {
    let path = path.as_ref();
    let meta = fs::metadata(path)?;
    if meta.is_dir() {
        let mut entries: Vec<_> = fs::read_dir(path)?
            .collect::<io::Result<Vec<_>>>()?
            .into_iter()
            .map(|e| e.path())
            .filter(|p| p.extension().map(|e| e == "txt").unwrap_or(false))
            .collect();
        entries.sort();
        entries
            .into_iter()
            .map(|p| {
                let text = fs::read_to_string(&p)?;
                let doc_id = p
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| p.display().to_string());
                Ok(RawDocument::new(doc_id, text))
            })
            .collect()
    } else {
        let text = fs::read_to_string(path)?;
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "doc".to_string());
        let mut docs = Vec::new();
        let mut current = String::new();
        for line in text.lines() {
            if line.trim().is_empty() {
                if !current.trim().is_empty() {
                    docs.push(current.clone());
                }
                current.clear();
            } else {
                current.push_str(line);
                current.push('\n');
            }
        }
        if !current.trim().is_empty() {
            docs.push(current);
        }
        Ok(docs
            .into_iter()
            .enumerate()
            .map(|(i, text)| RawDocument::new(format!("{stem}#{i}"), text))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn owned(texts: &[&str]) -> Vec<String> {
        texts.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn short_and_empty_sentences_are_dropped() {
        let texts = owned(&["a b c d", "a b c d e", ""]);
        let (corpus, report) = clean_corpus(&texts, &CleanOptions::default()).unwrap();
        assert_eq!(corpus.len(), 1);
        assert_eq!(corpus.text(0), "a b c d e");
        assert_eq!(
            report,
            PrepReport {
                n_raw: 3,
                n_kept: 1,
                n_dropped_short: 1,
                n_dropped_long: 0,
                n_dropped_empty: 1,
                n_dropped_duplicate: 0,
            }
        );
    }

    #[test]
    fn overlong_sentence_is_dropped() {
        let long = vec!["a"; 81].join(" ");
        let (corpus, report) = clean_corpus(&[long], &CleanOptions::default()).unwrap();
        assert!(corpus.is_empty());
        assert_eq!(report.n_dropped_long, 1);
    }

    #[test]
    fn boundary_lengths_are_kept() {
        let five = ["a"; 5].join(" ");
        let eighty = vec!["a"; 80].join(" ");
        let (corpus, report) = clean_corpus(&[five, eighty], &CleanOptions::default()).unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(report.n_kept, 2);
    }

    #[test]
    fn min_exceeding_max_is_an_error() {
        let opts = CleanOptions {
            min_words: 10,
            max_words: 5,
            ..CleanOptions::default()
        };
        assert_eq!(
            clean_corpus(&[], &opts),
            Err(PrepError::MinExceedsMax { min: 10, max: 5 })
        );
    }

    #[test]
    fn cleaning_is_idempotent() {
        let texts = owned(&[
            "one two three four five",
            "a b",
            "the quick brown fox jumps over it",
        ]);
        let (first, _) = clean_corpus(&texts, &CleanOptions::default()).unwrap();
        let kept: Vec<String> = first.sentences.iter().map(|s| s.text.clone()).collect();
        let (second, report) = clean_corpus(&kept, &CleanOptions::default()).unwrap();
        assert_eq!(second.len(), first.len());
        assert_eq!(report.n_kept, report.n_raw);
    }

    #[test]
    fn duplicates_kept_by_default_dropped_with_dedup() {
        let texts = owned(&["one two three four five", "one two three four five"]);
        let (corpus, _) = clean_corpus(&texts, &CleanOptions::default()).unwrap();
        assert_eq!(corpus.len(), 2);

        let opts = CleanOptions {
            dedup: true,
            ..CleanOptions::default()
        };
        let (corpus, report) = clean_corpus(&texts, &opts).unwrap();
        assert_eq!(corpus.len(), 1);
        assert_eq!(report.n_dropped_duplicate, 1);
        assert_eq!(
            report.n_kept
                + report.n_dropped_short
                + report.n_dropped_long
                + report.n_dropped_empty
                + report.n_dropped_duplicate,
            report.n_raw
        );
    }

    #[test]
    fn indices_are_contiguous_and_ordered() {
        let texts = owned(&[
            "first sentence with five tokens",
            "x",
            "second sentence with five tokens",
        ]);
        let (corpus, _) = clean_corpus(&texts, &CleanOptions::default()).unwrap();
        assert_eq!(corpus.sentences[0].index, 0);
        assert_eq!(corpus.sentences[1].index, 1);
        assert!(corpus.text(0).starts_with("first"));
        assert!(corpus.text(1).starts_with("second"));
    }

    #[test]
    fn whitespace_normalization_is_applied() {
        let texts = owned(&["  padded\t\tsentence with   five\ntokens  "]);
        let (corpus, _) = clean_corpus(&texts, &CleanOptions::default()).unwrap();
        assert_eq!(corpus.text(0), "padded sentence with five tokens");
    }

    #[test]
    fn prepare_merges_documents_in_order() {
        let docs = vec![
            RawDocument::new("a", "First doc sentence number one. Too short."),
            RawDocument::new("b", "Second doc sentence number one here."),
        ];
        let (corpus, report) = prepare_documents(
            &docs,
            &SentenceSplitter::default(),
            &CleanOptions::default(),
        )
        .unwrap();
        assert_eq!(corpus.len(), 2);
        assert!(corpus.text(0).starts_with("First doc"));
        assert!(corpus.text(1).starts_with("Second doc"));
        assert_eq!(report.n_dropped_short, 1);
    }
}
