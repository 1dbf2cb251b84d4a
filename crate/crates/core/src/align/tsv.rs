//! TSV emission and parsing for alignment output.
//!
//! One line per pair, `src_idx\ttgt_idx\tscore\tsrc_text\ttgt_text`, with
//! a leading `#method=<m> k=<k> beta=<b> threshold=<t|none>` header and
//! scores printed with six decimal places. Texts never contain tabs or
//! newlines because corpus loading collapses whitespace.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::AlignmentResult;
use crate::corpus::Corpus;

#[derive(Debug, Error)]
pub enum TsvError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("malformed pair line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

/// One parsed alignment line.
#[derive(Debug, Clone, PartialEq)]
pub struct TsvPair {
    pub src_idx: usize,
    pub tgt_idx: usize,
    pub score: f32,
    pub src_text: String,
    pub tgt_text: String,
}

/// Write pairs with their sentence texts.
pub fn write_tsv<W: Write>(
    result: &AlignmentResult,
    src: &Corpus,
    tgt: &Corpus,
    mut w: W,
) -> io::Result<()> {
    let p = &result.params;
    let threshold = match p.threshold {
        Some(t) => t.to_string(),
        None => "none".to_string(),
    };
    writeln!(
        w,
        "#method={} k={} beta={} threshold={}",
        p.method, p.csls_k, p.beta, threshold
    )?;
    for pair in &result.pairs {
        writeln!(
            w,
            "{}\t{}\t{:.6}\t{}\t{}",
            pair.src_idx,
            pair.tgt_idx,
            pair.score,
            src.text(pair.src_idx),
            tgt.text(pair.tgt_idx)
        )?;
    }
    Ok(())
}

/// Read pairs back, skipping `#` header lines.
pub fn read_tsv<R: BufRead>(r: R) -> Result<Vec<TsvPair>, TsvError> {
    let mut pairs = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        let line_no = i + 1;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            return Err(TsvError::Malformed {
                line: line_no,
                reason: format!("expected 5 tab-separated fields, got {}", fields.len()),
            });
        }
        let parse_idx = |s: &str, what: &str| {
            s.parse::<usize>().map_err(|_| TsvError::Malformed {
                line: line_no,
                reason: format!("invalid {what} {s:?}"),
            })
        };
        pairs.push(TsvPair {
            src_idx: parse_idx(fields[0], "source index")?,
            tgt_idx: parse_idx(fields[1], "target index")?,
            score: fields[2].parse().map_err(|_| TsvError::Malformed {
                line: line_no,
                reason: format!("invalid score {:?}", fields[2]),
            })?,
            src_text: fields[3].to_string(),
            tgt_text: fields[4].to_string(),
        });
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::{AlignmentPair, AlignmentParams, Method};

    fn tiny_result() -> (AlignmentResult, Corpus, Corpus) {
        let src = Corpus::from_texts("src", vec!["first source line".to_string()]);
        let tgt = Corpus::from_texts("tgt", vec!["first target line".to_string()]);
        let result = AlignmentResult {
            pairs: vec![AlignmentPair {
                src_idx: 0,
                tgt_idx: 0,
                score: 0.987_654_3,
                method: Method::Nn,
            }],
            params: AlignmentParams::default(),
            n_src: 1,
            n_tgt: 1,
        };
        (result, src, tgt)
    }

    #[test]
    fn header_and_six_decimal_scores() {
        let (result, src, tgt) = tiny_result();
        let mut buf = Vec::new();
        write_tsv(&result, &src, &tgt, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("#method=nn k=10 beta=30 threshold=none\n"));
        assert!(text.contains("0\t0\t0.987654\tfirst source line\tfirst target line\n"));
    }

    #[test]
    fn round_trip() {
        let (result, src, tgt) = tiny_result();
        let mut buf = Vec::new();
        write_tsv(&result, &src, &tgt, &mut buf).unwrap();
        let pairs = read_tsv(buf.as_slice()).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].src_idx, 0);
        assert_eq!(pairs[0].src_text, "first source line");
    }

    #[test]
    fn malformed_line_is_reported() {
        let err = read_tsv("not\ta\tvalid\tline\n".as_bytes()).unwrap_err();
        assert!(matches!(err, TsvError::Malformed { line: 1, .. }));
    }
}
