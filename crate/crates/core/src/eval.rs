//! Scoring predicted alignments against gold pairings, corpus statistics,
//! and the human-annotation round trip.
//!
//! F1 is set-based micro precision/recall over (source, target) index
//! pairs. In the unthresholded one-pair-per-source setting this equals
//! accuracy, and it extends soundly when a threshold drops pairs.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::align::{AlignmentResult, TsvPair};
use crate::corpus::Corpus;
use crate::rng::sample_indices;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(
        "parallel files differ in length: {src_lines} source lines vs {tgt_lines} target lines"
    )]
    LineCountMismatch { src_lines: usize, tgt_lines: usize },
    #[error("{what} index {idx} is out of bounds ({bound} rows)")]
    IndexOutOfBounds {
        what: &'static str,
        idx: usize,
        bound: usize,
    },
    #[error("source {src_idx} appears in more than one gold pair")]
    DuplicateGoldSource { src_idx: usize },
    #[error("no pairs to evaluate")]
    EmptyPairs,
    #[error("source sentence {idx} has zero tokens, cannot compute a length ratio")]
    ZeroTokenSource { idx: usize },
    #[error("cannot sample {k} of {n} pairs")]
    SampleSize { k: usize, n: usize },
    #[error("invalid label {value:?} on line {line}, expected 1..=5 or blank")]
    InvalidLabel { line: usize, value: String },
    #[error("annotation file is missing its header line")]
    MissingHeader,
    #[error("io error: {0}")]
    Io(#[from] io::Error),
}

/// Known-correct pairing used for evaluation.
#[derive(Debug, Clone)]
pub struct GoldAlignment {
    pairs: BTreeMap<usize, usize>,
    pub n_src: usize,
    pub n_tgt: usize,
}

impl GoldAlignment {
    /// Line `i` pairs with line `i`, the layout of parallel files.
    pub fn identity(n: usize) -> Self {
        Self {
            pairs: (0..n).map(|i| (i, i)).collect(),
            n_src: n,
            n_tgt: n,
        }
    }

    pub fn from_pairs(
        pairs: impl IntoIterator<Item = (usize, usize)>,
        n_src: usize,
        n_tgt: usize,
    ) -> Result<Self, EvalError> {
        let mut map = BTreeMap::new();
        for (s, t) in pairs {
            if s >= n_src {
                return Err(EvalError::IndexOutOfBounds {
                    what: "gold source",
                    idx: s,
                    bound: n_src,
                });
            }
            if t >= n_tgt {
                return Err(EvalError::IndexOutOfBounds {
                    what: "gold target",
                    idx: t,
                    bound: n_tgt,
                });
            }
            if map.insert(s, t).is_some() {
                return Err(EvalError::DuplicateGoldSource { src_idx: s });
            }
        }
        Ok(Self {
            pairs: map,
            n_src,
            n_tgt,
        })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn target_of(&self, src_idx: usize) -> Option<usize> {
        self.pairs.get(&src_idx).copied()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().map(|(&s, &t)| (s, t))
    }
}

/// Build the identity gold pairing from two parallel files, erroring when
/// the line counts disagree.
pub fn load_gold_from_parallel(
    src_path: impl AsRef<Path>,
    tgt_path: impl AsRef<Path>,
) -> Result<GoldAlignment, EvalError> {
    let src_lines = count_lines(src_path.as_ref())?;
    let tgt_lines = count_lines(tgt_path.as_ref())?;
    if src_lines != tgt_lines {
        return Err(EvalError::LineCountMismatch {
            src_lines,
            tgt_lines,
        });
    }
    Ok(GoldAlignment::identity(src_lines))
}

fn count_lines(path: &Path) -> Result<usize, EvalError> {
    let file = fs::File::open(path)?;
    Ok(io::BufReader::new(file).lines().count())
}

/// Micro precision/recall/F1 over pooled index pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct F1Report {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub n_pred: usize,
    pub n_gold: usize,
    pub n_correct: usize,
}

/// Score predictions against gold: a prediction is correct when the exact
/// (source, target) pair is in the gold set.
pub fn evaluate_f1(pred: &AlignmentResult, gold: &GoldAlignment) -> Result<F1Report, EvalError> {
    let mut n_correct = 0;
    for p in &pred.pairs {
        if p.src_idx >= gold.n_src {
            return Err(EvalError::IndexOutOfBounds {
                what: "predicted source",
                idx: p.src_idx,
                bound: gold.n_src,
            });
        }
        if p.tgt_idx >= gold.n_tgt {
            return Err(EvalError::IndexOutOfBounds {
                what: "predicted target",
                idx: p.tgt_idx,
                bound: gold.n_tgt,
            });
        }
        if gold.target_of(p.src_idx) == Some(p.tgt_idx) {
            n_correct += 1;
        }
    }
    let n_pred = pred.pairs.len();
    let n_gold = gold.len();
    let precision = if n_pred == 0 {
        0.0
    } else {
        n_correct as f64 / n_pred as f64
    };
    let recall = if n_gold == 0 {
        0.0
    } else {
        n_correct as f64 / n_gold as f64
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(F1Report {
        precision,
        recall,
        f1,
        n_pred,
        n_gold,
        n_correct,
    })
}

/// Length and uniqueness statistics over mined pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairStats {
    /// Arithmetic mean over pairs of target tokens / source tokens.
    pub mean_len_ratio: f64,
    /// Distinct target indices divided by the number of pairs.
    pub unique_tgt_frac: f64,
    pub n_pairs: usize,
}

/// Compute [`PairStats`] for (source index, target index) pairs against
/// their corpora.
pub fn compute_stats(
    pairs: &[(usize, usize)],
    src: &Corpus,
    tgt: &Corpus,
) -> Result<PairStats, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::EmptyPairs);
    }
    let mut ratio_sum = 0.0;
    let mut distinct: HashSet<usize> = HashSet::new();
    for &(s, t) in pairs {
        if s >= src.len() {
            return Err(EvalError::IndexOutOfBounds {
                what: "pair source",
                idx: s,
                bound: src.len(),
            });
        }
        if t >= tgt.len() {
            return Err(EvalError::IndexOutOfBounds {
                what: "pair target",
                idx: t,
                bound: tgt.len(),
            });
        }
        let src_tokens = src.sentences[s].token_count;
        if src_tokens == 0 {
            return Err(EvalError::ZeroTokenSource { idx: s });
        }
        ratio_sum += tgt.sentences[t].token_count as f64 / src_tokens as f64;
        distinct.insert(t);
    }
    Ok(PairStats {
        mean_len_ratio: ratio_sum / pairs.len() as f64,
        unique_tgt_frac: distinct.len() as f64 / pairs.len() as f64,
        n_pairs: pairs.len(),
    })
}

/// One annotation row: a mined pair plus an optional quality label 1..=5.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationRow {
    pub pair: TsvPair,
    pub label: Option<u8>,
}

pub const ANNOTATION_HEADER: &str = "src_idx\ttgt_idx\tscore\tsrc_text\ttgt_text\tlabel";

/// Draw `k` pairs uniformly without replacement, deterministically for a
/// fixed seed, keeping the original order. Labels start blank.
pub fn sample_for_annotation(
    pairs: &[TsvPair],
    k: usize,
    seed: u64,
) -> Result<Vec<AnnotationRow>, EvalError> {
    if k == 0 || k > pairs.len() {
        return Err(EvalError::SampleSize { k, n: pairs.len() });
    }
    Ok(sample_indices(pairs.len(), k, seed)
        .into_iter()
        .map(|i| AnnotationRow {
            pair: pairs[i].clone(),
            label: None,
        })
        .collect())
}

/// Write annotation rows with the trailing label column (blank when
/// unlabeled).
pub fn write_annotation_tsv<W: Write>(rows: &[AnnotationRow], mut w: W) -> io::Result<()> {
    writeln!(w, "{ANNOTATION_HEADER}")?;
    for row in rows {
        let label = row.label.map(|l| l.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{}\t{}\t{:.6}\t{}\t{}\t{}",
            row.pair.src_idx,
            row.pair.tgt_idx,
            row.pair.score,
            row.pair.src_text,
            row.pair.tgt_text,
            label
        )?;
    }
    Ok(())
}

/// Read an annotation file back, validating labels. Blank labels are
/// allowed and reported separately by [`summarize_annotations`].
pub fn read_annotation_tsv<R: BufRead>(r: R) -> Result<Vec<AnnotationRow>, EvalError> {
    let mut lines = r.lines().enumerate();
    match lines.next() {
        Some((_, Ok(header))) if header == ANNOTATION_HEADER => {}
        Some((_, Ok(_))) | None => return Err(EvalError::MissingHeader),
        Some((_, Err(e))) => return Err(e.into()),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let line_no = i + 1;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 6 {
            return Err(EvalError::InvalidLabel {
                line: line_no,
                value: format!("row has {} fields, expected 6", fields.len()),
            });
        }
        let invalid = |value: &str| EvalError::InvalidLabel {
            line: line_no,
            value: value.to_string(),
        };
        let label = match fields[5].trim() {
            "" => None,
            text => {
                let value: u8 = text.parse().map_err(|_| invalid(text))?;
                if !(1..=5).contains(&value) {
                    return Err(invalid(text));
                }
                Some(value)
            }
        };
        rows.push(AnnotationRow {
            pair: TsvPair {
                src_idx: fields[0].parse().map_err(|_| invalid(fields[0]))?,
                tgt_idx: fields[1].parse().map_err(|_| invalid(fields[1]))?,
                score: fields[2].parse().map_err(|_| invalid(fields[2]))?,
                src_text: fields[3].to_string(),
                tgt_text: fields[4].to_string(),
            },
            label,
        });
    }
    Ok(rows)
}

/// Fraction of labeled rows per label, plus how many rows were blank.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelDistribution {
    pub fractions: BTreeMap<u8, f64>,
    pub n_labeled: usize,
    pub n_blank: usize,
}

/// Summarize filled annotations into per-label fractions over the labeled
/// rows; blank rows are counted but excluded from the denominator.
pub fn summarize_annotations(rows: &[AnnotationRow]) -> LabelDistribution {
    let mut counts: BTreeMap<u8, usize> = (1..=5).map(|l| (l, 0)).collect();
    let mut n_labeled = 0;
    let mut n_blank = 0;
    for row in rows {
        match row.label {
            Some(l) => {
                *counts.get_mut(&l).expect("labels validated on read") += 1;
                n_labeled += 1;
            }
            None => n_blank += 1,
        }
    }
    let fractions = counts
        .into_iter()
        .map(|(l, c)| {
            let f = if n_labeled == 0 {
                0.0
            } else {
                c as f64 / n_labeled as f64
            };
            (l, f)
        })
        .collect();
    LabelDistribution {
        fractions,
        n_labeled,
        n_blank,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::{AlignmentPair, AlignmentParams, Method};

    fn result_with_pairs(pairs: &[(usize, usize)], n: usize) -> AlignmentResult {
        AlignmentResult {
            pairs: pairs
                .iter()
                .map(|&(s, t)| AlignmentPair {
                    src_idx: s,
                    tgt_idx: t,
                    score: 1.0,
                    method: Method::Nn,
                })
                .collect(),
            params: AlignmentParams::default(),
            n_src: n,
            n_tgt: n,
        }
    }

    #[test]
    fn perfect_identity_prediction() {
        let pairs: Vec<(usize, usize)> = (0..10).map(|i| (i, i)).collect();
        let pred = result_with_pairs(&pairs, 10);
        let gold = GoldAlignment::identity(10);
        let report = evaluate_f1(&pred, &gold).unwrap();
        assert_eq!(report.precision, 1.0);
        assert_eq!(report.recall, 1.0);
        assert_eq!(report.f1, 1.0);
        assert_eq!(report.n_correct, 10);
    }

    #[test]
    fn seven_of_ten_correct() {
        let pairs: Vec<(usize, usize)> = (0..10)
            .map(|i| if i < 7 { (i, i) } else { (i, (i + 1) % 10) })
            .collect();
        let pred = result_with_pairs(&pairs, 10);
        let gold = GoldAlignment::identity(10);
        let report = evaluate_f1(&pred, &gold).unwrap();
        assert!((report.precision - 0.7).abs() < 1e-12);
        assert!((report.recall - 0.7).abs() < 1e-12);
        assert!((report.f1 - 0.7).abs() < 1e-9);
    }

    #[test]
    fn thresholded_seven_of_eight() {
        // A threshold dropped the two worst wrong pairs, leaving 8
        // predictions of which 7 are right.
        let pairs: Vec<(usize, usize)> = (0..7).map(|i| (i, i)).chain([(7, 8)]).collect();
        let pred = result_with_pairs(&pairs, 10);
        let gold = GoldAlignment::identity(10);
        let report = evaluate_f1(&pred, &gold).unwrap();
        assert!((report.precision - 0.875).abs() < 1e-12);
        assert!((report.recall - 0.7).abs() < 1e-12);
        assert!((report.f1 - 7.0 / 9.0).abs() < 1e-9);
    }

    #[test]
    fn empty_predictions_score_zero() {
        let pred = result_with_pairs(&[], 5);
        let gold = GoldAlignment::identity(5);
        let report = evaluate_f1(&pred, &gold).unwrap();
        assert_eq!(report.precision, 0.0);
        assert_eq!(report.f1, 0.0);
    }

    #[test]
    fn out_of_bounds_prediction_is_rejected() {
        let pred = result_with_pairs(&[(0, 12)], 10);
        let gold = GoldAlignment::identity(10);
        assert!(matches!(
            evaluate_f1(&pred, &gold),
            Err(EvalError::IndexOutOfBounds { idx: 12, .. })
        ));
    }

    #[test]
    fn gold_from_parallel_files() {
        let dir = tempfile::tempdir().unwrap();
        let src = dir.path().join("a.txt");
        let tgt = dir.path().join("b.txt");
        fs::write(&src, "one\ntwo\nthree\n").unwrap();
        fs::write(&tgt, "ena\ndio\ntria\n").unwrap();
        let gold = load_gold_from_parallel(&src, &tgt).unwrap();
        assert_eq!(gold.len(), 3);
        assert_eq!(gold.target_of(1), Some(1));

        fs::write(&tgt, "ena\ndio\n").unwrap();
        match load_gold_from_parallel(&src, &tgt) {
            Err(EvalError::LineCountMismatch {
                src_lines,
                tgt_lines,
            }) => {
                assert_eq!((src_lines, tgt_lines), (3, 2));
            }
            other => panic!("expected mismatch, got {other:?}"),
        }
    }

    #[test]
    fn gold_matches_dev_set_scale() {
        // Typical benchmark dev sets run to around a thousand lines.
        let dir = tempfile::tempdir().unwrap();
        let src = dir.path().join("dev.src");
        let tgt = dir.path().join("dev.tgt");
        let lines: String = (0..997).map(|i| format!("line {i}\n")).collect();
        fs::write(&src, &lines).unwrap();
        fs::write(&tgt, &lines).unwrap();
        let gold = load_gold_from_parallel(&src, &tgt).unwrap();
        assert_eq!(gold.len(), 997);
        assert_eq!(gold.target_of(996), Some(996));
    }

    #[test]
    fn mean_ratio_and_uniqueness() {
        let src = Corpus::from_texts("s", vec![["w"; 10].join(" "), ["w"; 10].join(" ")]);
        let tgt = Corpus::from_texts("t", vec![["w"; 12].join(" "), ["w"; 12].join(" ")]);
        let stats = compute_stats(&[(0, 0), (1, 1)], &src, &tgt).unwrap();
        assert!((stats.mean_len_ratio - 1.2).abs() < 1e-12);
        assert_eq!(stats.unique_tgt_frac, 1.0);
    }

    #[test]
    fn repeated_targets_lower_uniqueness() {
        let texts: Vec<String> = (0..8).map(|_| "a b c d e".to_string()).collect();
        let src = Corpus::from_texts("s", texts.clone());
        let tgt = Corpus::from_texts("t", texts);
        let stats = compute_stats(&[(0, 5), (1, 5), (2, 7)], &src, &tgt).unwrap();
        assert!((stats.unique_tgt_frac - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn empty_pairs_is_an_error() {
        let src = Corpus::from_texts("s", vec!["a b c".to_string()]);
        assert!(matches!(
            compute_stats(&[], &src, &src),
            Err(EvalError::EmptyPairs)
        ));
    }

    fn fake_pairs(n: usize) -> Vec<TsvPair> {
        (0..n)
            .map(|i| TsvPair {
                src_idx: i,
                tgt_idx: i,
                score: 0.5,
                src_text: format!("src {i}"),
                tgt_text: format!("tgt {i}"),
            })
            .collect()
    }

    #[test]
    fn full_sample_keeps_original_order() {
        let pairs = fake_pairs(4);
        let rows = sample_for_annotation(&pairs, 4, 42).unwrap();
        let idxs: Vec<usize> = rows.iter().map(|r| r.pair.src_idx).collect();
        assert_eq!(idxs, vec![0, 1, 2, 3]);
    }

    #[test]
    fn sampling_is_deterministic_and_distinct() {
        let pairs = fake_pairs(13_560);
        let a = sample_for_annotation(&pairs, 150, 42).unwrap();
        let b = sample_for_annotation(&pairs, 150, 42).unwrap();
        assert_eq!(a, b);
        let distinct: HashSet<usize> = a.iter().map(|r| r.pair.src_idx).collect();
        assert_eq!(distinct.len(), 150);
    }

    #[test]
    fn oversized_sample_is_rejected() {
        let pairs = fake_pairs(3);
        assert!(matches!(
            sample_for_annotation(&pairs, 4, 42),
            Err(EvalError::SampleSize { k: 4, n: 3 })
        ));
    }

    #[test]
    fn simple_label_distribution() {
        let pairs = fake_pairs(4);
        let rows: Vec<AnnotationRow> = pairs
            .into_iter()
            .zip([1u8, 1, 1, 5])
            .map(|(pair, label)| AnnotationRow {
                pair,
                label: Some(label),
            })
            .collect();
        let dist = summarize_annotations(&rows);
        assert_eq!(dist.fractions[&1], 0.75);
        assert_eq!(dist.fractions[&5], 0.25);
        assert_eq!(dist.fractions[&2], 0.0);
        assert_eq!(dist.n_labeled, 4);
        assert_eq!(dist.n_blank, 0);
    }

    #[test]
    fn invalid_label_names_its_line() {
        let mut buf = Vec::new();
        let pairs = fake_pairs(3);
        let rows: Vec<AnnotationRow> = pairs
            .into_iter()
            .zip([1u8, 6, 1])
            .map(|(pair, label)| AnnotationRow {
                pair,
                label: Some(label),
            })
            .collect();
        write_annotation_tsv(&rows, &mut buf).unwrap();
        // Label 6 sits on file line 3 (header is line 1).
        let err = read_annotation_tsv(buf.as_slice()).unwrap_err();
        match err {
            EvalError::InvalidLabel { line, value } => {
                assert_eq!(line, 3);
                assert_eq!(value, "6");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn annotation_round_trip_with_blanks() {
        let pairs = fake_pairs(3);
        let rows = vec![
            AnnotationRow {
                pair: pairs[0].clone(),
                label: Some(3),
            },
            AnnotationRow {
                pair: pairs[1].clone(),
                label: None,
            },
            AnnotationRow {
                pair: pairs[2].clone(),
                label: Some(5),
            },
        ];
        let mut buf = Vec::new();
        write_annotation_tsv(&rows, &mut buf).unwrap();
        let back = read_annotation_tsv(buf.as_slice()).unwrap();
        assert_eq!(back, rows);
        let dist = summarize_annotations(&back);
        assert_eq!(dist.n_labeled, 2);
        assert_eq!(dist.n_blank, 1);
        assert_eq!(dist.fractions[&3], 0.5);
    }
}
