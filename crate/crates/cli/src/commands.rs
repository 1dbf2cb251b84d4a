//! Subcommand implementations. Each one wires files to the core pipeline
//! and serializes its result as JSON or TSV.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use embalign_core::align::{read_tsv, write_tsv};
use embalign_core::corpus::{prepare_documents, read_documents, CleanOptions, SentenceSplitter};
use embalign_core::embed::{build_provider, embed_corpus, embed_corpus_pair};
use embalign_core::eval::{
    compute_stats, evaluate_f1, load_gold_from_parallel, read_annotation_tsv,
    sample_for_annotation, summarize_annotations, write_annotation_tsv,
};
use embalign_core::pipeline::{check_row_correspondence, run_gold_benchmark};
use embalign_core::{AlignmentPair, AlignmentResult, Corpus, Side, SystemClock};

use crate::config::RunConfig;
use crate::error::CliError;

/// Write `content` to `out`, or to stdout when no path is given.
fn emit(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, content).map_err(|e| CliError::io(path, e))?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(content.as_bytes())
                .map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    Ok(())
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn load_corpus(path: &Path, lang: &str) -> Result<Corpus, CliError> {
    Corpus::from_lines_file(path, lang).map_err(|e| CliError::io(path, e))
}

pub fn prepare(
    input: &Path,
    lang: &str,
    min_words: usize,
    max_words: usize,
    dedup: bool,
    out: Option<&Path>,
    report_path: Option<&Path>,
) -> Result<(), CliError> {
    let out = out.ok_or_else(|| {
        CliError::Usage("prepare requires --out <PATH> for the sentence file".to_string())
    })?;
    let docs = read_documents(input).map_err(|e| CliError::io(input, e))?;
    let opts = CleanOptions {
        language_tag: lang.to_string(),
        min_words,
        max_words,
        dedup,
    };
    let (corpus, prep_report) = prepare_documents(&docs, &SentenceSplitter::default(), &opts)?;

    let mut buf = Vec::new();
    corpus
        .write_sentences(&mut buf)
        .expect("writing to memory cannot fail");
    std::fs::write(out, buf).map_err(|e| CliError::io(out, e))?;

    emit(report_path, &to_json(&prep_report))
}

pub fn embed(
    corpus_path: &Path,
    side: Side,
    cfg: &RunConfig,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let corpus = load_corpus(corpus_path, "und")?;
    let provider = build_provider(&cfg.provider, side)?;
    let clock = SystemClock::new();
    let (_, stats) = embed_corpus(
        &corpus,
        provider.as_ref(),
        &cfg.rate,
        &cfg.cache_path,
        &clock,
    )?;
    emit(out, &to_json(&stats))
}

pub fn align(
    src_path: &Path,
    tgt_path: &Path,
    cfg: &RunConfig,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let src = load_corpus(src_path, "src")?;
    let tgt = load_corpus(tgt_path, "tgt")?;
    let src_provider = build_provider(&cfg.provider, Side::Source)?;
    let tgt_provider = build_provider(&cfg.provider, Side::Target)?;
    let clock = SystemClock::new();
    let (src_m, tgt_m, _) = embed_corpus_pair(
        &src,
        &tgt,
        src_provider.as_ref(),
        tgt_provider.as_ref(),
        &cfg.rate,
        &cfg.cache_path,
        &clock,
    )?;
    check_row_correspondence("source", &src_m, &src)?;
    check_row_correspondence("target", &tgt_m, &tgt)?;
    let result = embalign_core::align::align(&src_m, &tgt_m, &cfg.align)?;

    let mut buf = Vec::new();
    write_tsv(&result, &src, &tgt, &mut buf).expect("writing to memory cannot fail");
    emit(out, &String::from_utf8(buf).expect("tsv is utf-8"))
}

pub fn evaluate(
    src_path: &Path,
    tgt_path: &Path,
    pred: Option<&Path>,
    cfg: &RunConfig,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let gold = load_gold_from_parallel(src_path, tgt_path)?;
    let report = match pred {
        Some(pred_path) => {
            let file = File::open(pred_path).map_err(|e| CliError::io(pred_path, e))?;
            let pairs = read_tsv(BufReader::new(file))?;
            let result = AlignmentResult {
                pairs: pairs
                    .iter()
                    .map(|p| AlignmentPair {
                        src_idx: p.src_idx,
                        tgt_idx: p.tgt_idx,
                        score: p.score,
                        method: cfg.align.method,
                    })
                    .collect(),
                params: cfg.align.clone(),
                n_src: gold.n_src,
                n_tgt: gold.n_tgt,
            };
            evaluate_f1(&result, &gold)?
        }
        None => {
            let src = load_corpus(src_path, "src")?;
            let tgt = load_corpus(tgt_path, "tgt")?;
            let src_provider = build_provider(&cfg.provider, Side::Source)?;
            let tgt_provider = build_provider(&cfg.provider, Side::Target)?;
            let clock = SystemClock::new();
            let outcome = run_gold_benchmark(
                &src,
                &tgt,
                src_provider.as_ref(),
                tgt_provider.as_ref(),
                &cfg.rate,
                &cfg.cache_path,
                &clock,
                &cfg.align,
                cfg.seed,
            )?;
            outcome.report
        }
    };
    emit(out, &to_json(&report))
}

pub fn stats(
    pairs_path: &Path,
    src_corpus: &Path,
    tgt_corpus: &Path,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let file = File::open(pairs_path).map_err(|e| CliError::io(pairs_path, e))?;
    let pairs = read_tsv(BufReader::new(file))?;
    let index_pairs: Vec<(usize, usize)> = pairs.iter().map(|p| (p.src_idx, p.tgt_idx)).collect();
    let src = load_corpus(src_corpus, "src")?;
    let tgt = load_corpus(tgt_corpus, "tgt")?;
    let stats = compute_stats(&index_pairs, &src, &tgt)?;
    emit(out, &to_json(&stats))
}

pub fn sample(pairs_path: &Path, k: usize, seed: u64, out: Option<&Path>) -> Result<(), CliError> {
    let file = File::open(pairs_path).map_err(|e| CliError::io(pairs_path, e))?;
    let pairs = read_tsv(BufReader::new(file))?;
    let rows = sample_for_annotation(&pairs, k, seed)?;
    let mut buf = Vec::new();
    write_annotation_tsv(&rows, &mut buf).expect("writing to memory cannot fail");
    emit(out, &String::from_utf8(buf).expect("tsv is utf-8"))
}

pub fn report(annotations: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let file = File::open(annotations).map_err(|e| CliError::io(annotations, e))?;
    let rows = read_annotation_tsv(BufReader::new(file))?;
    let dist = summarize_annotations(&rows);
    emit(out, &to_json(&dist))
}
