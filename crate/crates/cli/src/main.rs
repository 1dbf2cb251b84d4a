//! `embalign`: mine and evaluate parallel sentence pairs with pluggable
//! multilingual sentence embeddings.

mod commands;
mod config;
mod error;

use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use embalign_core::{Method, ProviderKind, Side};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Parser)]
#[command(
    name = "embalign",
    version,
    about = "Mine parallel sentence pairs from monolingual corpora with multilingual sentence embeddings"
)]
struct Cli {
    /// JSON run configuration; individual flags override its fields.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Embedding cache file.
    #[arg(long, global = true, value_name = "PATH")]
    cache: Option<PathBuf>,

    /// Seed driving all randomness (sampling, target shuffling).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Write the command's main output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Worker threads for alignment; defaults to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

/// Provider and rate-limit overrides shared by embedding commands.
#[derive(Args, Debug, Default)]
struct ProviderFlags {
    /// Embedding backend: remote, hash_mock or oracle.
    #[arg(long)]
    provider: Option<ProviderKind>,

    /// Remote endpoint URL.
    #[arg(long)]
    endpoint_url: Option<String>,

    /// Model identifier (also part of every cache key).
    #[arg(long)]
    model_id: Option<String>,

    /// Provider input-type tag (also part of every cache key).
    #[arg(long)]
    input_type: Option<String>,

    /// Embedding dimension.
    #[arg(long)]
    dim: Option<usize>,

    /// Environment variable holding the API credential.
    #[arg(long)]
    api_key_env: Option<String>,

    /// Target-side noise for the oracle provider.
    #[arg(long)]
    noise_sigma: Option<f64>,

    /// Seconds per rate-limit window.
    #[arg(long)]
    window_seconds: Option<f64>,

    /// Maximum texts requested per window.
    #[arg(long)]
    max_texts_per_window: Option<usize>,

    /// Texts per request chunk.
    #[arg(long)]
    chunk_size: Option<usize>,
}

/// Alignment overrides shared by align and evaluate.
#[derive(Args, Debug, Default)]
struct AlignFlags {
    /// Retrieval criterion: nn, invnn, invsoftmax or csls.
    #[arg(long)]
    method: Option<Method>,

    /// Neighborhood size for csls.
    #[arg(long)]
    csls_k: Option<usize>,

    /// Inverse temperature for invsoftmax.
    #[arg(long)]
    beta: Option<f64>,

    /// Keep only pairs scoring at least this value.
    #[arg(long)]
    threshold: Option<f64>,

    /// Source rows per processing block.
    #[arg(long)]
    block_size: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Split raw documents into a cleaned one-sentence-per-line corpus.
    Prepare {
        /// Directory of .txt files (one document each) or a single file
        /// with documents separated by blank lines.
        input: PathBuf,

        /// Language tag recorded with the corpus.
        #[arg(long, default_value = "und")]
        lang: String,

        /// Drop sentences with fewer tokens than this.
        #[arg(long, default_value_t = 5)]
        min_words: usize,

        /// Drop sentences with more tokens than this.
        #[arg(long, default_value_t = 80)]
        max_words: usize,

        /// Drop exact duplicate sentences (off by default).
        #[arg(long)]
        dedup: bool,

        /// Write the cleaning report here instead of stdout.
        #[arg(long, value_name = "PATH")]
        report: Option<PathBuf>,
    },

    /// Embed a corpus, filling the on-disk cache.
    Embed {
        /// One-sentence-per-line corpus file.
        corpus: PathBuf,

        /// Which side this corpus plays (matters for the oracle provider).
        #[arg(long, default_value = "source")]
        side: Side,

        #[command(flatten)]
        provider: ProviderFlags,
    },

    /// Align a source corpus against a target corpus and emit pair TSV.
    Align {
        /// Source corpus, one sentence per line.
        src: PathBuf,

        /// Target corpus, one sentence per line.
        tgt: PathBuf,

        #[command(flatten)]
        provider: ProviderFlags,

        #[command(flatten)]
        align: AlignFlags,
    },

    /// Score the aligner against parallel files where line i pairs with
    /// line i. Shuffles the target side with the seed before aligning.
    Evaluate {
        /// Source side of the parallel data.
        #[arg(long)]
        src: PathBuf,

        /// Target side of the parallel data.
        #[arg(long)]
        tgt: PathBuf,

        /// Score this existing pair TSV instead of running the aligner.
        #[arg(long)]
        pred: Option<PathBuf>,

        #[command(flatten)]
        provider: ProviderFlags,

        #[command(flatten)]
        align: AlignFlags,
    },

    /// Length-ratio and uniqueness statistics for mined pairs.
    Stats {
        /// Pair TSV produced by align.
        #[arg(long)]
        pairs: PathBuf,

        /// Source corpus the pair indices refer to.
        #[arg(long)]
        src_corpus: PathBuf,

        /// Target corpus the pair indices refer to.
        #[arg(long)]
        tgt_corpus: PathBuf,
    },

    /// Draw a uniform sample of pairs for human annotation.
    Sample {
        /// Pair TSV produced by align.
        #[arg(long)]
        pairs: PathBuf,

        /// Sample size.
        #[arg(short, long)]
        k: usize,
    },

    /// Summarize a filled annotation file into a label distribution.
    Report {
        /// Annotation TSV with the label column filled in.
        #[arg(long)]
        annotations: PathBuf,
    },
}

fn build_config(
    cli: &Cli,
    provider: Option<&ProviderFlags>,
    align: Option<&AlignFlags>,
) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(cache) = &cli.cache {
        cfg.cache_path = cache.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
        cfg.provider.seed = seed;
    }
    if let Some(p) = provider {
        if let Some(kind) = p.provider {
            cfg.provider.kind = kind;
        }
        if let Some(v) = &p.endpoint_url {
            cfg.provider.endpoint_url = v.clone();
        }
        if let Some(v) = &p.model_id {
            cfg.provider.model_id = v.clone();
        }
        if let Some(v) = &p.input_type {
            cfg.provider.input_type = v.clone();
        }
        if let Some(v) = p.dim {
            cfg.provider.dim = v;
        }
        if let Some(v) = &p.api_key_env {
            cfg.provider.api_key_env = v.clone();
        }
        if let Some(v) = p.noise_sigma {
            cfg.provider.noise_sigma = v;
        }
        if let Some(v) = p.window_seconds {
            cfg.rate.window_seconds = v;
        }
        if let Some(v) = p.max_texts_per_window {
            cfg.rate.max_texts_per_window = v;
        }
        if let Some(v) = p.chunk_size {
            cfg.rate.chunk_size = v;
        }
    }
    if let Some(a) = align {
        if let Some(v) = a.method {
            cfg.align.method = v;
        }
        if let Some(v) = a.csls_k {
            cfg.align.csls_k = v;
        }
        if let Some(v) = a.beta {
            cfg.align.beta = v;
        }
        if let Some(v) = a.threshold {
            cfg.align.threshold = Some(v);
        }
        if let Some(v) = a.block_size {
            cfg.align.block_size = v;
        }
    }
    cfg.rate.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Prepare {
            input,
            lang,
            min_words,
            max_words,
            dedup,
            report,
        } => commands::prepare(
            input,
            lang,
            *min_words,
            *max_words,
            *dedup,
            cli.out.as_deref(),
            report.as_deref(),
        ),
        Command::Embed {
            corpus,
            side,
            provider,
        } => {
            let cfg = build_config(cli, Some(provider), None)?;
            commands::embed(corpus, *side, &cfg, cli.out.as_deref())
        }
        Command::Align {
            src,
            tgt,
            provider,
            align,
        } => {
            let cfg = build_config(cli, Some(provider), Some(align))?;
            commands::align(src, tgt, &cfg, cli.out.as_deref())
        }
        Command::Evaluate {
            src,
            tgt,
            pred,
            provider,
            align,
        } => {
            let cfg = build_config(cli, Some(provider), Some(align))?;
            commands::evaluate(src, tgt, pred.as_deref(), &cfg, cli.out.as_deref())
        }
        Command::Stats {
            pairs,
            src_corpus,
            tgt_corpus,
        } => commands::stats(pairs, src_corpus, tgt_corpus, cli.out.as_deref()),
        Command::Sample { pairs, k } => {
            let cfg = build_config(cli, None, None)?;
            commands::sample(pairs, *k, cfg.seed, cli.out.as_deref())
        }
        Command::Report { annotations } => commands::report(annotations, cli.out.as_deref()),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: could not configure {threads} threads: {e}");
            std::process::exit(1);
        }
    }
    match run(&cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
