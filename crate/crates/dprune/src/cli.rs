//! Command line front end.
//!
//! Five subcommands: `prune` rewrites an index under a strategy, `score`
//! ranks documents per query, `verify` samples queries against an
//! original/pruned pair, `stats` summarizes an index, and `oracle2d`
//! prints exact sweep partitions for two-dimensional indexes. Exit codes:
//! 0 success, 1 data or verification failure, 2 usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::dominance::{oracle_2d, DominanceError};
use crate::io::{
    read_corpus_auto, read_queries_jsonl, write_index, CorpusIndex, IoError,
};
use crate::prune::{prune_corpus, PruneError};
use crate::scoring::{colbert_p_score, colbert_score, ScoringError};
use crate::types::{PruneConfig, Strategy};
use crate::verify::{verify_lossless, VerifyError};

#[derive(Parser)]
#[command(
    name = "dprune",
    version,
    about = "Dominance-based token pruning for late-interaction retrieval indexes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrategyArg {
    /// Lossless dominance pruning through linear feasibility.
    Lp,
    /// Drop tokens with embedding norm below the threshold (lossy).
    Norm,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum VariantArg {
    /// Clipped late-interaction score (pruning-safe).
    #[default]
    Clipped,
    /// Unclipped late-interaction score.
    Plain,
}

#[derive(Subcommand)]
enum Command {
    /// Prune an index and write the result as a binary index.
    Prune {
        /// Input index (binary or JSONL, auto-detected).
        #[arg(long = "in")]
        input: PathBuf,
        /// Output path for the pruned binary index.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        strategy: StrategyArg,
        /// Spectral mass to keep (lp, in (0, 1]) or norm threshold
        /// (norm, in [0, 1]).
        #[arg(long)]
        theta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Rank every document for each query.
    Score {
        #[arg(long)]
        index: PathBuf,
        /// Queries as JSONL: {"query_id": ..., "vectors": [[...], ...]}.
        #[arg(long)]
        queries: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        variant: VariantArg,
    },
    /// Sample queries against an original/pruned pair; exits 0 only if no
    /// counterexample is found.
    Verify {
        #[arg(long)]
        original: PathBuf,
        #[arg(long)]
        pruned: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print token and norm statistics for an index.
    Stats {
        #[arg(long)]
        index: PathBuf,
        /// Unpruned index to compute the remaining-token ratio against.
        #[arg(long)]
        original: Option<PathBuf>,
    },
    /// Exact dominance partitions for a two-dimensional index.
    Oracle2d {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

enum CliError {
    Usage(String),
    Data(String),
}

macro_rules! from_data_error {
    ($($ty:ty),*) => {$(
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Data(e.to_string())
            }
        }
    )*};
}
from_data_error!(IoError, PruneError, VerifyError, ScoringError, DominanceError, std::io::Error);

/// Runs the CLI against `args` (including the program name), writing
/// reports to `out`. Returns the process exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version land here too; clap knows their exit codes.
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Prune {
            input,
            out: out_path,
            strategy,
            theta,
            seed,
        } => {
            let cfg = match strategy {
                StrategyArg::Lp => PruneConfig {
                    strategy: Strategy::Lp,
                    theta_lp: theta,
                    rng_seed: seed,
                    ..PruneConfig::default()
                },
                StrategyArg::Norm => PruneConfig {
                    strategy: Strategy::Norm,
                    theta_n: theta,
                    rng_seed: seed,
                    ..PruneConfig::default()
                },
            };
            cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
            let index = read_corpus_auto(&input)?;
            let (pruned, report) = prune_corpus(&index, &cfg)?;
            write_index(&pruned, &out_path)?;
            serde_json::to_writer(&mut *out, &report).map_err(std::io::Error::from)?;
            writeln!(out)?;
            Ok(0)
        }
        Command::Score {
            index,
            queries,
            variant,
        } => {
            let index = read_corpus_auto(&index)?;
            let queries = read_queries_jsonl(&queries)?;
            #[derive(Serialize)]
            struct Entry<'a> {
                doc_id: &'a str,
                score: f64,
            }
            #[derive(Serialize)]
            struct Ranking<'a> {
                query_id: &'a str,
                ranking: Vec<Entry<'a>>,
            }
            for q in &queries {
                let mut entries = Vec::with_capacity(index.len());
                for doc in index.docs() {
                    let score = match variant {
                        VariantArg::Clipped => colbert_p_score(q, doc)?,
                        VariantArg::Plain => colbert_score(q, doc)?,
                    };
                    entries.push(Entry {
                        doc_id: doc.doc_id(),
                        score,
                    });
                }
                // Stable sort: ties keep corpus order, making output
                // deterministic.
                entries.sort_by(|a, b| b.score.partial_cmp(&a.score).expect("finite scores"));
                let line = Ranking {
                    query_id: q.query_id(),
                    ranking: entries,
                };
                serde_json::to_writer(&mut *out, &line).map_err(std::io::Error::from)?;
                writeln!(out)?;
            }
            Ok(0)
        }
        Command::Verify {
            original,
            pruned,
            samples,
            seed,
        } => {
            let original = read_corpus_auto(&original)?;
            let pruned = read_corpus_auto(&pruned)?;
            let report = verify_lossless(&original, &pruned, samples, seed)?;
            let clean = report.counterexamples.is_empty();
            serde_json::to_writer(&mut *out, &report).map_err(std::io::Error::from)?;
            writeln!(out)?;
            Ok(if clean { 0 } else { 1 })
        }
        Command::Stats { index, original } => {
            let index = read_corpus_auto(&index)?;
            let stats = corpus_stats(&index, original.as_deref().map(read_corpus_auto).transpose()?.as_ref());
            serde_json::to_writer(&mut *out, &stats).map_err(std::io::Error::from)?;
            writeln!(out)?;
            Ok(0)
        }
        Command::Oracle2d { input } => {
            let index = read_corpus_auto(&input)?;
            for doc in index.docs() {
                let partition = oracle_2d(doc)?;
                serde_json::to_writer(&mut *out, &partition).map_err(std::io::Error::from)?;
                writeln!(out)?;
            }
            Ok(0)
        }
    }
}

#[derive(Serialize)]
struct CorpusStats {
    docs: usize,
    dim: Option<usize>,
    total_tokens: usize,
    min_tokens: usize,
    max_tokens: usize,
    mean_tokens: f64,
    /// Row-norm histogram over ten equal bins spanning [0, 1]; the last
    /// bin also absorbs the norm slack above 1.
    norm_histogram: [usize; 10],
    #[serde(skip_serializing_if = "Option::is_none")]
    remaining_ratio: Option<f64>,
}

fn corpus_stats(index: &CorpusIndex, original: Option<&CorpusIndex>) -> CorpusStats {
    let counts: Vec<usize> = index.docs().iter().map(|d| d.n()).collect();
    let total: usize = counts.iter().sum();
    let mut histogram = [0usize; 10];
    for doc in index.docs() {
        for i in 0..doc.n() {
            let bin = ((doc.row_norm(i) * 10.0) as usize).min(9);
            histogram[bin] += 1;
        }
    }
    CorpusStats {
        docs: index.len(),
        dim: index.dim(),
        total_tokens: total,
        min_tokens: counts.iter().copied().min().unwrap_or(0),
        max_tokens: counts.iter().copied().max().unwrap_or(0),
        mean_tokens: if counts.is_empty() {
            0.0
        } else {
            total as f64 / counts.len() as f64
        },
        norm_histogram: histogram,
        remaining_ratio: original.and_then(|orig| {
            let before = orig.total_tokens();
            (before > 0).then(|| total as f64 / before as f64)
        }),
    }
}
