//! Lossless token pruning for late-interaction retrieval indexes.
//!
//! Late-interaction retrieval scores a query against a document by
//! summing, over query tokens, the best dot product with the document's
//! token embeddings. Many document tokens can never win that maximum with
//! a positive value for *any* query: they are dominated by the rest of
//! the document. This crate finds those tokens exactly, by linear
//! feasibility with Farkas certificates, and removes them without
//! changing a single clipped score.
//!
//! The pipeline per document: rotate into the singular basis and truncate
//! negligible directions ([`reduce`]), run cheap structural filters and
//! then certified dominance tests with progressive removal
//! ([`dominance`]), keep the surviving original rows ([`prune`]). A
//! sampling harness ([`verify`]) and an exact two-dimensional sweep
//! oracle ([`dominance::oracle_2d`]) check the whole construction from
//! the outside; training-side regularizers that make embeddings more
//! prunable live in [`losses`].
//!
//! The library surface is demonstrated by the runnable examples:
//!
//! - `lossless_prune`: prune a synthetic corpus and verify no score moved
//! - `score_queries`: the two late-interaction score variants
//! - `lp_feasibility`: dominance linear programs and their certificates
//! - `svd_reduction`: spectra, rank selection, reconstruction error
//! - `oracle_cross_check`: LP pipeline vs exact 2D sweep
//! - `norm_prune_sweep`: the lossy norm baseline across thresholds
//! - `regularizer_losses`: loss values and gradient checks
//! - `corpus_roundtrip`: JSONL and binary index formats
//!
//! Run one with `cargo run --release --example lossless_prune`. The same
//! operations are scriptable through the thin `dprune` binary (`prune`,
//! `score`, `verify`, `stats`, `oracle2d`).

pub mod cli;
pub mod dominance;
pub mod io;
pub mod losses;
pub mod lp;
pub mod prune;
pub mod reduce;
pub mod scoring;
pub mod synth;
pub mod types;
pub mod verify;

pub use types::{
    DominancePartition, Evidence, PruneConfig, PruneReport, QueryMatrix, Strategy, TokenMatrix,
};
