//! Empirical verification that a pruned index preserves scores.
//!
//! Losslessness of dominance pruning is a theorem about the clipped
//! late-interaction score, but theorems do not catch implementation bugs.
//! [`verify_lossless`] hammers each document pair with seeded uniform
//! sphere queries and reports the largest per-token score gap; any gap
//! above [`LOSSLESS_TOL`] becomes a counterexample carrying the offending
//! direction. [`rank_correlation`] compares whole-index rankings with the
//! tie-aware Kendall tau-b.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::io::CorpusIndex;
use crate::scoring::{colbert_p_score, max_clipped_dot, ScoringError};
use crate::synth::unit_vector;
use crate::types::{QueryMatrix, TokenMatrix};

/// Score gaps at or below this bound count as lossless.
pub const LOSSLESS_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("index mismatch: {detail}")]
    IndexMismatch { detail: String },
    #[error("rank correlation needs at least two documents, got {n}")]
    TooFewDocuments { n: usize },
    #[error(transparent)]
    Scoring(#[from] ScoringError),
}

/// A sampled query direction on which a pruned document lost score.
#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    pub doc_id: String,
    pub query: Vec<f64>,
    pub delta: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub docs_checked: usize,
    pub queries_per_doc: usize,
    pub max_abs_score_delta: f64,
    /// At most one per offending document: the first sampled direction
    /// whose gap exceeded [`LOSSLESS_TOL`].
    pub counterexamples: Vec<Counterexample>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kendall_tau_vs_unpruned: Option<f64>,
}

fn is_row_subsequence(pruned: &TokenMatrix, original: &TokenMatrix) -> bool {
    let mut next = 0;
    for row in pruned.rows() {
        let mut found = false;
        while next < original.n() {
            let candidate = original.row(next);
            next += 1;
            if candidate == row {
                found = true;
                break;
            }
        }
        if !found {
            return false;
        }
    }
    true
}

/// Samples `samples` uniform unit queries per document pair and measures
/// the drop in the clipped per-token maximum. Document `i` draws from
/// stream `i` of a ChaCha generator seeded with `seed`, so results do not
/// depend on thread count or evaluation order.
///
/// Structural requirements checked first: equal length, matching ids and
/// dimensions position by position, and every pruned document's rows an
/// ordered subsequence of the original's.
pub fn verify_lossless(
    original: &CorpusIndex,
    pruned: &CorpusIndex,
    samples: usize,
    seed: u64,
) -> Result<VerifyReport, VerifyError> {
    if original.len() != pruned.len() {
        return Err(VerifyError::IndexMismatch {
            detail: format!(
                "document counts differ: {} vs {}",
                original.len(),
                pruned.len()
            ),
        });
    }
    let pairs: Vec<(&TokenMatrix, &TokenMatrix)> =
        original.docs().iter().zip(pruned.docs()).collect();
    for (orig, kept) in &pairs {
        if orig.doc_id() != kept.doc_id() {
            return Err(VerifyError::IndexMismatch {
                detail: format!(
                    "doc ids differ: {} vs {}",
                    orig.doc_id(),
                    kept.doc_id()
                ),
            });
        }
        if orig.d() != kept.d() {
            return Err(VerifyError::IndexMismatch {
                detail: format!("document {}: dimensions differ", orig.doc_id()),
            });
        }
        if !is_row_subsequence(kept, orig) {
            return Err(VerifyError::IndexMismatch {
                detail: format!(
                    "document {}: pruned rows are not a subsequence of the original",
                    orig.doc_id()
                ),
            });
        }
    }

    let per_doc: Vec<(f64, Option<Counterexample>)> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, (orig, kept))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut max_delta = 0.0f64;
            let mut counterexample = None;
            for _ in 0..samples {
                let q = unit_vector(orig.d(), &mut rng);
                let delta = max_clipped_dot(&q, orig) - max_clipped_dot(&q, kept);
                if delta > max_delta {
                    max_delta = delta;
                }
                if delta > LOSSLESS_TOL && counterexample.is_none() {
                    counterexample = Some(Counterexample {
                        doc_id: orig.doc_id().to_owned(),
                        query: q,
                        delta,
                    });
                }
            }
            (max_delta, counterexample)
        })
        .collect();

    let max_abs_score_delta = per_doc.iter().fold(0.0f64, |a, (d, _)| a.max(*d));
    let counterexamples = per_doc.into_iter().filter_map(|(_, c)| c).collect();

    // With at least two documents, measure ranking agreement under one
    // probe query drawn from the stream past the per-document ones. A
    // faithful pruning gives exactly 1.0.
    let kendall_tau_vs_unpruned = match original.dim() {
        Some(d) if original.len() >= 2 => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(original.len() as u64);
            let probe = QueryMatrix::new("probe", d, unit_vector(d, &mut rng))
                .expect("unit probe row satisfies the invariants");
            Some(rank_correlation(&probe, original, pruned)?)
        }
        _ => None,
    };

    Ok(VerifyReport {
        docs_checked: original.len(),
        queries_per_doc: samples,
        max_abs_score_delta,
        counterexamples,
        kendall_tau_vs_unpruned,
    })
}

fn three_way(a: f64, b: f64) -> i8 {
    if a > b {
        1
    } else if a < b {
        -1
    } else {
        0
    }
}

/// Tie-aware Kendall rank correlation (tau-b) between two score vectors.
///
/// When one vector is entirely tied the usual denominator vanishes; this
/// implementation then returns 1.0 if both vectors induce the same weak
/// order and 0.0 otherwise.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2, "tau needs at least two items");
    let n = x.len();
    let (mut concordant, mut discordant) = (0i64, 0i64);
    let (mut ties_x, mut ties_y) = (0i64, 0i64);
    let mut same_order = true;
    for i in 0..n {
        for j in i + 1..n {
            // Three-way comparison; f64::signum maps 0.0 to 1.0 and would
            // silently miss ties.
            let dx = three_way(x[i], x[j]);
            let dy = three_way(y[i], y[j]);
            if dx != dy {
                same_order = false;
            }
            if dx == 0 {
                ties_x += 1;
            }
            if dy == 0 {
                ties_y += 1;
            }
            if dx != 0 && dy != 0 {
                if dx == dy {
                    concordant += 1;
                } else {
                    discordant += 1;
                }
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as i64;
    let denom = (((n0 - ties_x) as f64) * ((n0 - ties_y) as f64)).sqrt();
    if denom == 0.0 {
        return if same_order { 1.0 } else { 0.0 };
    }
    (concordant - discordant) as f64 / denom
}

/// Kendall tau-b between the clipped-score rankings the two indexes give
/// one query. 1.0 means the pruned index orders the corpus identically.
pub fn rank_correlation(
    query: &QueryMatrix,
    original: &CorpusIndex,
    pruned: &CorpusIndex,
) -> Result<f64, VerifyError> {
    if original.len() != pruned.len() {
        return Err(VerifyError::IndexMismatch {
            detail: format!(
                "document counts differ: {} vs {}",
                original.len(),
                pruned.len()
            ),
        });
    }
    if original.len() < 2 {
        return Err(VerifyError::TooFewDocuments { n: original.len() });
    }
    let mut orig_scores = Vec::with_capacity(original.len());
    let mut pruned_scores = Vec::with_capacity(original.len());
    for (orig, kept) in original.docs().iter().zip(pruned.docs()) {
        orig_scores.push(colbert_p_score(query, orig)?);
        pruned_scores.push(colbert_p_score(query, kept)?);
    }
    Ok(kendall_tau_b(&orig_scores, &pruned_scores))
}
