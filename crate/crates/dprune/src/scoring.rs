//! Late-interaction scoring.
//!
//! Both scores sum, over query tokens, the best dot product against the
//! document's token rows. The plain variant takes the raw maximum; the
//! clipped variant ([`colbert_p_score`]) clips each contribution at zero,
//! which is the score the dominance pruner preserves exactly.

use thiserror::Error;

use crate::types::{QueryMatrix, TokenMatrix};

#[derive(Debug, Error)]
pub enum ScoringError {
    #[error("query dimension {query_d} does not match document dimension {doc_d}")]
    DimensionMismatch { query_d: usize, doc_d: usize },
    #[error("document {doc_id} has no tokens; the unclipped score is undefined")]
    EmptyDocument { doc_id: String },
    #[error("projection input collapsed to norm {norm}, at or below tolerance {tol}")]
    ZeroVector { norm: f64, tol: f64 },
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Largest dot product of `q` against the rows; `None` for an empty document.
pub(crate) fn max_dot(q: &[f64], doc: &TokenMatrix) -> Option<f64> {
    doc.rows().map(|row| dot(q, row)).fold(None, |acc, v| {
        Some(match acc {
            None => v,
            Some(a) => a.max(v),
        })
    })
}

/// Largest zero-clipped dot product of `q` against the rows. The clip makes
/// the empty document well-defined with value zero.
pub(crate) fn max_clipped_dot(q: &[f64], doc: &TokenMatrix) -> f64 {
    doc.rows().fold(0.0, |acc, row| acc.max(dot(q, row)))
}

fn check_dims(query: &QueryMatrix, doc: &TokenMatrix) -> Result<(), ScoringError> {
    if query.d() != doc.d() {
        return Err(ScoringError::DimensionMismatch {
            query_d: query.d(),
            doc_d: doc.d(),
        });
    }
    Ok(())
}

/// Sum over query tokens of the maximum dot product against document tokens.
///
/// Undefined on empty documents, because the inner maximum has no value.
pub fn colbert_score(query: &QueryMatrix, doc: &TokenMatrix) -> Result<f64, ScoringError> {
    check_dims(query, doc)?;
    if doc.is_empty() {
        return Err(ScoringError::EmptyDocument {
            doc_id: doc.doc_id().to_owned(),
        });
    }
    Ok(query
        .rows()
        .map(|q| max_dot(q, doc).expect("document verified nonempty"))
        .sum())
}

/// Sum over query tokens of the zero-clipped maximum dot product.
///
/// Equivalent formulations `max_d [q.d]+` and `[max_d q.d]+` agree because
/// the clip is monotone; the implementation folds the clip into the running
/// maximum. Empty documents score zero.
pub fn colbert_p_score(query: &QueryMatrix, doc: &TokenMatrix) -> Result<f64, ScoringError> {
    check_dims(query, doc)?;
    Ok(query.rows().map(|q| max_clipped_dot(q, doc)).sum())
}

/// Projection head applied to one encoder hidden state.
///
/// Stacks `w1 * hidden` on top of `w2 * hidden`, L2-normalizes the stacked
/// vector, and returns its first `w1.len()` components. The returned slice
/// of a unit vector has norm at most one, with equality exactly when the
/// `w2` half vanished.
pub fn project(
    hidden: &[f64],
    w1: &[Vec<f64>],
    w2: &[Vec<f64>],
    tol: f64,
) -> Result<Vec<f64>, ScoringError> {
    let h = hidden.len();
    for row in w1.iter().chain(w2) {
        if row.len() != h {
            return Err(ScoringError::DimensionMismatch {
                query_d: row.len(),
                doc_d: h,
            });
        }
    }
    let mut stacked: Vec<f64> = w1
        .iter()
        .chain(w2)
        .map(|row| dot(row, hidden))
        .collect();
    let norm = stacked.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm <= tol {
        return Err(ScoringError::ZeroVector { norm, tol });
    }
    for v in &mut stacked {
        *v /= norm;
    }
    stacked.truncate(w1.len());
    Ok(stacked)
}
