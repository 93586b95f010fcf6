//! Core domain types shared by every stage of the pruning pipeline.
//!
//! All vector data is stored row-major in `f64`. Token embeddings come out
//! of an L2-normalizing projection head, so row norms are at most one; a
//! small slack ([`NORM_SLACK`]) absorbs the rounding introduced when rows
//! pass through the `f32` on-disk format.

use serde::Serialize;
use thiserror::Error;

/// Slack above 1.0 tolerated on embedding row norms.
pub const NORM_SLACK: f64 = 1e-6;

/// Default feasibility tolerance for the dominance linear programs.
pub const DEFAULT_LP_FEAS_TOL: f64 = 1e-9;

/// Default convergence tolerance for the Jacobi singular value decomposition.
pub const DEFAULT_SVD_TOL: f64 = 1e-12;

/// Componentwise tolerance under which two token rows collapse as exact
/// duplicates before any dominance test runs.
pub const DUPLICATE_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("document {doc_id}: non-finite entry at row {row}, column {col}")]
    NonFiniteEntry {
        doc_id: String,
        row: usize,
        col: usize,
    },
    #[error("document {doc_id}: row {row} has norm {norm}, above 1 + 1e-6")]
    NormExceedsUnit {
        doc_id: String,
        row: usize,
        norm: f64,
    },
    #[error("document {doc_id}: {detail}")]
    ShapeMismatch { doc_id: String, detail: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

fn check_rows(doc_id: &str, dim: usize, data: &[f64]) -> Result<(), CoreError> {
    if dim == 0 {
        return Err(CoreError::ShapeMismatch {
            doc_id: doc_id.to_owned(),
            detail: "embedding dimension must be at least 1".to_owned(),
        });
    }
    if !data.len().is_multiple_of(dim) {
        return Err(CoreError::ShapeMismatch {
            doc_id: doc_id.to_owned(),
            detail: format!("{} values do not fill rows of width {dim}", data.len()),
        });
    }
    for (i, row) in data.chunks_exact(dim).enumerate() {
        let mut sq = 0.0;
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(CoreError::NonFiniteEntry {
                    doc_id: doc_id.to_owned(),
                    row: i,
                    col: j,
                });
            }
            sq += v * v;
        }
        let norm = sq.sqrt();
        if norm > 1.0 + NORM_SLACK {
            return Err(CoreError::NormExceedsUnit {
                doc_id: doc_id.to_owned(),
                row: i,
                norm,
            });
        }
    }
    Ok(())
}

/// Document token embeddings: `n` rows of dimension `d`, one row per token.
///
/// Invariants, enforced at construction: `d >= 1`, every entry finite, every
/// row norm at most `1 + NORM_SLACK`. `n = 0` (an empty document) is legal.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenMatrix {
    doc_id: String,
    data: Vec<f64>,
    n: usize,
    d: usize,
}

impl TokenMatrix {
    /// Builds a matrix from `n * d` row-major values.
    pub fn new(
        doc_id: impl Into<String>,
        d: usize,
        data: Vec<f64>,
    ) -> Result<Self, CoreError> {
        let doc_id = doc_id.into();
        check_rows(&doc_id, d, &data)?;
        let n = data.len() / d;
        Ok(Self { doc_id, data, n, d })
    }

    /// Builds a matrix from explicit rows. Rejects an empty row list because
    /// the dimension would be unknowable; use [`TokenMatrix::empty`] instead.
    pub fn from_rows(
        doc_id: impl Into<String>,
        rows: &[Vec<f64>],
    ) -> Result<Self, CoreError> {
        let doc_id = doc_id.into();
        let Some(first) = rows.first() else {
            return Err(CoreError::ShapeMismatch {
                doc_id,
                detail: "cannot infer dimension from zero rows".to_owned(),
            });
        };
        let d = first.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(CoreError::ShapeMismatch {
                    doc_id,
                    detail: format!("row {i} has width {}, expected {d}", row.len()),
                });
            }
        }
        let data: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(doc_id, d, data)
    }

    /// An empty document of the stated dimension.
    pub fn empty(doc_id: impl Into<String>, d: usize) -> Result<Self, CoreError> {
        Self::new(doc_id, d, Vec::new())
    }

    /// Constructor for internally derived rows: row subsets, and numeric
    /// probes that may transiently exceed the norm slack (finite
    /// differences near the unit sphere). Shape is still checked; callers
    /// guarantee finite entries.
    pub(crate) fn from_validated(doc_id: String, d: usize, data: Vec<f64>) -> Self {
        debug_assert!(d >= 1 && data.len().is_multiple_of(d));
        let n = data.len() / d;
        Self { doc_id, data, n, d }
    }

    pub fn doc_id(&self) -> &str {
        &self.doc_id
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.d.max(1))
    }

    /// Euclidean norm of row `i`.
    pub fn row_norm(&self, i: usize) -> f64 {
        self.row(i).iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// New matrix keeping only the listed rows, in the given order.
    pub fn select_rows(&self, keep: &[usize]) -> TokenMatrix {
        let mut data = Vec::with_capacity(keep.len() * self.d);
        for &i in keep {
            data.extend_from_slice(self.row(i));
        }
        TokenMatrix::from_validated(self.doc_id.clone(), self.d, data)
    }
}

/// Query token embeddings: `m >= 1` rows of dimension `d`, same norm
/// invariants as [`TokenMatrix`].
#[derive(Debug, Clone, PartialEq)]
pub struct QueryMatrix {
    query_id: String,
    data: Vec<f64>,
    m: usize,
    d: usize,
}

impl QueryMatrix {
    pub fn new(
        query_id: impl Into<String>,
        d: usize,
        data: Vec<f64>,
    ) -> Result<Self, CoreError> {
        let query_id = query_id.into();
        check_rows(&query_id, d, &data)?;
        if data.is_empty() {
            return Err(CoreError::ShapeMismatch {
                doc_id: query_id,
                detail: "a query needs at least one token".to_owned(),
            });
        }
        let m = data.len() / d;
        Ok(Self {
            query_id,
            data,
            m,
            d,
        })
    }

    pub fn from_rows(
        query_id: impl Into<String>,
        rows: &[Vec<f64>],
    ) -> Result<Self, CoreError> {
        let query_id = query_id.into();
        let d = rows.first().map_or(0, |r| r.len());
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(CoreError::ShapeMismatch {
                    doc_id: query_id,
                    detail: format!("row {i} has width {}, expected {d}", row.len()),
                });
            }
        }
        let data: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(query_id, d, data)
    }

    pub fn query_id(&self) -> &str {
        &self.query_id
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.d)
    }
}

/// Re-checks every [`TokenMatrix`] invariant and hands the matrix back.
/// Idempotent; useful after deserialization paths that bypass constructors.
pub fn validate_token_matrix(m: TokenMatrix) -> Result<TokenMatrix, CoreError> {
    check_rows(m.doc_id(), m.d(), m.as_slice())?;
    Ok(m)
}

/// Token pruning strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Dominance pruning through linear feasibility; lossless for the
    /// positive-clipped late-interaction score at `theta_lp = 1.0`.
    Lp,
    /// Drop tokens whose embedding norm falls below `theta_n`; lossy.
    Norm,
}

/// Knobs for corpus pruning. Ranges are enforced by [`PruneConfig::validate`]:
/// `theta_lp` in (0, 1], `theta_n` in [0, 1], both tolerances positive.
#[derive(Debug, Clone, Serialize)]
pub struct PruneConfig {
    pub strategy: Strategy,
    /// Spectral mass that the rank-reduced document must cover before the
    /// dominance tests run on it.
    pub theta_lp: f64,
    /// Norm threshold for [`Strategy::Norm`]; rows with norm strictly below
    /// it are pruned.
    pub theta_n: f64,
    pub lp_feas_tol: f64,
    pub svd_tol: f64,
    pub rng_seed: u64,
}

impl Default for PruneConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::Lp,
            theta_lp: 1.0,
            theta_n: 0.0,
            lp_feas_tol: DEFAULT_LP_FEAS_TOL,
            svd_tol: DEFAULT_SVD_TOL,
            rng_seed: 0,
        }
    }
}

impl PruneConfig {
    pub fn validate(&self) -> Result<(), CoreError> {
        if !(self.theta_lp > 0.0 && self.theta_lp <= 1.0) {
            return Err(CoreError::InvalidConfig(format!(
                "theta_lp = {} outside (0, 1]",
                self.theta_lp
            )));
        }
        if !(self.theta_n >= 0.0 && self.theta_n <= 1.0) {
            return Err(CoreError::InvalidConfig(format!(
                "theta_n = {} outside [0, 1]",
                self.theta_n
            )));
        }
        if !(self.lp_feas_tol > 0.0 && self.lp_feas_tol.is_finite()) {
            return Err(CoreError::InvalidConfig(format!(
                "lp_feas_tol = {} must be a positive finite number",
                self.lp_feas_tol
            )));
        }
        if !(self.svd_tol > 0.0 && self.svd_tol.is_finite()) {
            return Err(CoreError::InvalidConfig(format!(
                "svd_tol = {} must be a positive finite number",
                self.svd_tol
            )));
        }
        Ok(())
    }
}

/// Why a token row was kept or pruned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Evidence {
    /// Kept: the row maximizes the dot product with itself over the whole
    /// document, so it wins at least the query direction equal to itself.
    SelfMatch,
    /// Kept: the dominance linear program admits no nonnegative combination,
    /// certified by a separating dual vector.
    LpInfeasible,
    /// Pruned: a nonnegative-combination witness proves the row can never be
    /// the strict positive maximizer.
    LpFeasible,
    /// Pruned: the row is (numerically) the zero vector and can never score
    /// above the clip.
    ZeroVector,
    /// Pruned: an exact componentwise duplicate of a lower-indexed row.
    Duplicate,
    /// Pruned by the norm strategy: row norm strictly below `theta_n`.
    NormBelowThreshold,
    /// Kept by the norm strategy: row norm at or above `theta_n`.
    NormKept,
}

impl Evidence {
    /// True when the tag marks a row that stays in the document.
    pub fn is_kept(self) -> bool {
        matches!(
            self,
            Evidence::SelfMatch | Evidence::LpInfeasible | Evidence::NormKept
        )
    }
}

/// Outcome of partitioning one document into kept and pruned token rows.
///
/// `kept` and `pruned` are disjoint, sorted ascending, and together cover
/// `0..evidence.len()`; membership agrees with the per-row evidence tag.
/// These invariants hold by construction via [`DominancePartition::from_evidence`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominancePartition {
    pub doc_id: String,
    pub kept: Vec<usize>,
    pub pruned: Vec<usize>,
    pub evidence: Vec<Evidence>,
}

impl DominancePartition {
    /// Derives the index sets from per-row evidence, which makes the
    /// disjointness and coverage invariants structural.
    pub fn from_evidence(doc_id: impl Into<String>, evidence: Vec<Evidence>) -> Self {
        let mut kept = Vec::new();
        let mut pruned = Vec::new();
        for (i, tag) in evidence.iter().enumerate() {
            if tag.is_kept() {
                kept.push(i);
            } else {
                pruned.push(i);
            }
        }
        Self {
            doc_id: doc_id.into(),
            kept,
            pruned,
            evidence,
        }
    }

    /// Number of token rows the partition covers.
    pub fn n(&self) -> usize {
        self.evidence.len()
    }
}

/// Per-document size accounting for a pruning run.
#[derive(Debug, Clone, Serialize)]
pub struct DocPruneStat {
    pub doc_id: String,
    pub n_before: usize,
    pub n_after: usize,
}

/// Summary of a corpus pruning run.
#[derive(Debug, Clone, Serialize)]
pub struct PruneReport {
    pub per_doc: Vec<DocPruneStat>,
    /// Kept tokens over original tokens; absent when the corpus held none.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub remaining_ratio: Option<f64>,
    /// Largest sampled score change, when the run measured one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score_delta_max: Option<f64>,
    pub wall_time_seconds: f64,
}
