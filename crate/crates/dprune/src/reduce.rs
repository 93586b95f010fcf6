//! Rank reduction through a one-sided Jacobi singular value decomposition.
//!
//! A document's tokens span at most `min(n, d)` directions, and the
//! dominance linear programs only see pairwise dot products. Rotating the
//! document into its singular basis and truncating negligible directions
//! shrinks the programs without moving any dot product: at full rank the
//! Gram matrix is preserved exactly, and a truncation keeping spectral
//! mass `theta_lp` perturbs it by the discarded singular values only.
//!
//! The decomposition orthogonalizes the columns of whichever orientation
//! of the matrix is taller, sweeping column pairs with Jacobi rotations
//! until every pair is relatively orthogonal under `svd_tol`. One-sided
//! Jacobi is slower than bidiagonalization but its singular values come
//! out with high relative accuracy, which matters because rank selection
//! thresholds on their partial sums.

use thiserror::Error;

use crate::scoring::dot;
use crate::types::TokenMatrix;

/// Hard cap on Jacobi sweeps; typical documents converge in well under 20.
const MAX_SWEEPS: usize = 64;

/// Relative cutoff under which a singular value counts as numerically zero
/// and its left direction is completed by Gram-Schmidt instead of taken
/// from a meaninglessly normalized column.
const NULL_COLUMN_REL: f64 = 1e-13;

#[derive(Debug, Error)]
pub enum ReduceError {
    #[error("Jacobi sweeps failed to converge within {sweeps} sweeps")]
    ConvergenceFailure { sweeps: usize },
}

/// Factors of the `d x n` token-column matrix `M = U S V^T`.
///
/// `u` is `d x m` and `v` is `n x m`, both row-major with orthonormal
/// columns; `sigma` has length `m = min(d, n)`, nonnegative and sorted
/// non-increasing. Row `t` of `v`, scaled by `sigma`, is token `t`
/// expressed in the singular basis.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub dim: usize,
    pub n: usize,
    pub u: Vec<f64>,
    pub sigma: Vec<f64>,
    pub v: Vec<f64>,
}

impl SvdFactors {
    pub fn m(&self) -> usize {
        self.sigma.len()
    }

    pub fn u_at(&self, row: usize, col: usize) -> f64 {
        self.u[row * self.m() + col]
    }

    pub fn v_at(&self, row: usize, col: usize) -> f64 {
        self.v[row * self.m() + col]
    }

    /// Rank-`k` reconstruction as a `d x n` row-major matrix whose columns
    /// are tokens.
    pub fn reconstruct_rank(&self, k: usize) -> Vec<f64> {
        let k = k.min(self.m());
        let mut out = vec![0.0; self.dim * self.n];
        for i in 0..self.dim {
            for t in 0..self.n {
                let mut s = 0.0;
                for j in 0..k {
                    s += self.u_at(i, j) * self.sigma[j] * self.v_at(t, j);
                }
                out[i * self.n + t] = s;
            }
        }
        out
    }

    pub fn reconstruct(&self) -> Vec<f64> {
        self.reconstruct_rank(self.m())
    }
}

/// Applies sweeps of pairwise Jacobi rotations until all column pairs of
/// `w` are relatively orthogonal: `|w_p . w_q| <= tol * |w_p| |w_q|`.
/// The same rotations accumulate into `j`, which starts as the identity.
fn orthogonalize_columns(
    w: &mut [Vec<f64>],
    j: &mut [Vec<f64>],
    tol: f64,
) -> Result<(), ReduceError> {
    let c = w.len();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..c.saturating_sub(1) {
            for q in p + 1..c {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                if gamma * gamma <= tol * tol * alpha * beta {
                    continue;
                }
                rotated = true;
                // Rutishauser's stable rotation choice: the smaller angle
                // that zeroes the off-diagonal Gram entry.
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for col_pair in [&mut *w, &mut *j] {
                    let (head, tail) = col_pair.split_at_mut(q);
                    let (cp, cq) = (&mut head[p], &mut tail[0]);
                    for (a, b) in cp.iter_mut().zip(cq.iter_mut()) {
                        let (x, y) = (*a, *b);
                        *a = cs * x - sn * y;
                        *b = sn * x + cs * y;
                    }
                }
            }
        }
        if !rotated {
            return Ok(());
        }
    }
    Err(ReduceError::ConvergenceFailure { sweeps: MAX_SWEEPS })
}

/// Unit vector orthogonal to every column in `fixed`, found by projecting
/// out the best-conditioned standard basis vector. `fixed` holds fewer
/// than `r` orthonormal columns, so some basis vector keeps at least
/// `1/sqrt(r)` of its mass.
fn orthonormal_completion(fixed: &[&[f64]], r: usize) -> Vec<f64> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for e in 0..r {
        let mut v = vec![0.0; r];
        v[e] = 1.0;
        for _ in 0..2 {
            for f in fixed {
                let c = dot(&v, f);
                for (vi, fi) in v.iter_mut().zip(*f) {
                    *vi -= c * fi;
                }
            }
        }
        let norm = dot(&v, &v).sqrt();
        if best.as_ref().is_none_or(|(bn, _)| norm > *bn) {
            best = Some((norm, v));
        }
    }
    let (norm, mut v) = best.expect("r >= 1");
    for vi in &mut v {
        *vi /= norm;
    }
    v
}

/// Full singular value decomposition of the document's token columns.
///
/// Factors whichever orientation is taller, so the Jacobi sweeps always
/// orthogonalize `min(d, n)` columns. An empty document yields empty
/// factors rather than an error.
pub fn svd(doc: &TokenMatrix, svd_tol: f64) -> Result<SvdFactors, ReduceError> {
    assert!(svd_tol > 0.0, "svd_tol must be positive");
    let d = doc.d();
    let n = doc.n();
    let m = d.min(n);
    if n == 0 {
        return Ok(SvdFactors {
            dim: d,
            n,
            u: Vec::new(),
            sigma: Vec::new(),
            v: Vec::new(),
        });
    }

    // Tall orientation: token columns when d >= n, coordinate columns
    // otherwise. In both cases the rotated side has m columns.
    let coord_cols = d < n;
    let (r, c) = if coord_cols { (n, d) } else { (d, n) };
    let mut w: Vec<Vec<f64>> = (0..c)
        .map(|col| {
            if coord_cols {
                (0..n).map(|t| doc.row(t)[col]).collect()
            } else {
                doc.row(col).to_vec()
            }
        })
        .collect();
    let mut rot: Vec<Vec<f64>> = (0..c)
        .map(|col| {
            let mut v = vec![0.0; c];
            v[col] = 1.0;
            v
        })
        .collect();

    orthogonalize_columns(&mut w, &mut rot, svd_tol)?;

    let mut order: Vec<usize> = (0..c).collect();
    let norms: Vec<f64> = w.iter().map(|col| dot(col, col).sqrt()).collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).expect("finite norms"));

    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let null_thresh = NULL_COLUMN_REL * sigma.first().copied().unwrap_or(0.0);

    // Normalized rotated columns, with numerically null directions replaced
    // by an orthonormal completion so the factor stays orthonormal.
    let mut spectral: Vec<Vec<f64>> = Vec::with_capacity(c);
    for &j in &order {
        if norms[j] > null_thresh && norms[j] > 0.0 {
            spectral.push(w[j].iter().map(|v| v / norms[j]).collect());
        } else {
            let fixed: Vec<&[f64]> = spectral.iter().map(|col| col.as_slice()).collect();
            spectral.push(orthonormal_completion(&fixed, r));
        }
    }

    let pack = |cols: &[Vec<f64>], rows: usize, take: &[usize]| -> Vec<f64> {
        let mut out = vec![0.0; rows * take.len()];
        for (cidx, &j) in take.iter().enumerate() {
            for row in 0..rows {
                out[row * take.len() + cidx] = cols[j][row];
            }
        }
        out
    };
    let identity_order: Vec<usize> = (0..c).collect();
    let spectral_packed = pack(&spectral, r, &identity_order);
    let rot_packed = pack(&rot, c, &order);

    let (u, v) = if coord_cols {
        // M^T = spectral * S * rot^T, so M's left factor is rot.
        (rot_packed, spectral_packed)
    } else {
        (spectral_packed, rot_packed)
    };
    debug_assert_eq!(sigma.len(), m);
    Ok(SvdFactors {
        dim: d,
        n,
        u,
        sigma,
        v,
    })
}

/// Smallest rank whose leading singular values cover a `theta_lp` fraction
/// of the total spectral mass. Zero only for an all-zero spectrum.
pub fn select_rank(sigma: &[f64], theta_lp: f64) -> usize {
    assert!(
        theta_lp > 0.0 && theta_lp <= 1.0,
        "theta_lp must lie in (0, 1]"
    );
    let total: f64 = sigma.iter().sum();
    if total <= 0.0 {
        return 0;
    }
    let target = theta_lp * total;
    let mut cum = 0.0;
    for (i, s) in sigma.iter().enumerate() {
        cum += s;
        if cum >= target {
            return i + 1;
        }
    }
    sigma.len()
}

/// A document re-expressed in its truncated singular basis: `n` rows of
/// dimension `k`. Dot products between rows approximate the original token
/// dot products, exactly so at full rank.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDocument {
    doc_id: String,
    data: Vec<f64>,
    n: usize,
    k: usize,
}

impl ReducedDocument {
    pub fn doc_id(&self) -> &str {
        &self.doc_id
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.k..(t + 1) * self.k]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Projects the document onto the smallest singular subspace covering a
/// `theta_lp` fraction of spectral mass. Token `t` becomes
/// `(sigma_1 v_t1, ..., sigma_k v_tk)`.
pub fn reduced_document(
    doc: &TokenMatrix,
    theta_lp: f64,
    svd_tol: f64,
) -> Result<ReducedDocument, ReduceError> {
    let factors = svd(doc, svd_tol)?;
    let k = select_rank(&factors.sigma, theta_lp);
    let mut data = vec![0.0; doc.n() * k];
    for t in 0..doc.n() {
        for j in 0..k {
            data[t * k + j] = factors.sigma[j] * factors.v_at(t, j);
        }
    }
    Ok(ReducedDocument {
        doc_id: doc.doc_id().to_owned(),
        data,
        n: doc.n(),
        k,
    })
}
