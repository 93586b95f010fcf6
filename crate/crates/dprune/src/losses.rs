//! Training-side regularizers that encourage prunable token geometry, and
//! the retrieval distillation loss.
//!
//! The three regularizers reward documents whose tokens are easy to
//! dominate: a low nuclear norm concentrates tokens in few directions, the
//! similarity term pushes short tokens toward the cones of their
//! neighbors, and the L1 term shrinks coordinates outright. Each returns
//! its value and, where defined, an analytic gradient that
//! [`finite_diff_check`] validates against central differences.

use rand::Rng;
use thiserror::Error;

use crate::reduce::{svd, ReduceError, SvdFactors};
use crate::scoring::dot;
use crate::synth;
use crate::types::{TokenMatrix, DEFAULT_SVD_TOL};

/// Denominator shift in the similarity regularizer.
pub const SIM_EPSILON: f64 = 0.01;

#[derive(Debug, Error)]
pub enum LossError {
    #[error("loss needs at least {needed} tokens, got {n}")]
    TooFewTokens { n: usize, needed: usize },
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error("gradient unavailable: {reason}")]
    GradientAbsent { reason: String },
}

/// A loss value with an optional analytic gradient, laid out like the
/// token matrix itself (`n x d`, row-major).
#[derive(Debug, Clone)]
pub struct LossValue {
    pub value: f64,
    pub gradient: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    Nuclear,
    Sim,
    L1,
}

/// Sum of singular values over `min(n, d)`.
///
/// The gradient is `V U^T / min(n, d)` in token layout, defined only when
/// the spectrum is simple and strictly positive; otherwise the nuclear
/// norm is not differentiable there and `gradient` stays empty.
pub fn nuclear_loss(doc: &TokenMatrix, svd_tol: f64) -> Result<LossValue, LossError> {
    if doc.n() == 0 {
        return Err(LossError::TooFewTokens { n: 0, needed: 1 });
    }
    let f = svd(doc, svd_tol)?;
    let m = f.m();
    let value = f.sigma.iter().sum::<f64>() / m as f64;
    Ok(LossValue {
        value,
        gradient: nuclear_gradient(doc, &f),
    })
}

fn nuclear_gradient(doc: &TokenMatrix, f: &SvdFactors) -> Option<Vec<f64>> {
    let m = f.m();
    let gap_tol = 1e-8 * (1.0 + f.sigma.first().copied().unwrap_or(0.0));
    let simple = f.sigma.windows(2).all(|w| w[0] - w[1] > gap_tol)
        && f.sigma.last().is_some_and(|&s| s > gap_tol);
    if !simple {
        return None;
    }
    let mut g = vec![0.0; doc.n() * doc.d()];
    for t in 0..doc.n() {
        for j in 0..doc.d() {
            let mut s = 0.0;
            for l in 0..m {
                s += f.v_at(t, l) * f.u_at(j, l);
            }
            g[t * doc.d() + j] = s / m as f64;
        }
    }
    Some(g)
}

/// Similarity regularizer: rewards short tokens that point into the cones
/// of their neighbors, making them dominated in training.
///
/// With `r_i = |d_i|`, `c(r) = (1 - r) / (r + eps)`, and
/// `S_i = sum_{j != i} max(d_i . d_j, 0)`, the value is
/// `-(1 / (n (n-1))) * sum_i c(r_i) S_i`. The gradient treats the clip's
/// kink with subgradient zero and is exact away from `d_i . d_j = 0`.
pub fn sim_loss(doc: &TokenMatrix) -> Result<LossValue, LossError> {
    let n = doc.n();
    if n < 2 {
        return Err(LossError::TooFewTokens { n, needed: 2 });
    }
    let d = doc.d();
    let eps = SIM_EPSILON;
    let norms: Vec<f64> = (0..n).map(|i| doc.row_norm(i)).collect();
    let coeff: Vec<f64> = norms.iter().map(|r| (1.0 - r) / (r + eps)).collect();
    let clipped: Vec<f64> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| {
            if i == j {
                0.0
            } else {
                dot(doc.row(i), doc.row(j)).max(0.0)
            }
        })
        .collect();
    let pos_sum: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| clipped[i * n + j]).sum())
        .collect();
    let scale = -1.0 / (n * (n - 1)) as f64;
    let value = scale * coeff.iter().zip(&pos_sum).map(|(c, s)| c * s).sum::<f64>();

    let mut g = vec![0.0; n * d];
    for k in 0..n {
        let gk = &mut g[k * d..(k + 1) * d];
        // d/dr of c(r), scaled along the unit direction of row k.
        if norms[k] > 0.0 {
            let dc = -(1.0 + eps) / (norms[k] + eps).powi(2);
            let f = dc * pos_sum[k] / norms[k];
            for (gv, &x) in gk.iter_mut().zip(doc.row(k)) {
                *gv += f * x;
            }
        }
        for j in 0..n {
            if j == k {
                continue;
            }
            // Row k appearing in its own term, and inside every other
            // token's positive part.
            if clipped[k * n + j] > 0.0 {
                for (gv, &x) in gk.iter_mut().zip(doc.row(j)) {
                    *gv += coeff[k] * x;
                }
            }
            if clipped[j * n + k] > 0.0 {
                for (gv, &x) in gk.iter_mut().zip(doc.row(j)) {
                    *gv += coeff[j] * x;
                }
            }
        }
        for gv in gk.iter_mut() {
            *gv *= scale;
        }
    }
    Ok(LossValue {
        value,
        gradient: Some(g),
    })
}

/// Mean L1 norm of the token rows. The subgradient at a zero coordinate is
/// taken as zero.
pub fn l1_loss(doc: &TokenMatrix) -> LossValue {
    let n = doc.n();
    if n == 0 {
        return LossValue {
            value: 0.0,
            gradient: Some(Vec::new()),
        };
    }
    let value = doc.as_slice().iter().map(|v| v.abs()).sum::<f64>() / n as f64;
    let gradient = doc
        .as_slice()
        .iter()
        .map(|v| {
            if *v == 0.0 {
                0.0
            } else {
                v.signum() / n as f64
            }
        })
        .collect();
    LossValue {
        value,
        gradient: Some(gradient),
    }
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().fold(f64::NEG_INFINITY, |a, &x| a.max(x));
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn softmax2(pair: (f64, f64)) -> (f64, f64) {
    let m = pair.0.max(pair.1);
    let (a, b) = ((pair.0 - m).exp(), (pair.1 - m).exp());
    (a / (a + b), b / (a + b))
}

/// Retrieval loss: KL divergence of the student's two-way softmax from the
/// teacher's over a (positive, hard-negative) score pair — Σ pₛ·ln(pₛ/pₜ) —
/// plus the negative log-likelihood of the positive among `student_all`
/// scores (positive first). Nonnegative; exactly the NLL when the pairs
/// match.
pub fn ir_loss(student_pair: (f64, f64), teacher_pair: (f64, f64), student_all: &[f64]) -> f64 {
    assert!(
        !student_all.is_empty(),
        "the likelihood term needs at least the positive score"
    );
    let (t0, t1) = softmax2(teacher_pair);
    let (s0, s1) = softmax2(student_pair);
    let kl = s0 * (s0 / t0).ln() + s1 * (s1 / t1).ln();
    let nll = -student_all[0] + log_sum_exp(student_all);
    kl + nll
}

fn loss_at(kind: LossKind, doc: &TokenMatrix) -> Result<LossValue, LossError> {
    match kind {
        LossKind::Nuclear => nuclear_loss(doc, DEFAULT_SVD_TOL),
        LossKind::Sim => sim_loss(doc),
        LossKind::L1 => Ok(l1_loss(doc)),
    }
}

/// Compares the analytic gradient against central differences entry by
/// entry and returns the worst relative error
/// `|fd - analytic| / max(1, |analytic|, |fd|)`.
///
/// The caller picks `doc` away from the loss's kinks (clip boundaries,
/// zero coordinates, spectral ties); [`smooth_point`] generates such
/// documents.
pub fn finite_diff_check(kind: LossKind, doc: &TokenMatrix, step: f64) -> Result<f64, LossError> {
    assert!(step > 0.0);
    let base = loss_at(kind, doc)?;
    let gradient = base.gradient.ok_or_else(|| LossError::GradientAbsent {
        reason: "loss reported no gradient at this document".to_owned(),
    })?;
    let mut worst = 0.0f64;
    for e in 0..doc.n() * doc.d() {
        let probe = |delta: f64| -> Result<f64, LossError> {
            let mut data = doc.as_slice().to_vec();
            data[e] += delta;
            let m = TokenMatrix::from_validated(doc.doc_id().to_owned(), doc.d(), data);
            Ok(loss_at(kind, &m)?.value)
        };
        let fd = (probe(step)? - probe(-step)?) / (2.0 * step);
        let an = gradient[e];
        let err = (fd - an).abs() / 1.0f64.max(an.abs()).max(fd.abs());
        worst = worst.max(err);
    }
    Ok(worst)
}

/// Seeded random document staying clear of `kind`'s non-smooth sets, for
/// finite-difference validation: coordinates away from zero for L1,
/// pairwise dot products away from the clip for the similarity term, and
/// a simple, strictly positive spectrum for the nuclear term.
pub fn smooth_point<R: Rng + ?Sized>(
    kind: LossKind,
    n: usize,
    d: usize,
    rng: &mut R,
) -> TokenMatrix {
    assert!(n >= 2 && d >= 1);
    const MARGIN: f64 = 5e-3;
    for _ in 0..10_000 {
        let doc = synth::random_token_matrix("smooth", n, d, rng);
        let ok = match kind {
            LossKind::L1 => doc.as_slice().iter().all(|v| v.abs() >= 0.01),
            LossKind::Sim => {
                (0..n).all(|i| doc.row_norm(i) >= 0.05)
                    && (0..n).all(|i| {
                        (i + 1..n).all(|j| dot(doc.row(i), doc.row(j)).abs() >= MARGIN)
                    })
            }
            LossKind::Nuclear => match svd(&doc, DEFAULT_SVD_TOL) {
                Ok(f) => {
                    f.sigma.windows(2).all(|w| w[0] - w[1] >= MARGIN)
                        && f.sigma.last().is_some_and(|&s| s >= MARGIN)
                }
                Err(_) => false,
            },
        };
        if ok {
            return doc;
        }
    }
    panic!("no smooth document found for {kind:?} with n = {n}, d = {d}");
}
