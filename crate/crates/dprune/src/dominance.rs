//! Token dominance: which rows of a document can never be the positive
//! argmax for any query direction.
//!
//! A row `d` is dominated by the remaining rows when, for every query `q`,
//! either `q.d <= 0` or some other row scores strictly higher. Dominated
//! rows contribute nothing to the clipped late-interaction score, so
//! removing them is lossless. By Farkas duality, domination holds exactly
//! when the deficit columns `d - d_j` admit a nonnegative combination
//! equal to `-d`, which [`crate::lp::lp_feasible`] decides with a
//! certificate either way.
//!
//! Dominated rows stay dominated when other dominated rows leave the set,
//! so the partition removes them progressively: each pruned row shrinks
//! the comparison set for the candidates after it. Cheap structural passes
//! run first (zero rows, exact duplicates, self-matching rows), leaving
//! the linear programs only the genuinely ambiguous rows.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::lp::{lp_feasible, FeasibilityResult, LpError};
use crate::scoring::dot;
use crate::synth::unit_vector;
use crate::types::{
    DominancePartition, Evidence, PruneConfig, TokenMatrix, DEFAULT_LP_FEAS_TOL, DUPLICATE_TOL,
};

/// A sampled query must beat the kept rows by this much before it counts
/// as a counterexample to a partition.
pub const FALSIFY_MARGIN: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum DominanceError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("the sweep oracle is exact only in dimension 2, got {d}")]
    NotTwoDimensional { d: usize },
}

/// Rows that maximize the dot product with themselves over the whole
/// document: `d_i . d_i >= d_i . d_j` for every `j`, with `d_i . d_i > 0`.
/// Such a row wins the query direction equal to itself with a positive
/// product, so it can never be pruned. Comparisons are exact; ties with
/// other rows count as self-matching (a tie is not a strict beat), which
/// means both members of an exact-duplicate pair pass — collapsing
/// duplicates is a separate, stronger step than per-row dominance.
pub fn self_match_prefilter(doc: &TokenMatrix) -> Vec<usize> {
    let rows: Vec<&[f64]> = doc.rows().collect();
    let all: Vec<usize> = (0..rows.len()).collect();
    self_matching(&rows, &all)
}

fn self_matching(rows: &[&[f64]], active: &[usize]) -> Vec<usize> {
    active
        .iter()
        .copied()
        .filter(|&i| {
            let own = dot(rows[i], rows[i]);
            own > 0.0
                && active
                    .iter()
                    .all(|&j| j == i || own >= dot(rows[i], rows[j]))
        })
        .collect()
}

/// Decides whether row `candidate` is dominated by the `others`, returning
/// the feasibility artifact: a witness combination when dominated, a
/// separating query direction when not.
pub fn local_dominance_test(
    doc: &TokenMatrix,
    candidate: usize,
    others: &[usize],
    lp_feas_tol: f64,
) -> Result<FeasibilityResult, LpError> {
    let rows: Vec<&[f64]> = doc.rows().collect();
    dominance_lp(&rows, candidate, others, lp_feas_tol)
}

fn dominance_lp(
    rows: &[&[f64]],
    candidate: usize,
    others: &[usize],
    tol: f64,
) -> Result<FeasibilityResult, LpError> {
    debug_assert!(!others.contains(&candidate));
    let cand = rows[candidate];
    let columns: Vec<Vec<f64>> = others
        .iter()
        .map(|&j| cand.iter().zip(rows[j]).map(|(a, b)| a - b).collect())
        .collect();
    let b: Vec<f64> = cand.iter().map(|v| -v).collect();
    lp_feasible(&columns, &b, tol)
}

/// Shared partition pipeline over raw rows of any width (the rank-reduced
/// path hands in rows of width `k`, possibly zero).
///
/// Order of passes: numerically zero rows, exact duplicates against the
/// lowest surviving index, self-matching rows, then linear programs over
/// the rest in ascending-norm order. With `progressive` set, each row the
/// program prunes leaves the comparison set immediately.
pub(crate) fn partition_rows(
    doc_id: &str,
    rows: &[&[f64]],
    tol: f64,
    progressive: bool,
) -> Result<DominancePartition, LpError> {
    let n = rows.len();
    let mut evidence: Vec<Option<Evidence>> = vec![None; n];

    for (i, row) in rows.iter().enumerate() {
        if row.iter().all(|v| v.abs() <= tol) {
            evidence[i] = Some(Evidence::ZeroVector);
        }
    }

    for i in 0..n {
        if evidence[i].is_some() {
            continue;
        }
        for j in 0..i {
            if evidence[j].is_some() {
                continue;
            }
            let duplicate = rows[i]
                .iter()
                .zip(rows[j])
                .all(|(a, b)| (a - b).abs() <= DUPLICATE_TOL);
            if duplicate {
                evidence[i] = Some(Evidence::Duplicate);
                break;
            }
        }
    }

    let active: Vec<usize> = (0..n).filter(|&i| evidence[i].is_none()).collect();
    for i in self_matching(rows, &active) {
        evidence[i] = Some(Evidence::SelfMatch);
    }

    // Low-norm rows are the likeliest to be dominated; testing them first
    // shrinks the live set fastest.
    let mut candidates: Vec<usize> = active
        .iter()
        .copied()
        .filter(|&i| evidence[i].is_none())
        .collect();
    candidates.sort_by(|&a, &b| {
        let na = dot(rows[a], rows[a]);
        let nb = dot(rows[b], rows[b]);
        na.partial_cmp(&nb).expect("finite norms").then(a.cmp(&b))
    });

    let mut live = active;
    for &i in &candidates {
        let others: Vec<usize> = live.iter().copied().filter(|&j| j != i).collect();
        match dominance_lp(rows, i, &others, tol)? {
            FeasibilityResult::Feasible { .. } => {
                evidence[i] = Some(Evidence::LpFeasible);
                if progressive {
                    live.retain(|&j| j != i);
                }
            }
            FeasibilityResult::Infeasible { .. } => {
                evidence[i] = Some(Evidence::LpInfeasible);
            }
        }
    }

    let evidence: Vec<Evidence> = evidence
        .into_iter()
        .map(|e| e.expect("every row classified"))
        .collect();
    Ok(DominancePartition::from_evidence(doc_id, evidence))
}

/// Partitions a document into kept and pruned rows with progressive
/// removal: rows proven dominated stop participating in later tests.
pub fn global_partition(
    doc: &TokenMatrix,
    cfg: &PruneConfig,
) -> Result<DominancePartition, DominanceError> {
    debug_assert!(cfg.validate().is_ok());
    let rows: Vec<&[f64]> = doc.rows().collect();
    Ok(partition_rows(
        doc.doc_id(),
        &rows,
        cfg.lp_feas_tol,
        true,
    )?)
}

/// Like [`global_partition`] but every dominance test runs against the
/// full remaining set, with no removal between tests. Dominated rows stay
/// dominated when other dominated rows leave, so on duplicate-free input
/// both variants select the same rows; this one exists to check that.
pub fn full_set_partition(
    doc: &TokenMatrix,
    cfg: &PruneConfig,
) -> Result<DominancePartition, DominanceError> {
    debug_assert!(cfg.validate().is_ok());
    let rows: Vec<&[f64]> = doc.rows().collect();
    Ok(partition_rows(
        doc.doc_id(),
        &rows,
        cfg.lp_feas_tol,
        false,
    )?)
}

fn wrap_angle(t: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let r = t % two_pi;
    if r < 0.0 {
        r + two_pi
    } else {
        r
    }
}

/// Exact dominance partition in two dimensions by angular sweep.
///
/// Query directions live on the unit circle. The winner order changes only
/// where two rows tie (`q` orthogonal to their difference) or a row's
/// product crosses zero (`q` orthogonal to the row), so collecting those
/// breakpoint angles and probing one interior point per arc decides every
/// row exactly: kept means it is the unique positive maximizer on some
/// open arc. Rows that are numerically zero at the default feasibility
/// tolerance are pruned up front, mirroring the pruner's fast path; exact
/// duplicates tie everywhere, never win strictly, and come out pruned.
pub fn oracle_2d(doc: &TokenMatrix) -> Result<DominancePartition, DominanceError> {
    if doc.d() != 2 {
        return Err(DominanceError::NotTwoDimensional { d: doc.d() });
    }
    let n = doc.n();
    let zero_tol = DEFAULT_LP_FEAS_TOL;
    let mut evidence = vec![Evidence::LpFeasible; n];
    let mut active = Vec::new();
    for (i, slot) in evidence.iter_mut().enumerate() {
        let row = doc.row(i);
        if row.iter().all(|v| v.abs() <= zero_tol) {
            *slot = Evidence::ZeroVector;
        } else {
            active.push(i);
        }
    }

    let mut angles = Vec::with_capacity(active.len() * (active.len() + 3));
    for (pos, &i) in active.iter().enumerate() {
        let ri = doc.row(i);
        let own = ri[1].atan2(ri[0]);
        angles.push(wrap_angle(own + std::f64::consts::FRAC_PI_2));
        angles.push(wrap_angle(own - std::f64::consts::FRAC_PI_2));
        for &j in &active[pos + 1..] {
            let rj = doc.row(j);
            let diff = (rj[1] - ri[1]).atan2(rj[0] - ri[0]);
            angles.push(wrap_angle(diff + std::f64::consts::FRAC_PI_2));
            angles.push(wrap_angle(diff - std::f64::consts::FRAC_PI_2));
        }
    }
    angles.sort_by(|a, b| a.partial_cmp(b).expect("finite angles"));
    angles.dedup();

    for (pos, &start) in angles.iter().enumerate() {
        let end = if pos + 1 < angles.len() {
            angles[pos + 1]
        } else {
            angles[0] + std::f64::consts::TAU
        };
        let mid = 0.5 * (start + end);
        let q = [mid.cos(), mid.sin()];
        let mut best = f64::NEG_INFINITY;
        let mut winner = None;
        for &i in &active {
            let p = dot(&q, doc.row(i));
            if p > best {
                best = p;
                winner = Some(i);
            } else if p == best {
                winner = None;
            }
        }
        if let Some(i) = winner {
            if best > 0.0 {
                evidence[i] = Evidence::LpInfeasible;
            }
        }
    }

    Ok(DominancePartition::from_evidence(doc.doc_id(), evidence))
}

/// Hunts for a query direction on which the pruned rows outscore the kept
/// rows by more than [`FALSIFY_MARGIN`]. Returns the first offending
/// direction, or `None` after `samples` uniform draws. A correct partition
/// admits no such direction at all.
pub fn falsify_by_sampling(
    doc: &TokenMatrix,
    partition: &DominancePartition,
    samples: usize,
    seed: u64,
) -> Option<Vec<f64>> {
    assert_eq!(doc.n(), partition.n(), "partition must match the document");
    if partition.pruned.is_empty() {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let q = unit_vector(doc.d(), &mut rng);
        let kept_best = partition
            .kept
            .iter()
            .fold(0.0f64, |m, &i| m.max(dot(&q, doc.row(i))));
        let pruned_best = partition
            .pruned
            .iter()
            .fold(0.0f64, |m, &i| m.max(dot(&q, doc.row(i))));
        if pruned_best > kept_best + FALSIFY_MARGIN {
            return Some(q);
        }
    }
    None
}
