//! Corpus pruning strategies.
//!
//! The LP strategy first re-expresses each document in its truncated
//! singular basis (rank chosen to cover `theta_lp` of the spectral mass),
//! runs the dominance partition on those reduced rows, then keeps the
//! selected rows of the *original* matrix, so surviving embeddings are
//! untouched. At `theta_lp = 1.0` the basis change preserves every dot
//! product and the pruned index scores identically under the clipped
//! late-interaction score. The norm strategy simply drops rows with norm
//! strictly below `theta_n`; it is lossy and exists as the cheap baseline.

use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::dominance::partition_rows;
use crate::io::CorpusIndex;
use crate::lp::LpError;
use crate::reduce::{reduced_document, ReduceError};
use crate::types::{
    CoreError, DocPruneStat, DominancePartition, Evidence, PruneConfig, PruneReport, Strategy,
    TokenMatrix,
};

#[derive(Debug, Error)]
pub enum PruneError {
    #[error(transparent)]
    Config(#[from] CoreError),
    #[error("document {doc_id}: {source}")]
    Lp {
        doc_id: String,
        #[source]
        source: LpError,
    },
    #[error("document {doc_id}: {source}")]
    Svd {
        doc_id: String,
        #[source]
        source: ReduceError,
    },
}

/// Dominance-prunes one document. Returns the surviving rows (taken from
/// the original matrix) together with the partition that selected them.
pub fn lp_prune(
    doc: &TokenMatrix,
    cfg: &PruneConfig,
) -> Result<(TokenMatrix, DominancePartition), PruneError> {
    cfg.validate()?;
    let reduced = reduced_document(doc, cfg.theta_lp, cfg.svd_tol).map_err(|e| PruneError::Svd {
        doc_id: doc.doc_id().to_owned(),
        source: e,
    })?;
    let rows: Vec<&[f64]> = (0..reduced.n()).map(|t| reduced.row(t)).collect();
    let partition =
        partition_rows(doc.doc_id(), &rows, cfg.lp_feas_tol, true).map_err(|e| PruneError::Lp {
            doc_id: doc.doc_id().to_owned(),
            source: e,
        })?;
    Ok((doc.select_rows(&partition.kept), partition))
}

/// Drops rows whose Euclidean norm falls strictly below `theta_n`.
pub fn norm_prune(doc: &TokenMatrix, theta_n: f64) -> (TokenMatrix, DominancePartition) {
    assert!((0.0..=1.0).contains(&theta_n), "theta_n must lie in [0, 1]");
    let evidence: Vec<Evidence> = (0..doc.n())
        .map(|i| {
            if doc.row_norm(i) < theta_n {
                Evidence::NormBelowThreshold
            } else {
                Evidence::NormKept
            }
        })
        .collect();
    let partition = DominancePartition::from_evidence(doc.doc_id(), evidence);
    (doc.select_rows(&partition.kept), partition)
}

/// Prunes every document under the configured strategy. Documents are
/// processed in parallel; output order, ids, and dimension match the
/// input. The report's `score_delta_max` stays empty because this run does
/// not sample queries; pair it with the verification harness for that.
pub fn prune_corpus(
    index: &CorpusIndex,
    cfg: &PruneConfig,
) -> Result<(CorpusIndex, PruneReport), PruneError> {
    cfg.validate()?;
    let start = Instant::now();
    let results: Vec<Result<(TokenMatrix, DominancePartition), PruneError>> = index
        .docs()
        .par_iter()
        .map(|doc| match cfg.strategy {
            Strategy::Lp => lp_prune(doc, cfg),
            Strategy::Norm => Ok(norm_prune(doc, cfg.theta_n)),
        })
        .collect();

    let mut out = CorpusIndex::new();
    let mut per_doc = Vec::with_capacity(index.len());
    for (doc, result) in index.docs().iter().zip(results) {
        let (kept, partition) = result?;
        per_doc.push(DocPruneStat {
            doc_id: doc.doc_id().to_owned(),
            n_before: doc.n(),
            n_after: partition.kept.len(),
        });
        out.push(kept)
            .expect("pruning preserves ids and dimension");
    }

    let before: usize = per_doc.iter().map(|s| s.n_before).sum();
    let after: usize = per_doc.iter().map(|s| s.n_after).sum();
    let report = PruneReport {
        per_doc,
        remaining_ratio: (before > 0).then(|| after as f64 / before as f64),
        score_delta_max: None,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;
    use crate::types::DEFAULT_LP_FEAS_TOL;
    use rand::SeedableRng;

    fn quad() -> TokenMatrix {
        TokenMatrix::from_rows(
            "quad",
            &[
                vec![1.0, 0.0],
                vec![-0.3, 0.6],
                vec![0.4, 0.1],
                vec![0.5, 0.5],
            ],
        )
        .unwrap()
    }

    #[test]
    fn lp_prune_keeps_original_rows() {
        let doc = quad();
        let (kept, partition) = lp_prune(&doc, &PruneConfig::default()).unwrap();
        assert_eq!(partition.pruned, vec![2]);
        assert_eq!(kept.n(), 3);
        assert_eq!(kept.row(0), doc.row(0));
        assert_eq!(kept.row(1), doc.row(1));
        assert_eq!(kept.row(2), doc.row(3));
    }

    #[test]
    fn aggressive_rank_reduction_prunes_more() {
        let doc = TokenMatrix::from_rows(
            "near1",
            &[vec![1.0, 0.0], vec![0.99, 0.01], vec![0.98, -0.01]],
        )
        .unwrap();
        let lossless = PruneConfig::default();
        let (_, exact) = lp_prune(&doc, &lossless).unwrap();
        let aggressive = PruneConfig {
            theta_lp: 0.2,
            ..PruneConfig::default()
        };
        let (_, reduced) = lp_prune(&doc, &aggressive).unwrap();
        // In the rank-one shadow only the longest projection survives.
        assert_eq!(exact.pruned.len(), 0);
        assert_eq!(reduced.pruned.len(), 2);
    }

    #[test]
    fn norm_prune_uses_a_strict_threshold() {
        let doc = TokenMatrix::from_rows(
            "norms",
            &[vec![0.5, 0.0], vec![0.3, 0.0], vec![0.0, 0.0]],
        )
        .unwrap();
        let (kept, partition) = norm_prune(&doc, 0.5);
        // Norm exactly at the threshold stays.
        assert_eq!(partition.kept, vec![0]);
        assert_eq!(partition.evidence[0], Evidence::NormKept);
        assert_eq!(partition.evidence[1], Evidence::NormBelowThreshold);
        assert_eq!(kept.n(), 1);

        let (all_kept, _) = norm_prune(&doc, 0.0);
        assert_eq!(all_kept.n(), 3);
    }

    #[test]
    fn norm_prune_sweep_is_nested() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let doc = synth::random_token_matrix("sweep", 24, 4, &mut rng);
        let mut previous: Option<Vec<usize>> = None;
        for step in 0..=10 {
            let theta = step as f64 / 10.0;
            let (_, partition) = norm_prune(&doc, theta);
            if let Some(prev) = &previous {
                assert!(
                    prev.iter().all(|i| partition.pruned.contains(i)),
                    "pruned set shrank between theta steps"
                );
            }
            previous = Some(partition.pruned);
        }
    }

    #[test]
    fn corpus_report_accounts_for_every_document() {
        let index = synth::random_corpus(8, 12, 3, 17);
        let cfg = PruneConfig::default();
        let (pruned, report) = prune_corpus(&index, &cfg).unwrap();
        assert_eq!(pruned.len(), index.len());
        assert_eq!(report.per_doc.len(), index.len());
        for (stat, (orig, kept)) in report
            .per_doc
            .iter()
            .zip(index.docs().iter().zip(pruned.docs()))
        {
            assert_eq!(stat.doc_id, orig.doc_id());
            assert_eq!(stat.doc_id, kept.doc_id());
            assert_eq!(stat.n_before, orig.n());
            assert_eq!(stat.n_after, kept.n());
            assert!(stat.n_after <= stat.n_before);
        }
        let ratio = report.remaining_ratio.unwrap();
        assert!(ratio > 0.0 && ratio <= 1.0);
    }

    #[test]
    fn empty_corpus_has_no_ratio() {
        let (out, report) = prune_corpus(&CorpusIndex::new(), &PruneConfig::default()).unwrap();
        assert!(out.is_empty());
        assert!(report.remaining_ratio.is_none());
    }

    #[test]
    fn invalid_config_is_rejected_up_front() {
        let index = synth::random_corpus(1, 4, 2, 3);
        let cfg = PruneConfig {
            theta_lp: 0.0,
            ..PruneConfig::default()
        };
        assert!(matches!(
            prune_corpus(&index, &cfg),
            Err(PruneError::Config(_))
        ));
    }

    #[test]
    fn empty_document_survives_pruning() {
        let doc = TokenMatrix::empty("e", 3).unwrap();
        let cfg = PruneConfig {
            lp_feas_tol: DEFAULT_LP_FEAS_TOL,
            ..PruneConfig::default()
        };
        let (kept, partition) = lp_prune(&doc, &cfg).unwrap();
        assert_eq!(kept.n(), 0);
        assert_eq!(kept.d(), 3);
        assert_eq!(partition.n(), 0);
    }
}
