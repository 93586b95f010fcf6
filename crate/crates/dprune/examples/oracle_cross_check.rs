//! Cross-checking the LP pipeline against an exact geometric oracle.
//!
//! In two dimensions every query direction is an angle, and the identity
//! of the best-scoring token only changes at finitely many breakpoints.
//! Sweeping one probe per arc therefore decides dominance exactly,
//! with no linear programming at all — an independent answer the LP
//! pipeline must reproduce.
//!
//! Run with: cargo run --example oracle_cross_check

use dprune::dominance::{global_partition, oracle_2d};
use dprune::synth::random_corpus;
use dprune::{PruneConfig, TokenMatrix};

fn main() {
    // A hand-built document first: four tokens, one of them shadowed.
    let doc = TokenMatrix::from_rows(
        "quad",
        &[
            vec![1.0, 0.0],   // the east anchor
            vec![-0.3, 0.6],  // low norm, but alone in the northwest
            vec![0.4, 0.1],   // never the unique winner anywhere
            vec![0.5, 0.5],   // owns the diagonal
        ],
    )
    .unwrap();
    let cfg = PruneConfig::default();
    let lp = global_partition(&doc, &cfg).unwrap();
    let sweep = oracle_2d(&doc).unwrap();
    println!("quad via LP:    kept {:?}, pruned {:?}", lp.kept, lp.pruned);
    println!("quad via sweep: kept {:?}, pruned {:?}", sweep.kept, sweep.pruned);
    println!("evidence: {:?}\n", lp.evidence);
    assert_eq!(lp.kept, sweep.kept);

    // Now at scale: the two methods agree on every random document.
    let corpus = random_corpus(300, 10, 2, 4242);
    let mut pruned_total = 0;
    for doc in corpus.docs() {
        let lp = global_partition(doc, &cfg).unwrap();
        let sweep = oracle_2d(doc).unwrap();
        assert_eq!(lp.kept, sweep.kept, "disagreement on {}", doc.doc_id());
        pruned_total += lp.pruned.len();
    }
    println!(
        "agreed on all {} random documents ({} of {} tokens pruned)",
        corpus.len(),
        pruned_total,
        corpus.total_tokens()
    );
}
