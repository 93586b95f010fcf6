//! End-to-end lossless pruning: generate a synthetic token corpus, remove
//! every dominated token, then try hard to find a query whose clipped
//! score changed. None exists.
//!
//! Run with: cargo run --release --example lossless_prune

use dprune::prune::prune_corpus;
use dprune::synth::random_corpus;
use dprune::verify::verify_lossless;
use dprune::{PruneConfig, Strategy};

fn main() {
    let corpus = random_corpus(64, 48, 16, 7);
    println!(
        "corpus: {} documents, {} tokens, dimension {}",
        corpus.len(),
        corpus.total_tokens(),
        corpus.dim().unwrap()
    );

    let cfg = PruneConfig {
        strategy: Strategy::Lp,
        theta_lp: 1.0, // keep the whole spectrum: exact dominance, lossless
        ..PruneConfig::default()
    };
    let (pruned, report) = prune_corpus(&corpus, &cfg).expect("pruning succeeds");
    println!(
        "pruned:  {} tokens remain ({:.1}%) in {:.3}s",
        pruned.total_tokens(),
        100.0 * report.remaining_ratio.unwrap(),
        report.wall_time_seconds
    );
    for stat in report.per_doc.iter().take(5) {
        println!("  {}: {} -> {} tokens", stat.doc_id, stat.n_before, stat.n_after);
    }
    println!("  ...");

    // 2,000 random unit queries per document hunt for a dropped score.
    let verdict = verify_lossless(&corpus, &pruned, 2_000, 99).expect("indexes are comparable");
    println!(
        "verify:  {} documents x {} queries, max clipped-score drop {:.2e}, {} counterexamples",
        verdict.docs_checked,
        verdict.queries_per_doc,
        verdict.max_abs_score_delta,
        verdict.counterexamples.len()
    );
    assert!(verdict.counterexamples.is_empty(), "pruning must be lossless");
    println!("lossless: no query direction distinguishes the two indexes");
}
