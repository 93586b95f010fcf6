//! The lossy baseline: drop tokens by embedding norm and watch scores
//! drift as the threshold rises.
//!
//! Norm pruning is the natural strawman — weak tokens have small norms,
//! so cut below a threshold. The sweep shows what that actually costs:
//! remaining tokens fall monotonically, and past a point the clipped
//! scores and even the corpus ranking move. Dominance pruning (see the
//! lossless_prune example) removes tokens with zero drift by
//! construction.
//!
//! Run with: cargo run --release --example norm_prune_sweep

use dprune::prune::prune_corpus;
use dprune::synth::{random_corpus, random_query_matrix};
use dprune::verify::{rank_correlation, verify_lossless};
use dprune::{PruneConfig, Strategy};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let corpus = random_corpus(40, 24, 8, 31);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let query = random_query_matrix("probe", 4, 8, &mut rng);

    println!(
        "{:>6} {:>10} {:>14} {:>12}",
        "theta", "remain %", "max drop", "rank tau"
    );
    for i in 0..=10 {
        let theta = f64::from(i) / 10.0;
        let cfg = PruneConfig {
            strategy: Strategy::Norm,
            theta_n: theta,
            ..PruneConfig::default()
        };
        let (pruned, report) = prune_corpus(&corpus, &cfg).expect("norm pruning");
        let verdict = verify_lossless(&corpus, &pruned, 400, 5).expect("comparable");
        let tau = rank_correlation(&query, &corpus, &pruned).expect("two documents");
        println!(
            "{theta:>6.1} {:>10.1} {:>14.3e} {:>12.4}",
            100.0 * report.remaining_ratio.unwrap(),
            verdict.max_abs_score_delta,
            tau
        );
    }
    println!("\nnorm pruning only stays lossless while it removes nothing it shouldn't;");
    println!("the threshold at which damage starts depends on the corpus, not on a proof");
}
