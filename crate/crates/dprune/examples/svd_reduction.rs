//! Spectral reduction of a document's token matrix: the spectrum, the
//! cumulative-mass rank rule, and the reconstruction error at each rank.
//!
//! Dominance testing only cares about dot products among tokens, and those
//! live entirely in the span of the token vectors. Rotating tokens into
//! the singular basis and dropping negligible directions shrinks the
//! linear programs without moving any dot product by more than the
//! discarded spectral mass.
//!
//! Run with: cargo run --example svd_reduction

use dprune::reduce::{reduced_document, select_rank, svd};
use dprune::synth::random_token_matrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let doc = random_token_matrix("demo", 12, 6, &mut rng);
    let factors = svd(&doc, 1e-12).expect("the sweep converges");

    println!("document: {} tokens in dimension {}", doc.n(), doc.d());
    println!("singular values: {:?}", rounded(&factors.sigma));

    // Rank-k reconstruction error equals the norm of the discarded tail —
    // the classic best-low-rank identity, here checked numerically.
    println!("\n{:>4} {:>14} {:>14}", "k", "residual", "tail norm");
    for k in 0..=factors.m() {
        let recon = factors.reconstruct_rank(k);
        let mut err = 0.0;
        for i in 0..doc.d() {
            for t in 0..doc.n() {
                let diff = recon[i * doc.n() + t] - doc.row(t)[i];
                err += diff * diff;
            }
        }
        // fold from +0.0: an empty `sum()` is -0.0, which prints oddly
        let tail = factors.sigma[k..].iter().fold(0.0, |a, s| a + s * s);
        println!("{k:>4} {:>14.6e} {:>14.6e}", err.sqrt(), tail.sqrt());
    }

    println!("\n{:>8} {:>6}", "theta", "rank");
    for theta in [0.5, 0.7, 0.9, 0.99, 1.0] {
        println!("{theta:>8.2} {:>6}", select_rank(&factors.sigma, theta));
    }

    // The reduced document re-expresses each token in the kept singular
    // directions; at theta = 1.0 all dot products are preserved exactly.
    let reduced = reduced_document(&doc, 1.0, 1e-12).expect("svd converges");
    println!(
        "\nreduced at theta = 1.0: {} tokens of width {} (was {})",
        reduced.n(),
        reduced.k(),
        doc.d()
    );
    let gram_gap = (0..doc.n())
        .flat_map(|a| (0..doc.n()).map(move |b| (a, b)))
        .map(|(a, b)| {
            let original: f64 = doc.row(a).iter().zip(doc.row(b)).map(|(x, y)| x * y).sum();
            let rotated: f64 = reduced
                .row(a)
                .iter()
                .zip(reduced.row(b))
                .map(|(x, y)| x * y)
                .sum();
            (original - rotated).abs()
        })
        .fold(0.0f64, f64::max);
    println!("largest dot-product change across all token pairs: {gram_gap:.2e}");
}

fn rounded(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| (x * 1e4).round() / 1e4).collect()
}
