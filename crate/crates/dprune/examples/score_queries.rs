//! The two late-interaction score variants, side by side.
//!
//! Each query token takes its best dot product over the document's
//! tokens; the document score sums those maxima. The plain variant keeps
//! negative maxima, the clipped variant floors them at zero — the
//! difference is exactly why clipped scores survive dominance pruning.
//!
//! Run with: cargo run --example score_queries

use dprune::scoring::{colbert_p_score, colbert_score};
use dprune::{QueryMatrix, TokenMatrix};

fn main() {
    let docs = [
        TokenMatrix::from_rows(
            "about-cats",
            &[vec![0.9, 0.1, 0.0], vec![0.2, 0.7, 0.1], vec![-0.4, 0.3, 0.2]],
        )
        .unwrap(),
        TokenMatrix::from_rows(
            "about-dogs",
            &[vec![0.1, 0.9, 0.0], vec![0.0, -0.5, 0.8]],
        )
        .unwrap(),
        TokenMatrix::from_rows("off-topic", &[vec![-0.6, -0.6, 0.2]]).unwrap(),
    ];
    let query = QueryMatrix::from_rows(
        "q",
        &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]],
    )
    .unwrap();

    println!("query {} against {} documents\n", query.query_id(), docs.len());
    println!("{:<12} {:>10} {:>10}", "doc", "plain", "clipped");
    let mut ranked: Vec<(&str, f64, f64)> = docs
        .iter()
        .map(|doc| {
            let plain = colbert_score(&query, doc).expect("dimensions match");
            let clipped = colbert_p_score(&query, doc).expect("dimensions match");
            (doc.doc_id(), plain, clipped)
        })
        .collect();
    ranked.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap());
    for (id, plain, clipped) in &ranked {
        println!("{id:<12} {plain:>10.4} {clipped:>10.4}");
    }

    // The off-topic document scores negative on every query token; the
    // clipped variant treats "no positive match" as zero contribution.
    let (_, plain, clipped) = ranked.last().unwrap();
    assert!(*plain < 0.0 && *clipped == 0.0);
    println!("\nclipping floors hopeless matches at zero instead of punishing them");
}
