//! Training-side regularizers that make token matrices easier to prune,
//! with their analytic gradients checked against central differences.
//!
//! Three penalties push embeddings toward prunable shapes: the scaled
//! nuclear norm flattens the token subspace, the similarity penalty
//! rewards tokens for hiding behind stronger neighbors, and mean L1
//! drives coordinates to zero. A retrieval distillation term keeps the
//! scores themselves anchored to a teacher while the geometry moves.
//!
//! Run with: cargo run --example regularizer_losses

use dprune::losses::{
    finite_diff_check, ir_loss, l1_loss, nuclear_loss, sim_loss, smooth_point, LossKind,
};
use dprune::TokenMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    // Hand-checkable fixtures first.
    let spike = TokenMatrix::from_rows("spike", &[vec![0.3, -0.4]]).unwrap();
    println!("l1 on one token (0.3, -0.4): {}", l1_loss(&spike).value);

    let pair = TokenMatrix::from_rows("pair", &[vec![0.5, 0.0], vec![1.0, 0.0]]).unwrap();
    println!(
        "similarity on a shadowed pair: {:.6}",
        sim_loss(&pair).unwrap().value
    );

    let flat = TokenMatrix::from_rows("flat", &[vec![0.8, 0.0], vec![0.4, 0.0]]).unwrap();
    println!(
        "nuclear on a rank-one doc:     {:.6} (= sqrt(0.8)/2)",
        nuclear_loss(&flat, 1e-12).unwrap().value
    );

    // Distillation: KL between teacher and student over the query's
    // positive/negative pair, plus a contrastive pull toward the positive.
    let matched = ir_loss((2.0, 0.5), (2.0, 0.5), &[2.0]);
    let drifted = ir_loss((1.0, 0.9), (2.0, 0.5), &[1.0, 0.9, 0.4]);
    println!("distillation, student == teacher: {matched:.6}");
    println!("distillation, student drifted:    {drifted:.6}");

    // Every analytic gradient is validated against central differences at
    // points kept away from the losses' kinks.
    println!("\nworst relative gradient error over 10 random smooth points:");
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for kind in [LossKind::L1, LossKind::Sim, LossKind::Nuclear] {
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let doc = smooth_point(kind, 4, 3, &mut rng);
            worst = worst.max(finite_diff_check(kind, &doc, 1e-5).unwrap());
        }
        println!("  {:<8} {worst:.3e}", format!("{kind:?}"));
    }
}
