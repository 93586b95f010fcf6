//! The linear program at the heart of dominance testing, run on two
//! hand-checkable instances.
//!
//! A token `c` is dominated by rows `d_1..d_m` exactly when some
//! nonnegative weights `x` solve `sum_j x_j (c - d_j) = -c`: then for any
//! query `q` with `q.c > 0`, rearranging shows some `d_j` beats `c`. The
//! solver proves its answer either way — a feasible `x` (witness) or a
//! separating direction `y` (certificate) with `A^T y >= 0`, `b^T y < 0`.
//!
//! Run with: cargo run --example lp_feasibility

use dprune::lp::{lp_feasible, FeasibilityResult};

fn report(label: &str, columns: &[Vec<f64>], b: &[f64]) {
    match lp_feasible(columns, b, 1e-9).expect("clean numerics") {
        FeasibilityResult::Feasible { witness } => {
            println!("{label}: dominated, witness x = {witness:?}");
            // Re-derive A x and compare with b.
            let recombined: Vec<f64> = (0..b.len())
                .map(|i| witness.iter().zip(columns).map(|(x, c)| x * c[i]).sum())
                .collect();
            println!("          A x = {recombined:?} (b = {b:?})");
        }
        FeasibilityResult::Infeasible { certificate } => {
            println!("{label}: not dominated, certificate y = {certificate:?}");
            for (j, col) in columns.iter().enumerate() {
                let v: f64 = col.iter().zip(&certificate).map(|(a, y)| a * y).sum();
                println!("          column {j}: A_j . y = {v:.6} (>= 0)");
            }
            let bty: f64 = b.iter().zip(&certificate).map(|(a, y)| a * y).sum();
            println!("          b . y = {bty:.6} (< 0)");
        }
    }
}

fn main() {
    // Candidate (0.45, 0.45) against the two axis vectors. Strictly inside
    // the axes' "shadow": dominated, and the 2x2 system pins the witness
    // to exactly (4.5, 4.5).
    let candidate = [0.45, 0.45];
    let others = [[1.0, 0.0], [0.0, 1.0]];
    let columns: Vec<Vec<f64>> = others
        .iter()
        .map(|d| candidate.iter().zip(d).map(|(c, o)| c - o).collect())
        .collect();
    let b: Vec<f64> = candidate.iter().map(|c| -c).collect();
    report("(0.45, 0.45) vs axes", &columns, &b);

    println!();

    // Candidate (0.50, 0.50) touches the boundary: along the diagonal
    // direction it ties the axes instead of losing, so no witness exists
    // and the solver returns that diagonal as the certificate.
    let candidate = [0.5, 0.5];
    let columns: Vec<Vec<f64>> = others
        .iter()
        .map(|d| candidate.iter().zip(d).map(|(c, o)| c - o).collect())
        .collect();
    let b: Vec<f64> = candidate.iter().map(|c| -c).collect();
    report("(0.50, 0.50) vs axes", &columns, &b);
}
