//! Seeded synthetic corpora, documents, and queries.
//!
//! Everything here is deterministic given its seed. Corpus generation
//! derives one independent ChaCha stream per document, so a corpus is
//! reproducible no matter how the documents are iterated or parallelized.
//! Token values are quantized through `f32` to match the on-disk format,
//! which keeps write/read round trips bit-exact.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::io::CorpusIndex;
use crate::types::{QueryMatrix, TokenMatrix};

/// Uniform direction on the unit sphere in `d` dimensions.
pub fn unit_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 || d == 0 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn quantize(v: f64) -> f64 {
    v as f32 as f64
}

/// Document with `n` tokens of dimension `d`: uniform directions scaled by
/// uniform radii in `[0, 1)`, quantized to `f32` precision.
pub fn random_token_matrix<R: Rng + ?Sized>(
    doc_id: impl Into<String>,
    n: usize,
    d: usize,
    rng: &mut R,
) -> TokenMatrix {
    let mut data = Vec::with_capacity(n * d);
    for _ in 0..n {
        let radius: f64 = rng.random();
        data.extend(unit_vector(d, rng).into_iter().map(|x| quantize(x * radius)));
    }
    TokenMatrix::new(doc_id, d, data).expect("generated rows satisfy the invariants")
}

/// Query with `m` unit-norm tokens of dimension `d`.
pub fn random_query_matrix<R: Rng + ?Sized>(
    query_id: impl Into<String>,
    m: usize,
    d: usize,
    rng: &mut R,
) -> QueryMatrix {
    assert!(m >= 1, "queries need at least one token");
    let mut data = Vec::with_capacity(m * d);
    for _ in 0..m {
        data.extend(unit_vector(d, rng));
    }
    QueryMatrix::new(query_id, d, data).expect("generated rows satisfy the invariants")
}

/// Corpus of `n_docs` documents with token counts in `1..=max_n`, each
/// drawn from its own seed-derived stream.
pub fn random_corpus(n_docs: usize, max_n: usize, d: usize, seed: u64) -> CorpusIndex {
    assert!(max_n >= 1);
    let mut index = CorpusIndex::new();
    for i in 0..n_docs {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let n = rng.random_range(1..=max_n);
        let doc = random_token_matrix(format!("doc-{i:05}"), n, d, &mut rng);
        index.push(doc).expect("generated ids are unique");
    }
    index
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn unit_vectors_have_unit_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in 1..6 {
            let v = unit_vector(d, &mut rng);
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn corpus_generation_is_deterministic() {
        let a = random_corpus(5, 8, 3, 42);
        let b = random_corpus(5, 8, 3, 42);
        assert_eq!(a.docs(), b.docs());
        let c = random_corpus(5, 8, 3, 43);
        assert_ne!(a.docs(), c.docs());
    }

    #[test]
    fn token_values_are_f32_representable() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let doc = random_token_matrix("d", 6, 4, &mut rng);
        for &v in doc.as_slice() {
            assert_eq!(v, v as f32 as f64);
        }
    }
}
