//! The two on-disk formats: human-readable JSONL and the compact binary
//! index, both round-tripping the same corpus without losing a bit.
//!
//! Token values are stored as 32-bit floats on disk (the binary format by
//! layout, the JSONL path by quantizing at generation time), widened to
//! f64 in memory — so write/read cycles reproduce values exactly, which
//! the verification harness depends on.
//!
//! Run with: cargo run --example corpus_roundtrip

use dprune::io::{
    read_corpus_auto, read_corpus_jsonl, read_index, write_corpus_jsonl, write_index,
};
use dprune::synth::random_corpus;

fn main() {
    let corpus = random_corpus(25, 10, 4, 12);
    let dir = tempfile::tempdir().expect("temp directory");
    let jsonl_path = dir.path().join("corpus.jsonl");
    let binary_path = dir.path().join("corpus.dpr");

    write_corpus_jsonl(&corpus, &jsonl_path).expect("write JSONL");
    write_index(&corpus, &binary_path).expect("write binary");
    let jsonl_bytes = std::fs::metadata(&jsonl_path).unwrap().len();
    let binary_bytes = std::fs::metadata(&binary_path).unwrap().len();
    println!(
        "{} docs, {} tokens -> {} bytes as JSONL, {} bytes as binary",
        corpus.len(),
        corpus.total_tokens(),
        jsonl_bytes,
        binary_bytes
    );

    let from_jsonl = read_corpus_jsonl(&jsonl_path).expect("read JSONL");
    let from_binary = read_index(&binary_path).expect("read binary");

    let mut exact = true;
    for (a, b) in from_jsonl.docs().iter().zip(from_binary.docs()) {
        let original = corpus.get(a.doc_id()).unwrap();
        exact &= bits(a) == bits(original) && bits(b) == bits(original);
    }
    println!("bit-exact after both round trips: {exact}");
    assert!(exact);

    // Readers sniff the leading magic bytes, so callers never say which
    // format a file is in.
    let sniffed_jsonl = read_corpus_auto(&jsonl_path).expect("auto-detect JSONL");
    let sniffed_binary = read_corpus_auto(&binary_path).expect("auto-detect binary");
    println!(
        "auto-detection: JSONL gave {} docs, binary gave {} docs",
        sniffed_jsonl.len(),
        sniffed_binary.len()
    );

    // The binary reader rejects tampering loudly rather than mis-reading.
    let mut bytes = std::fs::read(&binary_path).unwrap();
    bytes.truncate(bytes.len() - 3);
    std::fs::write(&binary_path, bytes).unwrap();
    match read_index(&binary_path) {
        Err(e) => println!("truncated file rejected: {e}"),
        Ok(_) => unreachable!("a truncated index must not parse"),
    }
}

fn bits(m: &dprune::TokenMatrix) -> Vec<u64> {
    m.as_slice().iter().map(|v| v.to_bits()).collect()
}
