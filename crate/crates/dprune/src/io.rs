//! Corpus container and on-disk formats.
//!
//! Two interchangeable representations exist: line-delimited JSON for
//! interchange (`{"doc_id": ..., "vectors": [[...], ...]}` per line) and a
//! compact little-endian binary index. The binary layout is:
//!
//! ```text
//! magic    4 bytes  "DPR1"
//! version  u32
//! dim      u32
//! count    u64
//! per document:
//!   id_len   u16
//!   id       id_len bytes of UTF-8
//!   n        u32
//!   values   n * dim * f32, row-major
//! ```
//!
//! Values are stored as `f32`; widening back to `f64` is exact, so a
//! write/read round trip of `f32`-representable data is bit-identical.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::{CoreError, QueryMatrix, TokenMatrix};

pub const MAGIC: [u8; 4] = *b"DPR1";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {detail}")]
    ParseError { line: usize, detail: String },
    #[error("document {doc_id}: {reason}")]
    InvariantViolation { doc_id: String, reason: String },
    #[error("not an index file: bad magic bytes")]
    BadMagic,
    #[error("unsupported index format version {version}")]
    VersionUnsupported { version: u32 },
    #[error("index file truncated in document {ordinal}")]
    Truncated { ordinal: u64 },
}

fn invariant(doc_id: &str, err: CoreError) -> IoError {
    IoError::InvariantViolation {
        doc_id: doc_id.to_owned(),
        reason: err.to_string(),
    }
}

/// An ordered collection of documents with a single shared dimension and
/// unique ids. `dim` stays `None` until the first document arrives.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorpusIndex {
    docs: Vec<TokenMatrix>,
    by_id: HashMap<String, usize>,
    dim: Option<usize>,
    format_version: u32,
}

impl CorpusIndex {
    pub fn new() -> Self {
        Self {
            docs: Vec::new(),
            by_id: HashMap::new(),
            dim: None,
            format_version: FORMAT_VERSION,
        }
    }

    pub fn from_docs(docs: Vec<TokenMatrix>) -> Result<Self, IoError> {
        let mut index = Self::new();
        for doc in docs {
            index.push(doc)?;
        }
        Ok(index)
    }

    /// Appends a document, enforcing dimension agreement and id uniqueness.
    pub fn push(&mut self, doc: TokenMatrix) -> Result<(), IoError> {
        if let Some(dim) = self.dim {
            if doc.d() != dim {
                return Err(IoError::InvariantViolation {
                    doc_id: doc.doc_id().to_owned(),
                    reason: format!("dimension {} differs from index dimension {dim}", doc.d()),
                });
            }
        } else {
            self.dim = Some(doc.d());
        }
        if self.by_id.contains_key(doc.doc_id()) {
            return Err(IoError::InvariantViolation {
                doc_id: doc.doc_id().to_owned(),
                reason: "duplicate doc_id".to_owned(),
            });
        }
        self.by_id.insert(doc.doc_id().to_owned(), self.docs.len());
        self.docs.push(doc);
        Ok(())
    }

    pub fn docs(&self) -> &[TokenMatrix] {
        &self.docs
    }

    pub fn get(&self, doc_id: &str) -> Option<&TokenMatrix> {
        self.by_id.get(doc_id).map(|&i| &self.docs[i])
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn total_tokens(&self) -> usize {
        self.docs.iter().map(|d| d.n()).sum()
    }

    pub fn format_version(&self) -> u32 {
        self.format_version
    }
}

#[derive(Serialize, Deserialize)]
struct DocLine {
    doc_id: String,
    vectors: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct QueryLine {
    query_id: String,
    vectors: Vec<Vec<f64>>,
}

/// Reads a line-delimited JSON corpus. An empty `vectors` list is only
/// legal once an earlier document has pinned the dimension.
pub fn read_corpus_jsonl(path: impl AsRef<Path>) -> Result<CorpusIndex, IoError> {
    let reader = BufReader::new(File::open(path)?);
    let mut index = CorpusIndex::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: DocLine =
            serde_json::from_str(&line).map_err(|e| IoError::ParseError {
                line: lineno + 1,
                detail: e.to_string(),
            })?;
        let doc = if parsed.vectors.is_empty() {
            let Some(dim) = index.dim() else {
                return Err(IoError::ParseError {
                    line: lineno + 1,
                    detail: "empty document before any dimension is known".to_owned(),
                });
            };
            TokenMatrix::empty(&parsed.doc_id, dim).map_err(|e| invariant(&parsed.doc_id, e))?
        } else {
            TokenMatrix::from_rows(&parsed.doc_id, &parsed.vectors)
                .map_err(|e| invariant(&parsed.doc_id, e))?
        };
        index.push(doc)?;
    }
    Ok(index)
}

/// Writes the corpus as line-delimited JSON.
pub fn write_corpus_jsonl(index: &CorpusIndex, path: impl AsRef<Path>) -> Result<(), IoError> {
    let mut w = BufWriter::new(File::create(path)?);
    for doc in index.docs() {
        let line = DocLine {
            doc_id: doc.doc_id().to_owned(),
            vectors: doc.rows().map(<[f64]>::to_vec).collect(),
        };
        serde_json::to_writer(&mut w, &line).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads query matrices from line-delimited JSON
/// (`{"query_id": ..., "vectors": [[...], ...]}`).
pub fn read_queries_jsonl(path: impl AsRef<Path>) -> Result<Vec<QueryMatrix>, IoError> {
    let reader = BufReader::new(File::open(path)?);
    let mut queries = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: QueryLine =
            serde_json::from_str(&line).map_err(|e| IoError::ParseError {
                line: lineno + 1,
                detail: e.to_string(),
            })?;
        let q = QueryMatrix::from_rows(&parsed.query_id, &parsed.vectors)
            .map_err(|e| invariant(&parsed.query_id, e))?;
        queries.push(q);
    }
    Ok(queries)
}

/// Writes the binary index format described in the module docs.
pub fn write_index(index: &CorpusIndex, path: impl AsRef<Path>) -> Result<(), IoError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&MAGIC)?;
    w.write_all(&index.format_version().to_le_bytes())?;
    let dim = index.dim().unwrap_or(0) as u32;
    w.write_all(&dim.to_le_bytes())?;
    w.write_all(&(index.len() as u64).to_le_bytes())?;
    for doc in index.docs() {
        let id = doc.doc_id().as_bytes();
        let id_len = u16::try_from(id.len()).map_err(|_| IoError::InvariantViolation {
            doc_id: doc.doc_id().to_owned(),
            reason: "doc_id longer than 65535 bytes".to_owned(),
        })?;
        w.write_all(&id_len.to_le_bytes())?;
        w.write_all(id)?;
        w.write_all(&(doc.n() as u32).to_le_bytes())?;
        for &v in doc.as_slice() {
            w.write_all(&(v as f32).to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_exact_or_truncated(
    r: &mut impl Read,
    buf: &mut [u8],
    ordinal: u64,
) -> Result<(), IoError> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            IoError::Truncated { ordinal }
        } else {
            IoError::Io(e)
        }
    })
}

/// Reads the binary index format, re-validating every invariant on the way
/// in: magic, version, row norms, dimension agreement, id uniqueness.
pub fn read_index(path: impl AsRef<Path>) -> Result<CorpusIndex, IoError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    read_exact_or_truncated(&mut r, &mut magic, 0)?;
    if magic != MAGIC {
        return Err(IoError::BadMagic);
    }
    let mut u32buf = [0u8; 4];
    read_exact_or_truncated(&mut r, &mut u32buf, 0)?;
    let version = u32::from_le_bytes(u32buf);
    if version != FORMAT_VERSION {
        return Err(IoError::VersionUnsupported { version });
    }
    read_exact_or_truncated(&mut r, &mut u32buf, 0)?;
    let dim = u32::from_le_bytes(u32buf) as usize;
    let mut u64buf = [0u8; 8];
    read_exact_or_truncated(&mut r, &mut u64buf, 0)?;
    let count = u64::from_le_bytes(u64buf);

    let mut index = CorpusIndex::new();
    for ordinal in 0..count {
        let mut u16buf = [0u8; 2];
        read_exact_or_truncated(&mut r, &mut u16buf, ordinal)?;
        let id_len = u16::from_le_bytes(u16buf) as usize;
        let mut id = vec![0u8; id_len];
        read_exact_or_truncated(&mut r, &mut id, ordinal)?;
        let doc_id = String::from_utf8(id).map_err(|_| IoError::InvariantViolation {
            doc_id: format!("#{ordinal}"),
            reason: "doc_id is not UTF-8".to_owned(),
        })?;
        read_exact_or_truncated(&mut r, &mut u32buf, ordinal)?;
        let n = u32::from_le_bytes(u32buf) as usize;
        let mut bytes = vec![0u8; n * dim * 4];
        read_exact_or_truncated(&mut r, &mut bytes, ordinal)?;
        let data: Vec<f64> = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect();
        let doc = TokenMatrix::new(&doc_id, dim, data).map_err(|e| invariant(&doc_id, e))?;
        index.push(doc)?;
    }
    Ok(index)
}

/// Reads a corpus from either format, sniffing the binary magic bytes.
pub fn read_corpus_auto(path: impl AsRef<Path>) -> Result<CorpusIndex, IoError> {
    let path = path.as_ref();
    let mut head = [0u8; 4];
    let is_binary = {
        let mut f = File::open(path)?;
        match f.read_exact(&mut head) {
            Ok(()) => head == MAGIC,
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => false,
            Err(e) => return Err(IoError::Io(e)),
        }
    };
    if is_binary {
        read_index(path)
    } else {
        read_corpus_jsonl(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    fn sample_index() -> CorpusIndex {
        synth::random_corpus(6, 10, 3, 99)
    }

    #[test]
    fn binary_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("idx.bin");
        let index = sample_index();
        write_index(&index, &path).unwrap();
        let back = read_index(&path).unwrap();
        assert_eq!(index.docs(), back.docs());
        assert_eq!(back.dim(), Some(3));
    }

    #[test]
    fn jsonl_round_trip_preserves_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        let index = sample_index();
        write_corpus_jsonl(&index, &path).unwrap();
        let back = read_corpus_jsonl(&path).unwrap();
        assert_eq!(index.docs(), back.docs());
    }

    #[test]
    fn auto_detection_handles_both() {
        let dir = tempfile::tempdir().unwrap();
        let bin = dir.path().join("idx.bin");
        let jsonl = dir.path().join("corpus.jsonl");
        let index = sample_index();
        write_index(&index, &bin).unwrap();
        write_corpus_jsonl(&index, &jsonl).unwrap();
        assert_eq!(read_corpus_auto(&bin).unwrap().docs(), index.docs());
        assert_eq!(read_corpus_auto(&jsonl).unwrap().docs(), index.docs());
    }

    #[test]
    fn truncated_file_names_the_document() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("idx.bin");
        write_index(&sample_index(), &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
        match read_index(&path) {
            Err(IoError::Truncated { ordinal }) => assert_eq!(ordinal, 5),
            other => panic!("expected truncation, got {other:?}"),
        }
    }

    #[test]
    fn bad_magic_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("idx.bin");
        std::fs::write(&path, b"NOPE0000000000000000").unwrap();
        assert!(matches!(read_index(&path), Err(IoError::BadMagic)));
    }

    #[test]
    fn future_version_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("idx.bin");
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&MAGIC);
        bytes.extend_from_slice(&2u32.to_le_bytes());
        bytes.extend_from_slice(&0u32.to_le_bytes());
        bytes.extend_from_slice(&0u64.to_le_bytes());
        std::fs::write(&path, bytes).unwrap();
        assert!(matches!(
            read_index(&path),
            Err(IoError::VersionUnsupported { version: 2 })
        ));
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let a = TokenMatrix::from_rows("same", &[vec![0.1]]).unwrap();
        let b = TokenMatrix::from_rows("same", &[vec![0.2]]).unwrap();
        let err = CorpusIndex::from_docs(vec![a, b]).unwrap_err();
        assert!(matches!(err, IoError::InvariantViolation { .. }));
    }

    #[test]
    fn mixed_dimensions_are_rejected() {
        let a = TokenMatrix::from_rows("a", &[vec![0.1]]).unwrap();
        let b = TokenMatrix::from_rows("b", &[vec![0.2, 0.3]]).unwrap();
        let err = CorpusIndex::from_docs(vec![a, b]).unwrap_err();
        assert!(matches!(err, IoError::InvariantViolation { .. }));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        let mut f = File::create(&path).unwrap();
        writeln!(f, r#"{{"doc_id": "ok", "vectors": [[0.1, 0.2]]}}"#).unwrap();
        writeln!(f, "not json at all").unwrap();
        drop(f);
        match read_corpus_jsonl(&path) {
            Err(IoError::ParseError { line: 2, .. }) => {}
            other => panic!("expected parse error on line 2, got {other:?}"),
        }
    }

    #[test]
    fn norm_violations_surface_as_invariants() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("big.jsonl");
        std::fs::write(&path, r#"{"doc_id": "d", "vectors": [[1.5, 0.0]]}"#).unwrap();
        match read_corpus_jsonl(&path) {
            Err(IoError::InvariantViolation { doc_id, .. }) => assert_eq!(doc_id, "d"),
            other => panic!("expected invariant violation, got {other:?}"),
        }
    }

    #[test]
    fn empty_index_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.bin");
        write_index(&CorpusIndex::new(), &path).unwrap();
        let back = read_index(&path).unwrap();
        assert!(back.is_empty());
        assert_eq!(back.dim(), None);
    }

    #[test]
    fn empty_jsonl_document_uses_known_dimension() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        std::fs::write(
            &path,
            concat!(
                r#"{"doc_id": "a", "vectors": [[0.1, 0.2]]}"#,
                "\n",
                r#"{"doc_id": "b", "vectors": []}"#,
                "\n",
            ),
        )
        .unwrap();
        let index = read_corpus_jsonl(&path).unwrap();
        assert_eq!(index.get("b").unwrap().n(), 0);
        assert_eq!(index.get("b").unwrap().d(), 2);
    }
}
