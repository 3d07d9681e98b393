//! Dense word-embedding tables in the word2vec interchange formats.
//!
//! A table maps tokens to fixed-dimension vectors of finite `f32`
//! components. Vectors are stored as 32-bit floats, matching the on-disk
//! format; every reduction over them (dot products, norms, means) runs in
//! 64-bit accumulators. Tables are immutable once loaded and safe to share
//! across threads.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

/// Errors from table construction, lookup math, and the two file formats.
#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("cannot open {path}: {source}")]
    Open {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("malformed header at byte {offset}: {detail}")]
    MalformedHeader { offset: usize, detail: String },
    #[error("truncated record at token index {index}: {detail}")]
    TruncatedRecord { index: usize, detail: String },
    #[error("duplicate token {token:?}")]
    DuplicateToken { token: String },
    #[error("empty token at record index {index}")]
    EmptyToken { index: usize },
    #[error("token at record index {index} is not valid UTF-8")]
    TokenNotUtf8 { index: usize },
    #[error("non-finite component {component} in vector for token {token:?}")]
    NonFiniteComponent { token: String, component: usize },
    #[error("line {line}: {detail}")]
    TextParse { line: usize, detail: String },
    #[error("vector dimensionality must be positive")]
    ZeroDimension,
    #[error("vector for token {token:?} has {got} components, table dimension is {expected}")]
    WrongArity {
        token: String,
        expected: usize,
        got: usize,
    },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
}

/// Token → dense-vector map of fixed dimensionality.
///
/// Insertion order is preserved, so a table written back to disk keeps the
/// record order of its source file.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    matrix: Vec<f32>,
}

impl EmbeddingTable {
    /// Creates an empty table of the given dimensionality.
    pub fn new(dim: usize) -> Result<Self, EmbeddingError> {
        if dim == 0 {
            return Err(EmbeddingError::ZeroDimension);
        }
        Ok(EmbeddingTable {
            dim,
            tokens: Vec::new(),
            index: HashMap::new(),
            matrix: Vec::new(),
        })
    }

    /// Builds a table from `(token, vector)` pairs, in order.
    pub fn from_entries<S, V>(
        dim: usize,
        entries: impl IntoIterator<Item = (S, V)>,
    ) -> Result<Self, EmbeddingError>
    where
        S: Into<String>,
        V: AsRef<[f32]>,
    {
        let mut table = EmbeddingTable::new(dim)?;
        for (token, vector) in entries {
            table.push(token.into(), vector.as_ref())?;
        }
        Ok(table)
    }

    /// Appends one entry, enforcing the table invariants: the token is
    /// non-empty and unused, the vector has exactly `dim` finite components.
    pub fn push(&mut self, token: String, vector: &[f32]) -> Result<(), EmbeddingError> {
        if token.is_empty() {
            return Err(EmbeddingError::EmptyToken {
                index: self.tokens.len(),
            });
        }
        if self.index.contains_key(&token) {
            return Err(EmbeddingError::DuplicateToken { token });
        }
        if vector.len() != self.dim {
            return Err(EmbeddingError::WrongArity {
                token,
                expected: self.dim,
                got: vector.len(),
            });
        }
        if let Some(component) = vector.iter().position(|v| !v.is_finite()) {
            return Err(EmbeddingError::NonFiniteComponent { token, component });
        }
        self.index.insert(token.clone(), self.tokens.len());
        self.tokens.push(token);
        self.matrix.extend_from_slice(vector);
        Ok(())
    }

    /// Vector dimensionality.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored tokens.
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Returns the stored vector for `token`, or `None` when out of
    /// vocabulary. Matching is exact byte equality; any normalization
    /// happens upstream.
    pub fn lookup(&self, token: &str) -> Option<&[f32]> {
        self.index
            .get(token)
            .map(|&i| &self.matrix[i * self.dim..(i + 1) * self.dim])
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    /// Iterates entries in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f32])> {
        self.tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.as_str(), &self.matrix[i * self.dim..(i + 1) * self.dim]))
    }

    /// Arithmetic mean of the vectors of in-vocabulary tokens, together with
    /// how many token occurrences were in vocabulary. Repeated tokens count
    /// once per occurrence. With no in-vocabulary token the mean is the zero
    /// vector and the count is 0.
    pub fn mean_vector<S: AsRef<str>>(&self, tokens: &[S]) -> (Vec<f64>, usize) {
        let mut sum = vec![0.0f64; self.dim];
        let mut hits = 0usize;
        for token in tokens {
            if let Some(vector) = self.lookup(token.as_ref()) {
                for (acc, &v) in sum.iter_mut().zip(vector) {
                    *acc += f64::from(v);
                }
                hits += 1;
            }
        }
        if hits > 0 {
            let inv = 1.0 / hits as f64;
            for acc in &mut sum {
                *acc *= inv;
            }
        }
        (sum, hits)
    }
}

/// Anything cosine/euclidean math accepts as a vector component.
pub trait Component: Copy {
    fn to_f64(self) -> f64;
}

impl Component for f32 {
    fn to_f64(self) -> f64 {
        f64::from(self)
    }
}

impl Component for f64 {
    fn to_f64(self) -> f64 {
        self
    }
}

fn check_dims<A: Component, B: Component>(a: &[A], b: &[B]) -> Result<(), EmbeddingError> {
    if a.len() != b.len() {
        return Err(EmbeddingError::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

/// Cosine similarity in `[-1, 1]`, computed with 64-bit accumulators.
///
/// A zero-norm argument yields 0 (neutral similarity) so fully
/// out-of-vocabulary sentences flow through the feature extractor instead of
/// crashing it. The result is clamped against floating-point drift.
pub fn cosine_similarity<T: Component>(a: &[T], b: &[T]) -> Result<f64, EmbeddingError> {
    check_dims(a, b)?;
    let mut dot = 0.0f64;
    let mut norm_a = 0.0f64;
    let mut norm_b = 0.0f64;
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (x.to_f64(), y.to_f64());
        dot += x * y;
        norm_a += x * x;
        norm_b += y * y;
    }
    if norm_a == 0.0 || norm_b == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / (norm_a.sqrt() * norm_b.sqrt())).clamp(-1.0, 1.0))
}

/// Euclidean distance `‖a − b‖₂`, computed with 64-bit accumulators.
pub fn euclidean_distance<T: Component>(a: &[T], b: &[T]) -> Result<f64, EmbeddingError> {
    check_dims(a, b)?;
    let mut sum = 0.0f64;
    for (&x, &y) in a.iter().zip(b) {
        let d = x.to_f64() - y.to_f64();
        sum += d * d;
    }
    Ok(sum.sqrt())
}

// ---------------------------------------------------------------------------
// word2vec binary format: header "count dim\n", then per record the token
// bytes, one 0x20, dim little-endian float32, and an optional trailing 0x0A.
// ---------------------------------------------------------------------------

/// Loads a word2vec binary table from a file.
pub fn load_word2vec_binary(path: impl AsRef<Path>) -> Result<EmbeddingTable, EmbeddingError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| EmbeddingError::Open {
        path: path.display().to_string(),
        source,
    })?;
    read_word2vec_binary(&mut BufReader::new(file))
}

/// Loads a word2vec binary table from any buffered reader.
pub fn read_word2vec_binary<R: BufRead>(reader: &mut R) -> Result<EmbeddingTable, EmbeddingError> {
    let (count, dim, header_len) = read_header(reader)?;
    let mut table = EmbeddingTable::new(dim)?;
    let mut offset = header_len;
    let mut float_buf = vec![0u8; dim * 4];
    for record in 0..count {
        let mut token_bytes = Vec::new();
        let n = reader.read_until(b' ', &mut token_bytes)?;
        if n == 0 || *token_bytes.last().unwrap() != b' ' {
            return Err(EmbeddingError::TruncatedRecord {
                index: record,
                detail: format!("end of file while reading token (byte offset {offset})"),
            });
        }
        offset += n;
        token_bytes.pop();
        let token = String::from_utf8(token_bytes)
            .map_err(|_| EmbeddingError::TokenNotUtf8 { index: record })?;
        reader
            .read_exact(&mut float_buf)
            .map_err(|e| EmbeddingError::TruncatedRecord {
                index: record,
                detail: format!("expected {dim} float32 components for token {token:?}: {e}"),
            })?;
        offset += float_buf.len();
        let vector: Vec<f32> = float_buf
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        table.push(token, &vector)?;
        // Consume the optional newline between records.
        let buf = reader.fill_buf()?;
        if buf.first() == Some(&b'\n') {
            reader.consume(1);
            offset += 1;
        }
    }
    let mut rest = [0u8; 1];
    if reader.read(&mut rest)? != 0 {
        return Err(EmbeddingError::MalformedHeader {
            offset,
            detail: format!("trailing data after the {count} records declared in the header"),
        });
    }
    Ok(table)
}

fn read_header<R: BufRead>(reader: &mut R) -> Result<(usize, usize, usize), EmbeddingError> {
    let mut line = Vec::new();
    let n = reader.read_until(b'\n', &mut line)?;
    if n == 0 || *line.last().unwrap() != b'\n' {
        return Err(EmbeddingError::MalformedHeader {
            offset: n,
            detail: "missing header line \"<count> <dim>\"".into(),
        });
    }
    let text =
        std::str::from_utf8(&line[..n - 1]).map_err(|e| EmbeddingError::MalformedHeader {
            offset: e.valid_up_to(),
            detail: "header is not ASCII".into(),
        })?;
    let mut fields = text.split(' ');
    let count = parse_header_field(fields.next(), 0, text)?;
    let dim = parse_header_field(fields.next(), count.1, text)?;
    if fields.next().is_some() {
        return Err(EmbeddingError::MalformedHeader {
            offset: 0,
            detail: format!("expected exactly two fields in header, got {text:?}"),
        });
    }
    Ok((count.0, dim.0, n))
}

fn parse_header_field(
    field: Option<&str>,
    offset: usize,
    whole: &str,
) -> Result<(usize, usize), EmbeddingError> {
    let field = field.ok_or_else(|| EmbeddingError::MalformedHeader {
        offset,
        detail: format!("expected \"<count> <dim>\", got {whole:?}"),
    })?;
    let value = field
        .parse::<usize>()
        .map_err(|_| EmbeddingError::MalformedHeader {
            offset,
            detail: format!("cannot parse {field:?} as an unsigned integer"),
        })?;
    Ok((value, offset + field.len() + 1))
}

/// Writes a table in word2vec binary format (one trailing newline per
/// record, as the original tool emits).
pub fn write_word2vec_binary(
    table: &EmbeddingTable,
    path: impl AsRef<Path>,
) -> Result<(), EmbeddingError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| EmbeddingError::Open {
        path: path.display().to_string(),
        source,
    })?;
    let mut writer = BufWriter::new(file);
    write_word2vec_binary_to(table, &mut writer)?;
    writer.flush()?;
    Ok(())
}

/// Writes a table in word2vec binary format to any writer.
pub fn write_word2vec_binary_to<W: Write>(
    table: &EmbeddingTable,
    writer: &mut W,
) -> io::Result<()> {
    write!(writer, "{} {}\n", table.len(), table.dim())?;
    for (token, vector) in table.iter() {
        writer.write_all(token.as_bytes())?;
        writer.write_all(b" ")?;
        for &v in vector {
            writer.write_all(&v.to_le_bytes())?;
        }
        writer.write_all(b"\n")?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// word2vec text format: same header, then one "token v1 .. vdim" line per
// record with space-separated decimal floats.
// ---------------------------------------------------------------------------

/// Loads a word2vec text table from a file.
pub fn load_word2vec_text(path: impl AsRef<Path>) -> Result<EmbeddingTable, EmbeddingError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| EmbeddingError::Open {
        path: path.display().to_string(),
        source,
    })?;
    read_word2vec_text(&mut BufReader::new(file))
}

/// Loads a word2vec text table from any buffered reader. Line numbers in
/// errors are 1-based; the header is line 1.
pub fn read_word2vec_text<R: BufRead>(reader: &mut R) -> Result<EmbeddingTable, EmbeddingError> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .transpose()?
        .ok_or_else(|| EmbeddingError::TextParse {
            line: 1,
            detail: "missing header line \"<count> <dim>\"".into(),
        })?;
    let mut fields = header.split_whitespace();
    let (count, dim) = match (
        fields.next().and_then(|f| f.parse::<usize>().ok()),
        fields.next().and_then(|f| f.parse::<usize>().ok()),
        fields.next(),
    ) {
        (Some(count), Some(dim), None) => (count, dim),
        _ => {
            return Err(EmbeddingError::TextParse {
                line: 1,
                detail: format!("cannot parse header {header:?} as \"<count> <dim>\""),
            })
        }
    };
    let mut table = EmbeddingTable::new(dim)?;
    for record in 0..count {
        let line_no = record + 2;
        let line = lines
            .next()
            .transpose()?
            .ok_or_else(|| EmbeddingError::TextParse {
                line: line_no,
                detail: format!("expected {count} records, file ends after {record}"),
            })?;
        let mut fields = line.split_whitespace();
        let token = fields
            .next()
            .ok_or_else(|| EmbeddingError::TextParse {
                line: line_no,
                detail: "empty record line".into(),
            })?
            .to_string();
        let mut vector = Vec::with_capacity(dim);
        for field in fields {
            let v = field
                .parse::<f32>()
                .map_err(|_| EmbeddingError::TextParse {
                    line: line_no,
                    detail: format!("cannot parse component {field:?} as a float"),
                })?;
            vector.push(v);
        }
        if vector.len() != dim {
            return Err(EmbeddingError::TextParse {
                line: line_no,
                detail: format!(
                    "token {token:?} has {} components, header declares {dim}",
                    vector.len()
                ),
            });
        }
        table.push(token, &vector)?;
    }
    for line in lines {
        if !line?.trim().is_empty() {
            return Err(EmbeddingError::TextParse {
                line: count + 2,
                detail: format!("trailing data after the {count} records declared in the header"),
            });
        }
    }
    Ok(table)
}

/// Writes a table in word2vec text format. Components are printed with the
/// shortest decimal representation that parses back to the same `f32`, so a
/// text round trip is exact.
pub fn write_word2vec_text(
    table: &EmbeddingTable,
    path: impl AsRef<Path>,
) -> Result<(), EmbeddingError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| EmbeddingError::Open {
        path: path.display().to_string(),
        source,
    })?;
    let mut writer = BufWriter::new(file);
    write_word2vec_text_to(table, &mut writer)?;
    writer.flush()?;
    Ok(())
}

/// Writes a table in word2vec text format to any writer.
pub fn write_word2vec_text_to<W: Write>(table: &EmbeddingTable, writer: &mut W) -> io::Result<()> {
    writeln!(writer, "{} {}", table.len(), table.dim())?;
    for (token, vector) in table.iter() {
        write!(writer, "{token}")?;
        for &v in vector {
            write!(writer, " {v}")?;
        }
        writeln!(writer)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table_abc() -> EmbeddingTable {
        EmbeddingTable::from_entries(
            2,
            vec![
                ("a", vec![2.0f32, 4.0]),
                ("b", vec![0.0, 1.0]),
                ("c", vec![-1.5, 0.5]),
            ],
        )
        .unwrap()
    }

    fn binary_bytes(table: &EmbeddingTable) -> Vec<u8> {
        let mut buf = Vec::new();
        write_word2vec_binary_to(table, &mut buf).unwrap();
        buf
    }

    #[test]
    fn binary_minimal_file() {
        let mut bytes = b"2 3\n".to_vec();
        bytes.extend_from_slice(b"a ");
        for v in [1.0f32, 0.0, 0.0] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        bytes.extend_from_slice(b"\nb ");
        for v in [0.0f32, 1.0, 0.0] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        bytes.push(b'\n');
        let table = read_word2vec_binary(&mut bytes.as_slice()).unwrap();
        assert_eq!(table.len(), 2);
        assert_eq!(table.dim(), 3);
        assert_eq!(table.lookup("a").unwrap(), &[1.0, 0.0, 0.0]);
        assert_eq!(table.lookup("b").unwrap(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn binary_truncated_record_names_token_index() {
        let mut bytes = b"1 300\n".to_vec();
        bytes.extend_from_slice(b"palavra ");
        for i in 0..299 {
            bytes.extend_from_slice(&(i as f32).to_le_bytes());
        }
        let err = read_word2vec_binary(&mut bytes.as_slice()).unwrap_err();
        match err {
            EmbeddingError::TruncatedRecord { index, .. } => assert_eq!(index, 0),
            other => panic!("expected truncated record, got {other:?}"),
        }
    }

    #[test]
    fn binary_malformed_header() {
        let err = read_word2vec_binary(&mut b"abc def\nxxxx".as_slice()).unwrap_err();
        assert!(matches!(err, EmbeddingError::MalformedHeader { .. }));
        let err = read_word2vec_binary(&mut b"12\n".as_slice()).unwrap_err();
        assert!(matches!(err, EmbeddingError::MalformedHeader { .. }));
    }

    #[test]
    fn binary_duplicate_token_rejected() {
        let mut bytes = b"2 1\n".to_vec();
        for _ in 0..2 {
            bytes.extend_from_slice(b"dup ");
            bytes.extend_from_slice(&1.0f32.to_le_bytes());
            bytes.push(b'\n');
        }
        match read_word2vec_binary(&mut bytes.as_slice()).unwrap_err() {
            EmbeddingError::DuplicateToken { token } => assert_eq!(token, "dup"),
            other => panic!("expected duplicate token, got {other:?}"),
        }
    }

    #[test]
    fn text_minimal_file() {
        let table = read_word2vec_text(&mut "1 2\nx 0.5 -0.5\n".as_bytes()).unwrap();
        assert_eq!(table.len(), 1);
        assert_eq!(table.lookup("x").unwrap(), &[0.5, -0.5]);
    }

    #[test]
    fn text_non_numeric_component_names_line() {
        let err = read_word2vec_text(&mut "2 2\nx 0.5 -0.5\ny 0.1 oops\n".as_bytes()).unwrap_err();
        match err {
            EmbeddingError::TextParse { line, .. } => assert_eq!(line, 3),
            other => panic!("expected text parse error, got {other:?}"),
        }
    }

    #[test]
    fn text_rejects_non_finite() {
        let err = read_word2vec_text(&mut "1 1\nx NaN\n".as_bytes()).unwrap_err();
        assert!(matches!(err, EmbeddingError::NonFiniteComponent { .. }));
    }

    #[test]
    fn lookup_present_and_absent() {
        let table = table_abc();
        assert_eq!(table.lookup("a").unwrap(), &[2.0, 4.0]);
        assert!(table.lookup("__unseen__").is_none());
    }

    #[test]
    fn lookup_never_fabricates() {
        let table = table_abc();
        let bytes = binary_bytes(&table);
        let loaded = read_word2vec_binary(&mut bytes.as_slice()).unwrap();
        let mut present = 0;
        for (token, _) in table.iter() {
            assert!(loaded.lookup(token).is_some());
            present += 1;
        }
        assert_eq!(present, loaded.len());
        assert!(loaded.lookup("not-there").is_none());
    }

    #[test]
    fn mean_vector_basics() {
        let table = table_abc();
        let (mean, hits) = table.mean_vector(&["a", "a"]);
        assert_eq!(hits, 2);
        assert_eq!(mean, vec![2.0, 4.0]);

        let table =
            EmbeddingTable::from_entries(2, vec![("a", vec![1.0f32, 0.0]), ("b", vec![0.0, 1.0])])
                .unwrap();
        let (mean, hits) = table.mean_vector(&["a", "b"]);
        assert_eq!(hits, 2);
        assert_eq!(mean, vec![0.5, 0.5]);

        let (mean, hits) = table.mean_vector(&["zz"]);
        assert_eq!(hits, 0);
        assert_eq!(mean, vec![0.0, 0.0]);
    }

    #[test]
    fn mean_of_single_token_equals_lookup() {
        let table = table_abc();
        let (mean, hits) = table.mean_vector(&["c"]);
        assert_eq!(hits, 1);
        let stored = table.lookup("c").unwrap();
        for (m, &s) in mean.iter().zip(stored) {
            assert_eq!(*m, f64::from(s));
        }
    }

    #[test]
    fn cosine_and_euclidean_basics() {
        let v = [0.3f64, -1.2, 4.5];
        assert!((cosine_similarity(&v, &v).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(cosine_similarity(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(euclidean_distance(&v, &v).unwrap(), 0.0);
        assert_eq!(euclidean_distance(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        assert!(matches!(
            cosine_similarity(&[1.0], &[1.0, 2.0]),
            Err(EmbeddingError::DimensionMismatch { left: 1, right: 2 })
        ));
    }

    /// Compensated (Neumaier) summation, the independent high-precision
    /// route for checking dot products and norms.
    fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for v in values {
            let t = sum + v;
            if sum.abs() >= v.abs() {
                comp += (sum - t) + v;
            } else {
                comp += (v - t) + sum;
            }
            sum = t;
        }
        sum + comp
    }

    fn oracle_cosine(a: &[f64], b: &[f64]) -> f64 {
        let dot = kahan_sum(a.iter().zip(b).map(|(x, y)| x * y));
        let na = kahan_sum(a.iter().map(|x| x * x)).sqrt();
        let nb = kahan_sum(b.iter().map(|y| y * y)).sqrt();
        if na == 0.0 || nb == 0.0 {
            0.0
        } else {
            dot / (na * nb)
        }
    }

    fn oracle_euclidean(a: &[f64], b: &[f64]) -> f64 {
        kahan_sum(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y))).sqrt()
    }

    proptest! {
        #[test]
        fn cosine_matches_high_precision_oracle(
            pairs in proptest::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 1..40)
        ) {
            let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let b: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let got = cosine_similarity(&a, &b).unwrap();
            let want = oracle_cosine(&a, &b);
            prop_assert!((got - want.clamp(-1.0, 1.0)).abs() < 1e-10);
            let euc = euclidean_distance(&a, &b).unwrap();
            prop_assert!((euc - oracle_euclidean(&a, &b)).abs() < 1e-10 * (1.0 + euc));
        }

        #[test]
        fn cosine_symmetry_and_scale_invariance(
            pairs in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..20),
            lambda in 0.001f64..1000.0,
        ) {
            let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let b: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let scaled: Vec<f64> = a.iter().map(|x| x * lambda).collect();
            let ab = cosine_similarity(&a, &b).unwrap();
            let ba = cosine_similarity(&b, &a).unwrap();
            let sb = cosine_similarity(&scaled, &b).unwrap();
            prop_assert!((ab - ba).abs() < 1e-12);
            prop_assert!((ab - sb).abs() < 1e-12);
        }

        #[test]
        fn mean_vector_matches_summation_oracle(
            entries in proptest::collection::vec(
                (proptest::string::string_regex("[a-z]{1,4}").unwrap(),
                 proptest::collection::vec(-50.0f32..50.0, 3)),
                1..12),
            picks in proptest::collection::vec(0usize..20, 0..15),
        ) {
            let mut seen = std::collections::HashSet::new();
            let entries: Vec<_> = entries
                .into_iter()
                .filter(|(t, _)| seen.insert(t.clone()))
                .collect();
            let table = EmbeddingTable::from_entries(3, entries.clone()).unwrap();
            let vocab: Vec<String> = entries.iter().map(|(t, _)| t.clone()).collect();
            // Mix in-vocabulary picks with guaranteed out-of-vocabulary ones.
            let tokens: Vec<String> = picks
                .iter()
                .map(|&i| {
                    if i < vocab.len() {
                        vocab[i].clone()
                    } else {
                        format!("__oov{i}__")
                    }
                })
                .collect();
            let (mean, hits) = table.mean_vector(&tokens);

            let mut expect = vec![0.0f64; 3];
            let mut expect_hits = 0usize;
            for t in &tokens {
                if let Some((_, v)) = entries.iter().find(|(tok, _)| tok == t) {
                    for (e, &x) in expect.iter_mut().zip(v) {
                        *e += f64::from(x);
                    }
                    expect_hits += 1;
                }
            }
            prop_assert_eq!(hits, expect_hits);
            for (m, e) in mean.iter().zip(&expect) {
                let e = if expect_hits > 0 { e / expect_hits as f64 } else { 0.0 };
                prop_assert!((m - e).abs() <= 1e-12 * (1.0 + e.abs()));
            }
        }

        #[test]
        fn binary_round_trip_is_byte_identical(
            dim in 1usize..6,
            raw in proptest::collection::vec(
                (proptest::string::string_regex("[a-zà-ú0-9]{1,8}").unwrap(),
                 proptest::collection::vec(-1000.0f32..1000.0, 6)),
                0..10),
        ) {
            let mut seen = std::collections::HashSet::new();
            let entries: Vec<(String, Vec<f32>)> = raw
                .into_iter()
                .filter(|(t, _)| seen.insert(t.clone()))
                .map(|(t, v)| (t, v[..dim].to_vec()))
                .collect();
            let table = EmbeddingTable::from_entries(dim, entries).unwrap();
            let bytes = binary_bytes(&table);
            let loaded = read_word2vec_binary(&mut bytes.as_slice()).unwrap();
            prop_assert_eq!(&loaded, &table);
            prop_assert_eq!(binary_bytes(&loaded), bytes);
        }

        #[test]
        fn text_round_trip_is_exact(
            dim in 1usize..6,
            raw in proptest::collection::vec(
                (proptest::string::string_regex("[a-zà-ú0-9]{1,8}").unwrap(),
                 proptest::collection::vec(proptest::num::f32::NORMAL | proptest::num::f32::ZERO, 6)),
                0..10),
        ) {
            let mut seen = std::collections::HashSet::new();
            let entries: Vec<(String, Vec<f32>)> = raw
                .into_iter()
                .filter(|(t, _)| seen.insert(t.clone()))
                .map(|(t, v)| (t, v[..dim].to_vec()))
                .collect();
            let table = EmbeddingTable::from_entries(dim, entries).unwrap();
            let mut buf = Vec::new();
            write_word2vec_text_to(&table, &mut buf).unwrap();
            let loaded = read_word2vec_text(&mut buf.as_slice()).unwrap();
            prop_assert_eq!(loaded, table);
        }
    }
}
