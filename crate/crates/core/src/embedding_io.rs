//! GloVe text format: one `token v1 v2 … vd` record per line, no header.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView1};

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::objective::PriorEmbeddings;

/// Ordered `(token, vector)` records sharing one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingFile {
    tokens: Vec<String>,
    vectors: Array2<f64>,
    index: HashMap<String, usize>,
}

impl EmbeddingFile {
    pub fn from_records<I>(records: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, Vec<f64>)>,
    {
        let mut tokens = Vec::new();
        let mut flat = Vec::new();
        let mut index = HashMap::new();
        let mut dim = None;
        for (k, (token, v)) in records.into_iter().enumerate() {
            let expected = *dim.get_or_insert(v.len());
            if v.len() != expected {
                return Err(Error::DimensionMismatch {
                    line: k + 1,
                    expected,
                    found: v.len(),
                });
            }
            if index.insert(token.clone(), k).is_some() {
                return Err(Error::DuplicateToken { line: k + 1, token });
            }
            tokens.push(token);
            flat.extend(v);
        }
        let dim = dim.unwrap_or(0);
        let vectors = Array2::from_shape_vec((tokens.len(), dim), flat)
            .expect("record lengths were checked");
        Ok(EmbeddingFile {
            tokens,
            vectors,
            index,
        })
    }

    /// Pairs each token with the matching row of `vectors`.
    pub fn from_matrix(tokens: &[String], vectors: Array2<f64>) -> Result<Self> {
        if tokens.len() != vectors.nrows() {
            return Err(Error::Shape(format!(
                "{} tokens but {} vectors",
                tokens.len(),
                vectors.nrows()
            )));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (k, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), k).is_some() {
                return Err(Error::DuplicateToken {
                    line: k + 1,
                    token: t.clone(),
                });
            }
        }
        Ok(EmbeddingFile {
            tokens: tokens.to_vec(),
            vectors,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn vectors(&self) -> &Array2<f64> {
        &self.vectors
    }

    pub fn get(&self, token: &str) -> Option<ArrayView1<'_, f64>> {
        self.index.get(token).map(|&k| self.vectors.row(k))
    }

    pub fn records(&self) -> impl Iterator<Item = (&str, ArrayView1<'_, f64>)> {
        self.tokens
            .iter()
            .zip(self.vectors.rows())
            .map(|(t, v)| (t.as_str(), v))
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self> {
        let mut tokens = Vec::new();
        let mut flat: Vec<f64> = Vec::new();
        let mut index = HashMap::new();
        let mut dim: Option<usize> = None;
        for (k, line) in r.lines().enumerate() {
            let line = line?;
            let line_no = k + 1;
            let line = line.trim_end_matches(['\r', '\n', ' ']);
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(' ').filter(|f| !f.is_empty());
            let token = fields.next().expect("line is not empty");
            let before = flat.len();
            for f in fields {
                let v: f64 = f.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("bad number {f:?}"),
                })?;
                flat.push(v);
            }
            let found = flat.len() - before;
            if found == 0 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("token {token:?} has no vector"),
                });
            }
            let expected = *dim.get_or_insert(found);
            if found != expected {
                return Err(Error::DimensionMismatch {
                    line: line_no,
                    expected,
                    found,
                });
            }
            if index.insert(token.to_owned(), tokens.len()).is_some() {
                return Err(Error::DuplicateToken {
                    line: line_no,
                    token: token.to_owned(),
                });
            }
            tokens.push(token.to_owned());
        }
        let vectors = Array2::from_shape_vec((tokens.len(), dim.unwrap_or(0)), flat)
            .expect("record lengths were checked");
        Ok(EmbeddingFile {
            tokens,
            vectors,
            index,
        })
    }

    /// Writes every record with six significant digits per value.
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        let mut line = String::new();
        for (token, v) in self.records() {
            line.clear();
            line.push_str(token);
            for &x in v {
                line.push(' ');
                line.push_str(&format_sig6(x));
            }
            line.push('\n');
            w.write_all(line.as_bytes())?;
        }
        Ok(())
    }
}

/// Formats like C's `%g`: six significant digits, trailing zeros dropped,
/// scientific notation outside `[1e-4, 1e6)`.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa.to_owned()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        s
    }
}

pub fn read_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingFile> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    EmbeddingFile::read(BufReader::new(f))
}

pub fn write_embeddings(records: &EmbeddingFile, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    records.write(&mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Priors for the vocabulary words present in `emb`, matched case-sensitively.
/// Anchors come out in vocabulary id order.
pub fn resolve_priors(emb: &EmbeddingFile, vocab: &Vocabulary, dim: usize) -> Result<PriorEmbeddings> {
    if emb.is_empty() {
        return Ok(PriorEmbeddings::empty(dim));
    }
    if emb.dim() != dim {
        return Err(Error::Shape(format!(
            "prior embeddings have dimension {}, training dimension is {dim}",
            emb.dim()
        )));
    }
    let mut anchors = Vec::new();
    let mut flat = Vec::new();
    for (id, token) in vocab.tokens().iter().enumerate() {
        if let Some(v) = emb.get(token) {
            anchors.push(id);
            flat.extend(v.iter().copied());
        }
    }
    let vectors = Array2::from_shape_vec((anchors.len(), dim), flat).expect("rows have length dim");
    PriorEmbeddings::new(anchors, vectors)
}
