//! Bag-of-vectors document features: the elementwise sum of word vectors.

use std::io::Write;
use std::path::Path;

use ndarray::Array1;
use rayon::prelude::*;

use crate::embedding_io::EmbeddingFile;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DocumentVector {
    pub vector: Array1<f64>,
    pub tokens_used: usize,
    pub tokens_oov: usize,
}

impl DocumentVector {
    pub fn zeros(dim: usize) -> Self {
        DocumentVector {
            vector: Array1::zeros(dim),
            tokens_used: 0,
            tokens_oov: 0,
        }
    }

    pub fn total_tokens(&self) -> usize {
        self.tokens_used + self.tokens_oov
    }
}

/// Sums the vectors of known tokens. Unknown tokens are counted in
/// `tokens_oov` and otherwise ignored.
pub fn sum_features<S: AsRef<str>>(tokens: &[S], embeddings: &EmbeddingFile) -> DocumentVector {
    let mut doc = DocumentVector::zeros(embeddings.dim());
    for t in tokens {
        match embeddings.get(t.as_ref()) {
            Some(v) => {
                doc.vector += &v;
                doc.tokens_used += 1;
            }
            None => doc.tokens_oov += 1,
        }
    }
    doc
}

/// [`sum_features`] over many documents, in parallel, preserving order.
pub fn featurize_documents<D, S>(docs: &[D], embeddings: &EmbeddingFile) -> Result<Vec<DocumentVector>>
where
    D: AsRef<[S]> + Sync,
    S: AsRef<str> + Sync,
{
    if embeddings.is_empty() {
        return Err(Error::InvalidParameter("embedding table is empty".into()));
    }
    Ok(docs
        .par_iter()
        .map(|d| sum_features(d.as_ref(), embeddings))
        .collect())
}

/// One line per document: the vector's components separated by commas.
pub fn write_features<W: Write>(docs: &[DocumentVector], mut w: W) -> Result<()> {
    for d in docs {
        let mut first = true;
        for x in d.vector.iter() {
            if !first {
                w.write_all(b",")?;
            }
            first = false;
            write!(w, "{x}")?;
        }
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_features(docs: &[DocumentVector], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_features(docs, std::io::BufWriter::new(f))
}
