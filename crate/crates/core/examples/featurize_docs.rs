//! Turn documents into fixed-length features by summing word vectors.
//!
//! cargo run --example featurize_docs

use warmglove::featurize::{featurize_documents, write_features};
use warmglove::{tokenize, EmbeddingFile, TokenizerConfig};

fn main() -> warmglove::Result<()> {
    let vectors = EmbeddingFile::read(
        "good 0.9 0.1\nbad -0.8 0.2\nplot 0.0 0.7\nacting 0.1 0.6\n:) 0.5 0.0\n".as_bytes(),
    )?;
    let cfg = TokenizerConfig::default();
    let docs: Vec<Vec<String>> = [
        "Good acting, good plot :)",
        "Bad plot. BAD acting.",
        "nothing we know here",
    ]
    .iter()
    .map(|d| tokenize(d, &cfg))
    .collect();

    let features = featurize_documents(&docs, &vectors)?;
    for (doc, f) in docs.iter().zip(&features) {
        println!("{:<45} used {} unknown {} -> {}", format!("{doc:?}"), f.tokens_used, f.tokens_oov, f.vector);
    }
    let mut csv = Vec::new();
    write_features(&features, &mut csv)?;
    print!("{}", String::from_utf8_lossy(&csv));
    Ok(())
}
