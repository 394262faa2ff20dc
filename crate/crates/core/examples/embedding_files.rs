//! Write embeddings in the GloVe text format, read them back and match them
//! against a vocabulary.
//!
//! cargo run --example embedding_files

use ndarray::array;
use warmglove::embedding_io::format_sig6;
use warmglove::{build_vocabulary, read_embeddings, resolve_priors, write_embeddings, EmbeddingFile};

fn main() -> warmglove::Result<()> {
    let tokens: Vec<String> = ["king", "queen", "US", "banana"].map(String::from).to_vec();
    let emb = EmbeddingFile::from_matrix(
        &tokens,
        array![[0.5, 1234567.0, -0.25], [0.4, 0.00001234, -0.3], [1.0, 2.0, 3.0], [0.0, 0.0, 0.0]],
    )?;
    let path = std::env::temp_dir().join("warmglove-vectors.txt");
    write_embeddings(&emb, &path)?;
    print!("{}", std::fs::read_to_string(&path).unwrap());
    println!("format_sig6(1/3) = {}", format_sig6(1.0 / 3.0));

    let back = read_embeddings(&path)?;
    let vocab = build_vocabulary(["queen", "us", "king", "king", "apple"], 1)?;
    let priors = resolve_priors(&back, &vocab, 3)?;
    let matched: Vec<&str> = priors.anchors().iter().map(|&i| vocab.token(i).unwrap()).collect();
    println!("vocabulary {:?}", vocab.tokens());
    println!("words with priors {matched:?} (matching is case-sensitive, so \"us\" has none)");
    Ok(())
}
