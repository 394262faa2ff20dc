//! Tokenize a few lines of text, build a vocabulary and count co-occurrences.
//!
//! cargo run --example cooccur_from_text [-- WINDOW]

use warmglove::cooccur::matrix_stats;
use warmglove::{build_cooccurrence, build_vocabulary, tokenize, TokenizerConfig};

const TEXT: &str = "\
The movie was GREAT :) and the acting was great too.
Honestly the plot was thin... but the cast saved it <3
I would NOT watch it again; the ending was a mess :(
Great cast, thin plot, messy ending.";

fn main() -> warmglove::Result<()> {
    let window = std::env::args().nth(1).map_or(10, |w| w.parse().expect("window must be an integer"));
    let cfg = TokenizerConfig::default();
    let docs: Vec<Vec<String>> = TEXT.lines().map(|l| tokenize(l, &cfg)).collect();
    println!("first document: {:?}", docs[0]);

    let vocab = build_vocabulary(docs.iter().flatten(), 2)?;
    println!("{} words seen at least twice:", vocab.len());
    for (id, t) in vocab.tokens().iter().enumerate() {
        println!("  {id:>2} {t:<8} {}", vocab.count(id));
    }

    let x = build_cooccurrence(&docs, &vocab, window)?;
    let stats = matrix_stats(&x);
    println!(
        "window {window}: {} non-zero cells ({:.1}%), total mass {:.2}",
        x.nnz(),
        100.0 * stats.nonzero_fraction,
        stats.total_mass
    );
    let (the, was) = (vocab.id("the").unwrap(), vocab.id("was").unwrap());
    println!("X[the][was] = {:.4}", x.get(the, was));

    let dir = std::env::temp_dir().join("warmglove-example");
    std::fs::create_dir_all(&dir).ok();
    x.save(dir.join("X.cooc"))?;
    vocab.save(dir.join("X.vocab"))?;
    println!("wrote {}", dir.join("X.cooc").display());
    Ok(())
}
