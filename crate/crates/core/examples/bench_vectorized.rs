//! Seconds per training step, vectorized against the per-pair loop.
//!
//! cargo run --release --example bench_vectorized [-- SIZE,SIZE,...]

use warmglove::bench::{format_bench_table, run_bench_with, BenchSpec, Implementation};

fn main() -> warmglove::Result<()> {
    let sizes = std::env::args().nth(1).map_or(vec![500, 1000, 2000], |s| {
        s.split(',').map(|v| v.parse().expect("comma-separated sizes")).collect()
    });
    let spec = BenchSpec {
        vocab_sizes: sizes,
        iterations_per_corpus: 3,
        corpora: 2,
        implementations: vec![Implementation::Vectorized, Implementation::LoopReference, Implementation::NoOp],
        ..BenchSpec::default()
    };
    let report = run_bench_with(&spec, |r| eprintln!("{} {} done", r.implementation.name(), r.vocab_size))?;
    print!("{}", format_bench_table(&report));
    for &v in &spec.vocab_sizes {
        let fast = report.row(Implementation::Vectorized, v).unwrap().mean_s;
        let slow = report.row(Implementation::LoopReference, v).unwrap().mean_s;
        println!("{v:>6} words: loop / vectorized = {:.1}x", slow / fast);
    }
    Ok(())
}
