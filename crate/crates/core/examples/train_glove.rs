//! Plain GloVe (no priors) on a simulated count matrix.
//!
//! cargo run --example train_glove [-- WORDS EPOCHS]

use warmglove::analysis::{correlation_score_vs_logcount, simulate_counts, CorrelationMode};
use warmglove::trainer::TrainOptions;
use warmglove::{train_with, HyperParams};

fn main() -> warmglove::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let words = args.next().unwrap_or(200);
    let epochs = args.next().unwrap_or(500);

    let x = simulate_counts(words, 0.10, 1)?;
    let hp = HyperParams {
        epochs,
        mu: 0.0,
        ..HyperParams::default()
    };
    let log = |epoch: usize, cost: f64| {
        if epoch.is_multiple_of((epochs / 10).max(1)) {
            println!("epoch {epoch:>6}  cost {cost:.4}");
        }
    };
    let opts = TrainOptions {
        on_epoch: Some(&log),
        ..TrainOptions::default()
    };
    let out = train_with(&x, &hp, None, &opts)?;
    let rho = correlation_score_vs_logcount(&out.params, &x, CorrelationMode::ModelScore)?;
    let per_epoch = out.report.seconds.iter().sum::<f64>() / epochs.max(1) as f64;
    println!("final cost {:.4}", out.report.final_cost().unwrap_or(f64::NAN));
    println!("correlation of model scores with log counts: {rho:.4}");
    println!("{:.2} ms per epoch", per_epoch * 1e3);
    Ok(())
}
