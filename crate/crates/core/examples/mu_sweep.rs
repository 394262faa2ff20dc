//! Sweep the retrofitting weight on simulated counts and print how far the
//! anchored words end up from their priors.
//!
//! cargo run --example mu_sweep [-- WORDS EPOCHS TRIALS]

use warmglove::analysis::{run_mu_sweep_with, SimulationSpec, SweepOptions};
use warmglove::HyperParams;

fn main() -> warmglove::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let spec = SimulationSpec {
        vocab_size: args.next().unwrap_or(100),
        trials: 1,
        ..SimulationSpec::default()
    };
    let hp = HyperParams {
        dim: 20,
        epochs: args.next().unwrap_or(500),
        ..HyperParams::default()
    };
    let spec = SimulationSpec {
        trials: args.next().unwrap_or(spec.trials),
        ..spec
    };
    let result = run_mu_sweep_with(&spec, &hp, &SweepOptions::default())?;

    println!("{:>5} {:>7} {:>11} {:>14} {:>17}", "trial", "mu", "correlation", "dist w/ prior", "dist w/o prior");
    for r in &result.rows {
        println!(
            "{:>5} {:>7} {:>11.4} {:>14.4} {:>17.4}",
            r.trial,
            r.mu,
            r.correlation,
            r.dist_with_prior.unwrap_or(f64::NAN),
            r.dist_without_prior.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
