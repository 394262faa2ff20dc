//! Compare analytic gradients with central finite differences, and the
//! vectorized route with the per-pair loop.
//!
//! cargo run --example gradient_check

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use warmglove::objective::{gradients_reference_loop, DenseObjective, Gradients};
use warmglove::{CooccurrenceMatrix, HyperParams, ModelParams, PriorEmbeddings};

fn main() -> warmglove::Result<()> {
    let (v, dim, h) = (12, 4, 1e-6);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut dense = Array2::zeros((v, v));
    for i in 0..v {
        for j in i..v {
            if rng.random::<f64>() < 0.4 {
                let c = rng.random_range(0.5..300.0);
                dense[[i, j]] = c;
                dense[[j, i]] = c;
            }
        }
    }
    let x = CooccurrenceMatrix::from_dense(&dense)?;
    let mut params = ModelParams::zeros(v, dim);
    params.w.mapv_inplace(|_| rng.random_range(-0.5..0.5));
    params.w_tilde.mapv_inplace(|_| rng.random_range(-0.5..0.5));
    params.b.mapv_inplace(|_| rng.random_range(-0.5..0.5));
    let priors = PriorEmbeddings::new(vec![0, 3, 7], Array2::from_elem((3, dim), 0.25))?;
    let hp = HyperParams { dim, mu: 0.5, ..HyperParams::default() };

    let mut obj = DenseObjective::new(&x, &hp)?;
    let mut grads = Gradients::zeros_like(&params);
    let cost = obj.cost_and_gradients(&params, Some(&priors), &mut grads)?;
    println!("cost {cost:.6}");

    let mut worst: f64 = 0.0;
    for i in 0..v {
        for d in 0..dim {
            let mut plus = params.clone();
            plus.w[[i, d]] += h;
            let mut minus = params.clone();
            minus.w[[i, d]] -= h;
            let fd = (obj.cost(&plus, Some(&priors))? - obj.cost(&minus, Some(&priors))?) / (2.0 * h);
            worst = worst.max((fd - grads.w[[i, d]]).abs() / grads.w[[i, d]].abs().max(1e-8));
        }
    }
    println!("word vectors: worst relative finite-difference error {worst:.2e}");

    let slow = gradients_reference_loop(&params, &x, Some(&priors), &hp)?;
    let gap = (&slow.w_tilde - &grads.w_tilde).mapv(f64::abs).fold(0.0f64, |m, &e| m.max(e));
    println!("context vectors: largest gap between vectorized and loop {gap:.2e}");
    Ok(())
}
