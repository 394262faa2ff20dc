#![allow(dead_code)]

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};

use warmglove::objective::Gradients;
use warmglove::{CooccurrenceMatrix, ModelParams, PriorEmbeddings};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Symmetric matrix with Bernoulli(`density`) support on and above the
/// diagonal and counts spread across the weighting cutoff.
pub fn random_matrix(rng: &mut ChaCha8Rng, v: usize, density: f64) -> CooccurrenceMatrix {
    let counts = LogNormal::new(1.5, 1.5).unwrap();
    let mut dense = Array2::<f64>::zeros((v, v));
    for i in 0..v {
        for j in i..v {
            if rng.random::<f64>() < density {
                let c = counts.sample(rng);
                dense[[i, j]] = c;
                dense[[j, i]] = c;
            }
        }
    }
    CooccurrenceMatrix::from_dense(&dense).unwrap()
}

pub fn random_params(rng: &mut ChaCha8Rng, v: usize, dim: usize, scale: f64) -> ModelParams {
    let n = Normal::new(0.0, scale).unwrap();
    let mut draw = |shape: (usize, usize)| Array2::from_shape_simple_fn(shape, || n.sample(rng));
    let w = draw((v, dim));
    let w_tilde = draw((v, dim));
    let b = draw((v, 1)).into_shape_with_order(v).unwrap();
    let b_tilde = draw((v, 1)).into_shape_with_order(v).unwrap();
    ModelParams {
        w,
        w_tilde,
        b,
        b_tilde,
    }
}

/// Normal(0, `sd`) priors for a random `fraction` of the words.
pub fn random_priors(rng: &mut ChaCha8Rng, v: usize, dim: usize, fraction: f64, sd: f64) -> PriorEmbeddings {
    let anchors: Vec<usize> = (0..v).filter(|_| rng.random::<f64>() < fraction).collect();
    let n = Normal::new(0.0, sd).unwrap();
    let vectors = Array2::from_shape_simple_fn((anchors.len(), dim), || n.sample(rng));
    PriorEmbeddings::new(anchors, vectors).unwrap()
}

/// Largest absolute difference relative to the largest magnitude.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let scale = a
        .iter()
        .chain(b)
        .fold(0.0f64, |m, x| m.max(x.abs()));
    let diff = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    if diff == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

pub fn rel_err_scalar(a: f64, b: f64) -> f64 {
    rel_err(&[a], &[b])
}

pub fn flat2(a: &Array2<f64>) -> Vec<f64> {
    a.iter().copied().collect()
}

pub fn flat1(a: &Array1<f64>) -> Vec<f64> {
    a.to_vec()
}

/// Worst relative error across the four gradient blocks.
pub fn grad_rel_err(a: &Gradients, b: &Gradients) -> f64 {
    [
        rel_err(&flat2(&a.w), &flat2(&b.w)),
        rel_err(&flat2(&a.w_tilde), &flat2(&b.w_tilde)),
        rel_err(&flat1(&a.b), &flat1(&b.b)),
        rel_err(&flat1(&a.b_tilde), &flat1(&b.b_tilde)),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// Random documents over `alphabet` words, `total` tokens in all.
pub fn random_docs(rng: &mut ChaCha8Rng, alphabet: usize, total: usize) -> Vec<Vec<String>> {
    let mut docs = Vec::new();
    let mut left = total;
    while left > 0 {
        let n = rng.random_range(1..=left);
        docs.push(
            (0..n)
                .map(|_| format!("w{}", rng.random_range(0..alphabet)))
                .collect(),
        );
        left -= n;
    }
    docs
}

/// Dense co-occurrence counts by explicit pairs of positions.
pub fn brute_force_cooccurrence(
    docs: &[Vec<String>],
    vocab: &warmglove::Vocabulary,
    window: usize,
) -> Array2<f64> {
    let v = vocab.len();
    let mut x = Array2::<f64>::zeros((v, v));
    for doc in docs {
        for q in 0..doc.len() {
            for p in (0..q).rev() {
                let d = q - p;
                if d > window {
                    break;
                }
                let (Some(a), Some(b)) = (vocab.id(&doc[q]), vocab.id(&doc[p])) else {
                    continue;
                };
                x[[a, b]] += 1.0 / d as f64;
                x[[b, a]] += 1.0 / d as f64;
            }
        }
    }
    x
}
