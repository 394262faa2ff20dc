//! Full-batch AdaGrad training.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use ndarray::{Array2, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cooccur::CooccurrenceMatrix;
use crate::error::{Error, Result};
use crate::objective::{DenseObjective, Gradients, HyperParams, ModelParams, PriorEmbeddings};

/// Starting value of every squared-gradient accumulator.
pub const INITIAL_ACCUMULATOR: f64 = 1.0;

/// Per-parameter sums of squared gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct AdagradState {
    pub w: Array2<f64>,
    pub w_tilde: Array2<f64>,
    pub b: ndarray::Array1<f64>,
    pub b_tilde: ndarray::Array1<f64>,
}

impl AdagradState {
    pub fn new(params: &ModelParams) -> Self {
        Self::with_initial(params, INITIAL_ACCUMULATOR)
    }

    pub fn with_initial(params: &ModelParams, initial: f64) -> Self {
        AdagradState {
            w: Array2::from_elem(params.w.dim(), initial),
            w_tilde: Array2::from_elem(params.w_tilde.dim(), initial),
            b: ndarray::Array1::from_elem(params.b.len(), initial),
            b_tilde: ndarray::Array1::from_elem(params.b_tilde.len(), initial),
        }
    }
}

#[inline]
fn adagrad_update(theta: &mut f64, acc: &mut f64, g: f64, lr: f64) {
    if g != 0.0 {
        *acc += g * g;
        *theta -= lr * g / acc.sqrt();
    }
}

/// One AdaGrad update: `a += g²`, then `θ -= lr · g / √a`, for every scalar
/// parameter.
pub fn adagrad_step(
    params: &mut ModelParams,
    state: &mut AdagradState,
    grads: &Gradients,
    learning_rate: f64,
) {
    Zip::from(&mut params.w)
        .and(&mut state.w)
        .and(&grads.w)
        .for_each(|t, a, &g| adagrad_update(t, a, g, learning_rate));
    Zip::from(&mut params.w_tilde)
        .and(&mut state.w_tilde)
        .and(&grads.w_tilde)
        .for_each(|t, a, &g| adagrad_update(t, a, g, learning_rate));
    Zip::from(&mut params.b)
        .and(&mut state.b)
        .and(&grads.b)
        .for_each(|t, a, &g| adagrad_update(t, a, g, learning_rate));
    Zip::from(&mut params.b_tilde)
        .and(&mut state.b_tilde)
        .and(&grads.b_tilde)
        .for_each(|t, a, &g| adagrad_update(t, a, g, learning_rate));
}

/// Priors take part in training only when the penalty is switched on.
fn active_priors<'a>(
    priors: Option<&'a PriorEmbeddings>,
    hp: &HyperParams,
) -> Option<&'a PriorEmbeddings> {
    priors.filter(|p| hp.mu > 0.0 && !p.is_empty())
}

/// Sample standard deviation over every coordinate of every prior vector.
pub fn prior_stddev(priors: &PriorEmbeddings) -> Option<f64> {
    let n = priors.vectors().len();
    if n < 2 {
        return None;
    }
    let mean = priors.vectors().sum() / n as f64;
    let var = priors
        .vectors()
        .iter()
        .map(|x| (x - mean).powi(2))
        .sum::<f64>()
        / (n - 1) as f64;
    let sd = var.sqrt();
    (sd.is_finite() && sd > 0.0).then_some(sd)
}

/// Random initialization.
///
/// `W` and `W̃` are uniform on `(−0.5/dim, 0.5/dim)` and both biases start at
/// zero. When priors are active (`mu > 0`, at least one anchor), rows of
/// words without a prior are instead drawn so that `w_i + w̃_i` has the
/// sample standard deviation of the prior vectors.
pub fn init_params(
    vocab_size: usize,
    hp: &HyperParams,
    priors: Option<&PriorEmbeddings>,
) -> ModelParams {
    let dim = hp.dim;
    let default_half = 0.5 / dim as f64;
    let active = active_priors(priors, hp);
    // Var(u1 + u2) = 2h²/3 for u ~ U(−h, h)
    let oov_half = active
        .and_then(prior_stddev)
        .map(|s| s * 1.5f64.sqrt())
        .unwrap_or(default_half);
    let half_width = |i: usize| match active {
        Some(p) if p.position(i).is_none() => oov_half,
        _ => default_half,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    let mut params = ModelParams::zeros(vocab_size, dim);
    for m in [&mut params.w, &mut params.w_tilde] {
        for (i, mut row) in m.rows_mut().into_iter().enumerate() {
            let h = half_width(i);
            for v in row.iter_mut() {
                *v = rng.random_range(-1.0..1.0) * h;
            }
        }
    }
    params
}

/// Sets `w_i = w̃_i = r_i / 2` for every anchor.
pub fn place_at_priors(params: &mut ModelParams, priors: &PriorEmbeddings) -> Result<()> {
    if priors.dim() != params.dim() {
        return Err(Error::Shape(format!(
            "prior dimension {} differs from embedding dimension {}",
            priors.dim(),
            params.dim()
        )));
    }
    for (k, &i) in priors.anchors().iter().enumerate() {
        if i >= params.vocab_size() {
            return Err(Error::Shape(format!("anchor id {i} out of range")));
        }
        let half = &priors.vectors().row(k) * 0.5;
        params.w.row_mut(i).assign(&half);
        params.w_tilde.row_mut(i).assign(&half);
    }
    Ok(())
}

/// `ŵ_i = w_i + w̃_i` for every word.
pub fn compose_embeddings(params: &ModelParams) -> Array2<f64> {
    &params.w + &params.w_tilde
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainReport {
    /// Cost at the start of each epoch, before that epoch's update.
    pub costs: Vec<f64>,
    pub seconds: Vec<f64>,
    pub epochs: usize,
}

impl TrainReport {
    pub fn final_cost(&self) -> Option<f64> {
        self.costs.last().copied()
    }

    /// Writes `epoch,cost,seconds` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["epoch", "cost", "seconds"])?;
        for (e, (c, s)) in self.costs.iter().zip(&self.seconds).enumerate() {
            out.write_record([e.to_string(), c.to_string(), s.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(BufWriter::new(f))
    }
}

#[derive(Default)]
pub struct TrainOptions<'a> {
    /// Start anchored words at their priors instead of at random.
    pub init_at_priors: bool,
    /// Called after every epoch with the epoch index and its cost.
    pub on_epoch: Option<&'a dyn Fn(usize, f64)>,
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub params: ModelParams,
    pub report: TrainReport,
}

pub fn train(
    x: &CooccurrenceMatrix,
    hp: &HyperParams,
    priors: Option<&PriorEmbeddings>,
) -> Result<Trained> {
    train_with(x, hp, priors, &TrainOptions::default())
}

pub fn train_with(
    x: &CooccurrenceMatrix,
    hp: &HyperParams,
    priors: Option<&PriorEmbeddings>,
    opts: &TrainOptions<'_>,
) -> Result<Trained> {
    hp.validate()?;
    if x.dim() < 1 {
        return Err(Error::InvalidParameter("count matrix is empty".into()));
    }
    let mut params = init_params(x.dim(), hp, priors);
    if opts.init_at_priors {
        if let Some(p) = active_priors(priors, hp) {
            place_at_priors(&mut params, p)?;
        }
    }
    train_from(params, x, hp, priors, opts)
}

/// Runs `hp.epochs` full-batch epochs starting from `params`.
pub fn train_from(
    mut params: ModelParams,
    x: &CooccurrenceMatrix,
    hp: &HyperParams,
    priors: Option<&PriorEmbeddings>,
    opts: &TrainOptions<'_>,
) -> Result<Trained> {
    hp.validate()?;
    params.check_shapes()?;
    let priors = active_priors(priors, hp);
    let mut objective = DenseObjective::new(x, hp)?;
    let mut grads = Gradients::zeros_like(&params);
    let mut state = AdagradState::new(&params);
    let mut report = TrainReport {
        costs: Vec::with_capacity(hp.epochs),
        seconds: Vec::with_capacity(hp.epochs),
        epochs: 0,
    };

    for epoch in 0..hp.epochs {
        let started = Instant::now();
        let cost = objective.cost_and_gradients(&params, priors, &mut grads)?;
        if !cost.is_finite() {
            return Err(Error::Diverged { epoch, cost });
        }
        adagrad_step(&mut params, &mut state, &grads, hp.learning_rate);
        report.costs.push(cost);
        report.seconds.push(started.elapsed().as_secs_f64());
        report.epochs = epoch + 1;
        if let Some(cb) = opts.on_epoch {
            cb(epoch, cost);
        }
    }
    Ok(Trained { params, report })
}
