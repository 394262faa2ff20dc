//! The weighted least-squares embedding objective, its retrofitting penalty,
//! and exact gradients.
//!
//! Two evaluation routes compute the same numbers:
//!
//! * [`DenseObjective`] works on whole matrices. Zero cells get an arbitrary
//!   log fill `k`, which is harmless because their weight `f(0)` is exactly
//!   zero, so the cost and gradients become a few dense matrix products.
//! * [`reference_cost_and_gradients`] walks the non-zero cells one pair at a
//!   time, recomputing `f` and `log` for every cell.
//!
//! With `ŵ_i = w_i + w̃_i` and an anchor set `R` of words that have prior
//! vectors `r_i`, the cost is
//!
//! ```text
//! J = Σ_ij f(X_ij) (w_i·w̃_j + b_i + b̃_j − log X_ij)²  +  μ Σ_{i∈R} ‖ŵ_i − r_i‖²
//! ```

use ndarray::linalg::general_mat_mul;
use ndarray::parallel::prelude::*;
use ndarray::{Array1, Array2, ArrayView2, ArrayViewMut2, Axis, Zip};

use crate::cooccur::CooccurrenceMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct HyperParams {
    pub dim: usize,
    pub alpha: f64,
    pub x_max: f64,
    pub learning_rate: f64,
    pub mu: f64,
    pub epochs: usize,
    /// Value substituted for `log 0` in the dense formulation.
    pub g_fill: f64,
    pub seed: u64,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            dim: 50,
            alpha: 0.75,
            x_max: 100.0,
            learning_rate: 0.05,
            mu: 0.1,
            epochs: 50_000,
            g_fill: 0.0,
            seed: 0,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.dim == 0 {
            return bad("dim must be positive".into());
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha must lie in (0, 1], got {}", self.alpha));
        }
        if !(self.x_max > 0.0 && self.x_max.is_finite()) {
            return bad(format!("x_max must be positive, got {}", self.x_max));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            ));
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return bad(format!("mu must be non-negative, got {}", self.mu));
        }
        if !self.g_fill.is_finite() {
            return bad("g_fill must be finite".into());
        }
        Ok(())
    }
}

/// Word vectors `W`, context vectors `W̃` (one row per word) and both bias
/// vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub w: Array2<f64>,
    pub w_tilde: Array2<f64>,
    pub b: Array1<f64>,
    pub b_tilde: Array1<f64>,
}

impl ModelParams {
    pub fn zeros(vocab_size: usize, dim: usize) -> Self {
        ModelParams {
            w: Array2::zeros((vocab_size, dim)),
            w_tilde: Array2::zeros((vocab_size, dim)),
            b: Array1::zeros(vocab_size),
            b_tilde: Array1::zeros(vocab_size),
        }
    }

    pub fn vocab_size(&self) -> usize {
        self.w.nrows()
    }

    pub fn dim(&self) -> usize {
        self.w.ncols()
    }

    pub fn check_shapes(&self) -> Result<()> {
        let (v, d) = self.w.dim();
        if self.w_tilde.dim() != (v, d) {
            return Err(Error::Shape(format!(
                "W is {v}x{d} but W̃ is {}x{}",
                self.w_tilde.nrows(),
                self.w_tilde.ncols()
            )));
        }
        if self.b.len() != v || self.b_tilde.len() != v {
            return Err(Error::Shape(format!(
                "bias lengths {} and {} do not match vocabulary size {v}",
                self.b.len(),
                self.b_tilde.len()
            )));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.w.iter().all(|x| x.is_finite())
            && self.w_tilde.iter().all(|x| x.is_finite())
            && self.b.iter().all(|x| x.is_finite())
            && self.b_tilde.iter().all(|x| x.is_finite())
    }
}

/// Prior vectors resolved against a vocabulary. Row `k` of `vectors` is the
/// prior for word id `anchors[k]`; the anchors form the set `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorEmbeddings {
    anchors: Vec<usize>,
    vectors: Array2<f64>,
}

impl PriorEmbeddings {
    /// Anchors must be strictly increasing, one per row of `vectors`.
    pub fn new(anchors: Vec<usize>, vectors: Array2<f64>) -> Result<Self> {
        if anchors.len() != vectors.nrows() {
            return Err(Error::Shape(format!(
                "{} anchors but {} prior vectors",
                anchors.len(),
                vectors.nrows()
            )));
        }
        if anchors.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "anchor ids must be strictly increasing".into(),
            ));
        }
        if vectors.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("prior vectors must be finite".into()));
        }
        Ok(PriorEmbeddings { anchors, vectors })
    }

    /// No anchors; the penalty vanishes.
    pub fn empty(dim: usize) -> Self {
        PriorEmbeddings {
            anchors: Vec::new(),
            vectors: Array2::zeros((0, dim)),
        }
    }

    pub fn anchors(&self) -> &[usize] {
        &self.anchors
    }

    pub fn vectors(&self) -> &Array2<f64> {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    /// Position of `id` among the anchors, if it has a prior.
    pub fn position(&self, id: usize) -> Option<usize> {
        self.anchors.binary_search(&id).ok()
    }

    fn check_against(&self, params: &ModelParams) -> Result<()> {
        if self.dim() != params.dim() {
            return Err(Error::Shape(format!(
                "prior dimension {} differs from embedding dimension {}",
                self.dim(),
                params.dim()
            )));
        }
        if let Some(&last) = self.anchors.last() {
            if last >= params.vocab_size() {
                return Err(Error::Shape(format!(
                    "anchor id {last} out of range for vocabulary size {}",
                    params.vocab_size()
                )));
            }
        }
        Ok(())
    }
}

/// Gradient blocks with the same shapes as [`ModelParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w: Array2<f64>,
    pub w_tilde: Array2<f64>,
    pub b: Array1<f64>,
    pub b_tilde: Array1<f64>,
}

impl Gradients {
    pub fn zeros(vocab_size: usize, dim: usize) -> Self {
        Gradients {
            w: Array2::zeros((vocab_size, dim)),
            w_tilde: Array2::zeros((vocab_size, dim)),
            b: Array1::zeros(vocab_size),
            b_tilde: Array1::zeros(vocab_size),
        }
    }

    pub fn zeros_like(params: &ModelParams) -> Self {
        Self::zeros(params.vocab_size(), params.dim())
    }

    fn fill_zero(&mut self) {
        self.w.fill(0.0);
        self.w_tilde.fill(0.0);
        self.b.fill(0.0);
        self.b_tilde.fill(0.0);
    }

    fn matches(&self, params: &ModelParams) -> bool {
        self.w.dim() == params.w.dim()
            && self.w_tilde.dim() == params.w_tilde.dim()
            && self.b.len() == params.b.len()
            && self.b_tilde.len() == params.b_tilde.len()
    }
}

/// The weighting `min(1, (x/x_max)^alpha)`, with `f(0) = 0` exactly.
pub fn weight_f(x: f64, alpha: f64, x_max: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "co-occurrence count must be non-negative, got {x}"
        )));
    }
    Ok(if x == 0.0 {
        0.0
    } else if x < x_max {
        (x / x_max).powf(alpha)
    } else {
        1.0
    })
}

/// `log x` for positive counts, `k` for zero.
pub fn g_fill(x: f64, k: f64) -> f64 {
    if x == 0.0 {
        k
    } else {
        x.ln()
    }
}

fn check_problem(
    params: &ModelParams,
    x: &CooccurrenceMatrix,
    priors: Option<&PriorEmbeddings>,
) -> Result<()> {
    params.check_shapes()?;
    if x.dim() != params.vocab_size() {
        return Err(Error::Shape(format!(
            "count matrix is {0}x{0} but the model has {1} words",
            x.dim(),
            params.vocab_size()
        )));
    }
    if let Some(p) = priors {
        p.check_against(params)?;
    }
    Ok(())
}

/// Adds `μ Σ ‖ŵ_i − r_i‖²` and, when requested, its gradient `2μ(ŵ_i − r_i)`
/// to both the word and the context row of every anchor.
fn add_penalty(
    params: &ModelParams,
    priors: Option<&PriorEmbeddings>,
    mu: f64,
    mut grads: Option<&mut Gradients>,
) -> f64 {
    let Some(priors) = priors else { return 0.0 };
    if mu == 0.0 {
        return 0.0;
    }
    let mut penalty = 0.0;
    for (k, &i) in priors.anchors.iter().enumerate() {
        let r = priors.vectors.row(k);
        let w = params.w.row(i);
        let wt = params.w_tilde.row(i);
        let mut sq = 0.0;
        for d in 0..r.len() {
            let diff = w[d] + wt[d] - r[d];
            sq += diff * diff;
            if let Some(g) = grads.as_deref_mut() {
                let step = 2.0 * mu * diff;
                g.w[[i, d]] += step;
                g.w_tilde[[i, d]] += step;
            }
        }
        penalty += sq;
    }
    mu * penalty
}

const ROW_BLOCK: usize = 256;

/// `out = a · b`, split into fixed row blocks so the result does not depend
/// on the number of worker threads.
fn block_matmul(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>, mut out: ArrayViewMut2<'_, f64>) {
    out.axis_chunks_iter_mut(Axis(0), ROW_BLOCK)
        .into_par_iter()
        .zip(a.axis_chunks_iter(Axis(0), ROW_BLOCK).into_par_iter())
        .for_each(|(mut out_blk, a_blk)| {
            general_mat_mul(1.0, &a_blk, &b, 0.0, &mut out_blk);
        });
}

/// Dense, vectorized evaluation of the objective.
///
/// Holds `f(X)` and `g(X)` as dense matrices plus one scratch matrix, so it
/// needs `3 · |V|² · 8` bytes.
#[derive(Debug, Clone)]
pub struct DenseObjective {
    weights: Array2<f64>,
    log_fill: Array2<f64>,
    scratch: Array2<f64>,
    mu: f64,
}

impl DenseObjective {
    pub fn new(x: &CooccurrenceMatrix, hp: &HyperParams) -> Result<Self> {
        hp.validate()?;
        let n = x.dim();
        let mut weights = Array2::zeros((n, n));
        let mut log_fill = Array2::from_elem((n, n), hp.g_fill);
        for (i, j, v) in x.iter() {
            weights[[i, j]] = weight_f(v, hp.alpha, hp.x_max)?;
            log_fill[[i, j]] = g_fill(v, hp.g_fill);
        }
        Ok(DenseObjective {
            weights,
            log_fill,
            scratch: Array2::zeros((n, n)),
            mu: hp.mu,
        })
    }

    /// Bytes held by an objective over a `vocab_size`-word vocabulary.
    pub fn memory_bytes(vocab_size: usize) -> u64 {
        3 * (vocab_size as u64).pow(2) * std::mem::size_of::<f64>() as u64
    }

    pub fn vocab_size(&self) -> usize {
        self.weights.nrows()
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn set_mu(&mut self, mu: f64) {
        self.mu = mu;
    }

    pub fn cost(&mut self, params: &ModelParams, priors: Option<&PriorEmbeddings>) -> Result<f64> {
        self.evaluate(params, priors, None)
    }

    /// Computes the cost and writes the full gradient into `grads`.
    pub fn cost_and_gradients(
        &mut self,
        params: &ModelParams,
        priors: Option<&PriorEmbeddings>,
        grads: &mut Gradients,
    ) -> Result<f64> {
        self.evaluate(params, priors, Some(grads))
    }

    fn evaluate(
        &mut self,
        params: &ModelParams,
        priors: Option<&PriorEmbeddings>,
        mut grads: Option<&mut Gradients>,
    ) -> Result<f64> {
        params.check_shapes()?;
        if params.vocab_size() != self.vocab_size() {
            return Err(Error::Shape(format!(
                "count matrix is {0}x{0} but the model has {1} words",
                self.vocab_size(),
                params.vocab_size()
            )));
        }
        if let Some(p) = priors {
            p.check_against(params)?;
        }
        if let Some(g) = grads.as_deref() {
            if !g.matches(params) {
                return Err(Error::Shape("gradient buffer does not match the model".into()));
            }
        }

        // scratch = W W̃ᵀ
        block_matmul(params.w.view(), params.w_tilde.t(), self.scratch.view_mut());

        // scratch becomes E = 2 f(X) ∘ M, where M = W W̃ᵀ + b1ᵀ + 1b̃ᵀ − g(X)
        let b_tilde = &params.b_tilde;
        let mut row_costs = vec![0.0; self.vocab_size()];
        Zip::from(self.scratch.rows_mut())
            .and(self.weights.rows())
            .and(self.log_fill.rows())
            .and(&params.b)
            .and(&mut row_costs[..])
            .par_for_each(|mut e, f, g, &b_i, row_cost| {
                let mut acc = 0.0;
                Zip::from(&mut e).and(&f).and(&g).and(b_tilde).for_each(
                    |e, &f, &g, &bt| {
                        let m = *e + b_i + bt - g;
                        let fm = f * m;
                        acc += fm * m;
                        *e = 2.0 * fm;
                    },
                );
                *row_cost = acc;
            });
        let mut cost: f64 = row_costs.iter().sum();

        if let Some(g) = grads.as_deref_mut() {
            block_matmul(self.scratch.view(), params.w_tilde.view(), g.w.view_mut());
            block_matmul(self.scratch.t(), params.w.view(), g.w_tilde.view_mut());
            g.b.assign(&self.scratch.sum_axis(Axis(1)));
            g.b_tilde.assign(&self.scratch.sum_axis(Axis(0)));
        }
        cost += add_penalty(params, priors, self.mu, grads);
        Ok(cost)
    }
}

/// Vectorized cost. Independent of `hp.g_fill`.
pub fn cost_vectorized(
    params: &ModelParams,
    x: &CooccurrenceMatrix,
    priors: Option<&PriorEmbeddings>,
    hp: &HyperParams,
) -> Result<f64> {
    check_problem(params, x, priors)?;
    DenseObjective::new(x, hp)?.cost(params, priors)
}

/// Vectorized analytic gradients of [`cost_vectorized`].
pub fn gradients_vectorized(
    params: &ModelParams,
    x: &CooccurrenceMatrix,
    priors: Option<&PriorEmbeddings>,
    hp: &HyperParams,
) -> Result<Gradients> {
    check_problem(params, x, priors)?;
    let mut grads = Gradients::zeros_like(params);
    DenseObjective::new(x, hp)?.cost_and_gradients(params, priors, &mut grads)?;
    Ok(grads)
}

/// Per-pair evaluation over the non-zero cells of `x`. When `grads` is given
/// it is overwritten with the gradient.
pub fn reference_cost_and_gradients(
    params: &ModelParams,
    x: &CooccurrenceMatrix,
    priors: Option<&PriorEmbeddings>,
    hp: &HyperParams,
    mut grads: Option<&mut Gradients>,
) -> Result<f64> {
    hp.validate()?;
    check_problem(params, x, priors)?;
    if let Some(g) = grads.as_deref_mut() {
        if !g.matches(params) {
            return Err(Error::Shape("gradient buffer does not match the model".into()));
        }
        g.fill_zero();
    }

    let dim = params.dim();
    let mut cost = 0.0;
    for i in 0..x.dim() {
        let (cols, vals) = x.row(i);
        let w_i = params.w.row(i);
        for (&j, &x_ij) in cols.iter().zip(vals) {
            let j = j as usize;
            let wt_j = params.w_tilde.row(j);
            let mut dot = 0.0;
            for d in 0..dim {
                dot += w_i[d] * wt_j[d];
            }
            let f = weight_f(x_ij, hp.alpha, hp.x_max)?;
            let diff = dot + params.b[i] + params.b_tilde[j] - x_ij.ln();
            cost += f * diff * diff;

            if let Some(g) = grads.as_deref_mut() {
                let e = 2.0 * f * diff;
                for d in 0..dim {
                    g.w[[i, d]] += e * wt_j[d];
                    g.w_tilde[[j, d]] += e * w_i[d];
                }
                g.b[i] += e;
                g.b_tilde[j] += e;
            }
        }
    }
    cost += add_penalty(params, priors, hp.mu, grads);
    Ok(cost)
}

pub fn cost_reference_loop(
    params: &ModelParams,
    x: &CooccurrenceMatrix,
    priors: Option<&PriorEmbeddings>,
    hp: &HyperParams,
) -> Result<f64> {
    reference_cost_and_gradients(params, x, priors, hp, None)
}

pub fn gradients_reference_loop(
    params: &ModelParams,
    x: &CooccurrenceMatrix,
    priors: Option<&PriorEmbeddings>,
    hp: &HyperParams,
) -> Result<Gradients> {
    let mut grads = Gradients::zeros_like(params);
    reference_cost_and_gradients(params, x, priors, hp, Some(&mut grads))?;
    Ok(grads)
}
