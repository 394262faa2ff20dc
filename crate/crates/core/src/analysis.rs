//! Faithfulness study on simulated data: how well learned scores track log
//! counts, and how close anchored words stay to their priors, as the
//! retrofitting weight `μ` varies.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::{Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use rayon::prelude::*;

use crate::cooccur::CooccurrenceMatrix;
use crate::error::{Error, Result};
use crate::objective::{HyperParams, ModelParams, PriorEmbeddings};
use crate::trainer::{compose_embeddings, init_params, train_from, TrainOptions};

pub const DEFAULT_MU_GRID: [f64; 6] = [0.0, 0.001, 0.01, 0.1, 1.0, 10.0];

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSpec {
    pub vocab_size: usize,
    /// Target fraction of non-zero cells.
    pub density: f64,
    /// Fraction of words that receive a simulated prior vector.
    pub prior_fraction: f64,
    pub mu_grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl Default for SimulationSpec {
    fn default() -> Self {
        SimulationSpec {
            vocab_size: 500,
            density: 0.10,
            prior_fraction: 0.5,
            mu_grid: DEFAULT_MU_GRID.to_vec(),
            trials: 5,
            seed: 0,
        }
    }
}

impl SimulationSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if self.vocab_size < 1 {
            return bad("vocabulary size must be positive");
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return bad("density must lie in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.prior_fraction) {
            return bad("prior fraction must lie in [0, 1]");
        }
        if self.trials < 1 {
            return bad("at least one trial is required");
        }
        if self.mu_grid.is_empty() {
            return bad("mu grid is empty");
        }
        if self.mu_grid.iter().any(|&m| !(m >= 0.0 && m.is_finite())) {
            return bad("mu values must be finite and non-negative");
        }
        if self.mu_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("mu grid must be sorted ascending without repeats");
        }
        Ok(())
    }

    /// Seed used for everything random in one trial.
    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.seed ^ (trial as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
    }
}

/// Symmetric count matrix with i.i.d. log-normal non-zero cells.
///
/// Each cell on or above the diagonal is non-zero with probability
/// `density`, taking the value `exp(N(1, 1))`; the lower triangle mirrors it.
pub fn simulate_counts(vocab_size: usize, density: f64, seed: u64) -> Result<CooccurrenceMatrix> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidParameter("density must lie in (0, 1]".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = LogNormal::new(1.0, 1.0).expect("valid log-normal parameters");
    let n = vocab_size;
    let mut upper = Vec::with_capacity((density * (n * (n + 1) / 2) as f64 * 1.05) as usize + 16);
    for i in 0..n {
        for j in i..n {
            if density >= 1.0 || rng.random::<f64>() < density {
                upper.push((i as u32, j as u32, counts.sample(&mut rng)));
            }
        }
    }
    Ok(CooccurrenceMatrix::from_sorted_upper(n, &upper))
}

/// The count matrix for trial 0 of `spec`.
pub fn simulate_count_matrix(spec: &SimulationSpec) -> Result<CooccurrenceMatrix> {
    spec.validate()?;
    simulate_counts(spec.vocab_size, spec.density, spec.trial_seed(0))
}

/// Draws priors for a random `fraction` of the words. Each coordinate is
/// normal with the mean and standard deviation of that coordinate in
/// `reference`.
pub fn simulate_priors(reference: &Array2<f64>, fraction: f64, seed: u64) -> Result<PriorEmbeddings> {
    let (n, dim) = reference.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = ((fraction * n as f64).round() as usize).min(n);
    let mut anchors = rand::seq::index::sample(&mut rng, n, k).into_vec();
    anchors.sort_unstable();

    let mean = reference
        .mean_axis(Axis(0))
        .unwrap_or_else(|| ndarray::Array1::zeros(dim));
    let sd = if n > 1 {
        reference.std_axis(Axis(0), 1.0)
    } else {
        ndarray::Array1::zeros(dim)
    };
    let coords: Vec<Normal<f64>> = (0..dim)
        .map(|d| Normal::new(mean[d], sd[d]).expect("finite standard deviation"))
        .collect();
    let mut vectors = Array2::zeros((k, dim));
    for mut row in vectors.rows_mut() {
        for (v, c) in row.iter_mut().zip(&coords) {
            *v = c.sample(&mut rng);
        }
    }
    PriorEmbeddings::new(anchors, vectors)
}

/// Pearson correlation of two equal-length samples, or `None` when it is
/// undefined (fewer than two points or zero variance).
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorrelationMode {
    /// `w_i·w̃_j + b_i + b̃_j`, the quantity the objective regresses on log counts.
    #[default]
    ModelScore,
    /// `ŵ_i·ŵ_j` with `ŵ = w + w̃`.
    EmbeddingDot,
}

/// Correlation between model scores and `log X_ij` over the non-zero cells.
pub fn correlation_score_vs_logcount(
    params: &ModelParams,
    x: &CooccurrenceMatrix,
    mode: CorrelationMode,
) -> Result<f64> {
    params.check_shapes()?;
    if x.dim() != params.vocab_size() {
        return Err(Error::Shape(format!(
            "count matrix is {0}x{0} but the model has {1} words",
            x.dim(),
            params.vocab_size()
        )));
    }
    let composed = match mode {
        CorrelationMode::EmbeddingDot => Some(compose_embeddings(params)),
        CorrelationMode::ModelScore => None,
    };
    let mut scores = Vec::with_capacity(x.nnz());
    let mut logs = Vec::with_capacity(x.nnz());
    for (i, j, v) in x.iter() {
        let s = match &composed {
            Some(e) => e.row(i).dot(&e.row(j)),
            None => {
                params.w.row(i).dot(&params.w_tilde.row(j)) + params.b[i] + params.b_tilde[j]
            }
        };
        scores.push(s);
        logs.push(v.ln());
    }
    if scores.len() < 2 {
        return Err(Error::Correlation(format!(
            "{} non-zero cells, need at least 2",
            scores.len()
        )));
    }
    pearson(&scores, &logs).ok_or_else(|| Error::Correlation("zero variance".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DistanceStats {
    /// Mean `‖ŵ_i − r_i‖` over anchored words; absent when there are none.
    pub mean_with_prior: Option<f64>,
    /// Mean `‖ŵ_i − ŵ_i⁽⁰⁾‖` over words without priors; absent without an
    /// initial snapshot or when every word is anchored.
    pub mean_without_prior: Option<f64>,
}

pub fn distance_to_priors(
    params: &ModelParams,
    priors: &PriorEmbeddings,
    initial: Option<&ModelParams>,
) -> Result<DistanceStats> {
    params.check_shapes()?;
    if !priors.is_empty() && priors.dim() != params.dim() {
        return Err(Error::Shape(format!(
            "prior dimension {} differs from embedding dimension {}",
            priors.dim(),
            params.dim()
        )));
    }
    if priors.anchors().last().is_some_and(|&i| i >= params.vocab_size()) {
        return Err(Error::Shape("anchor id out of range".into()));
    }
    let learned = compose_embeddings(params);
    let dist = |a: ndarray::ArrayView1<'_, f64>, b: ndarray::ArrayView1<'_, f64>| {
        a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
    };

    let mean_with_prior = (!priors.is_empty()).then(|| {
        priors
            .anchors()
            .iter()
            .zip(priors.vectors().rows())
            .map(|(&i, r)| dist(learned.row(i), r))
            .sum::<f64>()
            / priors.len() as f64
    });

    let mean_without_prior = match initial {
        Some(init) => {
            if init.w.dim() != params.w.dim() {
                return Err(Error::Shape("initial snapshot has a different shape".into()));
            }
            let start = compose_embeddings(init);
            let free: Vec<usize> = (0..params.vocab_size())
                .filter(|&i| priors.position(i).is_none())
                .collect();
            (!free.is_empty()).then(|| {
                free.iter()
                    .map(|&i| dist(learned.row(i), start.row(i)))
                    .sum::<f64>()
                    / free.len() as f64
            })
        }
        None => None,
    };

    Ok(DistanceStats {
        mean_with_prior,
        mean_without_prior,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub trial: usize,
    pub mu: f64,
    pub correlation: f64,
    pub dist_with_prior: Option<f64>,
    pub dist_without_prior: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepResult {
    /// Trial-major, `μ`-minor.
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn trial(&self, trial: usize) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.trial == trial)
    }

    /// Writes `trial,mu,correlation,dist_with_prior,dist_without_prior`;
    /// absent distances are empty fields.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["trial", "mu", "correlation", "dist_with_prior", "dist_without_prior"])?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            out.write_record([
                r.trial.to_string(),
                r.mu.to_string(),
                r.correlation.to_string(),
                opt(r.dist_with_prior),
                opt(r.dist_without_prior),
            ])?;
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
pub struct SweepOptions<'a> {
    pub correlation_mode: CorrelationMode,
    /// Called as each row completes (rows may finish out of order).
    pub on_row: Option<&'a (dyn Fn(&SweepRow) + Sync)>,
}

/// Trains at every `μ` in the grid on `spec.trials` simulated matrices.
///
/// Per trial: simulate a matrix, train plain GloVe (`μ = 0`), draw priors
/// matching the per-coordinate statistics of that run's embeddings, then
/// train each `μ > 0` against those priors. Every run of a trial starts from
/// the same random seed; `hp.mu` and `hp.seed` are overridden.
pub fn run_mu_sweep(spec: &SimulationSpec, hp: &HyperParams) -> Result<SweepResult> {
    run_mu_sweep_with(spec, hp, &SweepOptions::default())
}

pub fn run_mu_sweep_with(
    spec: &SimulationSpec,
    hp: &HyperParams,
    opts: &SweepOptions<'_>,
) -> Result<SweepResult> {
    spec.validate()?;
    hp.validate()?;
    let trials: Vec<Vec<SweepRow>> = (0..spec.trials)
        .into_par_iter()
        .map(|t| run_trial(spec, hp, t, opts))
        .collect::<Result<_>>()?;
    Ok(SweepResult {
        rows: trials.into_iter().flatten().collect(),
    })
}

fn run_trial(
    spec: &SimulationSpec,
    hp: &HyperParams,
    trial: usize,
    opts: &SweepOptions<'_>,
) -> Result<Vec<SweepRow>> {
    let seed = spec.trial_seed(trial);
    let x = simulate_counts(spec.vocab_size, spec.density, seed)?;
    let base_hp = HyperParams {
        mu: 0.0,
        seed,
        ..hp.clone()
    };
    let base_init = init_params(x.dim(), &base_hp, None);
    let base = train_from(base_init.clone(), &x, &base_hp, None, &TrainOptions::default())?;
    let priors = simulate_priors(
        &compose_embeddings(&base.params),
        spec.prior_fraction,
        seed.wrapping_add(1),
    )?;

    let row_for = |mu: f64, params: &ModelParams, init: &ModelParams| -> Result<SweepRow> {
        let dist = distance_to_priors(params, &priors, Some(init))?;
        let row = SweepRow {
            trial,
            mu,
            correlation: correlation_score_vs_logcount(params, &x, opts.correlation_mode)?,
            dist_with_prior: dist.mean_with_prior,
            dist_without_prior: dist.mean_without_prior,
        };
        if let Some(cb) = opts.on_row {
            cb(&row);
        }
        Ok(row)
    };

    spec.mu_grid
        .par_iter()
        .map(|&mu| {
            if mu == 0.0 {
                // priors do not enter a μ = 0 run, so it is the baseline run
                return row_for(mu, &base.params, &base_init);
            }
            let run_hp = HyperParams { mu, ..base_hp.clone() };
            let init = init_params(x.dim(), &run_hp, Some(&priors));
            let out = train_from(init.clone(), &x, &run_hp, Some(&priors), &TrainOptions::default())?;
            row_for(mu, &out.params, &init)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cooccur::matrix_stats;
    use ndarray::array;

    #[test]
    fn simulated_density_is_close() {
        let x = simulate_counts(500, 0.10, 7).unwrap();
        let s = matrix_stats(&x);
        assert!((0.08..=0.12).contains(&s.nonzero_fraction), "{}", s.nonzero_fraction);
        for (i, j, v) in x.iter().take(2000) {
            assert_eq!(x.get(j, i), v);
            assert!(v > 0.0);
        }
    }

    #[test]
    fn simulated_full_density() {
        let x = simulate_counts(20, 1.0, 1).unwrap();
        assert_eq!(x.nnz(), 400);
        let d = x.to_dense();
        assert_eq!(d, d.t());
    }

    #[test]
    fn simulated_logs_span_several_units() {
        let x = simulate_counts(200, 0.2, 3).unwrap();
        let logs: Vec<f64> = x.iter().map(|(_, _, v)| v.ln()).collect();
        let lo = logs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(hi - lo > 4.0);
    }

    #[test]
    fn simulation_is_deterministic() {
        let spec = SimulationSpec {
            vocab_size: 60,
            ..SimulationSpec::default()
        };
        assert_eq!(
            simulate_count_matrix(&spec).unwrap(),
            simulate_count_matrix(&spec).unwrap()
        );
        assert_ne!(
            simulate_counts(60, 0.1, spec.trial_seed(0)).unwrap(),
            simulate_counts(60, 0.1, spec.trial_seed(1)).unwrap()
        );
    }

    #[test]
    fn spec_validation() {
        assert!(SimulationSpec::default().validate().is_ok());
        let bad = [
            SimulationSpec { density: 0.0, ..Default::default() },
            SimulationSpec { density: 1.5, ..Default::default() },
            SimulationSpec { prior_fraction: 1.1, ..Default::default() },
            SimulationSpec { trials: 0, ..Default::default() },
            SimulationSpec { mu_grid: vec![], ..Default::default() },
            SimulationSpec { mu_grid: vec![1.0, 0.1], ..Default::default() },
        ];
        for s in bad {
            assert!(s.validate().is_err(), "{s:?}");
        }
    }

    fn exact_model(x: &CooccurrenceMatrix, sign: f64) -> ModelParams {
        // dim 1, w = 0, biases chosen so scores are ±log X on a diagonal matrix
        let n = x.dim();
        let mut p = ModelParams::zeros(n, 1);
        for i in 0..n {
            p.b[i] = sign * x.get(i, i).ln();
        }
        p
    }

    #[test]
    fn perfect_correlations() {
        let x = CooccurrenceMatrix::from_dense(&Array2::from_diag(&array![1.0, 2.0, 5.0, 9.0])).unwrap();
        let c = correlation_score_vs_logcount(&exact_model(&x, 1.0), &x, CorrelationMode::ModelScore).unwrap();
        assert!((c - 1.0).abs() < 1e-12);
        let c = correlation_score_vs_logcount(&exact_model(&x, -1.0), &x, CorrelationMode::ModelScore).unwrap();
        assert!((c + 1.0).abs() < 1e-12);
    }

    #[test]
    fn embedding_dot_mode() {
        // ŵ_i = (sqrt(log X_ii)) so ŵ_i·ŵ_i = log X_ii
        let x = CooccurrenceMatrix::from_dense(&Array2::from_diag(&array![2.0, 4.0, 8.0])).unwrap();
        let mut p = ModelParams::zeros(3, 1);
        for i in 0..3 {
            p.w[[i, 0]] = x.get(i, i).ln().sqrt();
        }
        let c = correlation_score_vs_logcount(&p, &x, CorrelationMode::EmbeddingDot).unwrap();
        assert!((c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn correlation_errors() {
        let p = ModelParams::zeros(2, 1);
        let one = CooccurrenceMatrix::from_dense(&array![[3.0, 0.0], [0.0, 0.0]]).unwrap();
        assert!(matches!(
            correlation_score_vs_logcount(&p, &one, CorrelationMode::ModelScore),
            Err(Error::Correlation(_))
        ));
        // constant scores
        let two = CooccurrenceMatrix::from_dense(&array![[3.0, 0.0], [0.0, 4.0]]).unwrap();
        assert!(correlation_score_vs_logcount(&p, &two, CorrelationMode::ModelScore).is_err());
    }

    #[test]
    fn pearson_by_hand() {
        // x = (1,2,3), y = (2,4,7): cov 2.5, var_x 1, var_y 6.333…
        let r = pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 7.0]).unwrap();
        let expected = 2.5 / (1.0f64 * (19.0f64 / 3.0)).sqrt();
        assert!((r - expected).abs() < 1e-15);
        assert_eq!(pearson(&[1.0], &[1.0]), None);
        assert_eq!(pearson(&[1.0, 1.0], &[1.0, 2.0]), None);
    }

    #[test]
    fn distance_examples() {
        let mut p = ModelParams::zeros(3, 2);
        p.w = array![[1.0, 0.0], [0.0, 2.0], [3.0, 4.0]];
        let at_priors = PriorEmbeddings::new(vec![0, 1], array![[1.0, 0.0], [0.0, 2.0]]).unwrap();
        let init = ModelParams::zeros(3, 2);
        let d = distance_to_priors(&p, &at_priors, Some(&init)).unwrap();
        assert_eq!(d.mean_with_prior, Some(0.0));
        assert_eq!(d.mean_without_prior, Some(5.0));

        let none = PriorEmbeddings::empty(2);
        let d = distance_to_priors(&p, &none, None).unwrap();
        assert_eq!(d.mean_with_prior, None);
        assert_eq!(d.mean_without_prior, None);
    }

    #[test]
    fn simulated_priors_follow_reference_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let reference = Array2::from_shape_fn((4000, 3), |(_, d)| {
            (d as f64 + 1.0) * rng.random_range(-1.0..1.0) + d as f64
        });
        let p = simulate_priors(&reference, 0.5, 11).unwrap();
        assert_eq!(p.len(), 2000);
        assert!(p.anchors().windows(2).all(|w| w[0] < w[1]));
        let sd = p.vectors().std_axis(Axis(0), 1.0);
        let ref_sd = reference.std_axis(Axis(0), 1.0);
        let mean = p.vectors().mean_axis(Axis(0)).unwrap();
        for d in 0..3 {
            assert!((sd[d] / ref_sd[d] - 1.0).abs() < 0.1);
            assert!((mean[d] - d as f64).abs() < 0.15);
        }
    }
}
