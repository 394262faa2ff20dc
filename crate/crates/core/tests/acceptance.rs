//! One PASS/FAIL line per acceptance criterion.
//!
//! Set `ACCEPTANCE_ONLY=1,3,7` to run a subset.

mod common;

use std::time::{Duration, Instant};

use common::*;
use rand::Rng;
use warmglove::analysis::{run_mu_sweep, SimulationSpec};
use warmglove::bench::{run_bench, BenchSpec, Implementation};
use warmglove::objective::{cost_reference_loop, cost_vectorized, gradients_reference_loop, gradients_vectorized, DenseObjective, Gradients};
use warmglove::{build_cooccurrence, build_vocabulary, train, HyperParams};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn vectorized_vs_loop() -> Outcome {
    let sizes = [10, 50, 100];
    let densities = [0.05, 0.1, 0.3];
    let mus = [0.0, 0.1, 1.0];
    let mut worst: f64 = 0.0;
    for k in 0..100usize {
        let mut r = rng(1_000 + k as u64);
        let v = sizes[k % 3];
        let density = densities[(k / 3) % 3];
        let with_priors = (k / 9) % 2 == 1;
        let mu = mus[(k / 18) % 3];
        let hp = HyperParams { dim: 10, mu, ..HyperParams::default() };
        let params = random_params(&mut r, v, 10, 0.3);
        let x = random_matrix(&mut r, v, density);
        let priors = random_priors(&mut r, v, 10, 0.5, 0.4);
        let p = with_priors.then_some(&priors);
        let cv = cost_vectorized(&params, &x, p, &hp).unwrap();
        let cl = cost_reference_loop(&params, &x, p, &hp).unwrap();
        let gv = gradients_vectorized(&params, &x, p, &hp).unwrap();
        let gl = gradients_reference_loop(&params, &x, p, &hp).unwrap();
        worst = worst.max(rel_err_scalar(cv, cl)).max(grad_rel_err(&gv, &gl));
    }
    outcome(worst <= 1e-10, format!("100 instances, worst relative error {worst:.2e} (limit 1e-10)"))
}

fn finite_differences() -> Outcome {
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for k in 0..20u64 {
        let mut r = rng(2_000 + k);
        let (v, dim) = (10, 5);
        let params = random_params(&mut r, v, dim, 0.3);
        let x = random_matrix(&mut r, v, 0.4);
        let priors = random_priors(&mut r, v, dim, 0.5, 0.5);
        for mu in [0.0, 0.5] {
            let hp = HyperParams { dim, mu, ..HyperParams::default() };
            let mut obj = DenseObjective::new(&x, &hp).unwrap();
            let mut g = Gradients::zeros_like(&params);
            obj.cost_and_gradients(&params, Some(&priors), &mut g).unwrap();
            let mut fd = Gradients::zeros_like(&params);
            let mut central = |edit: &dyn Fn(&mut warmglove::ModelParams, f64)| {
                let mut plus = params.clone();
                edit(&mut plus, h);
                let mut minus = params.clone();
                edit(&mut minus, -h);
                (obj.cost(&plus, Some(&priors)).unwrap() - obj.cost(&minus, Some(&priors)).unwrap()) / (2.0 * h)
            };
            for i in 0..v {
                for d in 0..dim {
                    fd.w[[i, d]] = central(&|p, e| p.w[[i, d]] += e);
                    fd.w_tilde[[i, d]] = central(&|p, e| p.w_tilde[[i, d]] += e);
                }
                fd.b[i] = central(&|p, e| p.b[i] += e);
                fd.b_tilde[i] = central(&|p, e| p.b_tilde[i] += e);
            }
            worst = worst.max(grad_rel_err(&g, &fd));
        }
    }
    outcome(worst <= 1e-5, format!("20 instances x 2 mu, worst relative error {worst:.2e} (limit 1e-5)"))
}

fn log_fill_independence() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in 0..20u64 {
        let mut r = rng(3_000 + k);
        let v = 20 + 10 * (k as usize % 4);
        let params = random_params(&mut r, v, 8, 0.5);
        let x = random_matrix(&mut r, v, 0.15);
        let priors = random_priors(&mut r, v, 8, 0.5, 0.3);
        let base = HyperParams { dim: 8, mu: 0.5, ..HyperParams::default() };
        let c0 = cost_vectorized(&params, &x, Some(&priors), &base).unwrap();
        let g0 = gradients_vectorized(&params, &x, Some(&priors), &base).unwrap();
        for fill in [5.0, -3.0] {
            let hp = HyperParams { g_fill: fill, ..base.clone() };
            let c = cost_vectorized(&params, &x, Some(&priors), &hp).unwrap();
            let g = gradients_vectorized(&params, &x, Some(&priors), &hp).unwrap();
            worst = worst.max(rel_err_scalar(c0, c)).max(grad_rel_err(&g0, &g));
        }
    }
    outcome(worst <= 1e-15, format!("k in {{0, 5, -3}} on 20 instances, worst relative difference {worst:.2e} (limit 1e-15)"))
}

fn glove_reduction() -> Outcome {
    let mut identical = 0;
    for k in 0..5u64 {
        let mut r = rng(4_000 + k);
        let x = random_matrix(&mut r, 80, 0.1);
        let priors = random_priors(&mut r, 80, 20, 0.5, 0.3);
        let hp = HyperParams { dim: 20, mu: 0.0, epochs: 200, seed: k, ..HyperParams::default() };
        let with = train(&x, &hp, Some(&priors)).unwrap();
        let without = train(&x, &hp, None).unwrap();
        if with.params == without.params {
            identical += 1;
        }
    }
    outcome(identical == 5, format!("{identical}/5 instances bitwise identical"))
}

fn mu_sweep() -> Outcome {
    let spec = SimulationSpec::default();
    let hp = HyperParams { epochs: 2000, ..HyperParams::default() };
    let sweep = run_mu_sweep(&spec, &hp).unwrap();
    let mut fails = Vec::new();
    let mut notes = Vec::new();
    for t in 0..spec.trials {
        let rows: Vec<_> = sweep.trial(t).collect();
        let dists: Vec<f64> = rows.iter().map(|r| r.dist_with_prior.unwrap()).collect();
        let inversions: Vec<f64> = dists
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| (w[1] - w[0]) / w[0])
            .collect();
        let monotone = inversions.is_empty() || (inversions.len() == 1 && inversions[0] <= 0.05);
        let c0 = rows.iter().find(|r| r.mu == 0.0).unwrap().correlation;
        let c01 = rows.iter().find(|r| r.mu == 0.1).unwrap().correlation;
        if !monotone {
            fails.push(format!("trial {t}: distances {dists:?}"));
        }
        if c01 < 0.9 * c0 {
            fails.push(format!("trial {t}: correlation {c01:.4} at mu=0.1 vs {c0:.4} at mu=0"));
        }
        notes.push(format!(
            "t{t}: rho {c0:.4}->{c01:.4}, dist {:.3}->{:.3}",
            dists[0],
            dists[dists.len() - 1]
        ));
    }
    let detail = if fails.is_empty() { notes.join("; ") } else { fails.join("; ") };
    outcome(fails.is_empty(), format!("500 words, 5 trials, 2000 epochs; {detail}"))
}

fn bench_direction() -> Outcome {
    let spec = BenchSpec {
        vocab_sizes: vec![5000],
        implementations: vec![Implementation::Vectorized, Implementation::LoopReference, Implementation::NoOp],
        ..BenchSpec::default()
    };
    let report = run_bench(&spec).unwrap();
    let vec5k = report.row(Implementation::Vectorized, 5000).unwrap().mean_s;
    let loop5k = report.row(Implementation::LoopReference, 5000).unwrap().mean_s;
    let noop = report.row(Implementation::NoOp, 5000).unwrap().mean_s;
    let ratio = loop5k / vec5k;
    let mut pass = ratio >= 5.0 && noop < 1e-3;
    let mut detail = format!(
        "5000 words: vectorized {vec5k:.3}s, loop {loop5k:.3}s, ratio {ratio:.2}x (need >= 5), no-op {noop:.1e}s"
    );

    let mut means = vec![(5000, vec5k, loop5k)];
    for size in [10000, 20000] {
        let larger = BenchSpec {
            vocab_sizes: vec![size],
            iterations_per_corpus: 2,
            corpora: 1,
            ..BenchSpec::default()
        };
        if let Err(e) = larger.check_memory(size) {
            detail.push_str(&format!("; {size} skipped ({e})"));
            continue;
        }
        let r = run_bench(&larger).unwrap();
        means.push((
            size,
            r.row(Implementation::Vectorized, size).unwrap().mean_s,
            r.row(Implementation::LoopReference, size).unwrap().mean_s,
        ));
        let (_, v, l) = means[means.len() - 1];
        detail.push_str(&format!("; {size} words: vectorized {v:.3}s, loop {l:.3}s"));
    }
    let scaling = means.windows(2).all(|w| w[1].1 >= w[0].1 && w[1].2 >= w[0].2);
    if !scaling {
        detail.push_str("; per-iteration time decreased with vocabulary size");
    }
    pass &= scaling;
    outcome(pass, detail)
}

fn cooccurrence_oracle() -> Outcome {
    let mut checked = 0;
    let mut mismatches = 0;
    let mut k = 0u64;
    while checked < 200 {
        let mut r = rng(7_000 + k);
        k += 1;
        let total = r.random_range(1..=200);
        let docs = random_docs(&mut r, 10, total);
        let min_count = r.random_range(1..=2);
        let Ok(vocab) = build_vocabulary(docs.iter().flatten(), min_count) else {
            continue;
        };
        checked += 1;
        for window in [1, 2, 5, 10] {
            let x = build_cooccurrence(&docs, &vocab, window).unwrap();
            if x.to_dense() != brute_force_cooccurrence(&docs, &vocab, window) {
                mismatches += 1;
            }
        }
    }
    outcome(mismatches == 0, format!("200 corpora x 4 windows, {mismatches} mismatches"))
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let criteria = [
        Criterion { id: 1, name: "vectorized/loop equivalence", limit: Duration::from_secs(30), run: vectorized_vs_loop },
        Criterion { id: 2, name: "gradient correctness", limit: Duration::from_secs(30), run: finite_differences },
        Criterion { id: 3, name: "log-fill independence", limit: Duration::from_secs(30), run: log_fill_independence },
        Criterion { id: 4, name: "GloVe reduction", limit: Duration::from_secs(600), run: glove_reduction },
        Criterion { id: 5, name: "mu sweep on simulated counts", limit: Duration::from_secs(30 * 60), run: mu_sweep },
        Criterion { id: 6, name: "vectorized speedup and scaling", limit: Duration::from_secs(20 * 60), run: bench_direction },
        Criterion { id: 7, name: "co-occurrence oracle", limit: Duration::from_secs(10), run: cooccurrence_oracle },
    ];

    let mut failed = 0;
    for c in &criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&c.id)) {
            continue;
        }
        let started = Instant::now();
        let out = (c.run)();
        let took = started.elapsed();
        let in_time = took <= c.limit;
        let pass = out.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {} {}: {} ({}; {:.1}s of {}s allowed{})",
            c.id,
            c.name,
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            took.as_secs_f64(),
            c.limit.as_secs(),
            if in_time { "" } else { ", too slow" }
        );
    }
    if only.is_none() {
        println!(
            "criterion 8 external-data results: EXCLUDED (review classification, real-corpus correlations, clinical and ontology tasks need corpora and learners outside this crate)"
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
