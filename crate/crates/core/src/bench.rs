//! Seconds-per-iteration timing of the dense vectorized training step
//! against the per-pair loop, on simulated count matrices.
//!
//! Only the training step is timed: one cost-and-gradient evaluation plus
//! the AdaGrad update. Simulating the matrix, building the dense weight
//! tables and one warm-up iteration all happen outside the timed region.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::hint::black_box;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::analysis::simulate_counts;
use crate::cooccur::CooccurrenceMatrix;
use crate::error::{Error, Result};
use crate::objective::{reference_cost_and_gradients, DenseObjective, Gradients, HyperParams};
use crate::trainer::{adagrad_step, init_params, AdagradState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Implementation {
    /// Whole-matrix products over the dense `|V|×|V|` problem.
    #[serde(rename = "vectorized")]
    Vectorized,
    /// Explicit loop over the non-zero cells.
    #[serde(rename = "loop-reference")]
    LoopReference,
    /// Times an empty step; measures harness overhead.
    #[serde(rename = "no-op")]
    NoOp,
}

impl Implementation {
    pub fn name(self) -> &'static str {
        match self {
            Implementation::Vectorized => "vectorized",
            Implementation::LoopReference => "loop-reference",
            Implementation::NoOp => "no-op",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSpec {
    pub vocab_sizes: Vec<usize>,
    pub density: f64,
    pub iterations_per_corpus: usize,
    pub corpora: usize,
    pub seed: u64,
    pub implementations: Vec<Implementation>,
    pub hp: HyperParams,
}

impl Default for BenchSpec {
    fn default() -> Self {
        BenchSpec {
            vocab_sizes: vec![5000, 10000, 20000],
            density: 0.10,
            iterations_per_corpus: 10,
            corpora: 5,
            seed: 0,
            implementations: vec![Implementation::Vectorized, Implementation::LoopReference],
            hp: HyperParams::default(),
        }
    }
}

impl BenchSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if self.vocab_sizes.is_empty() || self.vocab_sizes.contains(&0) {
            return bad("vocabulary sizes must be positive");
        }
        if self.iterations_per_corpus < 1 || self.corpora < 1 {
            return bad("iterations and corpora must be at least 1");
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return bad("density must lie in (0, 1]");
        }
        if self.implementations.is_empty() {
            return bad("no implementation selected");
        }
        self.hp.validate()
    }

    /// Approximate peak memory for one vocabulary size.
    pub fn bytes_needed(&self, vocab_size: usize) -> u64 {
        let v = vocab_size as u64;
        let cells = v * v;
        let nnz = (self.density * cells as f64) as u64;
        // compressed rows plus the upper-triangle staging buffer
        let sparse = nnz * 12 + nnz / 2 * 16;
        let model = 8 * v * self.hp.dim as u64 * 8;
        let dense = if self.implementations.contains(&Implementation::Vectorized) {
            DenseObjective::memory_bytes(vocab_size)
        } else {
            0
        };
        sparse + model + dense
    }

    /// Fails with [`Error::OutOfMemory`] when `vocab_size` will not fit in
    /// the memory currently available. Passes when availability is unknown.
    pub fn check_memory(&self, vocab_size: usize) -> Result<()> {
        let needed = self.bytes_needed(vocab_size);
        match available_memory() {
            Some(avail) if needed > avail => Err(Error::OutOfMemory {
                size: vocab_size,
                needed_mib: needed >> 20,
                available_mib: avail >> 20,
            }),
            _ => Ok(()),
        }
    }
}

/// `MemAvailable` from `/proc/meminfo`, in bytes.
pub fn available_memory() -> Option<u64> {
    let info = fs::read_to_string("/proc/meminfo").ok()?;
    let line = info.lines().find(|l| l.starts_with("MemAvailable:"))?;
    let kib: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kib * 1024)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HardwareInfo {
    pub cpu_model: String,
    pub logical_cores: usize,
    pub threads: usize,
}

impl HardwareInfo {
    pub fn detect() -> Self {
        let cpu_model = fs::read_to_string("/proc/cpuinfo")
            .ok()
            .and_then(|s| {
                s.lines()
                    .find(|l| l.starts_with("model name"))
                    .and_then(|l| l.split_once(':'))
                    .map(|(_, m)| m.trim().to_owned())
            })
            .unwrap_or_else(|| "unknown".into());
        HardwareInfo {
            cpu_model,
            logical_cores: std::thread::available_parallelism().map_or(1, |n| n.get()),
            threads: rayon::current_num_threads(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub implementation: Implementation,
    pub vocab_size: usize,
    pub mean_s: f64,
    /// Sample standard deviation; absent with a single sample.
    pub stddev_s: Option<f64>,
    #[serde(skip)]
    pub samples: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    /// Implementation-major, then ascending vocabulary size.
    pub rows: Vec<BenchRow>,
    pub hardware: HardwareInfo,
    pub density: f64,
}

impl BenchReport {
    pub fn row(&self, implementation: Implementation, vocab_size: usize) -> Option<&BenchRow> {
        self.rows
            .iter()
            .find(|r| r.implementation == implementation && r.vocab_size == vocab_size)
    }
}

fn mean_and_stddev(samples: &[f64]) -> (f64, Option<f64>) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let sd = (samples.len() > 1).then(|| {
        (samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    });
    (mean, sd)
}

/// Times `iterations` training steps of one implementation on `x`, after one
/// untimed warm-up step. Returns seconds per step.
pub fn time_steps(
    implementation: Implementation,
    x: &CooccurrenceMatrix,
    hp: &HyperParams,
    iterations: usize,
) -> Result<Vec<f64>> {
    let mut params = init_params(x.dim(), hp, None);
    let mut grads = Gradients::zeros_like(&params);
    let mut state = AdagradState::new(&params);
    let mut samples = Vec::with_capacity(iterations);

    match implementation {
        Implementation::Vectorized => {
            let mut objective = DenseObjective::new(x, hp)?;
            for k in 0..=iterations {
                let t = Instant::now();
                black_box(objective.cost_and_gradients(&params, None, &mut grads)?);
                adagrad_step(&mut params, &mut state, &grads, hp.learning_rate);
                if k > 0 {
                    samples.push(t.elapsed().as_secs_f64());
                }
            }
        }
        Implementation::LoopReference => {
            for k in 0..=iterations {
                let t = Instant::now();
                black_box(reference_cost_and_gradients(&params, x, None, hp, Some(&mut grads))?);
                adagrad_step(&mut params, &mut state, &grads, hp.learning_rate);
                if k > 0 {
                    samples.push(t.elapsed().as_secs_f64());
                }
            }
        }
        Implementation::NoOp => {
            for k in 0..=iterations {
                let t = Instant::now();
                black_box(&mut params);
                if k > 0 {
                    samples.push(t.elapsed().as_secs_f64());
                }
            }
        }
    }
    Ok(samples)
}

/// Runs every implementation on `corpora` simulated matrices per vocabulary
/// size. Memory is checked for every size before any timing starts.
pub fn run_bench(spec: &BenchSpec) -> Result<BenchReport> {
    run_bench_with(spec, |_| {})
}

/// As [`run_bench`], reporting each finished row to `on_row`.
pub fn run_bench_with(spec: &BenchSpec, mut on_row: impl FnMut(&BenchRow)) -> Result<BenchReport> {
    spec.validate()?;
    for &v in &spec.vocab_sizes {
        spec.check_memory(v)?;
    }

    let mut rows = Vec::new();
    for &v in &spec.vocab_sizes {
        let mut samples: Vec<Vec<f64>> = vec![Vec::new(); spec.implementations.len()];
        for c in 0..spec.corpora {
            let seed = spec.seed ^ ((v as u64) << 20) ^ (c as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            let x = simulate_counts(v, spec.density, seed)?;
            let hp = HyperParams {
                seed,
                ..spec.hp.clone()
            };
            for (k, &imp) in spec.implementations.iter().enumerate() {
                samples[k].extend(time_steps(imp, &x, &hp, spec.iterations_per_corpus)?);
            }
        }
        for (k, &imp) in spec.implementations.iter().enumerate() {
            let (mean_s, stddev_s) = mean_and_stddev(&samples[k]);
            let row = BenchRow {
                implementation: imp,
                vocab_size: v,
                mean_s,
                stddev_s,
                samples: std::mem::take(&mut samples[k]),
            };
            on_row(&row);
            rows.push(row);
        }
    }
    rows.sort_by_key(|r| {
        let imp_pos = spec.implementations.iter().position(|&i| i == r.implementation);
        let size_pos = spec.vocab_sizes.iter().position(|&s| s == r.vocab_size);
        (imp_pos, size_pos)
    });
    Ok(BenchReport {
        rows,
        hardware: HardwareInfo::detect(),
        density: spec.density,
    })
}

/// Aligned text table: one line per implementation, one column per size.
pub fn format_bench_table(report: &BenchReport) -> String {
    let mut sizes: Vec<usize> = report.rows.iter().map(|r| r.vocab_size).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let mut imps: Vec<Implementation> = Vec::new();
    for r in &report.rows {
        if !imps.contains(&r.implementation) {
            imps.push(r.implementation);
        }
    }
    let label_w = imps.iter().map(|i| i.name().len()).max().unwrap_or(0).max(14);
    let col_w = 18;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "Seconds per iteration ({:.0}% non-zero cells; {}; {} threads)",
        report.density * 100.0,
        report.hardware.cpu_model,
        report.hardware.threads
    );
    let _ = write!(out, "{:<label_w$}", "Implementation");
    for s in &sizes {
        let _ = write!(out, "{:>col_w$}", format!("{}K", *s as f64 / 1000.0));
    }
    out.push('\n');
    for imp in imps {
        let _ = write!(out, "{:<label_w$}", imp.name());
        for &s in &sizes {
            let cell = match report.row(imp, s) {
                Some(r) => match r.stddev_s {
                    Some(sd) => format!("{:.4} ± {:.4}", r.mean_s, sd),
                    None => format!("{:.4}", r.mean_s),
                },
                None => "-".into(),
            };
            let _ = write!(out, "{cell:>col_w$}");
        }
        out.push('\n');
    }
    out
}

/// Writes the CSV to `w`: one `#` comment line with hardware metadata, then
/// `implementation,vocab_size,mean_s,stddev_s` and one line per row.
pub fn write_bench_csv<W: Write>(report: &BenchReport, mut w: W) -> Result<()> {
    if report.rows.is_empty() {
        return Err(Error::InvalidParameter("no benchmark results to write".into()));
    }
    writeln!(
        w,
        "# cpu={}; logical_cores={}; threads={}; density={}",
        report.hardware.cpu_model.replace(['\n', ';'], " "),
        report.hardware.logical_cores,
        report.hardware.threads,
        report.density
    )?;
    let mut out = csv::Writer::from_writer(w);
    for r in &report.rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

/// Writes the CSV to `path` and the aligned table next to it with a `.txt`
/// extension. Returns the table's path.
pub fn emit_bench_table(report: &BenchReport, path: impl AsRef<Path>) -> Result<PathBuf> {
    let path = path.as_ref();
    if report.rows.is_empty() {
        return Err(Error::InvalidParameter("no benchmark results to write".into()));
    }
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    write_bench_csv(report, &mut w)?;
    w.flush().map_err(|e| Error::io(path, e))?;

    let table_path = path.with_extension("txt");
    fs::write(&table_path, format_bench_table(report)).map_err(|e| Error::io(&table_path, e))?;
    Ok(table_path)
}
