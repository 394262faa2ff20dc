//! Distance-weighted co-occurrence counting and the sparse symmetric matrix
//! that holds the counts.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::Array2;

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    /// A pair at distance `d` contributes `1/d`.
    #[default]
    InverseDistance,
}

/// Symmetric non-negative sparse matrix in compressed row form.
///
/// Both triangles are stored, so row `i` lists every `j` with `X[i][j] > 0`.
/// Absent cells are exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CooccurrenceMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    values: Vec<f64>,
    window: Option<usize>,
    weighting: Weighting,
}

impl CooccurrenceMatrix {
    /// An all-zero matrix.
    pub fn empty(dim: usize) -> Self {
        CooccurrenceMatrix {
            dim,
            row_ptr: vec![0; dim + 1],
            cols: Vec::new(),
            values: Vec::new(),
            window: None,
            weighting: Weighting::InverseDistance,
        }
    }

    /// Builds a matrix from upper-triangle triples `(i, j, v)` with `i <= j`.
    /// Duplicate coordinates are summed in input order; zero values are dropped.
    pub fn from_upper_triplets<I>(dim: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut acc: HashMap<(u32, u32), f64> = HashMap::new();
        for (i, j, v) in triplets {
            if i > j {
                return Err(Error::Shape(format!(
                    "triple ({i}, {j}) is below the diagonal"
                )));
            }
            if j >= dim {
                return Err(Error::Shape(format!(
                    "index {j} out of range for dimension {dim}"
                )));
            }
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "count at ({i}, {j}) must be finite and non-negative, got {v}"
                )));
            }
            *acc.entry((i as u32, j as u32)).or_insert(0.0) += v;
        }
        Ok(Self::from_upper_map(dim, acc))
    }

    fn from_upper_map(dim: usize, acc: HashMap<(u32, u32), f64>) -> Self {
        let mut upper: Vec<(u32, u32, f64)> = acc
            .into_iter()
            .filter(|&(_, v)| v != 0.0)
            .map(|((i, j), v)| (i, j, v))
            .collect();
        upper.sort_unstable_by_key(|&(i, j, _)| (i, j));
        Self::from_sorted_upper(dim, &upper)
    }

    /// Mirrors upper-triangle triples, strictly sorted by `(i, j)`, into
    /// compressed rows. Visiting triples in order fills every row with
    /// ascending columns: entries `(c, r)` with `c < r` arrive before `(r, ·)`.
    pub(crate) fn from_sorted_upper(dim: usize, upper: &[(u32, u32, f64)]) -> Self {
        debug_assert!(upper.windows(2).all(|w| (w[0].0, w[0].1) < (w[1].0, w[1].1)));
        let mut row_ptr = vec![0usize; dim + 1];
        for &(i, j, _) in upper {
            row_ptr[i as usize + 1] += 1;
            if i != j {
                row_ptr[j as usize + 1] += 1;
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        let nnz = row_ptr[dim];
        let mut cols = vec![0u32; nnz];
        let mut values = vec![0f64; nnz];
        let mut cursor = row_ptr.clone();
        for &(i, j, v) in upper {
            let k = cursor[i as usize];
            cols[k] = j;
            values[k] = v;
            cursor[i as usize] += 1;
            if i != j {
                let k = cursor[j as usize];
                cols[k] = i;
                values[k] = v;
                cursor[j as usize] += 1;
            }
        }
        CooccurrenceMatrix {
            dim,
            row_ptr,
            cols,
            values,
            window: None,
            weighting: Weighting::InverseDistance,
        }
    }

    /// Converts a dense matrix, rejecting asymmetric or negative input.
    pub fn from_dense(dense: &Array2<f64>) -> Result<Self> {
        let (n, m) = dense.dim();
        if n != m {
            return Err(Error::Shape(format!("count matrix is {n}x{m}, not square")));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if dense[[i, j]] != dense[[j, i]] {
                    return Err(Error::Shape(format!("not symmetric at ({i}, {j})")));
                }
            }
        }
        Self::from_upper_triplets(
            n,
            (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).filter_map(|(i, j)| {
                let v = dense[[i, j]];
                (v != 0.0).then_some((i, j, v))
            }),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored cells, counting both triangles.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn window(&self) -> Option<usize> {
        self.window
    }

    pub fn weighting(&self) -> Weighting {
        self.weighting
    }

    /// Column indices and values of row `i`, sorted by column.
    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.cols[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i >= self.dim || j >= self.dim {
            return 0.0;
        }
        let (cols, vals) = self.row(i);
        match cols.binary_search(&(j as u32)) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    /// Every stored cell in `(i, j)` order, both triangles.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j as usize, v))
        })
    }

    /// Stored cells with `i <= j`, in `(i, j)` order.
    pub fn upper(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.iter().filter(|&(i, j, _)| i <= j)
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.dim, self.dim));
        for (i, j, v) in self.iter() {
            out[[i, j]] = v;
        }
        out
    }

    /// Entrywise sum of two matrices over the same vocabulary.
    pub fn add(&self, other: &CooccurrenceMatrix) -> Result<CooccurrenceMatrix> {
        if self.dim != other.dim {
            return Err(Error::Shape(format!(
                "cannot add {0}x{0} and {1}x{1} matrices",
                self.dim, other.dim
            )));
        }
        let mut acc: HashMap<(u32, u32), f64> = HashMap::new();
        for (i, j, v) in self.upper().chain(other.upper()) {
            *acc.entry((i as u32, j as u32)).or_insert(0.0) += v;
        }
        let mut out = Self::from_upper_map(self.dim, acc);
        out.window = if self.window == other.window {
            self.window
        } else {
            None
        };
        Ok(out)
    }

    /// Writes the `dim nnz` header followed by `i j value` lines for `i <= j`.
    /// Values use the shortest representation that parses back exactly.
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        let upper: Vec<_> = self.upper().collect();
        writeln!(w, "{} {}", self.dim, upper.len())?;
        for (i, j, v) in upper {
            writeln!(w, "{i} {j} {v}")?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(f);
        self.write(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().transpose()?.ok_or(Error::Parse {
            line: 1,
            message: "missing `dim nnz` header".into(),
        })?;
        let bad_header = || Error::Parse {
            line: 1,
            message: format!("bad header {header:?}"),
        };
        let mut parts = header.split_whitespace();
        let dim: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(bad_header)?;
        let nnz: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(bad_header)?;

        let mut triplets = Vec::with_capacity(nnz);
        let mut prev: Option<(usize, usize)> = None;
        for (k, line) in lines.enumerate() {
            let line = line?;
            let line_no = k + 2;
            if line.trim().is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                line: line_no,
                message,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(parse_err(format!("expected `i j value`, got {line:?}")));
            }
            let i: usize = fields[0]
                .parse()
                .map_err(|_| parse_err(format!("bad row index {:?}", fields[0])))?;
            let j: usize = fields[1]
                .parse()
                .map_err(|_| parse_err(format!("bad column index {:?}", fields[1])))?;
            let v: f64 = fields[2]
                .parse()
                .map_err(|_| parse_err(format!("bad value {:?}", fields[2])))?;
            if i > j || j >= dim {
                return Err(parse_err(format!("({i}, {j}) is not an upper-triangle cell of a {dim}x{dim} matrix")));
            }
            if !(v > 0.0 && v.is_finite()) {
                return Err(parse_err(format!("value {v} must be positive and finite")));
            }
            if prev.is_some_and(|p| p >= (i, j)) {
                return Err(parse_err("entries must be strictly sorted by (i, j)".into()));
            }
            prev = Some((i, j));
            triplets.push((i, j, v));
        }
        if triplets.len() != nnz {
            return Err(Error::Parse {
                line: 1,
                message: format!("header declares {nnz} entries, found {}", triplets.len()),
            });
        }
        Self::from_upper_triplets(dim, triplets)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(BufReader::new(f))
    }
}

/// Counts co-occurrences within `window` positions, weighting a pair at
/// distance `d` by `1/d`.
///
/// Each in-vocabulary token looks back over the previous `window` positions
/// of its own document. Both `X[i][j]` and `X[j][i]` receive the increment,
/// so a repeated token adds to the diagonal twice. Out-of-vocabulary tokens
/// keep their positions but contribute nothing.
pub fn build_cooccurrence<D, T>(
    docs: &[D],
    vocab: &Vocabulary,
    window: usize,
) -> Result<CooccurrenceMatrix>
where
    D: AsRef<[T]>,
    T: AsRef<str>,
{
    if vocab.is_empty() {
        return Err(Error::InvalidParameter("vocabulary is empty".into()));
    }
    if window < 1 {
        return Err(Error::InvalidParameter("window must be at least 1".into()));
    }
    let mut acc: HashMap<(u32, u32), f64> = HashMap::new();
    let mut ids: Vec<Option<u32>> = Vec::new();
    for doc in docs {
        ids.clear();
        ids.extend(doc.as_ref().iter().map(|t| vocab.id(t.as_ref()).map(|i| i as u32)));
        for (p, &cur) in ids.iter().enumerate() {
            let Some(cur) = cur else { continue };
            for d in 1..=window.min(p) {
                let Some(ctx) = ids[p - d] else { continue };
                let inc = 1.0 / d as f64;
                let key = (cur.min(ctx), cur.max(ctx));
                let cell = acc.entry(key).or_insert(0.0);
                *cell += inc;
                if cur == ctx {
                    *cell += inc;
                }
            }
        }
    }
    let mut out = CooccurrenceMatrix::from_upper_map(vocab.len(), acc);
    out.window = Some(window);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixStats {
    pub nonzero_fraction: f64,
    pub total_mass: f64,
}

pub fn matrix_stats(x: &CooccurrenceMatrix) -> MatrixStats {
    let cells = (x.dim() * x.dim()) as f64;
    MatrixStats {
        nonzero_fraction: if cells > 0.0 { x.nnz() as f64 / cells } else { 0.0 },
        total_mass: x.values.iter().sum(),
    }
}
