use std::fmt::Write as _;
use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::signal::SparseVector;
use crate::error::{invalid, Error, Result};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatrixKind {
    Bernoulli,
    Gaussian,
    Identity,
    Custom,
}

/// A dense real measurement matrix, optionally a row selection of a larger
/// square parent.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementMatrix {
    data: DMatrix<f64>,
    kind: MatrixKind,
    row_subset: Option<Vec<usize>>,
}

impl MeasurementMatrix {
    /// Entries independently `+1/sqrt(m)` or `-1/sqrt(m)` with equal probability.
    pub fn bernoulli(m: usize, n: usize, seed: u64) -> Result<Self> {
        if m == 0 || m > n {
            return Err(invalid("m", format!("need 1 <= m <= n, got m = {m}, n = {n}")));
        }
        Ok(Self::bernoulli_scaled(m, n, 1.0 / (m as f64).sqrt(), seed))
    }

    /// Random-sign matrix with an explicit entry magnitude. Used for square
    /// transforms whose row selections have `m` rows: their entries must be
    /// `±1/sqrt(m)`, not `±1/sqrt(n)`.
    pub fn bernoulli_scaled(rows: usize, cols: usize, scale: f64, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let data = DMatrix::from_fn(rows, cols, |_, _| {
            if rng.random_bool(0.5) {
                scale
            } else {
                -scale
            }
        });
        Self {
            data,
            kind: MatrixKind::Bernoulli,
            row_subset: None,
        }
    }

    /// I.i.d. `N(0, 1/m)` entries, so columns have unit expected norm.
    pub fn gaussian(m: usize, n: usize, seed: u64) -> Result<Self> {
        if m == 0 || m > n {
            return Err(invalid("m", format!("need 1 <= m <= n, got m = {m}, n = {n}")));
        }
        let mut rng = rng_from_seed(seed);
        let sd = 1.0 / (m as f64).sqrt();
        let data = DMatrix::from_fn(m, n, |_, _| {
            let z: f64 = StandardNormal.sample(&mut rng);
            z * sd
        });
        Ok(Self {
            data,
            kind: MatrixKind::Gaussian,
            row_subset: None,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            data: DMatrix::identity(n, n),
            kind: MatrixKind::Identity,
            row_subset: None,
        }
    }

    pub fn custom(data: DMatrix<f64>) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(invalid("matrix", "must be non-empty"));
        }
        Ok(Self {
            data,
            kind: MatrixKind::Custom,
            row_subset: None,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(invalid("matrix", "ragged rows"));
        }
        Self::custom(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn row_subset(&self) -> Option<&[usize]> {
        self.row_subset.as_deref()
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[(i, j)]
    }

    /// The `m x n` matrix made of the rows listed in `subset`, in order.
    pub fn select_rows(&self, subset: &[usize]) -> Result<Self> {
        let n = self.rows();
        let mut seen = vec![false; n];
        for &i in subset {
            if i >= n {
                return Err(Error::OutOfRange { index: i, len: n });
            }
            if seen[i] {
                return Err(invalid("row_subset", format!("duplicate row {i}")));
            }
            seen[i] = true;
        }
        if subset.is_empty() {
            return Err(invalid("row_subset", "must be non-empty"));
        }
        Ok(Self {
            data: self.data.select_rows(subset),
            kind: self.kind,
            row_subset: Some(subset.to_vec()),
        })
    }

    /// Columns listed in `cols` as a dense `rows x |cols|` matrix.
    pub fn column_submatrix(&self, cols: &[usize]) -> DMatrix<f64> {
        self.data.select_columns(cols)
    }

    /// `Phi * x` for a dense slice.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols() {
            return Err(Error::DimensionMismatch {
                expected: self.cols(),
                got: x.len(),
            });
        }
        let v = &self.data * DVector::from_column_slice(x);
        Ok(v.as_slice().to_vec())
    }

    /// `Phi^T * v`.
    pub fn apply_transpose(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.rows() {
            return Err(Error::DimensionMismatch {
                expected: self.rows(),
                got: v.len(),
            });
        }
        let r = self.data.tr_mul(&DVector::from_column_slice(v));
        Ok(r.as_slice().to_vec())
    }

    /// Numerical rank by singular values above `tol * sigma_max`.
    pub fn rank(&self, tol: f64) -> usize {
        let sv = self.data.singular_values();
        let smax = sv.max();
        sv.iter().filter(|s| **s > tol * smax.max(f64::MIN_POSITIVE)).count()
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        self.data.singular_values().max()
    }

    /// Row-major text: one row per line, space-separated decimals.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        self.write_delimited(&mut w, ' ')
    }

    /// Comma-separated variant for plotting tools.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        self.write_delimited(&mut w, ',')
    }

    fn write_delimited<W: Write>(&self, w: &mut W, sep: char) -> std::io::Result<()> {
        for i in 0..self.rows() {
            let mut line = String::new();
            for j in 0..self.cols() {
                if j > 0 {
                    line.push(sep);
                }
                write!(line, "{}", self.data[(i, j)]).expect("write to string");
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    /// Parse the text (or CSV) format back into a `Custom` matrix.
    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let rows = read_rows(r)?;
        Self::from_rows(&rows)
    }
}

/// `Phi * x`.
pub fn measure(phi: &MeasurementMatrix, x: &SparseVector) -> Result<Vec<f64>> {
    phi.apply(x.values())
}

/// Write a vector as a single text row.
pub fn write_vector_text<W: Write>(v: &[f64], mut w: W) -> std::io::Result<()> {
    let line: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    writeln!(w, "{}", line.join(" "))
}

/// Parse whitespace- or comma-separated rows of decimals, skipping blanks.
pub fn read_rows<R: BufRead>(r: R) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {t:?}: {e}", lineno + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}
