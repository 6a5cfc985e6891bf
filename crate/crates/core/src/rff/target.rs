use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;

const SYMMETRY_TOL: f64 = 1e-12;

/// Desired pairwise similarities between `n` entities.
///
/// Symmetric, unit diagonal, entries in `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityTarget {
    m: SquareMatrix,
}

impl SimilarityTarget {
    pub fn new(m: SquareMatrix) -> Result<Self> {
        let n = m.n();
        if n == 0 {
            return Err(Error::invalid(
                "similarity target must have at least one entity",
            ));
        }
        for i in 0..n {
            for j in 0..n {
                let x = m[(i, j)];
                if !x.is_finite() || !(-1.0..=1.0).contains(&x) {
                    return Err(Error::invalid(format!(
                        "entry ({i},{j}) = {x} outside [-1, 1]"
                    )));
                }
            }
            if m[(i, i)] != 1.0 {
                return Err(Error::invalid(format!(
                    "diagonal entry {i} is {} (must be 1)",
                    m[(i, i)]
                )));
            }
        }
        let asym = m.max_asymmetry();
        if asym > SYMMETRY_TOL {
            return Err(Error::invalid(format!(
                "target is not symmetric (max |M_ij - M_ji| = {asym:e})"
            )));
        }
        Ok(Self { m })
    }

    /// Unit diagonal with a constant off-diagonal value.
    pub fn uniform(n: usize, off_diagonal: f64) -> Result<Self> {
        Self::new(SquareMatrix::from_fn(n, |i, j| {
            if i == j {
                1.0
            } else {
                off_diagonal
            }
        }))
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::uniform(n, 0.0)
    }

    pub fn n(&self) -> usize {
        self.m.n()
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    /// Parses the text form: a line with `n`, then `n` rows of `n` numbers.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let n: usize = lines
            .next()
            .ok_or_else(|| Error::Data("empty matrix file".into()))?
            .parse()
            .map_err(|_| Error::Data("first line must be the entity count".into()))?;
        let mut data = Vec::with_capacity(n * n);
        for row in 0..n {
            let line = lines
                .next()
                .ok_or_else(|| Error::Data(format!("matrix file ends before row {row}")))?;
            let before = data.len();
            for (col, tok) in line.split_whitespace().enumerate() {
                let x: f64 = tok.parse().map_err(|_| {
                    Error::Data(format!("row {row}, column {col}: '{tok}' is not a number"))
                })?;
                data.push(x);
            }
            if data.len() - before != n {
                return Err(Error::Data(format!(
                    "row {row} has {} entries, expected {n}",
                    data.len() - before
                )));
            }
        }
        if lines.next().is_some() {
            return Err(Error::Data(format!("trailing rows after {n} matrix rows")));
        }
        Self::new(SquareMatrix::from_row_major(n, data)?).map_err(|e| Error::Data(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path).map_err(|e| Error::io_at(path, e))?)
    }

    pub fn to_text(&self) -> String {
        let n = self.n();
        let mut s = format!("{n}\n");
        for i in 0..n {
            let row: Vec<String> = self.m.row(i).iter().map(|x| format!("{x}")).collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s
    }
}

/// RBF-kernel target `exp(-(x_i - x_j)^2 / (2 sigma^2))`.
///
/// With `rescale = Some((lo, hi))` the off-diagonal range `[min, max]` is
/// mapped affinely onto `[lo, hi]` and the diagonal reset to 1.
pub fn rbf_target(
    values: &[f64],
    sigma: f64,
    rescale: Option<(f64, f64)>,
) -> Result<SimilarityTarget> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!(
            "RBF bandwidth must be positive, got {sigma}"
        )));
    }
    if let Some((lo, hi)) = rescale {
        if !(-1.0 <= lo && lo < hi && hi <= 1.0) {
            return Err(Error::invalid(format!(
                "rescale bounds [{lo}, {hi}] must satisfy -1 <= lo < hi <= 1"
            )));
        }
    }
    let n = values.len();
    let denom = 2.0 * sigma * sigma;
    let mut m = SquareMatrix::from_fn(n, |i, j| {
        let d = values[i] - values[j];
        (-(d * d) / denom).exp()
    });
    if let Some((lo, hi)) = rescale {
        let (mut mn, mut mx) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    mn = mn.min(m[(i, j)]);
                    mx = mx.max(m[(i, j)]);
                }
            }
        }
        let span = mx - mn;
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = if i == j {
                    1.0
                } else if span > 0.0 {
                    (lo + (m[(i, j)] - mn) / span * (hi - lo)).clamp(-1.0, 1.0)
                } else {
                    hi
                };
            }
        }
    }
    SimilarityTarget::new(m)
}
