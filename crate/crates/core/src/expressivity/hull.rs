//! Convex-hull membership of similarity matrices for binary HDC.
//!
//! At `D = 1` a family of binary vectors is a sign pattern `s` and its
//! similarity matrix is `s s^T`. Any `D`-dimensional family averages `D` such
//! rank-one atoms, so a target is binary-expressible exactly when it lies in
//! the convex hull of the atoms (up to `eps` per entry).

use serde::Serialize;

use super::simplex::{find_feasible, Feasibility};
use crate::error::{Error, Result};
use crate::rff::SimilarityTarget;

pub const MAX_ATOM_ENTITIES: usize = 12;
const WEIGHT_SUM_TOL: f64 = 1e-9;

/// A sign pattern with `s_1 = +1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignAtom {
    pattern: Vec<i8>,
}

impl SignAtom {
    pub fn pattern(&self) -> &[i8] {
        &self.pattern
    }

    pub fn n(&self) -> usize {
        self.pattern.len()
    }

    /// `(s s^T)_ij`.
    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        f64::from(self.pattern[i] * self.pattern[j])
    }

    /// Row-major `s s^T`.
    pub fn outer(&self) -> Vec<f64> {
        let n = self.n();
        (0..n * n).map(|k| self.entry(k / n, k % n)).collect()
    }
}

fn check_n(n: usize) -> Result<()> {
    if !(2..=MAX_ATOM_ENTITIES).contains(&n) {
        return Err(Error::invalid(format!(
            "atom enumeration supports 2..={MAX_ATOM_ENTITIES} entities, got {n}"
        )));
    }
    Ok(())
}

/// All `2^(n-1)` canonical atoms, in lexicographic order of `(s_2, .., s_n)`
/// with `+` before `-`.
pub fn enumerate_atoms(n: usize) -> Result<Vec<SignAtom>> {
    check_n(n)?;
    Ok((0..1usize << (n - 1))
        .map(|mask| {
            let mut pattern = vec![1i8; n];
            for (p, s) in pattern.iter_mut().enumerate().skip(1) {
                if (mask >> (n - 1 - p)) & 1 == 1 {
                    *s = -1;
                }
            }
            SignAtom { pattern }
        })
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpressibilityReport {
    pub feasible: bool,
    /// Convex weights over [`enumerate_atoms`] order; empty when infeasible.
    pub weights: Vec<f64>,
    /// Max off-diagonal `|Σ λ_s (s s^T)_ij - M_ij|` of the returned weights.
    pub residual: f64,
    pub certificate_note: String,
}

fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect()
}

/// Max off-diagonal deviation of the mixture `Σ λ_s s s^T` from `M`.
pub fn mixture_residual(target: &SimilarityTarget, atoms: &[SignAtom], weights: &[f64]) -> f64 {
    pairs(target.n())
        .into_iter()
        .map(|(i, j)| {
            let mix: f64 = atoms
                .iter()
                .zip(weights)
                .map(|(a, w)| w * a.entry(i, j))
                .sum();
            (mix - target.get(i, j)).abs()
        })
        .fold(0.0, f64::max)
}

/// Solves: `λ >= 0`, `Σ λ = 1`, `|Σ_s λ_s (s s^T)_ij - M_ij| <= eps` for all `i < j`.
pub fn check_binary_expressible(
    target: &SimilarityTarget,
    eps: f64,
) -> Result<ExpressibilityReport> {
    let n = target.n();
    check_n(n)?;
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::invalid(format!(
            "eps must be nonnegative, got {eps}"
        )));
    }
    let atoms = enumerate_atoms(n)?;
    let pairs = pairs(n);
    let k = atoms.len();
    let p = pairs.len();
    // Columns: k weights, p upper slacks, p lower surpluses.
    // Rows: Σλ = 1; Σλa + s⁺ = M + eps; Σλa - s⁻ = M - eps.
    let cols = k + 2 * p;
    let rows = 1 + 2 * p;
    let mut a = vec![0.0; rows * cols];
    let mut b = vec![0.0; rows];
    a[..k].fill(1.0);
    b[0] = 1.0;
    for (q, &(i, j)) in pairs.iter().enumerate() {
        let up = 1 + q;
        let lo = 1 + p + q;
        for (s, atom) in atoms.iter().enumerate() {
            let v = atom.entry(i, j);
            a[up * cols + s] = v;
            a[lo * cols + s] = v;
        }
        a[up * cols + k + q] = 1.0;
        a[lo * cols + k + p + q] = -1.0;
        b[up] = target.get(i, j) + eps;
        b[lo] = target.get(i, j) - eps;
    }

    match find_feasible(&a, &b, cols) {
        Feasibility::Feasible { x } => {
            let weights = x[..k].to_vec();
            let residual = mixture_residual(target, &atoms, &weights);
            let sum: f64 = weights.iter().sum();
            let verified = (sum - 1.0).abs() <= WEIGHT_SUM_TOL && residual <= eps + 1e-12;
            let certificate_note = if verified {
                format!(
                    "convex combination of {} atoms reproduces the target",
                    weights.iter().filter(|&&w| w > 0.0).count()
                )
            } else {
                format!("solver returned weights failing verification (sum {sum}, residual {residual:e})")
            };
            Ok(ExpressibilityReport {
                feasible: verified,
                weights: if verified { weights } else { Vec::new() },
                residual,
                certificate_note,
            })
        }
        Feasibility::Infeasible {
            dual,
            infeasibility,
        } => {
            // Every atom satisfies Σ c_ij S_ij <= bound; the target violates it by more than eps allows.
            let y0 = dual[0];
            let mut terms = Vec::new();
            let mut lhs = 0.0;
            let mut margin = 0.0;
            for (q, &(i, j)) in pairs.iter().enumerate() {
                let (yu, yl) = (dual[1 + q], dual[1 + p + q]);
                let c = yu + yl;
                margin += yu.abs() + yl.abs();
                if c.abs() > 1e-9 {
                    terms.push(format!("{c:+.4}*M[{i}][{j}]"));
                    lhs += c * target.get(i, j);
                }
            }
            let bound = -y0;
            let certificate_note = format!(
                "every atom satisfies {} <= {bound:.6}, but the target gives {lhs:.6} (eps allowance {:.3e}); phase-one infeasibility {infeasibility:.3e}",
                if terms.is_empty() { "0".to_string() } else { terms.join(" ") },
                eps * margin,
            );
            Ok(ExpressibilityReport {
                feasible: false,
                weights: Vec::new(),
                residual: f64::NAN,
                certificate_note,
            })
        }
    }
}
