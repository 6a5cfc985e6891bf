use std::f64::consts::FRAC_PI_2;

use super::SimilarityTarget;
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, SquareMatrix};

const INPUT_SYMMETRY_TOL: f64 = 1e-8;

/// Above this fraction of the trace, the clipped spectrum signals a target
/// that binary hypervectors cannot reproduce closely.
pub const CLIPPED_MASS_WARNING: f64 = 0.05;

/// Elementwise `sin(pi/2 * M)`: the Gaussian correlation whose sign
/// correlation is `M`.
pub fn sin_transform(target: &SimilarityTarget) -> SquareMatrix {
    let m = target.matrix();
    SquareMatrix::from_fn(m.n(), |i, j| {
        if i == j {
            1.0
        } else {
            (FRAC_PI_2 * m[(i, j)]).sin()
        }
    })
}

/// Eigendecomposition with negative eigenvalues clipped to zero.
#[derive(Clone, Debug)]
pub struct GaussianFactor {
    /// Orthonormal eigenvectors as columns.
    pub vectors: SquareMatrix,
    /// Clipped (nonnegative) eigenvalues, ascending.
    pub lambda: Vec<f64>,
    /// Sum of the magnitudes of the clipped negative eigenvalues.
    pub clipped_mass: f64,
    trace: f64,
}

impl GaussianFactor {
    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    /// `U diag(lambda) U^T`, the Frobenius-nearest PSD matrix to the input.
    pub fn reconstruction(&self) -> SquareMatrix {
        let n = self.n();
        let u = &self.vectors;
        SquareMatrix::from_fn(n, |i, j| {
            (0..n).map(|k| u[(i, k)] * self.lambda[k] * u[(j, k)]).sum()
        })
    }

    /// `U diag(sqrt(lambda))`; row `i` generates entity `i`'s Gaussian.
    pub fn loading(&self) -> SquareMatrix {
        let n = self.n();
        let roots: Vec<f64> = self.lambda.iter().map(|l| l.sqrt()).collect();
        SquareMatrix::from_fn(n, |i, k| self.vectors[(i, k)] * roots[k])
    }

    /// `clipped_mass / trace` of the input matrix.
    pub fn clipped_fraction(&self) -> f64 {
        if self.trace > 0.0 {
            self.clipped_mass / self.trace
        } else {
            0.0
        }
    }

    pub fn far_from_expressible(&self) -> bool {
        self.clipped_fraction() > CLIPPED_MASS_WARNING
    }
}

pub fn psd_factor(s: &SquareMatrix) -> Result<GaussianFactor> {
    let asym = s.max_asymmetry();
    if asym > INPUT_SYMMETRY_TOL {
        return Err(Error::invalid(format!(
            "matrix is not symmetric (max |S_ij - S_ji| = {asym:e})"
        )));
    }
    let eig = symmetric_eigen(s)?;
    // Round-off below this is a zero eigenvalue, not clipped spectrum.
    let zero_tol = 1e-12 * eig.values.iter().fold(1.0f64, |a, l| a.max(l.abs()));
    let clipped_mass = eig
        .values
        .iter()
        .filter(|&&l| l < -zero_tol)
        .map(|l| -l)
        .sum();
    let lambda = eig.values.iter().map(|&l| l.max(0.0)).collect();
    Ok(GaussianFactor {
        vectors: eig.vectors,
        lambda,
        clipped_mass,
        trace: s.trace(),
    })
}
