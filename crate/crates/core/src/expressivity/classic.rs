//! Limits of classic random initialization.
//!
//! When every basis vector is built by binding and permuting independently
//! sampled generators, the expected similarity of three such vectors cannot
//! have all three off-diagonal entries negative: coordinatewise the three
//! products multiply to a square. This module estimates expected similarity
//! matrices for arbitrary bind/permute compositions and checks that limit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;
use crate::rng::SeededRng;
use crate::vsa::BinaryHypervector;

/// One node of a composition; arguments refer to earlier node indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase", deny_unknown_fields)]
pub enum CompositionNode {
    /// Fresh draw of generator `index`.
    Generator {
        index: usize,
    },
    Bind {
        left: usize,
        right: usize,
    },
    Permute {
        arg: usize,
        shift: i64,
    },
}

/// Generators with their `P(+1)` and a bind/permute DAG producing three outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Composition {
    pub generator_probs: Vec<f64>,
    pub nodes: Vec<CompositionNode>,
    pub outputs: [usize; 3],
}

impl Composition {
    /// Parses the JSON form; unknown node operations are rejected.
    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self =
            serde_json::from_str(text).map_err(|e| Error::invalid(format!("composition: {e}")))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        for (g, &p) in self.generator_probs.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!(
                    "generator {g} probability {p} outside [0, 1]"
                )));
            }
        }
        for (i, node) in self.nodes.iter().enumerate() {
            let refs: &[usize] = match node {
                CompositionNode::Generator { index } => {
                    if *index >= self.generator_probs.len() {
                        return Err(Error::invalid(format!(
                            "node {i} uses unknown generator {index}"
                        )));
                    }
                    &[]
                }
                CompositionNode::Bind { left, right } => &[*left, *right],
                CompositionNode::Permute { arg, .. } => std::slice::from_ref(arg),
            };
            if let Some(r) = refs.iter().find(|&&r| r >= i) {
                return Err(Error::invalid(format!(
                    "node {i} refers to node {r}, which is not earlier"
                )));
            }
        }
        if let Some(o) = self.outputs.iter().find(|&&o| o >= self.nodes.len()) {
            return Err(Error::invalid(format!("output refers to missing node {o}")));
        }
        Ok(())
    }

    fn evaluate(&self, dim: usize, rng: &mut SeededRng) -> Result<[BinaryHypervector; 3]> {
        let gens = self
            .generator_probs
            .iter()
            .map(|&p| BinaryHypervector::random(dim, p, rng))
            .collect::<Result<Vec<_>>>()?;
        let mut vals: Vec<BinaryHypervector> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let v = match node {
                CompositionNode::Generator { index } => gens[*index].clone(),
                CompositionNode::Bind { left, right } => vals[*left].bind(&vals[*right])?,
                CompositionNode::Permute { arg, shift } => vals[*arg].permute(*shift),
            };
            vals.push(v);
        }
        Ok(self.outputs.map(|o| vals[o].clone()))
    }
}

#[derive(Clone, Debug)]
pub struct ClassicEstimate {
    pub mean: SquareMatrix,
    /// Standard error of each mean entry over trials.
    pub stderr: SquareMatrix,
}

/// Monte-Carlo estimate of `E[M]` over `trials` independent generator draws.
pub fn classic_init_expectation(
    composition: &Composition,
    trials: usize,
    dim: usize,
    rng: &mut SeededRng,
) -> Result<ClassicEstimate> {
    composition.validate()?;
    if trials < 2 {
        return Err(Error::invalid(
            "need at least two trials for a standard error",
        ));
    }
    let family = rng.fork();
    let samples = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut r = family.stream(t as u64);
            let v = composition.evaluate(dim, &mut r)?;
            let mut m = [[1.0f64; 3]; 3];
            for i in 0..3 {
                for j in i + 1..3 {
                    let s = v[i].similarity(&v[j])?;
                    m[i][j] = s;
                    m[j][i] = s;
                }
            }
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?;
    let tf = trials as f64;
    let mean = SquareMatrix::from_fn(3, |i, j| samples.iter().map(|m| m[i][j]).sum::<f64>() / tf);
    let stderr = SquareMatrix::from_fn(3, |i, j| {
        let mu = mean[(i, j)];
        let var = samples.iter().map(|m| (m[i][j] - mu).powi(2)).sum::<f64>() / (tf - 1.0);
        (var / tf).sqrt()
    });
    Ok(ClassicEstimate { mean, stderr })
}

fn check_similarity_3x3(em: &SquareMatrix) -> Result<()> {
    if em.n() != 3 {
        return Err(Error::invalid(format!(
            "expected a 3x3 matrix, got {0}x{0}",
            em.n()
        )));
    }
    if em.max_asymmetry() > 1e-9 {
        return Err(Error::invalid(
            "expected-similarity matrix must be symmetric",
        ));
    }
    if (0..3).any(|i| (em[(i, i)] - 1.0).abs() > 1e-9) {
        return Err(Error::invalid(
            "expected-similarity matrix must have a unit diagonal",
        ));
    }
    Ok(())
}

/// True iff `max(EM_01, EM_02, EM_12) >= -tol`, i.e. `EM` is consistent with
/// classic random initialization.
pub fn verify_classic_limit(em: &SquareMatrix, tol: f64) -> Result<bool> {
    check_similarity_3x3(em)?;
    let best = em[(0, 1)].max(em[(0, 2)]).max(em[(1, 2)]);
    Ok(best >= -tol)
}

/// Frobenius distance from `EM` to the all-`-1/3` off-diagonal target.
pub fn classic_limit_gap(em: &SquareMatrix) -> Result<f64> {
    check_similarity_3x3(em)?;
    let target = SquareMatrix::from_fn(3, |i, j| if i == j { 1.0 } else { -1.0 / 3.0 });
    Ok(em.frobenius_distance(&target))
}

/// Lower bound on [`classic_limit_gap`] for any classic composition.
pub fn classic_gap_bound() -> f64 {
    std::f64::consts::SQRT_2 / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn off(a: f64, b: f64, c: f64) -> SquareMatrix {
        let mut m = SquareMatrix::identity(3);
        for (i, j, v) in [(0, 1, a), (0, 2, b), (1, 2, c)] {
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
        m
    }

    #[test]
    fn limit_examples() {
        assert!(verify_classic_limit(&off(-0.3, -0.3, 0.09), 0.0).unwrap());
        let third = off(-1.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0);
        assert!(!verify_classic_limit(&third, 1e-6).unwrap());
        assert!(verify_classic_limit(&SquareMatrix::identity(3), 0.0).unwrap());
        assert!(verify_classic_limit(&SquareMatrix::identity(4), 0.0).is_err());
        assert!(verify_classic_limit(&off(0.1, 0.1, 0.1).clone_with(0, 0, 0.5), 0.0).is_err());
    }

    #[test]
    fn gap_of_identity() {
        // Off-diagonals 0 vs -1/3: sqrt(6 / 9).
        let g = classic_limit_gap(&SquareMatrix::identity(3)).unwrap();
        assert!((g - (6.0f64 / 9.0).sqrt()).abs() < 1e-15);
        assert!(g >= classic_gap_bound());
    }

    #[test]
    fn rejects_unknown_ops_and_bad_refs() {
        let bad_op = r#"{"generator_probs":[0.5],"nodes":[{"op":"generator","index":0},{"op":"bundle","args":[0]}],"outputs":[0,0,0]}"#;
        assert!(Composition::from_json(bad_op).is_err());
        let forward = r#"{"generator_probs":[0.5],"nodes":[{"op":"bind","left":0,"right":1}],"outputs":[0,0,0]}"#;
        assert!(Composition::from_json(forward).is_err());
        let ok = r#"{"generator_probs":[0.5],"nodes":[{"op":"generator","index":0},{"op":"permute","arg":0,"shift":3}],"outputs":[0,1,1]}"#;
        assert!(Composition::from_json(ok).is_ok());
    }

    #[test]
    fn same_generator_gives_all_ones() {
        let c = Composition {
            generator_probs: vec![0.5],
            nodes: vec![CompositionNode::Generator { index: 0 }],
            outputs: [0, 0, 0],
        };
        let est = classic_init_expectation(&c, 10, 256, &mut SeededRng::new(1)).unwrap();
        assert!(est.mean.as_slice().iter().all(|&x| x == 1.0));
    }

    impl SquareMatrix {
        fn clone_with(&self, i: usize, j: usize, v: f64) -> Self {
            let mut m = self.clone();
            m[(i, j)] = v;
            m
        }
    }
}
