//! Three-symbol classification task that binary HDC bundling cannot learn.
//!
//! `P(x, y) = 1/9 + 2p` when `x == y` and `1/9 - p` otherwise, for
//! `x, y in {0, 1, 2}`. The Bayes classifier predicts `y = x`.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rff::CorrelatedBasis;
use crate::rng::SeededRng;
use crate::vsa::{BinaryHypervector, CyclicHypervector, Family, Hypervector};

pub const SYMBOLS: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticTaskSpec {
    pub p: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for SyntheticTaskSpec {
    fn default() -> Self {
        Self {
            p: 0.05,
            samples: 100_000,
            seed: 0,
        }
    }
}

impl SyntheticTaskSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p < 1.0 / 9.0) {
            return Err(Error::invalid(format!(
                "p must lie in (0, 1/9), got {}",
                self.p
            )));
        }
        if self.samples == 0 {
            return Err(Error::invalid("need at least one sample"));
        }
        Ok(())
    }

    /// Row-major `P(x, y)`.
    pub fn joint(&self) -> [[f64; SYMBOLS]; SYMBOLS] {
        let mut j = [[1.0 / 9.0 - self.p; SYMBOLS]; SYMBOLS];
        for (x, row) in j.iter_mut().enumerate() {
            row[x] = 1.0 / 9.0 + 2.0 * self.p;
        }
        j
    }

    /// `3 (1/9 + 2p) = 1/3 + 6p`.
    pub fn bayes_accuracy(&self) -> f64 {
        SYMBOLS as f64 * (1.0 / 9.0 + 2.0 * self.p)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSample {
    pub xs: Vec<u8>,
    pub ys: Vec<usize>,
}

impl SyntheticSample {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Observed `count(x, y)`.
    pub fn counts(&self) -> [[usize; SYMBOLS]; SYMBOLS] {
        let mut c = [[0; SYMBOLS]; SYMBOLS];
        for (&x, &y) in self.xs.iter().zip(&self.ys) {
            c[x as usize][y] += 1;
        }
        c
    }
}

/// `spec.samples` i.i.d. draws from stream 0 of `spec.seed`.
pub fn synth_task(spec: &SyntheticTaskSpec) -> Result<SyntheticSample> {
    synth_task_with(spec, &mut SeededRng::new(spec.seed))
}

/// As [`synth_task`], drawing from `rng` instead of `spec.seed`.
pub fn synth_task_with(spec: &SyntheticTaskSpec, rng: &mut SeededRng) -> Result<SyntheticSample> {
    spec.validate()?;
    let joint = spec.joint();
    let cells: Vec<f64> = joint.iter().flatten().copied().collect();
    let dist = WeightedIndex::new(&cells).map_err(|e| Error::Numeric(e.to_string()))?;
    let (mut xs, mut ys) = (
        Vec::with_capacity(spec.samples),
        Vec::with_capacity(spec.samples),
    );
    for _ in 0..spec.samples {
        let k = dist.sample(rng);
        xs.push((k / SYMBOLS) as u8);
        ys.push(k % SYMBOLS);
    }
    Ok(SyntheticSample { xs, ys })
}

/// `phi(x)` for the task: three independent random vectors for binary, and
/// `r + x * 1` for a cyclic family (pairwise similarity `cos(2 pi / n)`,
/// exactly `-1/2` for `n = 3`).
pub fn synth_basis(family: Family, dim: usize, rng: &mut SeededRng) -> Result<CorrelatedBasis> {
    let seed = rng.master();
    let vectors = match family {
        Family::Binary => (0..SYMBOLS)
            .map(|_| {
                Ok(Hypervector::Binary(BinaryHypervector::random(
                    dim, 0.5, rng,
                )?))
            })
            .collect::<Result<Vec<_>>>()?,
        Family::Cyclic(n) => {
            let r = CyclicHypervector::random(dim, n, rng)?;
            (0..SYMBOLS)
                .map(|x| {
                    let shift = CyclicHypervector::new(n, vec![(x % n) as u8; dim])?;
                    Ok(Hypervector::Cyclic(r.bind(&shift)?))
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    CorrelatedBasis::new(family, vectors, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bayes_accuracy_values() {
        let s = SyntheticTaskSpec::default();
        assert!((s.bayes_accuracy() - (1.0 / 3.0 + 0.3)).abs() < 1e-15);
        let tiny = SyntheticTaskSpec { p: 1e-9, ..s };
        assert!((tiny.bayes_accuracy() - 1.0 / 3.0).abs() < 1e-8);
        let total: f64 = SyntheticTaskSpec::default().joint().iter().flatten().sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_p() {
        for p in [0.0, -0.1, 1.0 / 9.0, 0.2] {
            assert!(synth_task(&SyntheticTaskSpec {
                p,
                ..Default::default()
            })
            .is_err());
        }
    }

    #[test]
    fn frequencies_match_joint() {
        let spec = SyntheticTaskSpec::default();
        let s = synth_task(&spec).unwrap();
        let m = s.len() as f64;
        let joint = spec.joint();
        for (x, row) in s.counts().iter().enumerate() {
            for (y, &c) in row.iter().enumerate() {
                let p = joint[x][y];
                let se = (p * (1.0 - p) / m).sqrt();
                assert!((c as f64 / m - p).abs() <= 3.0 * se, "cell ({x},{y})");
            }
        }
    }

    #[test]
    fn cyclic_basis_similarity() {
        let b = synth_basis(Family::Cyclic(3), 999, &mut SeededRng::new(2)).unwrap();
        let spec = Family::Cyclic(3).default_spec().unwrap();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let s = b.vectors()[i]
                .similarity(&b.vectors()[j], Some(&spec))
                .unwrap();
            assert!((s + 0.5).abs() < 1e-12);
        }
    }
}
