//! Hypervectors over the cyclic group Z/nZ.
//!
//! Binding is elementwise addition mod n. Similarity is the coordinate average
//! of a character-weighted cosine table (see [`CyclicSimilaritySpec`]), and
//! bundling is the per-coordinate argmax of summed table scores.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{check_dim, Error, Result};
use crate::rng::SeededRng;

/// Largest supported group order; elements are stored one per byte and the
/// order itself is serialized in one byte.
pub const MAX_ORDER: usize = 255;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CyclicHypervector {
    order: u8,
    elems: Vec<u8>,
}

pub(crate) fn check_order(order: usize) -> Result<()> {
    if !(2..=MAX_ORDER).contains(&order) {
        return Err(Error::invalid(format!(
            "group order {order} outside [2, {MAX_ORDER}]"
        )));
    }
    Ok(())
}

fn check_same_order(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::OrderMismatch { left: a, right: b });
    }
    Ok(())
}

impl CyclicHypervector {
    pub fn new(order: usize, elems: Vec<u8>) -> Result<Self> {
        check_order(order)?;
        if elems.is_empty() {
            return Err(Error::invalid("hypervector dimension must be positive"));
        }
        if let Some((i, &e)) = elems.iter().enumerate().find(|(_, &e)| e as usize >= order) {
            return Err(Error::invalid(format!(
                "element {e} at coordinate {i} not in Z/{order}Z"
            )));
        }
        Ok(Self {
            order: order as u8,
            elems,
        })
    }

    /// The group identity (all zeros).
    pub fn zeros(dim: usize, order: usize) -> Result<Self> {
        Self::new(order, vec![0; dim])
    }

    /// Uniform i.i.d. elements.
    pub fn random(dim: usize, order: usize, rng: &mut SeededRng) -> Result<Self> {
        check_order(order)?;
        if dim == 0 {
            return Err(Error::invalid("hypervector dimension must be positive"));
        }
        let n = order as u8;
        let elems = (0..dim).map(|_| rng.random_range(0..n)).collect();
        Ok(Self { order: n, elems })
    }

    pub fn dim(&self) -> usize {
        self.elems.len()
    }

    pub fn order(&self) -> usize {
        self.order as usize
    }

    pub fn elems(&self) -> &[u8] {
        &self.elems
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        check_same_order(self.order(), other.order())?;
        check_dim(self.dim(), other.dim())
    }

    pub fn bind(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let n = self.order as u16;
        let elems = self
            .elems
            .iter()
            .zip(&other.elems)
            .map(|(&a, &b)| ((a as u16 + b as u16) % n) as u8)
            .collect();
        Ok(Self {
            order: self.order,
            elems,
        })
    }

    /// Group inverse `-x mod n`.
    pub fn invert(&self) -> Self {
        let n = self.order as u16;
        let elems = self
            .elems
            .iter()
            .map(|&a| ((n - a as u16) % n) as u8)
            .collect();
        Self {
            order: self.order,
            elems,
        }
    }

    /// Same rotation convention as [`BinaryHypervector::permute`](super::BinaryHypervector::permute).
    pub fn permute(&self, j: i64) -> Self {
        let d = self.dim();
        let shift = j.rem_euclid(d as i64) as usize;
        let mut elems = self.elems.clone();
        elems.rotate_right(shift);
        Self {
            order: self.order,
            elems,
        }
    }

    pub fn similarity(&self, other: &Self, spec: &CyclicSimilaritySpec) -> Result<f64> {
        self.check_compatible(other)?;
        check_same_order(self.order(), spec.order())?;
        let n = self.order as usize;
        // Count differences first so the result does not depend on
        // coordinate order (permutations preserve it bit for bit).
        let mut hist = vec![0u64; n];
        for (&a, &b) in self.elems.iter().zip(&other.elems) {
            hist[(a as usize + n - b as usize) % n] += 1;
        }
        let sum: f64 = hist
            .iter()
            .zip(spec.table())
            .map(|(&c, t)| c as f64 * t)
            .sum();
        Ok(sum / self.dim() as f64)
    }
}

/// Character-weighted similarity kernel for Z/nZ.
///
/// `table[d] = Σ_k α(k) cos(2π d k / n) / Σ_k α(k)` over `k = 1..n-1`, with
/// `α(k) = α(n-k)`. The default puts all weight on the first character
/// (and its conjugate), giving `table[d] = cos(2π d / n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CyclicSimilaritySpec {
    order: usize,
    alpha: Vec<f64>,
    table: Vec<f64>,
}

impl CyclicSimilaritySpec {
    pub fn new(order: usize) -> Result<Self> {
        check_order(order)?;
        let mut alpha = vec![0.0; order - 1];
        alpha[0] = 1.0;
        alpha[order - 2] = 1.0;
        Self::with_alpha(order, alpha)
    }

    /// `alpha[k - 1]` is the weight of character `k`, for `k = 1..n-1`.
    pub fn with_alpha(order: usize, alpha: Vec<f64>) -> Result<Self> {
        check_order(order)?;
        if alpha.len() != order - 1 {
            return Err(Error::invalid(format!(
                "alpha needs {} weights for order {order}, got {}",
                order - 1,
                alpha.len()
            )));
        }
        if alpha.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::invalid(
                "alpha weights must be finite and nonnegative",
            ));
        }
        for k in 1..order {
            let (a, b) = (alpha[k - 1], alpha[order - k - 1]);
            if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                return Err(Error::invalid(format!(
                    "alpha must satisfy alpha(k) = alpha(n-k); k = {k} gives {a} vs {b}"
                )));
            }
        }
        let total: f64 = alpha.iter().sum();
        if total <= 0.0 {
            return Err(Error::invalid("alpha weights sum to zero"));
        }
        let table = (0..order)
            .map(|d| {
                if d == 0 {
                    return 1.0;
                }
                let s: f64 = (1..order)
                    .map(|k| {
                        alpha[k - 1] * (2.0 * PI * ((d * k) % order) as f64 / order as f64).cos()
                    })
                    .sum();
                (s / total).clamp(-1.0, 1.0)
            })
            .collect();
        Ok(Self {
            order,
            alpha,
            table,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// `table()[d]` is the similarity of two elements differing by `d`.
    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// Character `k` as a signed frequency in `(-n/2, n/2]`, so the real
    /// extension is the lowest-frequency interpolant of the table.
    fn frequency(&self, k: usize) -> f64 {
        let f = if 2 * k > self.order {
            k as f64 - self.order as f64
        } else {
            k as f64
        };
        2.0 * PI * f / self.order as f64
    }

    /// Derivative of [`Self::table_continuous`].
    pub fn table_slope(&self, d: f64) -> f64 {
        let total: f64 = self.alpha.iter().sum();
        let s: f64 = (1..self.order)
            .map(|k| {
                let w = self.frequency(k);
                -self.alpha[k - 1] * w * (w * d).sin()
            })
            .sum();
        s / total
    }

    /// `table` extended to a real difference `d`; for the default alpha this
    /// is `cos(2 pi d / n)`.
    pub fn table_continuous(&self, d: f64) -> f64 {
        let total: f64 = self.alpha.iter().sum();
        let s: f64 = (1..self.order)
            .map(|k| self.alpha[k - 1] * (self.frequency(k) * d).cos())
            .sum();
        s / total
    }
}

/// Streaming per-coordinate symbol histogram for cyclic bundling.
#[derive(Clone, Debug)]
pub struct CyclicBundler {
    order: usize,
    dim: usize,
    counts: Vec<u32>,
    total: u32,
}

impl CyclicBundler {
    pub fn new(dim: usize, order: usize) -> Result<Self> {
        check_order(order)?;
        Ok(Self {
            order,
            dim,
            counts: vec![0; dim * order],
            total: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.total as usize
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn add(&mut self, v: &CyclicHypervector) -> Result<()> {
        check_same_order(self.order, v.order())?;
        check_dim(self.dim, v.dim())?;
        let n = self.order;
        for (i, &e) in v.elems.iter().enumerate() {
            self.counts[i * n + e as usize] += 1;
        }
        self.total += 1;
        Ok(())
    }

    pub fn merge(&mut self, other: &Self) -> Result<()> {
        check_same_order(self.order, other.order)?;
        check_dim(self.dim, other.dim)?;
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total += other.total;
        Ok(())
    }

    /// Summed table score of every candidate symbol at coordinate `i`.
    pub fn scores(&self, i: usize, spec: &CyclicSimilaritySpec) -> Vec<f64> {
        let n = self.order;
        let counts = &self.counts[i * n..(i + 1) * n];
        let table = spec.table();
        (0..n)
            .map(|g| {
                counts
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0)
                    .map(|(s, &c)| c as f64 * table[(g + n - s) % n])
                    .sum()
            })
            .collect()
    }

    /// Argmax symbol per coordinate. Candidates whose score is within
    /// `1e-9 * count` of the maximum are tied; a tie draws one index into the
    /// ascending list of tied symbols, in coordinate order.
    pub fn finish(
        &self,
        spec: &CyclicSimilaritySpec,
        rng: &mut SeededRng,
    ) -> Result<CyclicHypervector> {
        if self.total == 0 {
            return Err(Error::Empty("bundle of zero hypervectors".into()));
        }
        check_same_order(self.order, spec.order())?;
        let tol = 1e-9 * self.total as f64;
        let mut elems = Vec::with_capacity(self.dim);
        let mut tied = Vec::with_capacity(self.order);
        for i in 0..self.dim {
            let scores = self.scores(i, spec);
            let best = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            tied.clear();
            tied.extend((0..self.order).filter(|&g| scores[g] >= best - tol));
            let pick = if tied.len() == 1 {
                tied[0]
            } else {
                tied[rng.random_range(0..tied.len() as u32) as usize]
            };
            elems.push(pick as u8);
        }
        Ok(CyclicHypervector {
            order: self.order as u8,
            elems,
        })
    }
}

pub fn bundle_cyclic(
    vs: &[CyclicHypervector],
    spec: &CyclicSimilaritySpec,
    rng: &mut SeededRng,
) -> Result<CyclicHypervector> {
    let first = vs
        .first()
        .ok_or_else(|| Error::Empty("bundle of zero hypervectors".into()))?;
    let mut acc = CyclicBundler::new(first.dim(), first.order())?;
    for v in vs {
        acc.add(v)?;
    }
    acc.finish(spec, rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cv(n: usize, e: &[u8]) -> CyclicHypervector {
        CyclicHypervector::new(n, e.to_vec()).unwrap()
    }

    #[test]
    fn table_invariants() {
        for n in [2usize, 3, 4, 5, 8, 16, 255] {
            let spec = CyclicSimilaritySpec::new(n).unwrap();
            let t = spec.table();
            assert_eq!(t[0], 1.0);
            for d in 1..n {
                assert!((t[d] - t[n - d]).abs() < 1e-12);
                assert!((-1.0..=1.0).contains(&t[d]));
                assert!(t[d] < 1.0);
            }
            let s: f64 = t.iter().sum();
            assert!(s.abs() < 1e-12, "order {n}: table sum {s}");
        }
    }

    #[test]
    fn weighted_alpha_table() {
        // alpha on k = 2 only (and its conjugate) for n = 8.
        let mut alpha = vec![0.0; 7];
        alpha[1] = 1.0;
        alpha[5] = 1.0;
        let spec = CyclicSimilaritySpec::with_alpha(8, alpha).unwrap();
        for d in 0..8 {
            let want = (2.0 * PI * 2.0 * d as f64 / 8.0).cos();
            assert!((spec.table()[d] - want).abs() < 1e-12);
        }
        assert!(CyclicSimilaritySpec::with_alpha(4, vec![1.0, 0.0, 0.0]).is_err());
        assert!(CyclicSimilaritySpec::with_alpha(4, vec![0.0, 0.0, 0.0]).is_err());
        assert!(CyclicSimilaritySpec::with_alpha(4, vec![-1.0, 0.0, -1.0]).is_err());
    }

    #[test]
    fn similarity_examples() {
        let spec4 = CyclicSimilaritySpec::new(4).unwrap();
        let u = cv(4, &[0, 1, 2, 3]);
        assert_eq!(u.similarity(&u, &spec4).unwrap(), 1.0);
        let v = cv(4, &[2, 3, 0, 1]);
        assert!((u.similarity(&v, &spec4).unwrap() + 1.0).abs() < 1e-15);
        let spec3 = CyclicSimilaritySpec::new(3).unwrap();
        let a = cv(3, &[0, 1, 2]);
        let b = cv(3, &[2, 0, 1]);
        assert!((a.similarity(&b, &spec3).unwrap() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn mismatches_are_errors() {
        let spec = CyclicSimilaritySpec::new(4).unwrap();
        let a = cv(4, &[0, 1]);
        let b = cv(5, &[0, 1]);
        let c = cv(4, &[0, 1, 2]);
        assert!(matches!(a.bind(&b), Err(Error::OrderMismatch { .. })));
        assert!(matches!(a.bind(&c), Err(Error::DimMismatch { .. })));
        assert!(a.similarity(&b, &spec).is_err());
        assert!(CyclicHypervector::new(4, vec![4]).is_err());
        assert!(CyclicHypervector::new(1, vec![0]).is_err());
    }

    #[test]
    fn bind_examples() {
        let a = cv(5, &[3, 3, 0]);
        let b = cv(5, &[4, 4, 4]);
        assert_eq!(a.bind(&b).unwrap().elems(), &[2, 2, 4]);
        let z = CyclicHypervector::zeros(3, 5).unwrap();
        assert_eq!(a.bind(&z).unwrap(), a);
        assert_eq!(a.bind(&a.invert()).unwrap(), z);
    }

    #[test]
    fn permute_rotation() {
        let v = cv(8, &[1, 2, 3, 4]);
        assert_eq!(v.permute(1).elems(), &[4, 1, 2, 3]);
        assert_eq!(v.permute(4), v);
        assert_eq!(v.permute(-3).permute(3), v);
    }

    #[test]
    fn bundle_majority_for_n3() {
        // Score table for votes {u, u, w} with u != w: u scores 2 - 1/2 = 1.5,
        // w scores -1 + 1 = 0, the third symbol -1 - 1/2 = -1.5.
        let spec = CyclicSimilaritySpec::new(3).unwrap();
        let mut rng = SeededRng::new(9);
        let u = CyclicHypervector::random(500, 3, &mut rng).unwrap();
        let w = CyclicHypervector::random(500, 3, &mut rng).unwrap();
        let b = bundle_cyclic(&[u.clone(), u.clone(), w], &spec, &mut rng).unwrap();
        assert_eq!(b, u);
        assert_eq!(
            bundle_cyclic(std::slice::from_ref(&u), &spec, &mut rng).unwrap(),
            u
        );
        assert!(bundle_cyclic(&[], &spec, &mut rng).is_err());
    }

    #[test]
    fn bundle_scores_enumerated() {
        let spec = CyclicSimilaritySpec::new(3).unwrap();
        let mut acc = CyclicBundler::new(1, 3).unwrap();
        for e in [0u8, 0, 1] {
            acc.add(&cv(3, &[e])).unwrap();
        }
        let s = acc.scores(0, &spec);
        assert!((s[0] - 1.5).abs() < 1e-12);
        assert!(s[1].abs() < 1e-12);
        assert!((s[2] + 1.5).abs() < 1e-12);
    }

    #[test]
    fn continuous_table_agrees_on_lattice() {
        let spec = CyclicSimilaritySpec::new(16).unwrap();
        for d in 0..16 {
            assert!((spec.table_continuous(d as f64) - spec.table()[d]).abs() < 1e-12);
        }
        let h = 1e-6;
        for d in [0.3, 1.7, 5.5] {
            let fd = (spec.table_continuous(d + h) - spec.table_continuous(d - h)) / (2.0 * h);
            assert!((fd - spec.table_slope(d)).abs() < 1e-7);
            let w = 2.0 * PI / 16.0;
            assert!((spec.table_continuous(d) - (w * d).cos()).abs() < 1e-12);
            assert!((spec.table_slope(d) + w * (w * d).sin()).abs() < 1e-12);
        }
    }
}
