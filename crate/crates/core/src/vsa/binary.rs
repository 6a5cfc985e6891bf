//! Bit-packed binary hypervectors over {-1, +1}.
//!
//! Coordinate `i` lives in bit `i % 64` of word `i / 64`; a set bit is `+1`.
//! Padding bits past `dim` are always zero, so XOR/popcount kernels never see
//! garbage in the tail word.

use rand::{Rng, RngCore};

use crate::error::{check_dim, Error, Result};
use crate::rng::SeededRng;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryHypervector {
    dim: usize,
    words: Vec<u64>,
}

#[inline]
pub(crate) fn word_count(dim: usize) -> usize {
    dim.div_ceil(64)
}

#[inline]
fn tail_mask(dim: usize) -> u64 {
    match dim % 64 {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

impl BinaryHypervector {
    /// The all-(+1) vector, the binding identity.
    pub fn ones(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("hypervector dimension must be positive"));
        }
        let mut words = vec![u64::MAX; word_count(dim)];
        *words.last_mut().unwrap() &= tail_mask(dim);
        Ok(Self { dim, words })
    }

    /// Builds from packed words; padding bits are cleared.
    pub fn from_words(dim: usize, mut words: Vec<u64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("hypervector dimension must be positive"));
        }
        if words.len() != word_count(dim) {
            return Err(Error::Format(format!(
                "expected {} words for dim {dim}, got {}",
                word_count(dim),
                words.len()
            )));
        }
        *words.last_mut().unwrap() &= tail_mask(dim);
        Ok(Self { dim, words })
    }

    /// Builds from a sign slice; any positive entry is `+1`, anything else `-1`.
    pub fn from_signs(signs: &[i8]) -> Result<Self> {
        Self::from_bits(signs.len(), signs.iter().map(|&s| s > 0))
    }

    pub fn from_bits(dim: usize, bits: impl IntoIterator<Item = bool>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("hypervector dimension must be positive"));
        }
        let mut words = vec![0u64; word_count(dim)];
        let mut count = 0usize;
        for (i, b) in bits.into_iter().enumerate() {
            if i >= dim {
                return Err(Error::DimMismatch {
                    left: dim,
                    right: i + 1,
                });
            }
            if b {
                words[i / 64] |= 1 << (i % 64);
            }
            count = i + 1;
        }
        check_dim(dim, count)?;
        Ok(Self { dim, words })
    }

    /// i.i.d. coordinates with `P(+1) = p_plus`.
    pub fn random(dim: usize, p_plus: f64, rng: &mut SeededRng) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_plus) {
            return Err(Error::invalid(format!(
                "probability {p_plus} outside [0, 1]"
            )));
        }
        if dim == 0 {
            return Err(Error::invalid("hypervector dimension must be positive"));
        }
        let mut words = vec![0u64; word_count(dim)];
        if p_plus == 0.5 {
            for w in words.iter_mut() {
                *w = rng.next_u64();
            }
        } else {
            for i in 0..dim {
                if rng.random_bool(p_plus) {
                    words[i / 64] |= 1 << (i % 64);
                }
            }
        }
        *words.last_mut().unwrap() &= tail_mask(dim);
        Ok(Self { dim, words })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Sign of coordinate `i` as `+1` or `-1`.
    #[inline]
    pub fn get(&self, i: usize) -> i8 {
        if self.bit(i) {
            1
        } else {
            -1
        }
    }

    #[inline]
    pub fn bit(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn signs(&self) -> Vec<i8> {
        (0..self.dim).map(|i| self.get(i)).collect()
    }

    pub fn count_plus(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of coordinates where `self` and `other` disagree.
    pub fn hamming(&self, other: &Self) -> Result<usize> {
        check_dim(self.dim, other.dim)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum())
    }

    /// `(1/D) Σ u_i v_i`, i.e. `(matches - mismatches) / D`.
    pub fn similarity(&self, other: &Self) -> Result<f64> {
        let mismatches = self.hamming(other)? as i64;
        let d = self.dim as i64;
        Ok((d - 2 * mismatches) as f64 / d as f64)
    }

    /// Coordinate-wise product (XNOR on the packed bits).
    pub fn bind(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let mut words: Vec<u64> = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| !(a ^ b))
            .collect();
        *words.last_mut().unwrap() &= tail_mask(self.dim);
        Ok(Self {
            dim: self.dim,
            words,
        })
    }

    pub fn negate(&self) -> Self {
        let mut words: Vec<u64> = self.words.iter().map(|w| !w).collect();
        *words.last_mut().unwrap() &= tail_mask(self.dim);
        Self {
            dim: self.dim,
            words,
        }
    }

    /// Cyclic rotation: output coordinate `i` takes input coordinate `i - j mod D`.
    pub fn permute(&self, j: i64) -> Self {
        let d = self.dim;
        let shift = j.rem_euclid(d as i64) as usize;
        if shift == 0 {
            return self.clone();
        }
        let mut words = vec![0u64; self.words.len()];
        for (w, out) in words.iter_mut().enumerate() {
            let start = w * 64;
            let len = (d - start).min(64);
            let src = (start + d - shift) % d;
            *out = self.read_wrapping(src, len);
        }
        Self { dim: d, words }
    }

    /// Reads `len <= 64` bits starting at coordinate `start`, wrapping at `dim`.
    fn read_wrapping(&self, start: usize, len: usize) -> u64 {
        let first = (self.dim - start).min(len);
        let mut v = self.read_linear(start, first);
        if first < len {
            v |= self.read_linear(0, len - first) << first;
        }
        v
    }

    /// Reads `len <= 64` bits starting at `start`; requires `start + len <= dim`.
    fn read_linear(&self, start: usize, len: usize) -> u64 {
        if len == 0 {
            return 0;
        }
        let w = start / 64;
        let off = start % 64;
        let mut v = self.words[w] >> off;
        if off != 0 && off + len > 64 {
            v |= self.words[w + 1] << (64 - off);
        }
        if len < 64 {
            v &= (1u64 << len) - 1;
        }
        v
    }
}

/// Streaming majority-vote accumulator.
///
/// Counts `+1` votes per coordinate; accumulators built on disjoint input
/// subsets can be [`merge`](Self::merge)d in any order with the same result.
#[derive(Clone, Debug)]
pub struct BinaryBundler {
    dim: usize,
    plus: Vec<u32>,
    total: u32,
}

impl BinaryBundler {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            plus: vec![0; dim],
            total: 0,
        }
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

    pub fn add(&mut self, v: &BinaryHypervector) -> Result<()> {
        check_dim(self.dim, v.dim)?;
        for (chunk, &word) in self.plus.chunks_mut(64).zip(&v.words) {
            for (b, c) in chunk.iter_mut().enumerate() {
                *c += ((word >> b) & 1) as u32;
            }
        }
        self.total += 1;
        Ok(())
    }

    pub fn merge(&mut self, other: &Self) -> Result<()> {
        check_dim(self.dim, other.dim)?;
        for (a, b) in self.plus.iter_mut().zip(&other.plus) {
            *a += b;
        }
        self.total += other.total;
        Ok(())
    }

    /// Per-coordinate vote sum `Σ_k (v_k)_i`.
    pub fn sums(&self) -> Vec<i64> {
        self.plus
            .iter()
            .map(|&p| 2 * p as i64 - self.total as i64)
            .collect()
    }

    /// Majority sign per coordinate. A zero sum draws one index from `{0, 1}`
    /// (`0 -> +1`, `1 -> -1`), in coordinate order.
    pub fn finish(&self, rng: &mut SeededRng) -> Result<BinaryHypervector> {
        if self.total == 0 {
            return Err(Error::Empty("bundle of zero hypervectors".into()));
        }
        let mut words = vec![0u64; word_count(self.dim)];
        let total = self.total;
        for (i, &p) in self.plus.iter().enumerate() {
            let plus = match (2 * p).cmp(&total) {
                std::cmp::Ordering::Greater => true,
                std::cmp::Ordering::Less => false,
                std::cmp::Ordering::Equal => rng.random_range(0..2u32) == 0,
            };
            if plus {
                words[i / 64] |= 1 << (i % 64);
            }
        }
        Ok(BinaryHypervector {
            dim: self.dim,
            words,
        })
    }
}

/// Majority vote with uniformly random tie-breaking.
pub fn bundle_binary(vs: &[BinaryHypervector], rng: &mut SeededRng) -> Result<BinaryHypervector> {
    let first = vs
        .first()
        .ok_or_else(|| Error::Empty("bundle of zero hypervectors".into()))?;
    let mut acc = BinaryBundler::new(first.dim);
    for v in vs {
        acc.add(v)?;
    }
    acc.finish(rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hv(s: &[i8]) -> BinaryHypervector {
        BinaryHypervector::from_signs(s).unwrap()
    }

    #[test]
    fn similarity_examples() {
        let mut rng = SeededRng::new(1);
        let u = BinaryHypervector::random(1000, 0.5, &mut rng).unwrap();
        assert_eq!(u.similarity(&u).unwrap(), 1.0);
        assert_eq!(u.similarity(&u.negate()).unwrap(), -1.0);
        let a = hv(&[1, 1, -1, -1]);
        let b = hv(&[1, -1, -1, 1]);
        assert_eq!(a.similarity(&b).unwrap(), 0.0);
    }

    #[test]
    fn dim_mismatch_is_an_error() {
        let a = hv(&[1, 1, 1]);
        let b = hv(&[1, 1]);
        assert!(matches!(a.similarity(&b), Err(Error::DimMismatch { .. })));
        assert!(a.bind(&b).is_err());
    }

    #[test]
    fn bind_identity_and_self_inverse() {
        let mut rng = SeededRng::new(2);
        let u = BinaryHypervector::random(130, 0.5, &mut rng).unwrap();
        let one = BinaryHypervector::ones(130).unwrap();
        assert_eq!(u.bind(&u).unwrap(), one);
        assert_eq!(u.bind(&one).unwrap(), u);
    }

    #[test]
    fn padding_stays_zero() {
        let u = BinaryHypervector::ones(70).unwrap();
        assert_eq!(u.words()[1], (1 << 6) - 1);
        assert_eq!(u.negate().words()[1], 0);
        assert_eq!(u.bind(&u.negate()).unwrap().words()[1], 0);
        assert_eq!(u.permute(13).words()[1], (1 << 6) - 1);
    }

    #[test]
    fn permute_examples() {
        let v = hv(&[1, -1, -1, 1]);
        assert_eq!(v.permute(0), v);
        assert_eq!(v.permute(4), v);
        assert_eq!(v.permute(1).signs(), vec![1, 1, -1, -1]);
        assert_eq!(v.permute(-1).signs(), vec![-1, -1, 1, 1]);
    }

    #[test]
    fn permute_matches_index_rotation_on_odd_dims() {
        let mut rng = SeededRng::new(3);
        for dim in [1usize, 5, 63, 64, 65, 127, 200] {
            let v = BinaryHypervector::random(dim, 0.5, &mut rng).unwrap();
            let s = v.signs();
            for j in [-130i64, -1, 1, 7, 64, 65, 199] {
                let p = v.permute(j).signs();
                for i in 0..dim {
                    let src = (i as i64 - j).rem_euclid(dim as i64) as usize;
                    assert_eq!(p[i], s[src], "dim {dim} j {j} i {i}");
                }
                assert_eq!(v.permute(j).permute(-j), v);
            }
        }
    }

    #[test]
    fn bundle_examples() {
        let mut rng = SeededRng::new(4);
        let u = BinaryHypervector::random(257, 0.5, &mut rng).unwrap();
        let w = BinaryHypervector::random(257, 0.5, &mut rng).unwrap();
        assert_eq!(
            bundle_binary(std::slice::from_ref(&u), &mut rng).unwrap(),
            u
        );
        assert_eq!(
            bundle_binary(&[u.clone(), u.clone(), w], &mut rng).unwrap(),
            u
        );
        assert!(matches!(bundle_binary(&[], &mut rng), Err(Error::Empty(_))));
    }

    #[test]
    fn tie_break_draws_once_per_tied_coordinate() {
        // u and -u tie everywhere: the result is exactly the sequence of draws.
        let u = hv(&[1, -1, 1, 1, -1]);
        let mut rng = SeededRng::new(5);
        let out = bundle_binary(&[u.clone(), u.negate()], &mut rng).unwrap();
        let mut replay = SeededRng::new(5);
        let expect: Vec<i8> = (0..5)
            .map(|_| {
                if replay.random_range(0..2u32) == 0 {
                    1
                } else {
                    -1
                }
            })
            .collect();
        assert_eq!(out.signs(), expect);
    }

    #[test]
    fn random_probability_bounds() {
        let mut rng = SeededRng::new(6);
        assert!(BinaryHypervector::random(10, 1.5, &mut rng).is_err());
        let all = BinaryHypervector::random(100, 1.0, &mut rng).unwrap();
        assert_eq!(all, BinaryHypervector::ones(100).unwrap());
        let none = BinaryHypervector::random(100, 0.0, &mut rng).unwrap();
        assert_eq!(none.count_plus(), 0);
    }
}
