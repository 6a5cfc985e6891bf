use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rff::CorrelatedBasis;
use crate::vsa::{BinaryHypervector, CyclicHypervector, Family, Hypervector};

pub const QUANT_LEVELS: usize = 256;

/// Maps `[-1, 1]` to `0..=255` with round-half-up; out-of-range input is clamped.
pub fn quantize_feature(x: f64) -> u8 {
    let x = if x.is_nan() { 0.0 } else { x.clamp(-1.0, 1.0) };
    ((x + 1.0) / 2.0 * 255.0 + 0.5).floor().clamp(0.0, 255.0) as u8
}

pub fn quantize_features(xs: &[f64]) -> Vec<u8> {
    xs.iter().map(|&x| quantize_feature(x)).collect()
}

/// Position-shifted binding of per-value basis vectors:
/// `t = v[p_0] * Π^1 v[p_1] * ... * Π^(N-1) v[p_(N-1)]`.
#[derive(Clone, Debug)]
pub struct Encoder {
    basis: CorrelatedBasis,
    num_features: usize,
}

impl Encoder {
    pub fn new(basis: CorrelatedBasis, num_features: usize) -> Result<Self> {
        if num_features == 0 {
            return Err(Error::invalid("encoder needs at least one feature"));
        }
        Ok(Self {
            basis,
            num_features,
        })
    }

    pub fn family(&self) -> Family {
        self.basis.family()
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn basis(&self) -> &CorrelatedBasis {
        &self.basis
    }

    fn check(&self, p: &[u8]) -> Result<()> {
        if p.len() != self.num_features {
            return Err(Error::invalid(format!(
                "sample has {} features, encoder expects {}",
                p.len(),
                self.num_features
            )));
        }
        if let Some((j, &v)) = p
            .iter()
            .enumerate()
            .find(|(_, &v)| v as usize >= self.basis.len())
        {
            return Err(Error::invalid(format!(
                "feature {j} has index {v}, basis covers 0..{}",
                self.basis.len()
            )));
        }
        Ok(())
    }

    /// Encodes quantized indices.
    pub fn encode(&self, p: &[u8]) -> Result<Hypervector> {
        self.check(p)?;
        match self.family() {
            Family::Binary => {
                let mut acc = BinaryHypervector::ones(self.dim())?;
                for (j, &v) in p.iter().enumerate() {
                    let b = self.basis.vectors()[v as usize]
                        .as_binary()
                        .expect("binary basis");
                    let shifted = if j == 0 {
                        b.clone()
                    } else {
                        b.permute(j as i64)
                    };
                    acc = acc.bind(&shifted)?;
                }
                Ok(Hypervector::Binary(acc))
            }
            Family::Cyclic(n) => {
                let d = self.dim();
                let mut sums = vec![0u32; d];
                for (j, &v) in p.iter().enumerate() {
                    let e = self.basis.vectors()[v as usize]
                        .as_cyclic()
                        .expect("cyclic basis")
                        .elems();
                    // Π^j: output i reads input (i - j) mod D.
                    let s = j % d;
                    for (i, acc) in sums.iter_mut().enumerate() {
                        let src = if i >= s { i - s } else { i + d - s };
                        *acc += u32::from(e[src]);
                    }
                    if j % (1 << 20) == (1 << 20) - 1 {
                        sums.iter_mut().for_each(|x| *x %= n as u32);
                    }
                }
                let elems = sums.into_iter().map(|x| (x % n as u32) as u8).collect();
                Ok(Hypervector::Cyclic(CyclicHypervector::new(n, elems)?))
            }
        }
    }

    /// Quantizes real features in `[-1, 1]` and encodes them.
    pub fn encode_features(&self, x: &[f64]) -> Result<Hypervector> {
        self.encode(&quantize_features(x))
    }

    /// Encodes every row in parallel; output order matches input order.
    pub fn encode_all(&self, rows: &[Vec<f64>]) -> Result<Vec<Hypervector>> {
        rows.par_iter().map(|r| self.encode_features(r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    #[test]
    fn quantize_examples() {
        assert_eq!(quantize_feature(-1.0), 0);
        assert_eq!(quantize_feature(1.0), 255);
        assert_eq!(quantize_feature(0.0), 128);
        assert_eq!(quantize_feature(-7.0), 0);
        assert_eq!(quantize_feature(3.0), 255);
    }

    fn encoder(family: Family, n: usize, dim: usize) -> Encoder {
        let basis = CorrelatedBasis::random(family, 256, dim, &mut SeededRng::new(9)).unwrap();
        Encoder::new(basis, n).unwrap()
    }

    #[test]
    fn single_feature_is_the_basis_vector() {
        for fam in [Family::Binary, Family::Cyclic(5)] {
            let e = encoder(fam, 1, 100);
            assert_eq!(&e.encode(&[17]).unwrap(), e.basis().get(17).unwrap());
        }
    }

    #[test]
    fn one_pixel_difference_preserves_similarity() {
        let p: Vec<u8> = (0..20).map(|i| (i * 13 % 256) as u8).collect();
        let mut q = p.clone();
        q[7] = 200;
        for fam in [Family::Binary, Family::Cyclic(8)] {
            let e = encoder(fam, 20, 1024);
            let spec = fam.default_spec();
            let s = e
                .encode(&p)
                .unwrap()
                .similarity(&e.encode(&q).unwrap(), spec.as_ref())
                .unwrap();
            let a = e.basis().get(p[7] as usize).unwrap().permute(7);
            let b = e.basis().get(200).unwrap().permute(7);
            assert_eq!(s, a.similarity(&b, spec.as_ref()).unwrap());
        }
    }

    #[test]
    fn cyclic_matches_bind_of_permutes() {
        let e = encoder(Family::Cyclic(3), 6, 50);
        let p = [3u8, 0, 255, 9, 9, 1];
        let mut want = Hypervector::identity(Family::Cyclic(3), 50).unwrap();
        for (j, &v) in p.iter().enumerate() {
            want = want
                .bind(&e.basis().get(v as usize).unwrap().permute(j as i64))
                .unwrap();
        }
        assert_eq!(e.encode(&p).unwrap(), want);
    }

    #[test]
    fn rejects_wrong_length_and_range() {
        let e = encoder(Family::Binary, 3, 64);
        assert!(e.encode(&[1, 2]).is_err());
        let small = CorrelatedBasis::random(Family::Binary, 3, 64, &mut SeededRng::new(1)).unwrap();
        let e = Encoder::new(small, 1).unwrap();
        assert!(e.encode(&[3]).is_err());
        assert!(e.encode(&[2]).is_ok());
    }
}
