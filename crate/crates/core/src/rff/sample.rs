use std::io::{Read, Write};
use std::path::Path;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use statrs::function::erf::erfc;

use super::{psd_factor, sin_transform, GaussianFactor, SimilarityTarget};
use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;
use crate::rng::{SeededRng, StreamFamily};
use crate::vsa::record::{read_record, truncated, write_record};
use crate::vsa::{BinaryHypervector, CyclicHypervector, Family, Hypervector};

pub const BASIS_MAGIC: &[u8; 4] = b"CB01";

/// Ordered family of hypervectors, entry `i` representing entity `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelatedBasis {
    family: Family,
    vectors: Vec<Hypervector>,
    seed: u64,
    target: Option<SimilarityTarget>,
}

impl CorrelatedBasis {
    pub fn new(family: Family, vectors: Vec<Hypervector>, seed: u64) -> Result<Self> {
        let first = vectors
            .first()
            .ok_or_else(|| Error::Empty("basis with no vectors".into()))?;
        let dim = first.dim();
        for (i, v) in vectors.iter().enumerate() {
            if v.family() != family {
                return Err(Error::invalid(format!(
                    "basis vector {i} is {}, expected {family}",
                    v.family()
                )));
            }
            if v.dim() != dim {
                return Err(Error::DimMismatch {
                    left: dim,
                    right: v.dim(),
                });
            }
        }
        Ok(Self {
            family,
            vectors,
            seed,
            target: None,
        })
    }

    /// Independent uniformly random vectors (the classic initialization).
    pub fn random(family: Family, n: usize, dim: usize, rng: &mut SeededRng) -> Result<Self> {
        let seed = rng.master();
        let vectors = (0..n)
            .map(|_| Hypervector::random(family, dim, rng))
            .collect::<Result<Vec<_>>>()?;
        Self::new(family, vectors, seed)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].dim()
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Hypervector] {
        &self.vectors
    }

    pub fn get(&self, i: usize) -> Option<&Hypervector> {
        self.vectors.get(i)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The target the basis was sampled for, when built in this process.
    pub fn target(&self) -> Option<&SimilarityTarget> {
        self.target.as_ref()
    }

    /// `"CB01" | kind u8 | order u8 | n u64 | D u64 | seed u64 | n HV01 records`,
    /// integers little-endian.
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(BASIS_MAGIC)?;
        let kind = match self.family {
            Family::Binary => 0u8,
            Family::Cyclic(_) => 1u8,
        };
        w.write_all(&[kind, self.family.order_byte()])?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        w.write_all(&(self.dim() as u64).to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        for v in &self.vectors {
            write_record(v, w)?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut head = [0u8; 30];
        r.read_exact(&mut head).map_err(truncated)?;
        if &head[..4] != BASIS_MAGIC {
            return Err(Error::Format("bad basis magic".into()));
        }
        let family = match head[4] {
            0 if head[5] == 0 => Family::Binary,
            1 => Family::from_order_byte(head[5]).map_err(|e| Error::Format(e.to_string()))?,
            k => {
                return Err(Error::Format(format!(
                    "bad basis family bytes {k}/{}",
                    head[5]
                )))
            }
        };
        let n = u64::from_le_bytes(head[6..14].try_into().unwrap());
        let dim = u64::from_le_bytes(head[14..22].try_into().unwrap());
        let seed = u64::from_le_bytes(head[22..30].try_into().unwrap());
        if n == 0 || n > 1 << 20 {
            return Err(Error::Format(format!("implausible basis size {n}")));
        }
        let mut vectors = Vec::with_capacity(n as usize);
        for _ in 0..n {
            let v = read_record(r)?;
            if v.dim() as u64 != dim {
                return Err(Error::Format(format!(
                    "record of dim {} in a basis of dim {dim}",
                    v.dim()
                )));
            }
            vectors.push(v);
        }
        Self::new(family, vectors, seed).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out)
            .expect("writing to a Vec cannot fail");
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cursor = bytes;
        let b = Self::read_from(&mut cursor)?;
        if !cursor.is_empty() {
            return Err(Error::Format("trailing bytes after basis".into()));
        }
        Ok(b)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io_at(path, e))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path).map_err(|e| Error::io_at(path, e))?)
    }
}

/// Columns of the loading matrix that carry any weight.
fn active_columns(loading: &SquareMatrix) -> Vec<usize> {
    let n = loading.n();
    (0..n)
        .filter(|&k| (0..n).any(|i| loading[(i, k)] != 0.0))
        .collect()
}

/// One Gaussian column `loading * x`, `x ~ N(0, I_n)` drawn from stream `col`.
///
/// All `n` coordinates of `x` are drawn even when some loading columns are
/// zero, so the stream schedule does not depend on the spectrum.
fn gaussian_column(
    loading: &SquareMatrix,
    active: &[usize],
    family: StreamFamily,
    col: usize,
    x: &mut [f64],
    y: &mut [f64],
) {
    let mut rng = family.stream(col as u64);
    for xi in x.iter_mut() {
        *xi = StandardNormal.sample(&mut rng);
    }
    for (i, yi) in y.iter_mut().enumerate() {
        let row = loading.row(i);
        *yi = active.iter().map(|&k| row[k] * x[k]).sum();
    }
}

/// `sgn(loading * X)` with `X` an `n x dim` standard Gaussian matrix, one RNG
/// stream per column; `sgn(0) = +1`.
pub fn sample_binary_from_loading(
    loading: &SquareMatrix,
    dim: usize,
    rng: &mut SeededRng,
) -> Result<Vec<BinaryHypervector>> {
    if dim == 0 {
        return Err(Error::invalid("hypervector dimension must be positive"));
    }
    let n = loading.n();
    let family = rng.fork();
    let active = active_columns(loading);
    let words = dim.div_ceil(64);
    let per_word: Vec<Vec<u64>> = (0..words)
        .into_par_iter()
        .map(|w| {
            let mut out = vec![0u64; n];
            let mut x = vec![0.0; n];
            let mut y = vec![0.0; n];
            for b in 0..(dim - w * 64).min(64) {
                gaussian_column(loading, &active, family, w * 64 + b, &mut x, &mut y);
                for (o, &yi) in out.iter_mut().zip(&y) {
                    if yi >= 0.0 {
                        *o |= 1 << b;
                    }
                }
            }
            out
        })
        .collect();
    (0..n)
        .map(|i| BinaryHypervector::from_words(dim, per_word.iter().map(|w| w[i]).collect()))
        .collect()
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Quantile-mapped sampling into Z/nZ: each Gaussian row is standardized,
/// pushed through the normal CDF and bucketed as `floor(n * Phi(z))`.
pub fn sample_cyclic_from_loading(
    loading: &SquareMatrix,
    dim: usize,
    order: usize,
    rng: &mut SeededRng,
) -> Result<Vec<CyclicHypervector>> {
    if dim == 0 {
        return Err(Error::invalid("hypervector dimension must be positive"));
    }
    Family::cyclic(order)?;
    let n = loading.n();
    let mut inv_sd = Vec::with_capacity(n);
    for i in 0..n {
        let var: f64 = loading.row(i).iter().map(|x| x * x).sum();
        if !(var > 1e-300) {
            return Err(Error::Numeric(format!(
                "entity {i} has zero variance after PSD clipping; the target is degenerate"
            )));
        }
        inv_sd.push(1.0 / var.sqrt());
    }
    let family = rng.fork();
    let active = active_columns(loading);
    let max = (order - 1) as f64;
    let per_col: Vec<Vec<u8>> = (0..dim)
        .into_par_iter()
        .map_init(
            || (vec![0.0; n], vec![0.0; n]),
            |(x, y), col| {
                gaussian_column(loading, &active, family, col, x, y);
                y.iter()
                    .zip(&inv_sd)
                    .map(|(&yi, &s)| (order as f64 * normal_cdf(yi * s)).floor().min(max) as u8)
                    .collect()
            },
        )
        .collect();
    (0..n)
        .map(|i| CyclicHypervector::new(order, per_col.iter().map(|c| c[i]).collect()))
        .collect()
}

/// Factor of `sin(pi/2 M)` used by both samplers.
pub fn target_factor(target: &SimilarityTarget) -> Result<GaussianFactor> {
    psd_factor(&sin_transform(target))
}

/// Binary basis whose expected pairwise similarities are
/// `(2/pi) arcsin` of the clipped Gaussian correlations.
pub fn sample_correlated_binary(
    target: &SimilarityTarget,
    dim: usize,
    rng: &mut SeededRng,
) -> Result<CorrelatedBasis> {
    let seed = rng.master();
    let factor = target_factor(target)?;
    let vectors = sample_binary_from_loading(&factor.loading(), dim, rng)?
        .into_iter()
        .map(Hypervector::Binary)
        .collect();
    let mut basis = CorrelatedBasis::new(Family::Binary, vectors, seed)?;
    basis.target = Some(target.clone());
    Ok(basis)
}

pub fn sample_correlated_cyclic(
    target: &SimilarityTarget,
    dim: usize,
    order: usize,
    rng: &mut SeededRng,
) -> Result<CorrelatedBasis> {
    let seed = rng.master();
    let factor = target_factor(target)?;
    let vectors = sample_cyclic_from_loading(&factor.loading(), dim, order, rng)?
        .into_iter()
        .map(Hypervector::Cyclic)
        .collect();
    let mut basis = CorrelatedBasis::new(Family::Cyclic(order), vectors, seed)?;
    basis.target = Some(target.clone());
    Ok(basis)
}

/// Dispatches on `family`.
pub fn sample_correlated(
    target: &SimilarityTarget,
    family: Family,
    dim: usize,
    rng: &mut SeededRng,
) -> Result<CorrelatedBasis> {
    match family {
        Family::Binary => sample_correlated_binary(target, dim, rng),
        Family::Cyclic(n) => sample_correlated_cyclic(target, dim, n, rng),
    }
}

/// `E[sgn(X) sgn(Y)] = (2/pi) arcsin(rho)` for standard Gaussians with correlation `rho`.
pub fn arcsine_moment(rho: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&rho) {
        return Err(Error::invalid(format!("correlation {rho} outside [-1, 1]")));
    }
    Ok(std::f64::consts::FRAC_2_PI * rho.asin())
}

/// Pairwise similarity matrix of a basis. `spec` defaults to the family's
/// standard cosine table for cyclic bases.
pub fn empirical_similarity(
    basis: &CorrelatedBasis,
    spec: Option<&crate::vsa::CyclicSimilaritySpec>,
) -> Result<SquareMatrix> {
    let default = basis.family.default_spec();
    let spec = spec.or(default.as_ref());
    let n = basis.len();
    let mut m = SquareMatrix::identity(n);
    for i in 0..n {
        for j in i + 1..n {
            let s = basis.vectors[i].similarity(&basis.vectors[j], spec)?;
            m[(i, j)] = s;
            m[(j, i)] = s;
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arcsine_examples() {
        assert_eq!(arcsine_moment(0.0).unwrap(), 0.0);
        assert!((arcsine_moment(0.5).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((arcsine_moment(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(arcsine_moment(1.01).is_err());
    }

    #[test]
    fn duplicate_entities_get_identical_vectors() {
        let t = SimilarityTarget::uniform(3, 1.0).unwrap();
        let mut rng = SeededRng::new(1);
        let b = sample_correlated_binary(&t, 500, &mut rng).unwrap();
        assert_eq!(b.vectors[0], b.vectors[1]);
        assert_eq!(b.vectors[1], b.vectors[2]);
        let c = sample_correlated_cyclic(&t, 500, 8, &mut rng).unwrap();
        assert_eq!(c.vectors[0], c.vectors[2]);
        let m = empirical_similarity(&b, None).unwrap();
        assert!(m.as_slice().iter().all(|&x| x == 1.0));
    }

    #[test]
    fn degenerate_row_is_reported() {
        let loading = SquareMatrix::from_fn(2, |i, k| if i == 0 && k == 0 { 1.0 } else { 0.0 });
        let err = sample_cyclic_from_loading(&loading, 10, 4, &mut SeededRng::new(1)).unwrap_err();
        match err {
            Error::Numeric(msg) => assert!(msg.contains("entity 1")),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn basis_round_trip() {
        let mut rng = SeededRng::new(5);
        for family in [Family::Binary, Family::Cyclic(16)] {
            let b = CorrelatedBasis::random(family, 4, 100, &mut rng).unwrap();
            let bytes = b.to_bytes();
            let back = CorrelatedBasis::from_bytes(&bytes).unwrap();
            assert_eq!(back.to_bytes(), bytes);
            assert_eq!(back.vectors, b.vectors);
            assert!(CorrelatedBasis::from_bytes(&bytes[..bytes.len() - 2]).is_err());
        }
    }

    #[test]
    fn normal_cdf_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        let p = normal_cdf(1.959963984540054);
        assert!((p - 0.975).abs() < 1e-10, "{p}");
    }
}
