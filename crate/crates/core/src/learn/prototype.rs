use rayon::prelude::*;

use super::{check_labels, Classifier};
use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::vsa::{BinaryBundler, CyclicBundler, CyclicSimilaritySpec, Family, Hypervector};

/// One bundled prototype per class; inference is nearest prototype.
#[derive(Clone, Debug, PartialEq)]
pub struct PrototypeModel {
    family: Family,
    prototypes: Vec<Hypervector>,
    spec: Option<CyclicSimilaritySpec>,
    seed: u64,
}

impl PrototypeModel {
    pub fn new(
        prototypes: Vec<Hypervector>,
        spec: Option<CyclicSimilaritySpec>,
        seed: u64,
    ) -> Result<Self> {
        let first = prototypes
            .first()
            .ok_or_else(|| Error::Empty("model with no classes".into()))?;
        let family = first.family();
        let dim = first.dim();
        for p in &prototypes {
            if p.family() != family {
                return Err(crate::vsa::family_mismatch(family, p.family()));
            }
            crate::error::check_dim(dim, p.dim())?;
        }
        let spec = match family {
            Family::Binary => None,
            Family::Cyclic(n) => {
                let s = spec.unwrap_or(CyclicSimilaritySpec::new(n)?);
                if s.order() != n {
                    return Err(Error::OrderMismatch {
                        left: n,
                        right: s.order(),
                    });
                }
                Some(s)
            }
        };
        Ok(Self {
            family,
            prototypes,
            spec,
            seed,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn classes(&self) -> usize {
        self.prototypes.len()
    }

    pub fn dim(&self) -> usize {
        self.prototypes[0].dim()
    }

    pub fn prototypes(&self) -> &[Hypervector] {
        &self.prototypes
    }

    pub fn spec(&self) -> Option<&CyclicSimilaritySpec> {
        self.spec.as_ref()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl Classifier for PrototypeModel {
    fn scores(&self, t: &Hypervector) -> Result<Vec<f64>> {
        self.prototypes
            .iter()
            .map(|p| t.similarity(p, self.spec.as_ref()))
            .collect()
    }
}

/// Per-class vote accumulators; merging is addition, so any split of the
/// data gives the same totals.
#[derive(Clone, Debug)]
enum Votes {
    Binary(Vec<BinaryBundler>),
    Cyclic(Vec<CyclicBundler>),
}

impl Votes {
    fn new(family: Family, classes: usize, dim: usize) -> Result<Self> {
        Ok(match family {
            Family::Binary => {
                Votes::Binary((0..classes).map(|_| BinaryBundler::new(dim)).collect())
            }
            Family::Cyclic(n) => Votes::Cyclic(
                (0..classes)
                    .map(|_| CyclicBundler::new(dim, n))
                    .collect::<Result<_>>()?,
            ),
        })
    }

    fn add(&mut self, v: &Hypervector, label: usize) -> Result<()> {
        match (self, v) {
            (Votes::Binary(b), Hypervector::Binary(x)) => b[label].add(x),
            (Votes::Cyclic(b), Hypervector::Cyclic(x)) => b[label].add(x),
            (_, v) => Err(Error::invalid(format!(
                "sample family {} does not match the model",
                v.family()
            ))),
        }
    }

    fn merge(mut self, other: Self) -> Result<Self> {
        match (&mut self, &other) {
            (Votes::Binary(a), Votes::Binary(b)) => {
                a.iter_mut().zip(b).try_for_each(|(x, y)| x.merge(y))?
            }
            (Votes::Cyclic(a), Votes::Cyclic(b)) => {
                a.iter_mut().zip(b).try_for_each(|(x, y)| x.merge(y))?
            }
            _ => unreachable!("accumulators share a family"),
        }
        Ok(self)
    }

    fn counts(&self) -> Vec<usize> {
        match self {
            Votes::Binary(b) => b.iter().map(|x| x.len()).collect(),
            Votes::Cyclic(b) => b.iter().map(|x| x.len()).collect(),
        }
    }

    /// Class `c` resolves its ties from stream `c` of one fork of `rng`.
    fn finish(
        &self,
        spec: Option<&CyclicSimilaritySpec>,
        rng: &mut SeededRng,
    ) -> Result<Vec<Hypervector>> {
        if let Some(c) = self.counts().iter().position(|&n| n == 0) {
            return Err(Error::Empty(format!("class {c} has no training samples")));
        }
        let streams = rng.fork();
        match self {
            Votes::Binary(b) => b
                .iter()
                .enumerate()
                .map(|(c, x)| {
                    Ok(Hypervector::Binary(
                        x.finish(&mut streams.stream(c as u64))?,
                    ))
                })
                .collect(),
            Votes::Cyclic(b) => {
                let spec = spec.expect("cyclic spec");
                b.iter()
                    .enumerate()
                    .map(|(c, x)| {
                        Ok(Hypervector::Cyclic(
                            x.finish(spec, &mut streams.stream(c as u64))?,
                        ))
                    })
                    .collect()
            }
        }
    }
}

fn resolve_spec(
    family: Family,
    spec: Option<&CyclicSimilaritySpec>,
) -> Result<Option<CyclicSimilaritySpec>> {
    match (family, spec) {
        (Family::Binary, _) => Ok(None),
        (Family::Cyclic(n), Some(s)) if s.order() != n => Err(Error::OrderMismatch {
            left: n,
            right: s.order(),
        }),
        (Family::Cyclic(_), Some(s)) => Ok(Some(s.clone())),
        (f, None) => Ok(f.default_spec()),
    }
}

/// Single streaming pass: each `(encoding, label)` item is read exactly once.
pub fn bundle_train<'a, I>(
    samples: I,
    family: Family,
    dim: usize,
    classes: usize,
    spec: Option<&CyclicSimilaritySpec>,
    rng: &mut SeededRng,
) -> Result<PrototypeModel>
where
    I: IntoIterator<Item = (&'a Hypervector, usize)>,
{
    if classes == 0 {
        return Err(Error::invalid("need at least one class"));
    }
    let spec = resolve_spec(family, spec)?;
    let mut votes = Votes::new(family, classes, dim)?;
    for (v, y) in samples {
        if y >= classes {
            return Err(Error::invalid(format!("label {y} outside 0..{classes}")));
        }
        votes.add(v, y)?;
    }
    let seed = rng.master();
    PrototypeModel::new(votes.finish(spec.as_ref(), rng)?, spec, seed)
}

/// Same result as [`bundle_train`], with per-thread accumulators merged by addition.
pub fn bundle_train_par(
    data: &[Hypervector],
    labels: &[usize],
    classes: usize,
    spec: Option<&CyclicSimilaritySpec>,
    rng: &mut SeededRng,
) -> Result<PrototypeModel> {
    let (family, dim) = check_labels(data, labels, classes)?;
    let spec = resolve_spec(family, spec)?;
    let votes = data
        .par_iter()
        .zip(labels.par_iter())
        .fold(
            || Votes::new(family, classes, dim),
            |acc, (v, &y)| {
                let mut acc = acc?;
                acc.add(v, y)?;
                Ok(acc)
            },
        )
        .reduce(|| Votes::new(family, classes, dim), |a, b| a?.merge(b?))?;
    let seed = rng.master();
    PrototypeModel::new(votes.finish(spec.as_ref(), rng)?, spec, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::evaluate;

    fn data(family: Family, m: usize, dim: usize) -> (Vec<Hypervector>, Vec<usize>) {
        let mut rng = SeededRng::new(3);
        let v = (0..m)
            .map(|_| Hypervector::random(family, dim, &mut rng).unwrap())
            .collect();
        (v, (0..m).map(|i| i % 3).collect())
    }

    #[test]
    fn one_per_class_gives_the_samples() {
        for fam in [Family::Binary, Family::Cyclic(4)] {
            let (x, y) = data(fam, 3, 300);
            let m = bundle_train(
                x.iter().zip(y.iter().copied()),
                fam,
                300,
                3,
                None,
                &mut SeededRng::new(1),
            )
            .unwrap();
            assert_eq!(m.prototypes(), &x[..]);
            assert_eq!(evaluate(&x, &y, &m).unwrap(), 1.0);
        }
    }

    #[test]
    fn duplicated_data_same_prototypes() {
        for fam in [Family::Binary, Family::Cyclic(3)] {
            let (x, y) = data(fam, 31, 257);
            let a = bundle_train(
                x.iter().zip(y.iter().copied()),
                fam,
                257,
                3,
                None,
                &mut SeededRng::new(5),
            )
            .unwrap();
            let twice = x.iter().chain(&x).zip(y.iter().chain(&y).copied());
            let b = bundle_train(twice, fam, 257, 3, None, &mut SeededRng::new(5)).unwrap();
            assert_eq!(a.prototypes(), b.prototypes());
        }
    }

    #[test]
    fn parallel_matches_streaming() {
        for fam in [Family::Binary, Family::Cyclic(5)] {
            let (x, y) = data(fam, 40, 129);
            let a = bundle_train(
                x.iter().zip(y.iter().copied()),
                fam,
                129,
                3,
                None,
                &mut SeededRng::new(2),
            )
            .unwrap();
            let b = bundle_train_par(&x, &y, 3, None, &mut SeededRng::new(2)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn empty_class_is_named() {
        let (x, _) = data(Family::Binary, 4, 64);
        let y = vec![0, 2, 0, 2];
        let e = bundle_train_par(&x, &y, 3, None, &mut SeededRng::new(1)).unwrap_err();
        assert!(e.to_string().contains("class 1"), "{e}");
    }

    #[test]
    fn single_pass_counter() {
        let (x, y) = data(Family::Binary, 50, 64);
        let mut reads = 0usize;
        let it = x.iter().zip(y.iter().copied()).inspect(|_| reads += 1);
        bundle_train(it, Family::Binary, 64, 3, None, &mut SeededRng::new(1)).unwrap();
        assert_eq!(reads, 50);
    }
}
