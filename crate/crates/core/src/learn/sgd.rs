use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{argmax, check_labels, Classifier};
use crate::error::{Error, Result};
use crate::rng::{SeededRng, StreamFamily};
use crate::vsa::{BinaryHypervector, CyclicHypervector, CyclicSimilaritySpec, Family, Hypervector};

pub const DEFAULT_BETA: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Paradigm {
    Prototypes = 0,
    SgdBinary = 1,
    SgdCyclic = 2,
    Perceptron = 3,
}

impl Paradigm {
    pub fn from_byte(b: u8) -> Result<Self> {
        Ok(match b {
            0 => Paradigm::Prototypes,
            1 => Paradigm::SgdBinary,
            2 => Paradigm::SgdCyclic,
            3 => Paradigm::Perceptron,
            _ => return Err(Error::Format(format!("unknown paradigm byte {b}"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub beta: f64,
    pub warm_start: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 0.01,
            epochs: 10,
            batch_size: 32,
            seed: 0,
            beta: DEFAULT_BETA,
            warm_start: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::Config(format!(
                "lr must be positive, got {}",
                self.lr
            )));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be >= 1".into()));
        }
        self.validate_common()
    }

    fn validate_common(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be >= 1".into()));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::Config(format!(
                "beta must be positive, got {}",
                self.beta
            )));
        }
        Ok(())
    }
}

/// Linear classifier over hypervector encodings.
///
/// Binary SGD models store real shadow weights and score with their signs;
/// cyclic SGD models store lattice values `0..n`; perceptron weights are used
/// as-is.
#[derive(Clone, Debug, PartialEq)]
pub struct SgdModel {
    paradigm: Paradigm,
    family: Family,
    classes: usize,
    dim: usize,
    weights: Vec<f64>,
    beta: f64,
    spec: Option<CyclicSimilaritySpec>,
    seed: u64,
    packed: Vec<BinaryHypervector>,
    lattice: Vec<u8>,
}

/// `sgn` with `sgn(0) = +1`.
#[inline]
fn sgn(w: f64) -> f64 {
    if w >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Round half up, then reduce mod `n`.
#[inline]
pub fn project_lattice(w: f64, n: usize) -> u8 {
    (w + 0.5).floor().rem_euclid(n as f64) as u8
}

impl SgdModel {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        paradigm: Paradigm,
        family: Family,
        classes: usize,
        dim: usize,
        weights: Vec<f64>,
        beta: f64,
        spec: Option<CyclicSimilaritySpec>,
        seed: u64,
    ) -> Result<Self> {
        if classes == 0 || dim == 0 {
            return Err(Error::invalid(
                "model needs at least one class and a positive dimension",
            ));
        }
        if weights.len() != classes * dim {
            return Err(Error::invalid(format!(
                "weight matrix has {} entries, expected {classes} x {dim}",
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Numeric("non-finite weight".into()));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::invalid(format!("beta must be positive, got {beta}")));
        }
        let mut packed = Vec::new();
        let mut lattice = Vec::new();
        let spec = match (paradigm, family) {
            (Paradigm::SgdBinary, Family::Binary) => {
                packed = weights
                    .chunks(dim)
                    .map(|row| BinaryHypervector::from_bits(dim, row.iter().map(|&w| w >= 0.0)))
                    .collect::<Result<_>>()?;
                None
            }
            (Paradigm::Perceptron, Family::Binary) => None,
            (Paradigm::SgdCyclic, Family::Cyclic(n)) => {
                let spec = spec.unwrap_or(CyclicSimilaritySpec::new(n)?);
                if spec.order() != n {
                    return Err(Error::OrderMismatch {
                        left: n,
                        right: spec.order(),
                    });
                }
                lattice = weights.iter().map(|&w| project_lattice(w, n)).collect();
                Some(spec)
            }
            (p, f) => {
                return Err(Error::invalid(format!(
                    "paradigm {p:?} does not support family {f}"
                )))
            }
        };
        Ok(Self {
            paradigm,
            family,
            classes,
            dim,
            weights,
            beta,
            spec,
            seed,
            packed,
            lattice,
        })
    }

    pub fn paradigm(&self) -> Paradigm {
        self.paradigm
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major `C x D`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn spec(&self) -> Option<&CyclicSimilaritySpec> {
        self.spec.as_ref()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Effective weights as used for scoring: signs, lattice values or raw reals.
    pub fn effective_weights(&self) -> Vec<f64> {
        match self.paradigm {
            Paradigm::SgdBinary => self.weights.iter().map(|&w| sgn(w)).collect(),
            Paradigm::SgdCyclic => self.lattice.iter().map(|&e| f64::from(e)).collect(),
            _ => self.weights.clone(),
        }
    }

    /// Unscaled per-class scores; the argmax of these is the prediction.
    fn raw_scores(&self, t: &Hypervector) -> Result<Vec<f64>> {
        crate::error::check_dim(self.dim, t.dim())?;
        if t.family() != self.family {
            return Err(crate::vsa::family_mismatch(self.family, t.family()));
        }
        match (self.paradigm, t) {
            (Paradigm::SgdBinary, Hypervector::Binary(x)) => self
                .packed
                .iter()
                .map(|w| Ok((self.dim as f64) - 2.0 * x.hamming(w)? as f64))
                .collect(),
            (Paradigm::Perceptron, Hypervector::Binary(x)) => {
                let xs = signs_f64(x);
                Ok(self
                    .weights
                    .chunks(self.dim)
                    .map(|row| dot(row, &xs))
                    .collect())
            }
            (Paradigm::SgdCyclic, Hypervector::Cyclic(x)) => {
                let table = self.spec.as_ref().expect("cyclic spec").table();
                Ok(self
                    .lattice
                    .chunks(self.dim)
                    .map(|row| cyclic_score(x.elems(), row, table))
                    .collect())
            }
            _ => unreachable!("family checked above"),
        }
    }
}

impl Classifier for SgdModel {
    /// Logits: `beta * score / D` for SGD models, raw dot products for the perceptron.
    fn scores(&self, t: &Hypervector) -> Result<Vec<f64>> {
        let raw = self.raw_scores(t)?;
        Ok(match self.paradigm {
            Paradigm::Perceptron => raw,
            _ => raw
                .into_iter()
                .map(|s| self.beta * s / self.dim as f64)
                .collect(),
        })
    }

    fn predict(&self, t: &Hypervector) -> Result<usize> {
        Ok(argmax(&self.raw_scores(t)?))
    }
}

fn signs_f64(x: &BinaryHypervector) -> Vec<f64> {
    (0..x.dim()).map(|i| f64::from(x.get(i))).collect()
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn cyclic_diff(x: u8, e: u8, n: usize) -> usize {
    (x as usize + n - e as usize) % n
}

fn cyclic_score(x: &[u8], e: &[u8], table: &[f64]) -> f64 {
    let n = table.len();
    x.iter()
        .zip(e)
        .map(|(&a, &b)| table[cyclic_diff(a, b, n)])
        .sum()
}

/// Softmax cross-entropy: returns `(loss, dL/do)`.
fn softmax_xent(logits: &[f64], y: usize) -> (f64, Vec<f64>) {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|o| (o - m).exp()).collect();
    let z: f64 = exps.iter().sum();
    let loss = z.ln() + m - logits[y];
    let mut g: Vec<f64> = exps.iter().map(|e| e / z).collect();
    g[y] -= 1.0;
    (loss, g)
}

fn check_family(data: &[Hypervector], want: Family) -> Result<()> {
    match data.iter().find(|v| v.family() != want) {
        Some(v) => Err(crate::vsa::family_mismatch(want, v.family())),
        None => Ok(()),
    }
}

/// Epoch schedule shared by the trainers: a fresh permutation per epoch.
struct Schedule {
    streams: StreamFamily,
    epoch: u64,
}

impl Schedule {
    fn next(&mut self, m: usize) -> Vec<usize> {
        let mut order: Vec<usize> = (0..m).collect();
        order.shuffle(&mut self.streams.stream(self.epoch));
        self.epoch += 1;
        order
    }
}

/// Per-epoch progress passed to training hooks.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_loss: f64,
}

/// Mini-batch SGD for binary weights with a straight-through sign.
///
/// Logits are `o_c = beta/D * sum_i x_i sgn(W_ci)`; the gradient passes
/// through `sgn` only where `|W_ci| < 1`. Updates are scaled by `D/beta`, so
/// the learning rate means the same thing at every dimension and `beta`.
pub struct BinarySgd<'a> {
    xs: Vec<&'a BinaryHypervector>,
    labels: &'a [usize],
    classes: usize,
    dim: usize,
    cfg: TrainConfig,
    weights: Vec<f64>,
    schedule: Schedule,
}

impl<'a> BinarySgd<'a> {
    pub fn new(
        data: &'a [Hypervector],
        labels: &'a [usize],
        classes: usize,
        cfg: &TrainConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        let (family, dim) = check_labels(data, labels, classes)?;
        if family != Family::Binary {
            return Err(Error::invalid(format!(
                "binary SGD needs binary encodings, got {family}"
            )));
        }
        check_family(data, Family::Binary)?;
        let xs: Vec<&BinaryHypervector> = data
            .iter()
            .map(|v| v.as_binary().expect("checked"))
            .collect();
        let mut rng = SeededRng::new(cfg.seed);
        let weights = if cfg.warm_start {
            binary_warm_start(&xs, labels, classes, dim)
        } else {
            (0..classes * dim)
                .map(|_| rng.random_range(-0.5..=0.5))
                .collect()
        };
        Ok(Self {
            xs,
            labels,
            classes,
            dim,
            cfg: cfg.clone(),
            weights,
            schedule: Schedule {
                streams: rng.fork(),
                epoch: 0,
            },
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// One optimizer step on the samples `batch`; returns their mean loss.
    pub fn step(&mut self, batch: &[usize], lr: f64) -> f64 {
        let (c, d) = (self.classes, self.dim);
        let signs: Vec<BinaryHypervector> = self
            .weights
            .chunks(d)
            .map(|row| {
                BinaryHypervector::from_bits(d, row.iter().map(|&w| w >= 0.0)).expect("dim > 0")
            })
            .collect();
        let beta = self.cfg.beta;
        let per_sample: Vec<(f64, Vec<f64>)> = batch
            .par_iter()
            .map(|&s| {
                let x = self.xs[s];
                let logits: Vec<f64> = signs
                    .iter()
                    .map(|w| {
                        beta * (d as f64 - 2.0 * x.hamming(w).expect("dims checked") as f64)
                            / d as f64
                    })
                    .collect();
                softmax_xent(&logits, self.labels[s])
            })
            .collect();
        let xs: Vec<Vec<f64>> = batch.par_iter().map(|&s| signs_f64(self.xs[s])).collect();
        // Step is `lr * D/beta * dL/dW`: lr is per unit of unnormalized score.
        let scale = lr / batch.len() as f64;
        self.weights
            .par_chunks_mut(d)
            .enumerate()
            .for_each(|(cls, row)| {
                for (i, w) in row.iter_mut().enumerate() {
                    if w.abs() >= 1.0 {
                        continue;
                    }
                    let g: f64 = per_sample
                        .iter()
                        .zip(&xs)
                        .map(|((_, g), x)| g[cls] * x[i])
                        .sum();
                    *w -= scale * g;
                }
            });
        debug_assert_eq!(self.weights.len(), c * d);
        per_sample.iter().map(|(l, _)| l).sum::<f64>() / batch.len() as f64
    }

    pub fn run_epoch(&mut self) -> EpochStats {
        let order = self.schedule.next(self.xs.len());
        let lr = self.cfg.lr;
        let bs = self.cfg.batch_size;
        let mut total = 0.0;
        for batch in order.chunks(bs) {
            total += self.step(batch, lr) * batch.len() as f64;
        }
        EpochStats {
            epoch: self.schedule.epoch as usize,
            mean_loss: total / order.len() as f64,
        }
    }

    pub fn model(&self) -> SgdModel {
        SgdModel::new(
            Paradigm::SgdBinary,
            Family::Binary,
            self.classes,
            self.dim,
            self.weights.clone(),
            self.cfg.beta,
            None,
            self.cfg.seed,
        )
        .expect("trainer state is a valid model")
    }
}

/// Per-class vote sums, each row rescaled so its largest magnitude is 0.9.
fn binary_warm_start(
    xs: &[&BinaryHypervector],
    labels: &[usize],
    classes: usize,
    dim: usize,
) -> Vec<f64> {
    let mut votes = vec![0i64; classes * dim];
    for (x, &y) in xs.iter().zip(labels) {
        let row = &mut votes[y * dim..(y + 1) * dim];
        for (i, v) in row.iter_mut().enumerate() {
            *v += i64::from(x.get(i));
        }
    }
    votes
        .chunks(dim)
        .flat_map(|row| {
            let m = row.iter().map(|v| v.abs()).max().unwrap_or(0);
            row.iter().map(move |&v| {
                if m == 0 {
                    0.0
                } else {
                    0.9 * v as f64 / m as f64
                }
            })
        })
        .collect()
}

/// Runs `cfg.epochs` epochs, calling `hook` after each one.
pub fn sgd_train_binary_with(
    data: &[Hypervector],
    labels: &[usize],
    classes: usize,
    cfg: &TrainConfig,
    mut hook: impl FnMut(EpochStats, &SgdModel) -> Result<()>,
) -> Result<SgdModel> {
    let mut t = BinarySgd::new(data, labels, classes, cfg)?;
    for _ in 0..cfg.epochs {
        let stats = t.run_epoch();
        if !stats.mean_loss.is_finite() {
            return Err(Error::Numeric(format!(
                "loss diverged in epoch {}",
                stats.epoch
            )));
        }
        hook(stats, &t.model())?;
    }
    Ok(t.model())
}

pub fn sgd_train_binary(
    data: &[Hypervector],
    labels: &[usize],
    classes: usize,
    cfg: &TrainConfig,
) -> Result<SgdModel> {
    sgd_train_binary_with(data, labels, classes, cfg, |_, _| Ok(()))
}

/// Mini-batch SGD for Z/nZ weights.
///
/// The forward pass and gradient use lattice weights `E = round(W) mod n`;
/// updates accumulate in a real shadow `W` kept in `[-0.5, n - 0.5)`, and `E`
/// is re-projected after every step.
pub struct CyclicSgd<'a> {
    xs: Vec<&'a CyclicHypervector>,
    labels: &'a [usize],
    classes: usize,
    dim: usize,
    order: usize,
    cfg: TrainConfig,
    spec: CyclicSimilaritySpec,
    slope: Vec<f64>,
    shadow: Vec<f64>,
    lattice: Vec<u8>,
    schedule: Schedule,
}

impl<'a> CyclicSgd<'a> {
    pub fn new(
        data: &'a [Hypervector],
        labels: &'a [usize],
        classes: usize,
        cfg: &TrainConfig,
        spec: Option<&CyclicSimilaritySpec>,
    ) -> Result<Self> {
        cfg.validate()?;
        let (family, dim) = check_labels(data, labels, classes)?;
        let Family::Cyclic(order) = family else {
            return Err(Error::invalid(
                "cyclic SGD needs cyclic encodings, got binary",
            ));
        };
        check_family(data, family)?;
        let spec = match spec {
            Some(s) if s.order() != order => {
                return Err(Error::OrderMismatch {
                    left: order,
                    right: s.order(),
                })
            }
            Some(s) => s.clone(),
            None => CyclicSimilaritySpec::new(order)?,
        };
        let xs: Vec<&CyclicHypervector> = data
            .iter()
            .map(|v| v.as_cyclic().expect("checked"))
            .collect();
        let mut rng = SeededRng::new(cfg.seed);
        let shadow: Vec<f64> = if cfg.warm_start {
            cyclic_warm_start(&xs, labels, classes, dim, &spec)
        } else {
            let hi = order as f64 - 0.5;
            (0..classes * dim)
                .map(|_| rng.random_range(-0.5..hi))
                .collect()
        };
        let lattice = shadow.iter().map(|&w| project_lattice(w, order)).collect();
        let slope = (0..order).map(|d| spec.table_slope(d as f64)).collect();
        Ok(Self {
            xs,
            labels,
            classes,
            dim,
            order,
            cfg: cfg.clone(),
            spec,
            slope,
            shadow,
            lattice,
            schedule: Schedule {
                streams: rng.fork(),
                epoch: 0,
            },
        })
    }

    /// Lattice weights after the last step.
    pub fn lattice(&self) -> &[u8] {
        &self.lattice
    }

    /// Real shadow weights in `[-0.5, n - 0.5)`.
    pub fn shadow(&self) -> &[f64] {
        &self.shadow
    }

    pub fn step(&mut self, batch: &[usize], lr: f64) -> f64 {
        let (d, n) = (self.dim, self.order);
        let beta = self.cfg.beta;
        let table = self.spec.table();
        let per_sample: Vec<(f64, Vec<f64>)> = batch
            .par_iter()
            .map(|&s| {
                let x = self.xs[s].elems();
                let logits: Vec<f64> = self
                    .lattice
                    .chunks(d)
                    .map(|row| beta * cyclic_score(x, row, table) / d as f64)
                    .collect();
                softmax_xent(&logits, self.labels[s])
            })
            .collect();
        // Step is `lr * D/beta * dL/dW`: lr is per unit of unnormalized score.
        let scale = lr / batch.len() as f64;
        let xs: Vec<&[u8]> = batch.iter().map(|&s| self.xs[s].elems()).collect();
        let slope = &self.slope;
        let hi = n as f64;
        self.shadow
            .par_chunks_mut(d)
            .zip(self.lattice.par_chunks_mut(d))
            .enumerate()
            .for_each(|(cls, (w_row, e_row))| {
                for i in 0..d {
                    // dL/dW = g * beta/D * (-T'(x - W)).
                    let g: f64 = per_sample
                        .iter()
                        .zip(&xs)
                        .map(|((_, g), x)| -g[cls] * slope[cyclic_diff(x[i], e_row[i], n)])
                        .sum();
                    if g == 0.0 {
                        continue;
                    }
                    let w = w_row[i] - scale * g;
                    w_row[i] = (w + 0.5).rem_euclid(hi) - 0.5;
                    e_row[i] = project_lattice(w_row[i], n);
                }
            });
        per_sample.iter().map(|(l, _)| l).sum::<f64>() / batch.len() as f64
    }

    pub fn run_epoch(&mut self) -> EpochStats {
        let order = self.schedule.next(self.xs.len());
        let lr = self.cfg.lr;
        let mut total = 0.0;
        for batch in order.chunks(self.cfg.batch_size) {
            total += self.step(batch, lr) * batch.len() as f64;
        }
        EpochStats {
            epoch: self.schedule.epoch as usize,
            mean_loss: total / order.len() as f64,
        }
    }

    pub fn model(&self) -> SgdModel {
        SgdModel::new(
            Paradigm::SgdCyclic,
            Family::Cyclic(self.order),
            self.classes,
            self.dim,
            self.lattice.iter().map(|&e| f64::from(e)).collect(),
            self.cfg.beta,
            Some(self.spec.clone()),
            self.cfg.seed,
        )
        .expect("trainer state is a valid model")
    }
}

/// Argmax of each class's summed table scores, ties to the smallest symbol.
fn cyclic_warm_start(
    xs: &[&CyclicHypervector],
    labels: &[usize],
    classes: usize,
    dim: usize,
    spec: &CyclicSimilaritySpec,
) -> Vec<f64> {
    let n = spec.order();
    let table = spec.table();
    let mut counts = vec![0u32; classes * dim * n];
    for (x, &y) in xs.iter().zip(labels) {
        for (i, &e) in x.elems().iter().enumerate() {
            counts[(y * dim + i) * n + e as usize] += 1;
        }
    }
    counts
        .chunks(n)
        .map(|h| {
            let scores: Vec<f64> = (0..n)
                .map(|s| {
                    (0..n)
                        .map(|e| f64::from(h[e]) * table[(e + n - s) % n])
                        .sum()
                })
                .collect();
            argmax(&scores) as f64
        })
        .collect()
}

pub fn sgd_train_cyclic_with(
    data: &[Hypervector],
    labels: &[usize],
    classes: usize,
    cfg: &TrainConfig,
    spec: Option<&CyclicSimilaritySpec>,
    mut hook: impl FnMut(EpochStats, &SgdModel) -> Result<()>,
) -> Result<SgdModel> {
    let mut t = CyclicSgd::new(data, labels, classes, cfg, spec)?;
    for _ in 0..cfg.epochs {
        let stats = t.run_epoch();
        if !stats.mean_loss.is_finite() {
            return Err(Error::Numeric(format!(
                "loss diverged in epoch {}",
                stats.epoch
            )));
        }
        hook(stats, &t.model())?;
    }
    Ok(t.model())
}

pub fn sgd_train_cyclic(
    data: &[Hypervector],
    labels: &[usize],
    classes: usize,
    cfg: &TrainConfig,
    spec: Option<&CyclicSimilaritySpec>,
) -> Result<SgdModel> {
    sgd_train_cyclic_with(data, labels, classes, cfg, spec, |_, _| Ok(()))
}

/// Multiclass perceptron on real weights starting from zero: on a mistake,
/// `W_y += lr x` and `W_pred -= lr x`. `epochs = 0` returns the zero model.
pub fn perceptron_train_with(
    data: &[Hypervector],
    labels: &[usize],
    classes: usize,
    cfg: &TrainConfig,
    mut hook: impl FnMut(EpochStats, &SgdModel) -> Result<()>,
) -> Result<SgdModel> {
    if !(cfg.lr > 0.0 && cfg.lr.is_finite()) {
        return Err(Error::Config(format!(
            "lr must be positive, got {}",
            cfg.lr
        )));
    }
    cfg.validate_common()?;
    let (family, dim) = check_labels(data, labels, classes)?;
    if family != Family::Binary {
        return Err(Error::invalid(format!(
            "the perceptron needs binary encodings, got {family}"
        )));
    }
    check_family(data, Family::Binary)?;
    let mut w = vec![0.0f64; classes * dim];
    let mut schedule = Schedule {
        streams: SeededRng::new(cfg.seed).fork(),
        epoch: 0,
    };
    let snapshot = |w: &[f64]| {
        SgdModel::new(
            Paradigm::Perceptron,
            Family::Binary,
            classes,
            dim,
            w.to_vec(),
            cfg.beta,
            None,
            cfg.seed,
        )
    };
    for _ in 0..cfg.epochs {
        let mut mistakes = 0usize;
        for s in schedule.next(data.len()) {
            let x = signs_f64(data[s].as_binary().expect("checked"));
            let scores: Vec<f64> = w.chunks(dim).map(|row| dot(row, &x)).collect();
            let pred = argmax(&scores);
            let y = labels[s];
            if pred != y {
                mistakes += 1;
                for (i, xi) in x.iter().enumerate() {
                    w[y * dim + i] += cfg.lr * xi;
                    w[pred * dim + i] -= cfg.lr * xi;
                }
            }
        }
        let stats = EpochStats {
            epoch: schedule.epoch as usize,
            // Training error rate stands in for a loss.
            mean_loss: mistakes as f64 / data.len() as f64,
        };
        hook(stats, &snapshot(&w)?)?;
    }
    snapshot(&w)
}

pub fn perceptron_train(
    data: &[Hypervector],
    labels: &[usize],
    classes: usize,
    cfg: &TrainConfig,
) -> Result<SgdModel> {
    perceptron_train_with(data, labels, classes, cfg, |_, _| Ok(()))
}

/// Mean loss and gradient of the binary objective with `sgn` relaxed to
/// `clamp(w, -1, 1)`; inside `|w| < 1` this gradient is the one the trainer uses.
pub fn binary_relaxed_loss_grad(
    weights: &[f64],
    classes: usize,
    xs: &[BinaryHypervector],
    labels: &[usize],
    beta: f64,
) -> Result<(f64, Vec<f64>)> {
    let dim = xs
        .first()
        .ok_or_else(|| Error::Empty("no samples".into()))?
        .dim();
    if weights.len() != classes * dim {
        return Err(Error::invalid("weight shape does not match classes x dim"));
    }
    let h: Vec<f64> = weights.iter().map(|w| w.clamp(-1.0, 1.0)).collect();
    let mut grad = vec![0.0; weights.len()];
    let mut loss = 0.0;
    let m = xs.len() as f64;
    for (x, &y) in xs.iter().zip(labels) {
        let xv = signs_f64(x);
        let logits: Vec<f64> = h
            .chunks(dim)
            .map(|row| beta * dot(row, &xv) / dim as f64)
            .collect();
        let (l, g) = softmax_xent(&logits, y);
        loss += l / m;
        for c in 0..classes {
            for i in 0..dim {
                let w = weights[c * dim + i];
                if w.abs() < 1.0 {
                    grad[c * dim + i] += g[c] * beta * xv[i] / dim as f64 / m;
                }
            }
        }
    }
    Ok((loss, grad))
}

/// Mean loss and gradient of the cyclic objective at real-valued weights,
/// `o_c = beta/D * sum_i T(x_i - W_ci)` with `T` the spec's continuous table.
pub fn cyclic_relaxed_loss_grad(
    weights: &[f64],
    classes: usize,
    xs: &[CyclicHypervector],
    labels: &[usize],
    beta: f64,
    spec: &CyclicSimilaritySpec,
) -> Result<(f64, Vec<f64>)> {
    let dim = xs
        .first()
        .ok_or_else(|| Error::Empty("no samples".into()))?
        .dim();
    if weights.len() != classes * dim {
        return Err(Error::invalid("weight shape does not match classes x dim"));
    }
    let mut grad = vec![0.0; weights.len()];
    let mut loss = 0.0;
    let m = xs.len() as f64;
    for (x, &y) in xs.iter().zip(labels) {
        let e = x.elems();
        let logits: Vec<f64> = weights
            .chunks(dim)
            .map(|row| {
                beta / dim as f64
                    * row
                        .iter()
                        .zip(e)
                        .map(|(w, &xi)| spec.table_continuous(f64::from(xi) - w))
                        .sum::<f64>()
            })
            .collect();
        let (l, g) = softmax_xent(&logits, y);
        loss += l / m;
        for c in 0..classes {
            for i in 0..dim {
                let diff = f64::from(e[i]) - weights[c * dim + i];
                grad[c * dim + i] += -g[c] * beta / dim as f64 * spec.table_slope(diff) / m;
            }
        }
    }
    Ok((loss, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary_data(m: usize, dim: usize, seed: u64) -> (Vec<Hypervector>, Vec<usize>) {
        let mut rng = SeededRng::new(seed);
        let v = (0..m)
            .map(|_| Hypervector::Binary(BinaryHypervector::random(dim, 0.5, &mut rng).unwrap()))
            .collect();
        (v, (0..m).map(|i| i % 3).collect())
    }

    #[test]
    fn project_lattice_rounds_half_up() {
        assert_eq!(project_lattice(0.5, 8), 1);
        assert_eq!(project_lattice(0.49, 8), 0);
        assert_eq!(project_lattice(-0.5, 8), 0);
        assert_eq!(project_lattice(-0.51, 8), 7);
        assert_eq!(project_lattice(7.5, 8), 0);
        for w in [-0.3, 1.7, 3.2, 7.49] {
            let e = project_lattice(w, 8);
            assert_eq!(project_lattice(f64::from(e), 8), e);
        }
    }

    #[test]
    fn singleton_is_learned() {
        let (x, _) = binary_data(1, 256, 4);
        let y = vec![2];
        let cfg = TrainConfig {
            lr: 5.0,
            epochs: 1,
            batch_size: 1,
            ..TrainConfig::default()
        };
        let mut t = BinarySgd::new(&x, &y, 3, &cfg).unwrap();
        let mut prev = f64::INFINITY;
        for _ in 0..200 {
            let l = t.step(&[0], cfg.lr);
            assert!(l <= prev + 1e-12);
            prev = l;
            if t.model().predict(&x[0]).unwrap() == 2 {
                return;
            }
        }
        panic!("singleton never learned");
    }

    #[test]
    fn ste_mask_freezes_saturated_weights() {
        let (x, y) = binary_data(12, 128, 5);
        let mut t = BinarySgd::new(&x, &y, 3, &TrainConfig::default()).unwrap();
        for (k, w) in t.weights.iter_mut().enumerate() {
            if k % 3 == 0 {
                *w = if k % 2 == 0 { 1.0 } else { -1.5 };
            }
        }
        let before = t.weights.clone();
        t.step(&(0..12).collect::<Vec<_>>(), 0.5);
        for (k, (a, b)) in before.iter().zip(&t.weights).enumerate() {
            if k % 3 == 0 {
                assert_eq!(a, b);
            }
        }
        assert!(before.iter().zip(&t.weights).any(|(a, b)| a != b));
    }

    #[test]
    fn prediction_depends_on_signs_only() {
        let (x, _) = binary_data(30, 200, 6);
        let mut rng = SeededRng::new(1);
        let w: Vec<f64> = (0..3 * 200).map(|_| rng.random_range(-2.0..2.0)).collect();
        let a = SgdModel::new(
            Paradigm::SgdBinary,
            Family::Binary,
            3,
            200,
            w.clone(),
            10.0,
            None,
            0,
        )
        .unwrap();
        let w3 = w.iter().map(|v| 3.0 * v).collect();
        let b = SgdModel::new(
            Paradigm::SgdBinary,
            Family::Binary,
            3,
            200,
            w3,
            0.5,
            None,
            0,
        )
        .unwrap();
        for t in &x {
            assert_eq!(a.predict(t).unwrap(), b.predict(t).unwrap());
        }
    }

    #[test]
    fn binary_sgd_is_deterministic() {
        let (x, y) = binary_data(100, 128, 7);
        let cfg = TrainConfig {
            epochs: 2,
            seed: 11,
            ..TrainConfig::default()
        };
        let a = sgd_train_binary(&x, &y, 3, &cfg).unwrap();
        let b = sgd_train_binary(&x, &y, 3, &cfg).unwrap();
        assert_eq!(a.weights(), b.weights());
    }

    #[test]
    fn cyclic_lr_zero_is_a_no_op_and_steps_stay_on_lattice() {
        let mut rng = SeededRng::new(8);
        let x: Vec<Hypervector> = (0..20)
            .map(|_| Hypervector::Cyclic(CyclicHypervector::random(64, 8, &mut rng).unwrap()))
            .collect();
        let y: Vec<usize> = (0..20).map(|i| i % 2).collect();
        let mut t = CyclicSgd::new(&x, &y, 2, &TrainConfig::default(), None).unwrap();
        let before = (t.shadow.clone(), t.lattice.clone());
        t.step(&[0, 1, 2], 0.0);
        assert_eq!(before, (t.shadow.clone(), t.lattice.clone()));
        for _ in 0..5 {
            t.step(&[0, 1, 2, 3], 50.0);
            let m = t.model();
            assert!(m
                .weights()
                .iter()
                .all(|w| w.fract() == 0.0 && *w >= 0.0 && *w < 8.0));
            assert!(t.shadow.iter().all(|w| (-0.5..7.5).contains(w)));
        }
    }

    #[test]
    fn config_validation() {
        let ok = TrainConfig::default();
        assert!(ok.validate().is_ok());
        assert!(TrainConfig {
            lr: 0.0,
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(TrainConfig {
            epochs: 0,
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(TrainConfig { beta: -1.0, ..ok }.validate().is_err());
    }

    #[test]
    fn perceptron_separable_and_zero_epochs() {
        let dim = 128;
        let a = BinaryHypervector::from_signs(&(0..dim).map(|_| 1i8).collect::<Vec<_>>()).unwrap();
        let b = BinaryHypervector::from_signs(
            &(0..dim)
                .map(|i| if i % 2 == 0 { 1 } else { -1 })
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let x: Vec<Hypervector> = (0..20)
            .map(|i| Hypervector::Binary(if i % 2 == 0 { a.clone() } else { b.clone() }))
            .collect();
        let y: Vec<usize> = (0..20).map(|i| i % 2).collect();
        let cfg = TrainConfig {
            epochs: 1,
            ..TrainConfig::default()
        };
        let m = perceptron_train(&x, &y, 2, &cfg).unwrap();
        assert_eq!(crate::learn::evaluate(&x, &y, &m).unwrap(), 1.0);
        let z = perceptron_train(&x, &y, 2, &TrainConfig { epochs: 0, ..cfg }).unwrap();
        assert!(z.weights().iter().all(|&w| w == 0.0));
    }
}
