//! Encoding, training and inference.

mod encoder;
mod model_file;
mod prototype;
mod sgd;

use rayon::prelude::*;

pub use encoder::{quantize_feature, quantize_features, Encoder, QUANT_LEVELS};
pub use model_file::{Model, MODEL_MAGIC};
pub use prototype::{bundle_train, bundle_train_par, PrototypeModel};
pub use sgd::{
    binary_relaxed_loss_grad, cyclic_relaxed_loss_grad, perceptron_train, perceptron_train_with,
    project_lattice, sgd_train_binary, sgd_train_binary_with, sgd_train_cyclic,
    sgd_train_cyclic_with, BinarySgd, CyclicSgd, EpochStats, Paradigm, SgdModel, TrainConfig,
    DEFAULT_BETA,
};

use crate::error::{Error, Result};
use crate::vsa::{Family, Hypervector};

pub trait Classifier: Sync {
    /// Per-class scores (similarities or logits).
    fn scores(&self, t: &Hypervector) -> Result<Vec<f64>>;

    /// Highest-scoring class; ties go to the lowest index.
    fn predict(&self, t: &Hypervector) -> Result<usize> {
        Ok(argmax(&self.scores(t)?))
    }
}

/// First index of the maximum.
pub(crate) fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// Checks shapes and labels; returns the shared family and dimension.
pub(crate) fn check_labels(
    data: &[Hypervector],
    labels: &[usize],
    classes: usize,
) -> Result<(Family, usize)> {
    let first = data
        .first()
        .ok_or_else(|| Error::Empty("training set".into()))?;
    if data.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} samples but {} labels",
            data.len(),
            labels.len()
        )));
    }
    if classes == 0 {
        return Err(Error::invalid("need at least one class"));
    }
    if let Some((i, y)) = labels.iter().enumerate().find(|(_, &y)| y >= classes) {
        return Err(Error::invalid(format!(
            "label {y} of sample {i} outside 0..{classes}"
        )));
    }
    let dim = first.dim();
    for v in data {
        crate::error::check_dim(dim, v.dim())?;
    }
    Ok((first.family(), dim))
}

/// Predictions in input order.
pub fn predict_all(data: &[Hypervector], model: &dyn Classifier) -> Result<Vec<usize>> {
    data.par_iter().map(|t| model.predict(t)).collect()
}

/// Fraction of correct predictions.
pub fn evaluate(data: &[Hypervector], labels: &[usize], model: &dyn Classifier) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Empty("evaluation set".into()));
    }
    if data.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} samples but {} labels",
            data.len(),
            labels.len()
        )));
    }
    let preds = predict_all(data, model)?;
    let correct = preds.iter().zip(labels).filter(|(p, y)| p == y).count();
    Ok(correct as f64 / data.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    struct Constant;

    impl Classifier for Constant {
        fn scores(&self, _: &Hypervector) -> Result<Vec<f64>> {
            Ok(vec![0.0, 0.0, 0.0])
        }
    }

    #[test]
    fn argmax_prefers_lowest_index() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmax(&[2.0]), 0);
    }

    #[test]
    fn constant_predictor_accuracy() {
        let mut rng = SeededRng::new(1);
        let x: Vec<Hypervector> = (0..300)
            .map(|_| Hypervector::random(Family::Binary, 64, &mut rng).unwrap())
            .collect();
        assert_eq!(evaluate(&x, &vec![0; 300], &Constant).unwrap(), 1.0);
        let y: Vec<usize> = (0..300).map(|i| i % 3).collect();
        assert!((evaluate(&x, &y, &Constant).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!(evaluate(&[], &[], &Constant).is_err());
    }
}
