//! Circuit-depth complexity (longest two-input-gate path) of inference for
//! binary HDC, cyclic-group VSA over G(2^n), and a 1-bit perceptron.

use serde::Serialize;

use crate::error::{Error, Result};

pub const MAX_GROUP_BITS: u32 = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CdcQuery {
    pub n_features: u64,
    pub dim: u64,
    /// Bits per group element; only used by [`cdc_group`].
    pub n_bits: u32,
}

impl CdcQuery {
    pub fn new(n_features: u64, dim: u64, n_bits: u32) -> Result<Self> {
        if n_features < 2 {
            return Err(Error::invalid(format!(
                "feature count must be >= 2, got {n_features}"
            )));
        }
        if dim < 2 {
            return Err(Error::invalid(format!("dimension must be >= 2, got {dim}")));
        }
        if !(1..=MAX_GROUP_BITS).contains(&n_bits) {
            return Err(Error::invalid(format!(
                "group bits must be in 1..={MAX_GROUP_BITS}, got {n_bits}"
            )));
        }
        Ok(Self {
            n_features,
            dim,
            n_bits,
        })
    }

    fn logs(&self) -> (f64, f64) {
        ((self.n_features as f64).log2(), (self.dim as f64).log2())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CdcReport {
    pub model: String,
    pub depth_real: f64,
    pub depth_rounded: u64,
}

fn report(model: String, depth_real: f64) -> CdcReport {
    // Round half up; depths are positive.
    let depth_rounded = (depth_real + 0.5).floor() as u64;
    CdcReport {
        model,
        depth_real,
        depth_rounded,
    }
}

/// Popcount tree over `D` bits plus the comparator tree.
fn similarity_tree(log_d: f64) -> f64 {
    1.5 * log_d * (1.0 + log_d)
}

/// `log2 N + 1 + 1.5 log2 D (1 + log2 D)`.
pub fn cdc_binary_hdc(q: &CdcQuery) -> CdcReport {
    let (ln, ld) = q.logs();
    report("binary-hdc".into(), ln + 1.0 + similarity_tree(ld))
}

/// `3n log2 N + 24 log2 D`.
pub fn cdc_group(q: &CdcQuery) -> CdcReport {
    let (ln, ld) = q.logs();
    let n = f64::from(q.n_bits);
    report(
        format!("group-g{}", 1u32 << q.n_bits),
        3.0 * n * ln + 24.0 * ld,
    )
}

/// `91 + 96 log2 N + 1.5 log2 D (1 + log2 D)`.
pub fn cdc_perceptron(q: &CdcQuery) -> CdcReport {
    let (ln, ld) = q.logs();
    report("perceptron".into(), 91.0 + 96.0 * ln + similarity_tree(ld))
}

/// All three models for one query.
pub fn cdc_all(q: &CdcQuery) -> [CdcReport; 3] {
    [cdc_binary_hdc(q), cdc_group(q), cdc_perceptron(q)]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: u64, d: u64, bits: u32) -> CdcQuery {
        CdcQuery::new(n, d, bits).unwrap()
    }

    #[test]
    fn mnist_scale_values() {
        let m = q(784, 10000, 3);
        assert_eq!(cdc_binary_hdc(&m).depth_rounded, 295);
        assert_eq!(cdc_group(&m).depth_rounded, 405);
        assert_eq!(cdc_perceptron(&m).depth_rounded, 1299);
        assert_eq!(cdc_group(&q(784, 10000, 4)).depth_rounded, 434);
        assert_eq!(cdc_group(&m).model, "group-g8");
    }

    #[test]
    fn unit_log_values() {
        let m = q(2, 2, 1);
        assert_eq!(cdc_binary_hdc(&m).depth_real, 5.0);
        assert_eq!(cdc_perceptron(&m).depth_real, 190.0);
        assert_eq!(cdc_group(&q(2, 1024, 3)).depth_real, 9.0 + 240.0);
    }

    #[test]
    fn doubling_features_adds_one_level() {
        let a = cdc_binary_hdc(&q(100, 4096, 1)).depth_real;
        let b = cdc_binary_hdc(&q(200, 4096, 1)).depth_real;
        assert!((b - a - 1.0).abs() < 1e-12);
    }

    #[test]
    fn monotone_in_n_and_d() {
        for f in [cdc_binary_hdc, cdc_group, cdc_perceptron] {
            assert!(f(&q(3, 100, 3)).depth_real > f(&q(2, 100, 3)).depth_real);
            assert!(f(&q(2, 101, 3)).depth_real > f(&q(2, 100, 3)).depth_real);
        }
    }

    #[test]
    fn query_validation() {
        assert!(CdcQuery::new(1, 10, 1).is_err());
        assert!(CdcQuery::new(2, 1, 1).is_err());
        assert!(CdcQuery::new(2, 2, 0).is_err());
        assert!(CdcQuery::new(2, 2, 9).is_err());
    }
}
