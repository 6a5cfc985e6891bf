//! Correlated basis hypervectors realizing a target similarity matrix.
//!
//! The construction draws Gaussian vectors whose correlation matrix is the
//! PSD projection of `sin(pi/2 M)`, then maps each coordinate to a symbol:
//! the sign for binary HDC, or a normal-quantile bucket for Z/nZ. By the
//! arcsine law the expected sign similarity equals `M` wherever the sine
//! transform was already PSD.

mod factor;
mod sample;
mod target;

pub use factor::{psd_factor, sin_transform, GaussianFactor, CLIPPED_MASS_WARNING};
pub use sample::{
    arcsine_moment, empirical_similarity, normal_cdf, sample_binary_from_loading,
    sample_correlated, sample_correlated_binary, sample_correlated_cyclic,
    sample_cyclic_from_loading, target_factor, CorrelatedBasis, BASIS_MAGIC,
};
pub use target::{rbf_target, SimilarityTarget};

/// RBF bandwidth on the 0..=255 quantized-value scale.
pub const DEFAULT_SIGMA: f64 = 16.0;
