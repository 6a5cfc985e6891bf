//! What similarity structure binary HDC can and cannot express.

mod angle;
mod classic;
mod hull;
pub mod simplex;

pub use angle::{
    bundling_angle_empirical, bundling_angle_theory, central_binomial_ratio, pk, pk_monotone_check,
    MIN_EMPIRICAL_DIM,
};
pub use classic::{
    classic_gap_bound, classic_init_expectation, classic_limit_gap, verify_classic_limit,
    ClassicEstimate, Composition, CompositionNode,
};
pub use hull::{
    check_binary_expressible, enumerate_atoms, mixture_residual, ExpressibilityReport, SignAtom,
    MAX_ATOM_ENTITIES,
};
