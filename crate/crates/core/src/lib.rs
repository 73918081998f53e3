//! Discrete integrable lattice system on a coprime torus: spectral operator,
//! spectral curve, sign-table flow kernels, explicit flows, and eigenvector
//! reconstruction.

pub mod curve;
pub mod eigen;
pub mod error;
pub mod flow;
pub mod kappa;
pub mod operator;
pub mod torus;

pub use curve::{
    admissible_support, curve_polynomial, curve_polynomial_with_threshold, expected_genus,
    interpolation_residual, newton_genus, special_state, CurvePolynomial, NewtonPolygon,
    DEFAULT_THRESHOLD_FACTOR,
};
pub use eigen::{
    asymptotic_branches, curve_points_at_beta, kernel_vector, minor_ratio, quasi_periodicity_check,
    recurrence_residual, AsymptoticBranches, CurvePoint, KernelVector,
};
pub use error::{Error, Result};
pub use flow::{conserved_vector, flow_rhs, integrate, DriftReport, DriftSample, FlowDerivative};
pub use kappa::{
    build_kappa, build_phi, build_rho, euclid_case, sequence_case, EuclidCase, SignKind, SignTable,
};
pub use num_complex::Complex64;
pub use operator::{
    assemble_w, beta_zero_product, beta_zero_spectrum, det_w, x_block, BetaZeroSpectrum,
    BlockRoots, OperatorMatrix,
};
pub use torus::{
    canonical_index, load_state, random_state, random_state_default, save_state, state_from_json,
    state_to_json, LatticeState, TorusIndex,
};
