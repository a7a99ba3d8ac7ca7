//! Numeric kernels on Moyal space: star product on Gaussians and plane waves,
//! the Mehler kernel and its slices, and the matrix-base quadratic form.

mod matrix;
mod mehler;
mod star;

use thiserror::Error;

pub use matrix::{
    g_entry, matrix_base_form, state_index, state_of, truncated_propagator, Index2, MatrixBaseForm, MatrixBaseParams,
    TruncatedPropagator,
};
pub use mehler::{
    mehler_kernel, mehler_uv, propagator, slice_bound_check, sliced_propagator, BoundShape, OscillatorParams, SliceBoundReport,
    SliceFit, SLICE_GRID,
};
pub use star::{star_product, star_product_at, star_product_quadrature, FunctionSpec, GaussianFunction, StarValue, ThetaParam};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MoyalError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate Gaussian integral")]
    Degenerate,
    #[error("star product left the closed-form class: {0}")]
    Closure(String),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("propagator diverges at coincident points")]
    CoincidentPoints,
    #[error("matrix-base form is singular (condition {condition:e})")]
    Singular { condition: f64 },
    #[error("invariant violated: {0}")]
    Invariant(String),
}
