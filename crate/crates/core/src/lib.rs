//! # qgallager
//!
//! Finite-dimensional quantum information quantities for bounding the
//! reliability of quantum information transmission.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`linalg`] | Hermitian / PSD / density operators, eigendecomposition, matrix powers, partial traces |
//! | [`divergence`] | Rényi divergence `D_λ`, its binary form, hockey-stick divergence, entropies |
//! | [`channel`] | Kraus-form channels, the quantum erasure channel, tensor powers, block decomposition |
//! | [`exponent`] | `K_λ(A⟩B)` closed form and numeric infimum, `E₀(s)`, `g(s)` and `g'(s)`, hockey-stick `𝒦` |
//! | [`bounds`] | Erasure-channel exponents, capacity, fidelity upper bounds, converse checks, curves |
//! | [`io`] | JSON operator/channel files |
//! | [`verify`] | Seeded property suites used by the command-line `verify` command |
//!
//! All logarithms are natural; rates are in nats per channel use.
//!
//! ```
//! use qgallager::{bounds, exponent, linalg, divergence::RenyiOrder};
//!
//! let phi = linalg::maximally_entangled(2);
//! let k = exponent::k_lambda(&phi, RenyiOrder::new(2.0).unwrap());
//! assert!((k - 2f64.ln()).abs() < 1e-12);
//!
//! let q = bounds::erasure_capacity(0.25, 2);
//! assert!((q - 0.5 * 2f64.ln()).abs() < 1e-15);
//! ```

#![forbid(unsafe_code)]

pub mod bounds;
pub mod channel;
pub mod divergence;
pub mod exponent;
pub mod io;
pub mod linalg;
pub mod simplex;
pub mod verify;

use thiserror::Error;

/// Errors raised by every fallible operation in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NonHermitian { deviation: f64 },

    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("operator trace is {trace}, expected 1")]
    NotDensity { trace: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("bad dimensions: {0}")]
    BadDimensions(String),

    #[error("operator has (numerically) zero trace")]
    ZeroOperator,

    #[error("support condition violated: {0}")]
    SupportViolation(String),

    #[error("Kraus operators are not trace preserving (deviation {deviation:e})")]
    NotTracePreserving { deviation: f64 },

    #[error("probability {0} is outside [0, 1]")]
    BadProbability(f64),

    #[error("total dimension {dim} exceeds the cap of {cap}")]
    TooLarge { dim: usize, cap: usize },

    #[error("Renyi order {0} is outside (1, 2]")]
    InvalidOrder(f64),

    #[error("parameter s = {0} is outside [-1/2, 0]")]
    InvalidS(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("optimizer did not converge (best value {best})")]
    NotConverged { best: f64 },

    #[error("rate {rate} does not exceed the capacity {capacity}")]
    RateBelowCapacity { rate: f64, capacity: f64 },

    #[error("fidelity {fidelity} is below exp(-nR) = {floor}")]
    ConstraintViolated { fidelity: f64, floor: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
