//! Fourier (Bloch-wave) analysis of dual-time stepping with p-multigrid
//! acceleration for flux-reconstruction discretisations of 1D
//! advection-diffusion, together with a physical-space solver that checks
//! every analytic prediction by brute force.
//!
//! The crate is organised bottom-up:
//!
//! * [`schemes`]: Butcher tableaux, BDF coefficients and the split of the
//!   pseudo-time stability polynomial into its homogeneous (`P`), BDF source
//!   (`C`) and multigrid source (`K`) parts.
//! * [`fr_ops`]: nodal FR matrices and the wavenumber-parameterised Bloch
//!   operator `Q` with its eigendecomposition.
//! * [`fourier`]: single-wavenumber propagators, amplification factors,
//!   Nyquist limits, fully discrete error and maximum stable pseudo steps.
//! * [`pmg`]: p-multigrid transfers, declarative cycles, the cycle driver,
//!   contraction factors, mode energies and element-Jacobi smoothing.
//! * [`timedomain`]: periodic physical-space FR solver with the same driver.
//! * [`sweeps`]: parameter sweeps producing CSV-ready datasets.
//!
//! Pseudo-time updates follow the convention that the BDF source term is
//! frozen at the start of each pseudo step, and the `1 + b_i Δτ/(B_0 Δt)`
//! stage scaling is taken as 1.

#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::too_many_arguments
)]

pub mod error;
pub mod exec;
pub mod fourier;
pub mod fr_ops;
pub mod linalg;
pub mod output;
pub mod pmg;
pub mod polynomial;
pub mod schemes;
pub mod sweeps;
pub mod timedomain;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Dense complex matrix used throughout.
pub type CMat = nalgebra::DMatrix<Complex64>;
/// Dense complex vector used throughout.
pub type CVec = nalgebra::DVector<Complex64>;
/// Dense real matrix.
pub type RMat = nalgebra::DMatrix<f64>;
