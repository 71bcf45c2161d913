//! Kerr-type coupling rates from the factorization `χ/2π = η̃·E⁽⁴⁾/h`.
//!
//! The crate is split the same way the physics is:
//!
//! * [`scaling`] holds the platform-independent law, uncertainty
//!   propagation and regime classification.
//! * [`sc`], [`photonic`] and [`enz`] are the platform kernels that produce
//!   a projection factor `η̃` and a quartic energy scale `E⁽⁴⁾`.
//! * [`fock`] is a brute-force truncated number-basis diagonalization used
//!   to check the analytic law independently.
//!
//! All energies are stored as frequency equivalents `E/h` in Hz.
//!
//! Data-parallel loops (flux sweeps, field-grid reductions, oracle sweeps)
//! go through [`exec::Execution`]. With the `parallel` feature (default)
//! they run on rayon; without it every path is sequential.

// `!(x > 0.0)` is the house idiom for rejecting NaN together with the bound.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod enz;
pub mod error;
pub mod exec;
pub mod fock;
pub mod photonic;
pub mod sc;
pub mod scaling;
pub mod units;

pub use error::{KerrError, Result};
pub use exec::Execution;
pub use scaling::{
    EnergyScale, KerrPrediction, KernelTag, MonomialCoefficient, ProjectionFactor, Regime,
    RegimeInputs,
};
