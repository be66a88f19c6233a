//! Phase-sensitivity analysis of single-photon multimode interferometers.
//!
//! An interferometer here is `V2 * Phi(phi) * V1` fed with one photon in each
//! of `n` modes and read out by checking whether every output mode fires.
//! The crate provides
//!
//! * the interferometer building blocks ([`matrix`]),
//! * permanents and the coincidence probability ([`permanent`]),
//! * a brute-force Fock-space reference ([`fock`]),
//! * phase strategies, Fisher information and sensitivities ([`strategy`],
//!   [`metrology`]),
//! * loss and dephasing models ([`noise`]).
//!
//! The numerical core is generic over [`Real`] (`f64` and `f32`); the
//! aliases below fix the scalar to `f64`, which is what every tolerance in
//! the test suite assumes.

// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fock;
pub mod matrix;
pub mod metrology;
pub mod noise;
pub mod permanent;
pub mod scalar;
pub mod strategy;

pub use error::{Error, Result};
pub use fock::{FockOccupation, OutputDistribution};
pub use matrix::{ComplexMatrix, UnitarySpec};
pub use metrology::{SensitivityCurve, SensitivityRecord};
pub use noise::{MonteCarloEstimate, NoiseParams};
pub use permanent::NetworkSpec;
pub use scalar::Real;
pub use strategy::{PhaseStrategy, StrategyKind};

pub use num_complex::Complex;

pub type Complex64 = Complex<f64>;
pub type Matrix = ComplexMatrix<f64>;
pub type Matrix32 = ComplexMatrix<f32>;
pub type Network = NetworkSpec<f64>;
pub type Network32 = NetworkSpec<f32>;
pub type Distribution = OutputDistribution<f64>;
pub type Unitary = UnitarySpec<f64>;
