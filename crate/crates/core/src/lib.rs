// SPDX-License-Identifier: Apache-2.0

//! Numerical lab for the dipolar Gross–Pitaevskii equation on a periodic box.
//!
//! The numerical core is generic over the real scalar (`f32` or `f64`); the
//! aliases at the bottom of this file fix it to `f64`.

// `!(x > 0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod binio;
pub mod error;
pub mod fock;
pub mod gp;
pub mod kernel;
pub mod quadrature;
pub mod scalar;
pub mod scaling;
pub mod spectral;
pub mod sphere;

pub use error::{Error, Result};
pub use scalar::{LinalgReal, Real, C};

pub type Grid = spectral::Grid3<f64>;
pub type Field = spectral::Field<f64>;
pub type Multiplier = spectral::MultiplierTable<f64>;
pub type Plan = spectral::FourierPlan<f64>;
pub type Kernel = kernel::KernelSpec<f64>;
