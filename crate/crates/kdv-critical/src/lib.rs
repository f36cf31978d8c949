//! Critical lengths of the Dirichlet-boundary-controlled linearized KdV
//! equation `y_t + y_x + y_xxx = 0` on `(0, L)`, together with everything
//! needed to classify what happens at those lengths:
//!
//! * [`branch`] solves the transcendental branch system producing the
//!   critical parameters `(a_n, b_n, L_n, q_n)`,
//! * [`profile`] evaluates the one-dimensional unreachable direction `phi`
//!   and the growing solution `e^{qt} phi(x)`,
//! * [`roots`] solves the characteristic cubic `lambda^3 + lambda + iz = 0`,
//! * [`omega`] evaluates the quadratic form `Omega` on the shifted frequency
//!   line `Im z = q/2`, minimizes it, and exposes the frequency-domain
//!   transfer quantities and their large-`z` asymptotics,
//! * [`sim`] is a Crank-Nicolson simulator for the PDE with prescribed
//!   boundary data, used to validate the analytic invariants.
//!
//! Core math is generic over the scalar type through the [`Real`] trait
//! (`f32` or `f64`); concrete `f64` aliases live at the crate root.

// `!(x > 0)` is the NaN-rejecting form of a positivity check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// quadrature nodes and oracle values are recorded to their full published
// precision even where f64 truncates them
#![allow(clippy::excessive_precision)]

use std::fmt;
use std::ops::{AddAssign, DivAssign, MulAssign, RemAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive};

pub mod banded;
pub mod branch;
pub mod error;
pub mod omega;
pub mod profile;
pub mod quad;
pub mod roots;
pub mod sim;

pub use error::{Error, Result};
pub use num_complex;

/// Scalar type the library is generic over: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + RemAssign
    + fmt::Debug
    + fmt::Display
    + fmt::LowerExp
    + Send
    + Sync
    + 'static
{
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + RemAssign
        + fmt::Debug
        + fmt::Display
        + fmt::LowerExp
        + Send
        + Sync
        + 'static
{
}

/// Shorthand for embedding an `f64` literal into the generic scalar type.
#[inline]
pub(crate) fn lit<T: Real>(v: f64) -> T {
    T::from_f64(v).expect("f64 literal must be representable in the scalar type")
}

pub type Complex64 = num_complex::Complex<f64>;
pub type CubicRoots64 = roots::CubicRoots<f64>;
pub type CriticalLengthParams64 = branch::CriticalLengthParams<f64>;
pub type EtaTriplet64 = profile::EtaTriplet<f64>;
pub type ProfileReport64 = profile::ProfileReport<f64>;
pub type ProfileSample64 = profile::ProfileSample<f64>;
pub type OmegaSample64 = omega::OmegaSample<f64>;
pub type OmegaResult64 = omega::OmegaResult<f64>;
pub type TransferQuantities64 = omega::TransferQuantities<f64>;
pub type ScanConfig64 = omega::ScanConfig<f64>;
pub type DetQScan64 = omega::DetQScan<f64>;
pub type BoundarySpec64 = sim::BoundarySpec<f64>;
pub type SimConfig64 = sim::SimConfig<f64>;
pub type Trajectory64 = sim::Trajectory<f64>;
