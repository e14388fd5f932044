//! Statistics of the Casimir-Polder potential felt by a probe sphere above a
//! dilute, three-dimensional random medium of point-like scatterers.
//!
//! The potential is modelled as a pairwise sum of retarded two-body terms
//! `-Γ₇/r⁷` over a Poisson field of scatterers. Everything about the
//! normalized potential `s = U/Ū` depends on the single control parameter
//! `χ = n z³`:
//!
//! * [`pws`] holds the dimensional and dimensionless closed forms (pair law,
//!   mean potential, cumulants, relative fluctuation, exclusion zone).
//! * [`distribution`] evaluates the exact density `p(s)` by inverting the
//!   cumulant generating function, together with its Gaussian, moderate-`s`
//!   and small-`s` (Lifshitz) asymptotics.
//! * [`montecarlo`] samples scatterer configurations and compares the
//!   empirical statistics with the analytic ones.
//! * [`specfun`] and [`quadrature`] are the numerical building blocks.
//! * [`validation`] bundles the end-to-end acceptance checks.
//!
//! The analytic modules are generic over the scalar type through [`Real`];
//! the aliases at the crate root fix it to `f64`, which is the precision all
//! accuracy targets refer to.

// `!(x > 0)` guards reject NaN along with non-positive values; tabulated
// constants keep all the digits of their sources.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod distribution;
pub mod error;
pub mod montecarlo;
pub mod pws;
pub mod quadrature;
pub mod specfun;
pub mod validation;

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

pub use error::{Error, Result};

/// Floating-point scalar the analytic core is written against.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into this type.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over a [`Real`] scalar.
pub type Complex<T> = num_complex::Complex<T>;

pub type Complex64 = Complex<f64>;
pub type QuadResult64 = quadrature::QuadResult<f64, f64>;
pub type ComplexQuadResult64 = quadrature::QuadResult<Complex64, f64>;
pub type MediumSpec64 = pws::MediumSpec<f64>;
pub type ProbeSpec64 = pws::ProbeSpec<f64>;
pub type PairCoefficient64 = pws::PairCoefficient<f64>;
pub type DimensionlessPoint64 = pws::DimensionlessPoint<f64>;
pub type CumulantSet64 = pws::CumulantSet<f64>;
pub type PdfValue64 = distribution::PdfValue<f64>;
pub type PdfGrid64 = distribution::PdfGrid<f64>;
pub type PdfMoments64 = distribution::PdfMoments<f64>;

/// Crate version recorded in every exported file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
