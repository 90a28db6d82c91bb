//! Complex series algebra, polynomials and root finding.

pub mod poly;
pub mod roots;
pub mod series;

pub use poly::Polynomial;
pub use roots::{poly_roots, poly_roots_flat, Root};
pub use series::{PowerSeries, SeriesJson, TailBound};

use crate::error::Result;

/// Binary series operation selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesOp {
    Add,
    Mul,
}

/// Sum or Cauchy product of two series with a common center.
pub fn series_arith<T: crate::scalar::Scalar>(
    a: &PowerSeries<T>,
    b: &PowerSeries<T>,
    op: SeriesOp,
) -> Result<PowerSeries<T>> {
    match op {
        SeriesOp::Add => a.add(b),
        SeriesOp::Mul => a.mul(b),
    }
}

pub fn series_recip<T: crate::scalar::Scalar>(a: &PowerSeries<T>) -> Result<PowerSeries<T>> {
    a.recip()
}

pub fn series_compose<T: crate::scalar::Scalar>(
    outer: &PowerSeries<T>,
    inner: &PowerSeries<T>,
) -> Result<PowerSeries<T>> {
    PowerSeries::compose(outer, inner)
}
