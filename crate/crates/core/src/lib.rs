//! Construction, continuation and analysis of solutions of complex
//! difference equations `y(z+1) = F(z, y(z))`.

pub mod continuation;
pub mod dd;
pub mod equation;
pub mod error;
pub mod io;
pub mod mahler;
pub mod numerics;
pub mod picard;
pub mod scalar;
pub mod surface;

pub use error::{Error, Result};
pub use scalar::{cx, Cplx, DoubleDouble, Scalar};

pub type C64 = Cplx<f64>;
pub type Cdd = Cplx<DoubleDouble>;
pub type Series64 = numerics::PowerSeries<f64>;
pub type SeriesDd = numerics::PowerSeries<DoubleDouble>;
pub type Equation64 = equation::EquationSpec<f64>;
pub type EquationDd = equation::EquationSpec<DoubleDouble>;
pub type ModelSolution64 = surface::ModelSolution<f64>;
pub type ModelSolutionDd = surface::ModelSolution<DoubleDouble>;
pub type Surface64 = surface::SurfaceGraph<f64>;
