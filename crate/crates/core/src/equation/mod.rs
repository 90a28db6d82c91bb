//! Difference equations `y(z+1) = F(z, y(z))` with rational right-hand side.

pub mod difference;
pub mod expr;
pub mod normal;
pub mod rational;

pub use difference::{
    c_bound_ratio, coeff_bound_check, expand_c, lambda_pow, rhs_series, strip_samples, BoundReport,
    EquationSpec, ExpandedCoeff, Flavor, MultiIndex, Side,
};
pub use expr::CoeffExpr;
pub use normal::{abel_normalize, schroder_residual, schroder_series, AbelNormalization};
pub use rational::{
    fixed_points, FixedPointClass, FixedPointReport, FixedPointSummary, RationalMap,
};
