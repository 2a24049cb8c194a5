//! Target singular-value transformations and their odd polynomial approximations.

mod approx;
mod function;
mod poly;

pub use approx::{
    fpaa_polynomial, grid_max_abs, inverse_polynomial, inverse_polynomial_with_margin, laa_polynomial,
    laa_polynomial_with_margin, multiplicative_error, DEFAULT_EDGE_MARGIN,
};
pub use function::SvtFunction;
pub use poly::{chebyshev_coefficients, chebyshev_grid, chebyshev_integer_table, OddPolynomial};
