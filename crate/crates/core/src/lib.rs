//! Ideal-counting functions of number fields and the weighted sums built on them.

pub mod analytic;
pub mod arith;
pub mod compensated;
pub mod exponent_fit;
pub mod expsum;
pub mod ideal_sieve;
pub mod number_field;
pub mod poly_arith;
pub mod quadrature;
