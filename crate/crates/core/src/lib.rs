//! Power functions, closed-form integral identities and Forelli-Rudin type
//! operator checks on tubes over the generalized light cone.

// NaN-rejecting `!(x > y)` guards and index loops that follow the formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod boundedness;
pub mod cone;
pub mod constants;
pub mod error;
pub mod identities;
pub mod inequalities;
pub mod operator;
pub mod oracle;
pub mod quadrature;
pub mod report;
pub mod sampling;
pub mod special;
pub mod suite;
