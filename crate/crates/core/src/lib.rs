//! Bounds verification for Hermite-Hadamard-type inequalities of
//! coordinatewise-convex functions on hypercuboids.
//!
//! - [`domain`]: boxes, corners, the product order and corner weights.
//! - [`expr`]: the expression language used to define functions.
//! - [`convexity`]: randomized convexity falsifiers and gap functions.
//! - [`quadrature`]: tensor-product Gauss-Legendre integration.
//! - [`bounds`]: midpoint / mean / corner-average sandwiches, weighted and
//!   discrete variants.
//! - [`matrix`]: the same bounds for scalar functions of square matrices.
//! - [`cli`]: report generation behind the `hhcube` binary.

pub mod bounds;
pub mod cli;
pub mod convexity;
pub mod domain;
pub mod error;
pub mod expr;
pub mod function;
pub mod matrix;
pub mod quadrature;
pub mod sum;

pub use bounds::{
    fejer_sandwich, hh_lower, hh_sandwich, hh_upper, jensen_bound, BoundsReport, Direction,
    JensenBound, JensenInstance,
};
pub use convexity::{
    defining_inequality_gap, is_convex_fn, is_nfold_convex_fn, lemma_corner_majorization_gap,
    Status, Verdict, Witness,
};
pub use domain::{
    corner_weight, interpolate, is_nfold_convex_set, product_order_leq, CornerMask, Hyperbox,
    SetVerdict, Vector, WeightParam,
};
pub use error::{Error, EvalError, Result};
pub use expr::{parse, Expr, ParseError, SourceSpan};
pub use function::{Negated, ScalarFn};
pub use matrix::{
    flatten, matrix_hh_sandwich, matrix_interval_to_box, unflatten, vec_product_2x2, MatrixFn,
    MatrixInterval, SquareMatrix,
};
pub use quadrature::{
    check_symmetry, integrate, integrate_weighted, QuadratureResult, QuadratureRule,
};
