//! Scalar functions of square matrices, viewed as functions on R^(n*n)
//! through row-major flattening. An elementwise matrix interval `[A, B]`
//! becomes a box, and the sandwich bounds carry over unchanged.

use serde::Serialize;

use crate::bounds::{hh_sandwich, BoundsReport, Direction};
use crate::domain::{Hyperbox, Vector, MAX_CORNER_DIM};
use crate::error::{Error, EvalError, Result};
use crate::expr::Expr;
use crate::function::ScalarFn;
use crate::quadrature::QuadratureRule;

/// `n x n` real matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SquareMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl SquareMatrix {
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyVector);
        }
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: entries.len(),
            });
        }
        if let Some((index, &value)) = entries.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self { n, entries })
    }

    pub fn filled(n: usize, value: f64) -> Result<Self> {
        Self::new(n, vec![value; n * n])
    }

    pub fn identity(n: usize) -> Result<Self> {
        let entries = (0..n * n)
            .map(|k| if k / n == k % n { 1.0 } else { 0.0 })
            .collect();
        Self::new(n, entries)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry in row `i`, column `j` (0-based).
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    /// Elementwise order: `a_ij <= b_ij` for all `i, j`.
    pub fn leq(&self, other: &SquareMatrix) -> Result<bool> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(self.entries.iter().zip(&other.entries).all(|(a, b)| a <= b))
    }
}

/// Row-major: `(1 2; 3 4)` becomes `(1, 2, 3, 4)`.
pub fn flatten(m: &SquareMatrix) -> Vector {
    Vector::new(m.entries.clone()).expect("matrix entries are finite and non-empty")
}

/// Inverse of [`flatten`]; the vector length must be a perfect square.
pub fn unflatten(v: &Vector) -> Result<SquareMatrix> {
    let len = v.dim();
    let n = (len as f64).sqrt().round() as usize;
    if n * n != len {
        return Err(Error::InvalidArgument(format!(
            "length {len} is not a perfect square"
        )));
    }
    SquareMatrix::new(n, v.as_slice().to_vec())
}

/// Product of two flattened 2x2 matrices:
/// `(a, b, c, d)(u, v, x, y) = (au + bx, av + by, cu + dx, cv + dy)`.
pub fn vec_product_2x2(lhs: &Vector, rhs: &Vector) -> Result<Vector> {
    for d in [lhs.dim(), rhs.dim()] {
        if d != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                found: d,
            });
        }
    }
    let [a, b, c, d] = <[f64; 4]>::try_from(lhs.as_slice()).expect("length checked");
    let [u, v, x, y] = <[f64; 4]>::try_from(rhs.as_slice()).expect("length checked");
    Vector::new(vec![
        a * u + b * x,
        a * v + b * y,
        c * u + d * x,
        c * v + d * y,
    ])
}

/// Elementwise interval `[A, B]` with `a_ij < b_ij` everywhere.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixInterval {
    lower: SquareMatrix,
    upper: SquareMatrix,
}

impl MatrixInterval {
    pub fn new(lower: SquareMatrix, upper: SquareMatrix) -> Result<Self> {
        if lower.n != upper.n {
            return Err(Error::DimensionMismatch {
                expected: lower.n,
                found: upper.n,
            });
        }
        for (k, (&a, &b)) in lower.entries.iter().zip(&upper.entries).enumerate() {
            if a >= b {
                return Err(Error::DegenerateBox {
                    axis: k,
                    lower: a,
                    upper: b,
                });
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn n(&self) -> usize {
        self.lower.n
    }

    pub fn lower(&self) -> &SquareMatrix {
        &self.lower
    }

    pub fn upper(&self) -> &SquareMatrix {
        &self.upper
    }
}

/// The box in R^(n*n) whose axis `i*n + j` is `[a_ij, b_ij]`. Its volume is
/// `prod (b_ij - a_ij)`.
pub fn matrix_interval_to_box(iv: &MatrixInterval) -> Hyperbox {
    Hyperbox::new(flatten(&iv.lower), flatten(&iv.upper))
        .expect("interval invariants give a strict box")
}

/// A scalar-valued function of a square matrix.
pub trait MatrixFn {
    fn eval_matrix(&self, m: &SquareMatrix) -> Result<f64, EvalError>;
}

/// Expressions read the entries in row-major order as `x1..x{n*n}`.
impl MatrixFn for Expr {
    fn eval_matrix(&self, m: &SquareMatrix) -> Result<f64, EvalError> {
        self.evaluate(m.as_slice())
    }
}

impl<F> MatrixFn for F
where
    F: Fn(&SquareMatrix) -> Result<f64, EvalError>,
{
    fn eval_matrix(&self, m: &SquareMatrix) -> Result<f64, EvalError> {
        self(m)
    }
}

/// `f o unflatten` for matrices of a fixed size.
pub struct Unflattened<'a, F: ?Sized> {
    f: &'a F,
    n: usize,
}

impl<'a, F: MatrixFn + ?Sized> Unflattened<'a, F> {
    pub fn new(f: &'a F, n: usize) -> Self {
        Self { f, n }
    }
}

impl<F: MatrixFn + ?Sized> ScalarFn for Unflattened<'_, F> {
    fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        let m = SquareMatrix::new(self.n, x.to_vec())
            .map_err(|e| EvalError::Domain(format!("not an {0}x{0} matrix: {e}", self.n)))?;
        self.f.eval_matrix(&m)
    }
}

/// The sandwich over a matrix interval: midpoint `(A + B) / 2`, mean over
/// `[A, B]`, and the average over the `2^(n*n)` corner matrices. Requires
/// `n * n <= 24`.
pub fn matrix_hh_sandwich<F: MatrixFn + ?Sized>(
    f: &F,
    iv: &MatrixInterval,
    rule: &QuadratureRule,
    tolerance: f64,
    direction: Direction,
) -> Result<BoundsReport> {
    let dim = iv.n() * iv.n();
    if dim > MAX_CORNER_DIM {
        return Err(Error::DimensionLimit {
            dim,
            limit: MAX_CORNER_DIM,
        });
    }
    hh_sandwich(
        &Unflattened::new(f, iv.n()),
        &matrix_interval_to_box(iv),
        rule,
        tolerance,
        direction,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::product_order_leq;
    use crate::expr::parse;
    use proptest::prelude::*;

    fn textbook_mul(a: &SquareMatrix, b: &SquareMatrix) -> SquareMatrix {
        let n = a.n();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = (0..n).map(|k| a.get(i, k) * b.get(k, j)).sum();
            }
        }
        SquareMatrix::new(n, out).unwrap()
    }

    fn m2(e: [f64; 4]) -> SquareMatrix {
        SquareMatrix::new(2, e.to_vec()).unwrap()
    }

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn flatten_is_row_major() {
        assert_eq!(flatten(&m2([1.0, 2.0, 3.0, 4.0])), v(&[1.0, 2.0, 3.0, 4.0]));
        assert_eq!(
            flatten(&SquareMatrix::identity(2).unwrap()),
            v(&[1.0, 0.0, 0.0, 1.0])
        );
        assert_eq!(m2([1.0, 2.0, 3.0, 4.0]).get(1, 0), 3.0);
        assert!(unflatten(&v(&[1.0, 2.0, 3.0])).is_err());
    }

    #[test]
    fn product_examples() {
        let id = v(&[1.0, 0.0, 0.0, 1.0]);
        let u = v(&[2.5, -1.0, 3.0, 7.0]);
        assert_eq!(vec_product_2x2(&id, &u).unwrap(), u);
        let r = vec_product_2x2(&v(&[1.0, 2.0, 3.0, 4.0]), &v(&[5.0, 6.0, 7.0, 8.0])).unwrap();
        assert_eq!(r, v(&[19.0, 22.0, 43.0, 50.0]));
        assert_eq!(vec_product_2x2(&v(&[0.0; 4]), &u).unwrap(), v(&[0.0; 4]));
        assert!(vec_product_2x2(&v(&[1.0; 9]), &u).is_err());
    }

    #[test]
    fn interval_to_box() {
        let iv = MatrixInterval::new(
            SquareMatrix::filled(2, 0.0).unwrap(),
            SquareMatrix::filled(2, 1.0).unwrap(),
        )
        .unwrap();
        assert_eq!(matrix_interval_to_box(&iv), Hyperbox::unit(4).unwrap());

        let iv = MatrixInterval::new(m2([0.0, 1.0, 2.0, 3.0]), m2([1.0, 2.0, 3.0, 4.0])).unwrap();
        let b = matrix_interval_to_box(&iv);
        for k in 0..4 {
            assert_eq!(b.bounds(k), (k as f64, k as f64 + 1.0));
        }

        let iv = MatrixInterval::new(m2([0.0, -1.0, 2.0, 3.0]), m2([0.5, 2.0, 3.0, 7.0])).unwrap();
        assert_eq!(matrix_interval_to_box(&iv).volume(), 0.5 * 3.0 * 1.0 * 4.0);
    }

    #[test]
    fn interval_requires_strict_order() {
        assert!(MatrixInterval::new(m2([0.0; 4]), m2([1.0, 1.0, 0.0, 1.0])).is_err());
        assert!(MatrixInterval::new(m2([0.0; 4]), SquareMatrix::filled(3, 1.0).unwrap()).is_err());
    }

    #[test]
    fn sum_of_squares_over_unit_interval() {
        let iv = MatrixInterval::new(
            SquareMatrix::filled(2, 0.0).unwrap(),
            SquareMatrix::filled(2, 1.0).unwrap(),
        )
        .unwrap();
        let f = parse("x1^2 + x2^2 + x3^2 + x4^2").unwrap();
        let rule = QuadratureRule::gauss_legendre(8).unwrap();
        let r = matrix_hh_sandwich(&f, &iv, &rule, 1e-9, Direction::Convex).unwrap();
        assert_eq!(r.lower, 1.0);
        assert!((r.mean - 4.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.upper, 2.0);
        assert!(r.verified);
    }

    #[test]
    fn closures_and_expressions_agree() {
        let iv = MatrixInterval::new(m2([0.0, 1.0, 2.0, 3.0]), m2([1.0, 2.0, 3.0, 4.0])).unwrap();
        let rule = QuadratureRule::gauss_legendre(4).unwrap();
        let expr = parse("x1 * x2 * x3 * x4").unwrap();
        let closure =
            |m: &SquareMatrix| -> Result<f64, EvalError> { Ok(m.as_slice().iter().product()) };
        let a = matrix_hh_sandwich(&expr, &iv, &rule, 1e-9, Direction::Convex).unwrap();
        let b = matrix_hh_sandwich(&closure, &iv, &rule, 1e-9, Direction::Convex).unwrap();
        assert!((a.mean - b.mean).abs() < 1e-12);
        assert!((a.lower - a.upper).abs() < 1e-12);
    }

    #[test]
    fn entry_function_is_affine() {
        let iv = MatrixInterval::new(m2([0.0, 1.0, 2.0, 3.0]), m2([0.5, 2.0, 3.0, 4.0])).unwrap();
        let rule = QuadratureRule::gauss_legendre(2).unwrap();
        let r =
            matrix_hh_sandwich(&parse("x1").unwrap(), &iv, &rule, 1e-9, Direction::Convex).unwrap();
        assert_eq!(r.lower, 0.25);
        assert_eq!(r.upper, 0.25);
        assert!((r.mean - 0.25).abs() < 1e-15);
    }

    #[test]
    fn large_matrices_are_rejected() {
        let iv = MatrixInterval::new(
            SquareMatrix::filled(5, 0.0).unwrap(),
            SquareMatrix::filled(5, 1.0).unwrap(),
        )
        .unwrap();
        let rule = QuadratureRule::gauss_legendre(2).unwrap();
        assert!(matches!(
            matrix_hh_sandwich(&parse("x1").unwrap(), &iv, &rule, 1e-9, Direction::Convex),
            Err(Error::DimensionLimit { .. })
        ));
    }

    fn arb_matrix(n: usize) -> impl Strategy<Value = SquareMatrix> {
        prop::collection::vec(-100.0..100.0f64, n * n)
            .prop_map(move |e| SquareMatrix::new(n, e).unwrap())
    }

    proptest! {
        #[test]
        fn flatten_round_trips(m in (1usize..5).prop_flat_map(arb_matrix)) {
            prop_assert_eq!(unflatten(&flatten(&m)).unwrap(), m.clone());
            let v = flatten(&m);
            prop_assert_eq!(flatten(&unflatten(&v).unwrap()), v);
        }

        #[test]
        fn product_matches_textbook(a in arb_matrix(2), b in arb_matrix(2)) {
            let via_vec = vec_product_2x2(&flatten(&a), &flatten(&b)).unwrap();
            prop_assert_eq!(via_vec, flatten(&textbook_mul(&a, &b)));
        }

        #[test]
        fn elementwise_order_matches_product_order(a in arb_matrix(3), b in arb_matrix(3)) {
            prop_assert_eq!(a.leq(&b).unwrap(), product_order_leq(&flatten(&a), &flatten(&b)).unwrap());
            prop_assert!(a.leq(&a).unwrap());
        }
    }
}
