//! Scalar functions on R^n.
//!
//! Everything that evaluates an integrand, a weight or a convexity candidate
//! goes through [`ScalarFn`]. Parsed expressions implement it, and so does any
//! closure `Fn(&[f64]) -> Result<f64, EvalError>`.

use crate::error::EvalError;

pub trait ScalarFn {
    fn eval(&self, x: &[f64]) -> Result<f64, EvalError>;
}

impl<F> ScalarFn for F
where
    F: Fn(&[f64]) -> Result<f64, EvalError>,
{
    fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        self(x)
    }
}

/// `-f`. Negation is exact in IEEE arithmetic, so every quantity built from
/// a negated function is the exact negation of the original.
#[derive(Debug, Clone, Copy)]
pub struct Negated<'a, F: ?Sized>(pub &'a F);

impl<F: ScalarFn + ?Sized> ScalarFn for Negated<'_, F> {
    fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        self.0.eval(x).map(|v| -v)
    }
}

/// Pointwise product `p * f`, used for weighted integrals.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Product<'a, P: ?Sized, F: ?Sized> {
    pub p: &'a P,
    pub f: &'a F,
}

impl<P: ScalarFn + ?Sized, F: ScalarFn + ?Sized> ScalarFn for Product<'_, P, F> {
    fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        Ok(self.p.eval(x)? * self.f.eval(x)?)
    }
}

/// Evaluates `f` and rejects non-finite results.
pub(crate) fn eval_finite<F: ScalarFn + ?Sized>(f: &F, x: &[f64]) -> Result<f64, EvalError> {
    let v = f.eval(x)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::Domain(format!("non-finite value {v} at {x:?}")))
    }
}
