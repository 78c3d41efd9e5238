//! Midpoint / mean / corner-average bounds for coordinatewise-convex
//! functions on a box, their weighted form, and the discrete Jensen bound.
//!
//! For `f` convex in each coordinate separately on `[a, b]`:
//!
//! ```text
//! f((a + b) / 2)  <=  (1 / vol) * integral of f over [a, b]  <=  2^-n * sum_c f(c)
//! ```
//!
//! with `c` ranging over the `2^n` corners. Replacing the plain mean by a
//! weighted mean with a positive weight symmetric about every axis midpoint
//! keeps both inequalities. For coordinatewise-concave `f` both reverse.
//! Multilinear functions such as `x1 * x2 * ... * xn` attain equality.

use serde::Serialize;

use crate::domain::{CornerMask, Hyperbox, Vector, WeightParam, MAX_CORNER_DIM};
use crate::error::{Error, Result};
use crate::function::{eval_finite, ScalarFn};
use crate::quadrature::{check_symmetry, integrate, integrate_weighted, QuadratureRule};
use crate::sum::pairwise_sum;

/// Which chain a report checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    /// `lower <= mean <= upper`.
    #[serde(rename = "convex_sandwich")]
    Convex,
    /// `lower >= mean >= upper`.
    #[serde(rename = "concave_reversed")]
    Concave,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsReport {
    /// `f` at the box midpoint.
    pub lower: f64,
    /// Quadrature estimate of the (possibly weighted) mean value.
    pub mean: f64,
    /// Average of `f` over the corners.
    pub upper: f64,
    /// Error estimate of `mean`.
    pub quad_error: f64,
    /// `mean - lower`.
    pub left_margin: f64,
    /// `upper - mean`.
    pub right_margin: f64,
    pub verified: bool,
    pub direction: Direction,
    pub tolerance: f64,
}

impl BoundsReport {
    /// Margins are always `mean - lower` and `upper - mean`. The convex
    /// chain holds when both are `>= -(tolerance + quad_error)`; the
    /// concave chain when both are `<= tolerance + quad_error`.
    pub fn new(
        lower: f64,
        mean: f64,
        upper: f64,
        quad_error: f64,
        tolerance: f64,
        direction: Direction,
    ) -> Self {
        let left_margin = mean - lower;
        let right_margin = upper - mean;
        let slack = tolerance + quad_error;
        let verified = match direction {
            Direction::Convex => left_margin >= -slack && right_margin >= -slack,
            Direction::Concave => left_margin <= slack && right_margin <= slack,
        };
        Self {
            lower,
            mean,
            upper,
            quad_error,
            left_margin,
            right_margin,
            verified,
            direction,
            tolerance,
        }
    }
}

/// `f` at the midpoint of the box.
pub fn hh_lower<F: ScalarFn + ?Sized>(f: &F, domain: &Hyperbox) -> Result<f64> {
    Ok(eval_finite(f, domain.midpoint().as_slice())?)
}

/// `2^-n` times the sum of `f` over all corners, summed pairwise in mask
/// order.
pub fn hh_upper<F: ScalarFn + ?Sized>(f: &F, domain: &Hyperbox) -> Result<f64> {
    Ok(corner_sum(f, domain)? * 0.5f64.powi(domain.dim() as i32))
}

fn check_tolerance(tolerance: f64) -> Result<()> {
    if tolerance >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "tolerance must be non-negative, got {tolerance}"
        )))
    }
}

/// Midpoint, quadrature mean and corner average, checked against each other
/// in the requested direction. The mean is the refined quadrature value
/// divided by the box volume.
pub fn hh_sandwich<F: ScalarFn + ?Sized>(
    f: &F,
    domain: &Hyperbox,
    rule: &QuadratureRule,
    tolerance: f64,
    direction: Direction,
) -> Result<BoundsReport> {
    check_tolerance(tolerance)?;
    let lower = hh_lower(f, domain)?;
    let upper = hh_upper(f, domain)?;
    let integral = integrate(f, domain, rule, true)?;
    let volume = domain.volume();
    Ok(BoundsReport::new(
        lower,
        integral.value / volume,
        upper,
        integral.error_estimate / volume,
        tolerance,
        direction,
    ))
}

/// The weighted sandwich. `p` is first probed for positivity and symmetry
/// about every axis midpoint with `trials` samples; a falsified weight is
/// rejected before anything is integrated.
#[allow(clippy::too_many_arguments)]
pub fn fejer_sandwich<F, P>(
    f: &F,
    p: &P,
    domain: &Hyperbox,
    rule: &QuadratureRule,
    tolerance: f64,
    trials: usize,
    rng_seed: u64,
) -> Result<BoundsReport>
where
    F: ScalarFn + ?Sized,
    P: ScalarFn + ?Sized,
{
    check_tolerance(tolerance)?;
    let verdict = check_symmetry(p, domain, trials, tolerance, rng_seed)?;
    if verdict.is_falsified() {
        return Err(Error::WeightRejected(Box::new(verdict)));
    }
    let lower = hh_lower(f, domain)?;
    let upper = hh_upper(f, domain)?;
    let (num, den) = integrate_weighted(f, p, domain, rule, true)?;
    let mean = num.value / den.value;
    let quad_error =
        num.error_estimate / den.value.abs() + mean.abs() * den.error_estimate / den.value.abs();
    Ok(BoundsReport::new(
        lower,
        mean,
        upper,
        quad_error,
        tolerance,
        Direction::Convex,
    ))
}

/// Upper limit on the number of index tuples in a Jensen instance.
pub const JENSEN_TUPLE_BUDGET: usize = 1 << MAX_CORNER_DIM;

/// Per-coordinate tolerance on `sum_j alpha_ij = 1`.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// Per coordinate `i`, points `x_i1..x_im_i` with weights
/// `alpha_i1..alpha_im_i >= 0` summing to one. The number of points may
/// differ between coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JensenInstance {
    points: Vec<Vec<f64>>,
    weights: Vec<Vec<f64>>,
}

impl JensenInstance {
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyVector);
        }
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                found: weights.len(),
            });
        }
        for (i, (xs, ws)) in points.iter().zip(&weights).enumerate() {
            if xs.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "coordinate {i} has no points"
                )));
            }
            if xs.len() != ws.len() {
                return Err(Error::DimensionMismatch {
                    expected: xs.len(),
                    found: ws.len(),
                });
            }
            if let Some(&x) = xs.iter().find(|x| !x.is_finite()) {
                return Err(Error::NonFinite { index: i, value: x });
            }
            if let Some(&w) = ws.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
                return Err(Error::InvalidArgument(format!(
                    "coordinate {i} has invalid weight {w}"
                )));
            }
            let total: f64 = ws.iter().sum();
            if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
                return Err(Error::InvalidArgument(format!(
                    "weights of coordinate {i} sum to {total}, not 1"
                )));
            }
        }
        Ok(Self { points, weights })
    }

    /// Two points `{x_i, y_i}` with weights `{t_i, 1 - t_i}` per coordinate.
    pub fn from_interpolation(x: &Vector, y: &Vector, t: &WeightParam) -> Result<Self> {
        let n = t.dim();
        for d in [x.dim(), y.dim()] {
            if d != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: d,
                });
            }
        }
        let points = x
            .as_slice()
            .iter()
            .zip(y.as_slice())
            .map(|(&a, &b)| vec![a, b])
            .collect();
        let weights = t.as_slice().iter().map(|&ti| vec![ti, 1.0 - ti]).collect();
        Self::new(points, weights)
    }

    pub fn dim(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    /// `sum_j alpha_ij x_ij` for every coordinate, clamped to the hull of
    /// the points against rounding.
    pub fn weighted_means(&self) -> Vec<f64> {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(xs, ws)| {
                let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                xs.iter()
                    .zip(ws)
                    .fold(0.0, |acc, (x, w)| acc + w * x)
                    .clamp(lo, hi)
            })
            .collect()
    }

    fn tuple_count(&self) -> Option<usize> {
        self.points
            .iter()
            .try_fold(1usize, |acc, xs| acc.checked_mul(xs.len()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JensenBound {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

/// `lhs = f(weighted means)` and
/// `rhs = sum over index tuples (j_1..j_n) of prod_i alpha_{i,j_i} * f(x_{1,j_1}, .., x_{n,j_n})`.
///
/// Tuples are enumerated with coordinate 0 varying fastest, so an instance
/// built by [`JensenInstance::from_interpolation`] reproduces the corner
/// ordering (and the floating-point result) of
/// [`defining_inequality_gap`](crate::convexity::defining_inequality_gap).
pub fn jensen_bound<F: ScalarFn + ?Sized>(f: &F, instance: &JensenInstance) -> Result<JensenBound> {
    let count = instance
        .tuple_count()
        .filter(|&c| c <= JENSEN_TUPLE_BUDGET)
        .ok_or_else(|| Error::BudgetExceeded {
            requested: instance.points.iter().map(|xs| xs.len() as f64).product(),
            limit: JENSEN_TUPLE_BUDGET as u64,
        })?;
    let n = instance.dim();
    let lhs = eval_finite(f, &instance.weighted_means())?;

    let mut index = vec![0usize; n];
    let mut point: Vec<f64> = instance.points.iter().map(|xs| xs[0]).collect();
    let mut terms = Vec::with_capacity(count);
    for _ in 0..count {
        let weight: f64 = index
            .iter()
            .zip(&instance.weights)
            .map(|(&j, ws)| ws[j])
            .product();
        terms.push(weight * eval_finite(f, &point)?);
        // odometer, coordinate 0 fastest
        for i in 0..n {
            index[i] += 1;
            if index[i] < instance.points[i].len() {
                point[i] = instance.points[i][index[i]];
                break;
            }
            index[i] = 0;
            point[i] = instance.points[i][0];
        }
    }
    let rhs = pairwise_sum(&terms);
    Ok(JensenBound {
        lhs,
        rhs,
        gap: rhs - lhs,
    })
}

/// Sum of `f` over the `2^n` corners.
pub fn corner_sum<F: ScalarFn + ?Sized>(f: &F, domain: &Hyperbox) -> Result<f64> {
    let values = CornerMask::all(domain.dim())?
        .map(|m| {
            let c = m.select(domain.lower().as_slice(), domain.upper().as_slice());
            eval_finite(f, &c)
        })
        .collect::<Result<Vec<f64>, _>>()?;
    Ok(pairwise_sum(&values))
}
