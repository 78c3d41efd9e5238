//! Tensor-product Gauss-Legendre quadrature over boxes.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::convexity::{Status, Verdict, ViolationKind, Witness};
use crate::domain::Hyperbox;
use crate::error::{Error, EvalError, Result};
use crate::function::{eval_finite, Product, ScalarFn};

pub const DEFAULT_NODES: usize = 16;

/// Maximum number of integrand evaluations for a single tensor rule.
pub const EVALUATION_BUDGET: u64 = 100_000_000;

const NEWTON_TOLERANCE: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureRule {
    pub nodes_per_axis: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Legendre `P_m(x)` and its derivative by the three-term recurrence.
fn legendre(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let deriv = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, deriv)
}

impl QuadratureRule {
    /// The `m`-point rule, computed once per `m` and cached.
    pub fn gauss_legendre(m: usize) -> Result<Arc<QuadratureRule>> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<QuadratureRule>>>> = OnceLock::new();
        if m == 0 {
            return Err(Error::InvalidArgument(
                "quadrature needs at least one node".into(),
            ));
        }
        let cache = CACHE.get_or_init(Default::default);
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        Ok(guard
            .entry(m)
            .or_insert_with(|| Arc::new(Self::compute(m)))
            .clone())
    }

    fn compute(m: usize) -> QuadratureRule {
        if m == 1 {
            return QuadratureRule {
                nodes_per_axis: 1,
                nodes: vec![0.0],
                weights: vec![2.0],
            };
        }
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        // Roots come in +/- pairs; solve for the positive half and mirror.
        for k in 0..m / 2 {
            let mut x = (PI * (k as f64 + 0.75) / (m as f64 + 0.5)).cos();
            for _ in 0..NEWTON_MAX_ITER {
                let (p, dp) = legendre(m, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < NEWTON_TOLERANCE {
                    break;
                }
            }
            let (_, dp) = legendre(m, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[k] = -x;
            nodes[m - 1 - k] = x;
            weights[k] = w;
            weights[m - 1 - k] = w;
        }
        if m % 2 == 1 {
            let (_, dp) = legendre(m, 0.0);
            nodes[m / 2] = 0.0;
            weights[m / 2] = 2.0 / (dp * dp);
        }
        QuadratureRule {
            nodes_per_axis: m,
            nodes,
            weights,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    /// `|value_m - value_2m|` when refined, else 0.
    pub error_estimate: f64,
    pub evaluations: u64,
}

fn check_budget(m: usize, dim: usize) -> Result<u64> {
    let requested = (m as f64).powi(dim as i32);
    if requested > EVALUATION_BUDGET as f64 {
        return Err(Error::BudgetExceeded {
            requested,
            limit: EVALUATION_BUDGET,
        });
    }
    Ok(requested as u64)
}

/// Raw tensor sum for one rule. Summation is nested by axis (axis 0
/// outermost), so the result is a fixed function of the inputs.
fn tensor_sum<F: ScalarFn + ?Sized>(
    f: &F,
    domain: &Hyperbox,
    rule: &QuadratureRule,
) -> Result<f64> {
    let axes: Vec<(Vec<f64>, Vec<f64>)> = (0..domain.dim())
        .map(|i| {
            let (lo, hi) = domain.bounds(i);
            let mid = (lo + hi) / 2.0;
            let half = (hi - lo) / 2.0;
            let xs = rule.nodes.iter().map(|&t| mid + half * t).collect();
            let ws = rule.weights.iter().map(|&w| half * w).collect();
            (xs, ws)
        })
        .collect();
    let mut point = vec![0.0; domain.dim()];
    nested_sum(f, &axes, 0, &mut point)
}

fn nested_sum<F: ScalarFn + ?Sized>(
    f: &F,
    axes: &[(Vec<f64>, Vec<f64>)],
    axis: usize,
    point: &mut [f64],
) -> Result<f64> {
    let (xs, ws) = &axes[axis];
    let mut acc = 0.0;
    for (&x, &w) in xs.iter().zip(ws) {
        point[axis] = x;
        let inner = if axis + 1 == axes.len() {
            eval_finite(f, point)?
        } else {
            nested_sum(f, axes, axis + 1, point)?
        };
        acc += w * inner;
    }
    Ok(acc)
}

/// Tensor-product Gauss-Legendre approximation of the integral of `f` over
/// `domain`. With `refine`, the integral is recomputed with `2m` nodes per
/// axis and the difference is reported as the error estimate; the returned
/// value is always the `m`-node one.
pub fn integrate<F: ScalarFn + ?Sized>(
    f: &F,
    domain: &Hyperbox,
    rule: &QuadratureRule,
    refine: bool,
) -> Result<QuadratureResult> {
    let mut evaluations = check_budget(rule.nodes_per_axis, domain.dim())?;
    let fine_rule = if refine {
        evaluations += check_budget(2 * rule.nodes_per_axis, domain.dim())?;
        Some(QuadratureRule::gauss_legendre(2 * rule.nodes_per_axis)?)
    } else {
        None
    };
    let value = tensor_sum(f, domain, rule)?;
    let error_estimate = match fine_rule {
        Some(fine) => (value - tensor_sum(f, domain, &fine)?).abs(),
        None => 0.0,
    };
    Ok(QuadratureResult {
        value,
        error_estimate,
        evaluations,
    })
}

/// Rejects negative weight values at quadrature nodes.
struct NonNegative<'a, P: ?Sized>(&'a P);

impl<P: ScalarFn + ?Sized> ScalarFn for NonNegative<'_, P> {
    fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        let v = self.0.eval(x)?;
        if v < 0.0 {
            return Err(EvalError::NegativeWeight {
                value: v,
                point: x.to_vec(),
            });
        }
        Ok(v)
    }
}

/// `(integral of p*f, integral of p)` on the same node set.
pub fn integrate_weighted<F, P>(
    f: &F,
    p: &P,
    domain: &Hyperbox,
    rule: &QuadratureRule,
    refine: bool,
) -> Result<(QuadratureResult, QuadratureResult)>
where
    F: ScalarFn + ?Sized,
    P: ScalarFn + ?Sized,
{
    let weight = NonNegative(p);
    let denominator = integrate(&weight, domain, rule, refine)?;
    if denominator.value.is_nan() || denominator.value <= 0.0 {
        return Err(Error::NonPositiveWeightIntegral(denominator.value));
    }
    let numerator = integrate(&Product { p: &weight, f }, domain, rule, refine)?;
    Ok((numerator, denominator))
}

/// Randomized check that `p` is positive and symmetric about every axis
/// midpoint: `p(x) = p(x with x_i -> a_i + b_i - x_i)`.
pub fn check_symmetry<P: ScalarFn + ?Sized>(
    p: &P,
    domain: &Hyperbox,
    trials: usize,
    tolerance: f64,
    rng_seed: u64,
) -> Result<Verdict> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if tolerance.is_nan() || tolerance < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be non-negative, got {tolerance}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    for trial in 0..trials {
        let x = domain.sample(&mut rng);
        let axis = rng.random_range(0..domain.dim());
        let (lo, hi) = domain.bounds(axis);
        let mut y = x.clone();
        y[axis] = lo + hi - x[axis];
        let px = eval_finite(p, &x)?;
        let py = eval_finite(p, &y)?;

        let witness = |kind, violation| Witness {
            kind,
            trial,
            axis: Some(axis),
            x: x.clone(),
            y: y.clone(),
            t: Vec::new(),
            lhs: px,
            rhs: py,
            violation,
        };
        let found = if px <= 0.0 || py <= 0.0 {
            Some(witness(ViolationKind::NonPositive, -px.min(py)))
        } else if (px - py).abs() > tolerance {
            Some(witness(ViolationKind::Asymmetry, (px - py).abs()))
        } else {
            None
        };
        if let Some(w) = found {
            return Ok(Verdict {
                status: Status::Falsified,
                witness: Some(w),
                trials_run: trial + 1,
                tolerance,
            });
        }
    }
    Ok(Verdict {
        status: Status::NotFalsified,
        witness: None,
        trials_run: trials,
        tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Expr};

    fn e(s: &str) -> Expr {
        parse(s).unwrap()
    }

    fn rule(m: usize) -> Arc<QuadratureRule> {
        QuadratureRule::gauss_legendre(m).unwrap()
    }

    #[test]
    fn rules_are_symmetric_and_normalized() {
        for m in 1..=40 {
            let r = rule(m);
            assert_eq!(r.nodes.len(), m);
            let total: f64 = r.weights.iter().sum();
            assert!((total - 2.0).abs() < 1e-12, "m = {m}: {total}");
            assert!(r.weights.iter().all(|&w| w > 0.0));
            for k in 0..m {
                assert!(r.nodes[k] > -1.0 && r.nodes[k] < 1.0);
                assert_eq!(r.nodes[k], -r.nodes[m - 1 - k]);
                if k + 1 < m {
                    assert!(r.nodes[k] < r.nodes[k + 1]);
                }
            }
        }
    }

    #[test]
    fn known_three_point_rule() {
        let r = rule(3);
        assert!((r.nodes[2] - (0.6f64).sqrt()).abs() < 1e-15);
        assert!((r.weights[0] - 5.0 / 9.0).abs() < 1e-15);
        assert!((r.weights[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn rules_are_cached() {
        assert!(Arc::ptr_eq(&rule(7), &rule(7)));
        assert!(QuadratureRule::gauss_legendre(0).is_err());
    }

    #[test]
    fn integrate_examples() {
        let r = integrate(&e("x1"), &Hyperbox::unit(1).unwrap(), &rule(2), false).unwrap();
        assert!((r.value - 0.5).abs() < 1e-15);
        assert_eq!(r.evaluations, 2);

        let r = integrate(
            &e("x1^2 * x2^2"),
            &Hyperbox::unit(2).unwrap(),
            &rule(3),
            false,
        )
        .unwrap();
        assert!((r.value - 1.0 / 9.0).abs() < 1e-14);

        let b = Hyperbox::from_bounds(&[(0.0, 2.0), (0.0, 1.0)]).unwrap();
        let r = integrate(&e("x1*x2"), &b, &rule(2), true).unwrap();
        assert!((r.value - 1.0).abs() < 1e-15);
        assert_eq!(r.evaluations, 4 + 16);
        assert!(r.error_estimate < 1e-15);
    }

    #[test]
    fn refinement_shrinks_the_estimate() {
        let f = e("exp(x1 + x2) + x1^2 * x2");
        let unit = Hyperbox::unit(2).unwrap();
        let e1 = integrate(&f, &unit, &rule(2), true).unwrap().error_estimate;
        let e2 = integrate(&f, &unit, &rule(4), true).unwrap().error_estimate;
        let e3 = integrate(&f, &unit, &rule(8), true).unwrap().error_estimate;
        assert!(e1 > e2 && e2 > e3, "{e1} {e2} {e3}");
    }

    #[test]
    fn budget_is_enforced() {
        let big = Hyperbox::unit(7).unwrap();
        assert!(matches!(
            integrate(&e("x1"), &big, &rule(16), false),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn evaluation_errors_propagate() {
        let unit = Hyperbox::unit(1).unwrap();
        assert!(matches!(
            integrate(&e("1 / (x1 - 0.5)"), &unit, &rule(3), false),
            Err(Error::Eval(_))
        ));
    }

    #[test]
    fn weighted_reduces_to_plain_for_unit_weight() {
        let f = e("exp(x1) * x2^2 + x3");
        let b = Hyperbox::from_bounds(&[(0.0, 1.0), (-1.0, 2.0), (0.5, 0.75)]).unwrap();
        let r = rule(6);
        let (num, den) = integrate_weighted(&f, &e("1"), &b, &r, true).unwrap();
        let plain = integrate(&f, &b, &r, true).unwrap();
        assert_eq!(num, plain);
        assert!((den.value - b.volume()).abs() < 1e-14);
    }

    #[test]
    fn weighted_polynomial() {
        let unit = Hyperbox::unit(1).unwrap();
        let (num, den) =
            integrate_weighted(&e("x1^2"), &e("x1*(1 - x1)"), &unit, &rule(16), true).unwrap();
        assert!((den.value - 1.0 / 6.0).abs() < 1e-15);
        assert!((num.value - 1.0 / 20.0).abs() < 1e-15);
        assert!((num.value / den.value - 0.3).abs() < 1e-14);
    }

    #[test]
    fn symmetric_weight_centres_affine_functions() {
        let unit = Hyperbox::unit(2).unwrap();
        let p = e("x1*(1 - x1) * (1 + x2*(1 - x2))");
        let (num, den) = integrate_weighted(&e("x1 + x2"), &p, &unit, &rule(8), false).unwrap();
        assert!((num.value / den.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn weight_integral_must_be_positive() {
        let unit = Hyperbox::unit(1).unwrap();
        assert!(matches!(
            integrate_weighted(&e("x1"), &e("0"), &unit, &rule(4), false),
            Err(Error::NonPositiveWeightIntegral(_))
        ));
        assert!(matches!(
            integrate_weighted(&e("x1"), &e("x1 - 0.5"), &unit, &rule(4), false),
            Err(Error::Eval(EvalError::NegativeWeight { .. }))
        ));
    }

    #[test]
    fn symmetry_examples() {
        let unit = Hyperbox::unit(1).unwrap();
        assert!(!check_symmetry(&e("1"), &unit, 1000, 1e-9, 0)
            .unwrap()
            .is_falsified());
        assert!(!check_symmetry(&e("x1*(1 - x1)"), &unit, 1000, 1e-9, 0)
            .unwrap()
            .is_falsified());
        let v = check_symmetry(&e("x1"), &unit, 1000, 1e-9, 0).unwrap();
        assert!(v.is_falsified());
        assert_eq!(v.witness.unwrap().kind, ViolationKind::Asymmetry);
        let v = check_symmetry(&e("-1"), &unit, 10, 1e-9, 0).unwrap();
        assert_eq!(v.witness.unwrap().kind, ViolationKind::NonPositive);
    }

    #[test]
    fn symmetry_is_checked_on_every_axis() {
        let b = Hyperbox::from_bounds(&[(0.0, 1.0), (2.0, 4.0)]).unwrap();
        let sym = e("(1 + x1*(1 - x1)) * (1 + (x2 - 3)^2)");
        assert!(!check_symmetry(&sym, &b, 2000, 1e-9, 1)
            .unwrap()
            .is_falsified());
        let skew = e("(1 + x1*(1 - x1)) * x2");
        let v = check_symmetry(&skew, &b, 2000, 1e-9, 1).unwrap();
        assert_eq!(v.witness.unwrap().axis, Some(1));
    }
}
