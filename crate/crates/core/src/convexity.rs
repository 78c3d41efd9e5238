//! Randomized falsifiers for coordinatewise (n-fold) and joint convexity,
//! plus the two gap functions the bounds are built from: the corner-weighted
//! defining inequality and the one-axis corner majorization.
//!
//! The falsifiers can only disprove. `NotFalsified` means no violation larger
//! than the tolerance was seen in the sampled trials, nothing more.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::domain::{
    corner_weight_raw, interpolate_raw, CornerMask, Hyperbox, Vector, WeightParam,
};
use crate::error::{Error, Result};
use crate::function::{eval_finite, ScalarFn};
use crate::sum::pairwise_sum;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Relative tolerance on `x1 + x2 = y1 + y2` for the majorization gap.
pub const SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Falsified,
    NotFalsified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// `f(mix) > lambda f(x) + (1 - lambda) f(y)`.
    Convexity,
    /// `p(x) != p(x reflected on one axis)`.
    Asymmetry,
    /// `p(x) <= 0`.
    NonPositive,
}

/// A concrete violation. For convexity, `lhs = f(mix)` and
/// `rhs = lambda f(x) + (1 - lambda) f(y)` with `lambda = t[0]`; for the
/// symmetry check, `lhs = p(x)` and `rhs = p(y)` with `y` the reflection of
/// `x` on `axis`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub kind: ViolationKind,
    pub trial: usize,
    pub axis: Option<usize>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub violation: f64,
}

/// Result of a randomized check. `witness` is present iff the status is
/// `Falsified`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub status: Status,
    pub witness: Option<Witness>,
    pub trials_run: usize,
    pub tolerance: f64,
}

impl Verdict {
    fn passed(trials: usize, tolerance: f64) -> Self {
        Self {
            status: Status::NotFalsified,
            witness: None,
            trials_run: trials,
            tolerance,
        }
    }

    fn failed(witness: Witness, tolerance: f64) -> Self {
        Self {
            status: Status::Falsified,
            trials_run: witness.trial + 1,
            witness: Some(witness),
            tolerance,
        }
    }

    pub fn is_falsified(&self) -> bool {
        self.status == Status::Falsified
    }

    pub fn describe(&self) -> String {
        match &self.witness {
            None => format!("not falsified in {} trials", self.trials_run),
            Some(w) => {
                let what = match w.kind {
                    ViolationKind::Convexity => "convexity violated",
                    ViolationKind::Asymmetry => "asymmetric",
                    ViolationKind::NonPositive => "non-positive",
                };
                format!(
                    "{what} at trial {} (x = {:?}, violation {:e})",
                    w.trial, w.x, w.violation
                )
            }
        }
    }
}

fn check_trials(trials: usize, tolerance: f64) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if tolerance.is_nan() || tolerance < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be non-negative, got {tolerance}"
        )));
    }
    Ok(())
}

/// Interpolation weight for a trial: midpoints, the endpoints and uniform
/// draws in a fixed rotation.
fn sample_lambda<R: Rng>(trial: usize, rng: &mut R) -> f64 {
    match trial % 8 {
        0 | 4 => 0.5,
        1 => 0.0,
        5 => 1.0,
        _ => rng.random_range(0.0..=1.0),
    }
}

/// `RHS - LHS` of the corner-weighted convexity inequality
///
/// `f(t x + (1 - t) y) <= sum_c (prod_i p_i) f(c)`
///
/// where `c` ranges over the `2^n` mixed points with `c_i in {x_i, y_i}` and
/// `p_i` is `t_i` when `c_i = x_i`, `1 - t_i` when `c_i = y_i`. The weight
/// product sits inside the sum since it depends on the corner.
pub fn defining_inequality_gap<F: ScalarFn + ?Sized>(
    f: &F,
    x: &Vector,
    y: &Vector,
    t: &WeightParam,
) -> Result<f64> {
    let n = t.dim();
    for d in [x.dim(), y.dim()] {
        if d != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: d,
            });
        }
    }
    let (x, y, t) = (x.as_slice(), y.as_slice(), t.as_slice());
    let lhs = eval_finite(f, &interpolate_raw(t, x, y))?;
    let terms = CornerMask::all(n)?
        .map(|m| Ok(corner_weight_raw(t, m) * eval_finite(f, &m.select(x, y))?))
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_sum(&terms) - lhs)
}

/// Falsifies convexity along single coordinates: each trial fixes an axis,
/// draws the remaining coordinates and two values on that axis, and tests
/// the one-dimensional convexity inequality.
pub fn is_nfold_convex_fn<F: ScalarFn + ?Sized>(
    f: &F,
    domain: &Hyperbox,
    trials: usize,
    tolerance: f64,
    rng_seed: u64,
) -> Result<Verdict> {
    check_trials(trials, tolerance)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let n = domain.dim();
    for trial in 0..trials {
        let axis = rng.random_range(0..n);
        let base = domain.sample(&mut rng);
        let (lo, hi) = domain.bounds(axis);
        let u = rng.random_range(lo..=hi);
        let v = rng.random_range(lo..=hi);
        let lambda = sample_lambda(trial, &mut rng);

        let mut x = base.clone();
        x[axis] = u;
        let mut y = base;
        y[axis] = v;
        let t = vec![lambda; n];
        if let Some(w) = convexity_violation(f, x, y, t, Some(axis), trial, tolerance)? {
            return Ok(Verdict::failed(w, tolerance));
        }
    }
    Ok(Verdict::passed(trials, tolerance))
}

/// Falsifies joint convexity: one scalar weight shared by all coordinates.
pub fn is_convex_fn<F: ScalarFn + ?Sized>(
    f: &F,
    domain: &Hyperbox,
    trials: usize,
    tolerance: f64,
    rng_seed: u64,
) -> Result<Verdict> {
    check_trials(trials, tolerance)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    for trial in 0..trials {
        let x = domain.sample(&mut rng);
        let y = domain.sample(&mut rng);
        let lambda = sample_lambda(trial, &mut rng);
        let t = vec![lambda; domain.dim()];
        if let Some(w) = convexity_violation(f, x, y, t, None, trial, tolerance)? {
            return Ok(Verdict::failed(w, tolerance));
        }
    }
    Ok(Verdict::passed(trials, tolerance))
}

fn convexity_violation<F: ScalarFn + ?Sized>(
    f: &F,
    x: Vec<f64>,
    y: Vec<f64>,
    t: Vec<f64>,
    axis: Option<usize>,
    trial: usize,
    tolerance: f64,
) -> Result<Option<Witness>> {
    let lambda = t[0];
    let mix = interpolate_raw(&t, &x, &y);
    let lhs = eval_finite(f, &mix)?;
    let rhs = lambda * eval_finite(f, &x)? + (1.0 - lambda) * eval_finite(f, &y)?;
    let violation = lhs - rhs;
    if violation > tolerance {
        Ok(Some(Witness {
            kind: ViolationKind::Convexity,
            trial,
            axis,
            x,
            y,
            t,
            lhs,
            rhs,
            violation,
        }))
    } else {
        Ok(None)
    }
}

/// `[f(y1) + f(y2)] - [f(x1) + f(x2)]` along `axis` (0-based), with the other
/// coordinates taken from `z`. Requires `y1 <= x1 <= x2 <= y2` and
/// `x1 + x2 = y1 + y2` up to [`SUM_TOLERANCE`] relative.
pub fn lemma_corner_majorization_gap<F: ScalarFn + ?Sized>(
    f: &F,
    z: &Vector,
    axis: usize,
    x1: f64,
    x2: f64,
    y1: f64,
    y2: f64,
) -> Result<f64> {
    if axis >= z.dim() {
        return Err(Error::InvalidArgument(format!(
            "axis {axis} out of range for dimension {}",
            z.dim()
        )));
    }
    if !(y1 <= x1 && x1 <= x2 && x2 <= y2) {
        return Err(Error::Precondition(format!(
            "expected y1 <= x1 <= x2 <= y2, got y1={y1}, x1={x1}, x2={x2}, y2={y2}"
        )));
    }
    let scale = [x1, x2, y1, y2].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if ((x1 + x2) - (y1 + y2)).abs() > SUM_TOLERANCE * scale {
        return Err(Error::Precondition(format!(
            "x1 + x2 = {} differs from y1 + y2 = {}",
            x1 + x2,
            y1 + y2
        )));
    }
    let mut p = z.as_slice().to_vec();
    let mut at = |v: f64| -> Result<f64> {
        p[axis] = v;
        Ok(eval_finite(f, &p)?)
    };
    let outer = at(y1)? + at(y2)?;
    let inner = at(x1)? + at(x2)?;
    Ok(outer - inner)
}

/// Builds an admissible inner pair for `y1 <= y2`: `x1` sits a fraction `s`
/// of the way from `y1` to the midpoint and `x2` mirrors it.
pub fn admissible_pair(y1: f64, y2: f64, s: f64) -> (f64, f64) {
    let mid = (y1 + y2) / 2.0;
    let x1 = (y1 + s.clamp(0.0, 1.0) * (mid - y1)).clamp(y1, mid);
    let x2 = (y1 + y2 - x1).clamp(x1, y2);
    (x1, x2)
}
