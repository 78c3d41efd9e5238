//! Hypercuboid geometry: points of R^n under the product order, boxes
//! `[a, b]`, their `2^n` corners, componentwise interpolation and the
//! product weights that attach a corner to an interpolation parameter.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest dimension for which corners are enumerated (2^24 corners).
pub const MAX_CORNER_DIM: usize = 24;

/// A point of R^n with finite coordinates, n >= 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some((index, &value)) = coords.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Self::new(coords)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

impl AsRef<[f64]> for Vector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// `x <= y` in the product order. Incomparable pairs are `false` both ways.
pub fn product_order_leq(x: &Vector, y: &Vector) -> Result<bool> {
    check_dims(x.dim(), y.dim())?;
    Ok(x.0.iter().zip(&y.0).all(|(a, b)| a <= b))
}

/// Selects one corner of an n-dimensional box: bit `i` clear picks the lower
/// endpoint on axis `i`, bit `i` set picks the upper one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CornerMask {
    bits: u32,
    dim: usize,
}

impl CornerMask {
    pub fn new(dim: usize, bits: u32) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyVector);
        }
        if dim > 32 {
            return Err(Error::DimensionLimit { dim, limit: 32 });
        }
        if dim < 32 && bits >> dim != 0 {
            return Err(Error::InvalidArgument(format!(
                "mask bits {bits:#b} do not fit in dimension {dim}"
            )));
        }
        Ok(Self { bits, dim })
    }

    pub fn from_bools(upper: &[bool]) -> Result<Self> {
        let bits = upper
            .iter()
            .enumerate()
            .fold(0u32, |acc, (i, &b)| if b { acc | (1 << i) } else { acc });
        Self::new(upper.len(), bits)
    }

    pub fn dim(self) -> usize {
        self.dim
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    /// Whether axis `axis` (0-based) takes its upper endpoint.
    pub fn is_upper(self, axis: usize) -> bool {
        (self.bits >> axis) & 1 == 1
    }

    /// All `2^dim` masks in ascending bit order (axis 0 least significant).
    pub fn all(dim: usize) -> Result<impl ExactSizeIterator<Item = CornerMask>> {
        if dim == 0 {
            return Err(Error::EmptyVector);
        }
        if dim > MAX_CORNER_DIM {
            return Err(Error::DimensionLimit {
                dim,
                limit: MAX_CORNER_DIM,
            });
        }
        Ok((0..1u32 << dim).map(move |bits| CornerMask { bits, dim }))
    }

    /// Picks `x_i` on clear bits and `y_i` on set bits.
    pub fn select(self, x: &[f64], y: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(y)
            .enumerate()
            .map(|(i, (&xi, &yi))| if self.is_upper(i) { yi } else { xi })
            .collect()
    }
}

/// Per-coordinate interpolation parameter `t` in `[0, 1]^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightParam(Vec<f64>);

impl WeightParam {
    pub fn new(t: Vec<f64>) -> Result<Self> {
        if t.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some((index, &value)) = t
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::WeightOutOfRange { index, value });
        }
        Ok(Self(t))
    }

    /// The same `t` on every axis.
    pub fn uniform(dim: usize, t: f64) -> Result<Self> {
        Self::new(vec![t; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for WeightParam {
    type Error = Error;

    fn try_from(t: Vec<f64>) -> Result<Self> {
        Self::new(t)
    }
}

impl From<WeightParam> for Vec<f64> {
    fn from(t: WeightParam) -> Self {
        t.0
    }
}

/// Componentwise `t_i x_i + (1 - t_i) y_i`, clamped to `[min(x_i, y_i), max(x_i, y_i)]`
/// so rounding never leaves the segment.
pub fn interpolate(t: &WeightParam, x: &Vector, y: &Vector) -> Result<Vector> {
    check_dims(t.dim(), x.dim())?;
    check_dims(t.dim(), y.dim())?;
    Ok(Vector(interpolate_raw(&t.0, &x.0, &y.0)))
}

pub(crate) fn interpolate_raw(t: &[f64], x: &[f64], y: &[f64]) -> Vec<f64> {
    t.iter()
        .zip(x.iter().zip(y))
        .map(|(&ti, (&xi, &yi))| (ti * xi + (1.0 - ti) * yi).clamp(xi.min(yi), xi.max(yi)))
        .collect()
}

/// Product weight `prod p_i` of a corner, with `p_i = t_i` on a lower
/// endpoint and `1 - t_i` on an upper one.
pub fn corner_weight(t: &WeightParam, mask: CornerMask) -> Result<f64> {
    check_dims(t.dim(), mask.dim())?;
    Ok(corner_weight_raw(&t.0, mask))
}

pub(crate) fn corner_weight_raw(t: &[f64], mask: CornerMask) -> f64 {
    t.iter()
        .enumerate()
        .map(|(i, &ti)| if mask.is_upper(i) { 1.0 - ti } else { ti })
        .product()
}

/// Axis-aligned box `[a, b]` with `a_i < b_i` on every axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperbox {
    lower: Vector,
    upper: Vector,
}

impl Hyperbox {
    pub fn new(lower: Vector, upper: Vector) -> Result<Self> {
        check_dims(lower.dim(), upper.dim())?;
        for (axis, (&lo, &hi)) in lower.0.iter().zip(&upper.0).enumerate() {
            if lo >= hi {
                return Err(Error::DegenerateBox {
                    axis,
                    lower: lo,
                    upper: hi,
                });
            }
        }
        Ok(Self { lower, upper })
    }

    /// Builds a box from `(lo, hi)` pairs, one per axis.
    pub fn from_bounds(bounds: &[(f64, f64)]) -> Result<Self> {
        let lower = Vector::new(bounds.iter().map(|b| b.0).collect())?;
        let upper = Vector::new(bounds.iter().map(|b| b.1).collect())?;
        Self::new(lower, upper)
    }

    /// `[0, 1]^n`.
    pub fn unit(dim: usize) -> Result<Self> {
        Self::from_bounds(&vec![(0.0, 1.0); dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    pub fn lower(&self) -> &Vector {
        &self.lower
    }

    pub fn upper(&self) -> &Vector {
        &self.upper
    }

    pub fn bounds(&self, axis: usize) -> (f64, f64) {
        (self.lower.0[axis], self.upper.0[axis])
    }

    pub fn corner(&self, mask: CornerMask) -> Result<Vector> {
        check_dims(self.dim(), mask.dim())?;
        Ok(Vector(mask.select(&self.lower.0, &self.upper.0)))
    }

    /// All `2^n` corners in mask order.
    pub fn corners(&self) -> Result<impl ExactSizeIterator<Item = (CornerMask, Vector)> + '_> {
        Ok(CornerMask::all(self.dim())?
            .map(move |m| (m, Vector(m.select(&self.lower.0, &self.upper.0)))))
    }

    pub fn midpoint(&self) -> Vector {
        Vector(
            self.lower
                .0
                .iter()
                .zip(&self.upper.0)
                .map(|(a, b)| (a + b) / 2.0)
                .collect(),
        )
    }

    /// `prod (b_i - a_i)`.
    pub fn volume(&self) -> f64 {
        self.lower
            .0
            .iter()
            .zip(&self.upper.0)
            .map(|(a, b)| b - a)
            .product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.0.iter().zip(&self.upper.0))
                .all(|(v, (lo, hi))| lo <= v && v <= hi)
    }

    /// Splits along `axis` at `at`, which must lie strictly inside the axis.
    pub fn split(&self, axis: usize, at: f64) -> Result<(Hyperbox, Hyperbox)> {
        if axis >= self.dim() {
            return Err(Error::InvalidArgument(format!("axis {axis} out of range")));
        }
        let mut left_upper = self.upper.clone();
        left_upper.0[axis] = at;
        let mut right_lower = self.lower.clone();
        right_lower.0[axis] = at;
        Ok((
            Hyperbox::new(self.lower.clone(), left_upper)?,
            Hyperbox::new(right_lower, self.upper.clone())?,
        ))
    }

    /// Uniform sample inside the box.
    pub(crate) fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        self.lower
            .0
            .iter()
            .zip(&self.upper.0)
            .map(|(&lo, &hi)| rng.random_range(lo..=hi))
            .collect()
    }
}

/// Outcome of the randomized n-fold convex set check.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SetVerdict {
    /// `interpolate(t, x, y)` left the set although `x` and `y` are members.
    Falsified {
        x: Vec<f64>,
        y: Vec<f64>,
        t: Vec<f64>,
        point: Vec<f64>,
        trial: usize,
    },
    NotFalsified {
        trials: usize,
    },
}

impl SetVerdict {
    pub fn is_falsified(&self) -> bool {
        matches!(self, SetVerdict::Falsified { .. })
    }
}

const MEMBER_DRAW_BUDGET: usize = 10_000;

fn draw_member<R: Rng, M: Fn(&[f64]) -> bool>(
    membership: &M,
    bounding: &Hyperbox,
    rng: &mut R,
) -> Result<Vec<f64>> {
    for _ in 0..MEMBER_DRAW_BUDGET {
        let x = bounding.sample(rng);
        if membership(&x) {
            return Ok(x);
        }
    }
    Err(Error::Inconclusive(format!(
        "no member of the set found in {MEMBER_DRAW_BUDGET} draws"
    )))
}

/// Randomized check that a set is closed under componentwise interpolation.
///
/// Members are drawn by rejection sampling from `bounding`. Each `t_i` is 0
/// or 1 with probability 1/4 each and uniform otherwise, since violations of
/// n-fold convexity usually show up at extreme per-axis weights. This can
/// only disprove the property.
pub fn is_nfold_convex_set<M>(
    membership: M,
    bounding: &Hyperbox,
    trials: usize,
    rng_seed: u64,
) -> Result<SetVerdict>
where
    M: Fn(&[f64]) -> bool,
{
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    for trial in 0..trials {
        let x = draw_member(&membership, bounding, &mut rng)?;
        let y = draw_member(&membership, bounding, &mut rng)?;
        let t: Vec<f64> = (0..bounding.dim())
            .map(|_| match rng.random_range(0..4u8) {
                0 => 0.0,
                1 => 1.0,
                _ => rng.random_range(0.0..=1.0),
            })
            .collect();
        let point = interpolate_raw(&t, &x, &y);
        if !membership(&point) {
            return Ok(SetVerdict::Falsified {
                x,
                y,
                t,
                point,
                trial,
            });
        }
    }
    Ok(SetVerdict::NotFalsified { trials })
}
