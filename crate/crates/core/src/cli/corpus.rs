//! The built-in regression corpus.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{
    args, bounds_result, fejer_result, jensen_result, parse_for_dim, CheckResult, GapStats,
    PropertyCheck, RunConfig,
};
use crate::bounds::{Direction, JensenInstance};
use crate::convexity::{
    admissible_pair, defining_inequality_gap, is_convex_fn, is_nfold_convex_fn,
    lemma_corner_majorization_gap,
};
use crate::domain::{Hyperbox, Vector, WeightParam};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::function::{Negated, ScalarFn};
use crate::matrix::{matrix_hh_sandwich, matrix_interval_to_box, MatrixInterval};
use crate::quadrature::{QuadratureRule, DEFAULT_NODES};

/// Expected convexity type of a corpus function on its domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvexityClass {
    /// Jointly convex (hence also coordinatewise convex).
    Convex,
    /// Convex in each coordinate but not jointly.
    Coordinatewise,
    /// Concave in each coordinate; bounds are checked reversed.
    Concave,
}

impl ConvexityClass {
    fn direction(self) -> Direction {
        match self {
            ConvexityClass::Concave => Direction::Concave,
            _ => Direction::Convex,
        }
    }
}

/// What an entry verifies beyond its convexity class. Boxes, points and
/// matrices use the CLI argument syntax.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CorpusCheck {
    Sandwich {
        bounds: String,
    },
    Fejer {
        weight: String,
        bounds: String,
    },
    Jensen {
        bounds: String,
        points: String,
        alphas: String,
    },
    Matrix {
        lower: String,
        upper: String,
        rows: usize,
    },
    DefiningGap {
        bounds: String,
        samples: usize,
    },
    Majorization {
        bounds: String,
        samples: usize,
    },
}

impl CorpusCheck {
    fn name(&self) -> &'static str {
        match self {
            CorpusCheck::Sandwich { .. } => "sandwich",
            CorpusCheck::Fejer { .. } => "fejer",
            CorpusCheck::Jensen { .. } => "jensen",
            CorpusCheck::Matrix { .. } => "matrix_sandwich",
            CorpusCheck::DefiningGap { .. } => "defining_gap",
            CorpusCheck::Majorization { .. } => "majorization",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusEntry {
    pub name: String,
    pub function: String,
    pub check: CorpusCheck,
    pub expected: ConvexityClass,
    pub provenance: String,
}

impl CorpusEntry {
    pub fn new(
        name: &str,
        function: &str,
        check: CorpusCheck,
        expected: ConvexityClass,
        provenance: &str,
    ) -> Self {
        Self {
            name: name.into(),
            function: function.into(),
            check,
            expected,
            provenance: provenance.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusOptions {
    pub seed: u64,
    pub tolerance: f64,
    pub quad_nodes: usize,
    pub trials: usize,
    pub parallel: bool,
}

impl Default for CorpusOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            tolerance: crate::convexity::DEFAULT_TOLERANCE,
            quad_nodes: DEFAULT_NODES,
            trials: 10_000,
            parallel: false,
        }
    }
}

impl From<&RunConfig> for CorpusOptions {
    fn from(c: &RunConfig) -> Self {
        Self {
            seed: c.seed,
            tolerance: c.tolerance,
            quad_nodes: c.quad_nodes,
            trials: c.trials,
            parallel: c.parallel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusSummary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub results: Vec<CheckResult>,
}

fn sandwich(bounds: &str) -> CorpusCheck {
    CorpusCheck::Sandwich {
        bounds: bounds.into(),
    }
}

pub fn builtin_corpus() -> Vec<CorpusEntry> {
    use ConvexityClass::*;
    vec![
        CorpusEntry::new(
            "classical-1d-exp",
            "exp(x1)",
            sandwich("-1,2"),
            Convex,
            "one-dimensional midpoint / mean / trapezoid chain",
        ),
        CorpusEntry::new(
            "classical-1d-square",
            "x1^2",
            sandwich("0,1"),
            Convex,
            "one-dimensional midpoint / mean / trapezoid chain",
        ),
        CorpusEntry::new(
            "coordinated-2d-squares",
            "x1^2 + x2^2",
            sandwich("0,1;0,1"),
            Convex,
            "two-dimensional chain for functions convex on the coordinates",
        ),
        CorpusEntry::new(
            "coordinated-2d-mixed",
            "x1^2*x2^2",
            sandwich("-1,1;0,2"),
            Coordinatewise,
            "two-dimensional chain for functions convex on the coordinates",
        ),
        CorpusEntry::new(
            "sharpness-n1",
            "x1",
            sandwich("0,1"),
            Convex,
            "box sandwich, equality for the coordinate product",
        ),
        CorpusEntry::new(
            "sharpness-n2",
            "x1*x2",
            sandwich("0,1;0,1"),
            Coordinatewise,
            "box sandwich, equality for the coordinate product",
        ),
        CorpusEntry::new(
            "sharpness-n3",
            "x1*x2*x3",
            sandwich("0,1;0,1;0,1"),
            Coordinatewise,
            "box sandwich, equality for the coordinate product",
        ),
        CorpusEntry::new(
            "separator-product",
            "x1*x2",
            sandwich("0,2;0,1"),
            Coordinatewise,
            "box sandwich; coordinatewise convex but not jointly convex",
        ),
        CorpusEntry::new(
            "concave-reversal",
            "-(x1^2 + x2^2)",
            sandwich("0,1;0,1"),
            Concave,
            "box sandwich, reversed for concave functions",
        ),
        CorpusEntry::new(
            "concave-reversal-3d",
            "sqrt(x1) + sqrt(x2*x3)",
            sandwich("1,2;1,3;1,2"),
            Concave,
            "box sandwich, reversed for concave functions",
        ),
        CorpusEntry::new(
            "fejer-1d",
            "x1^2",
            CorpusCheck::Fejer {
                weight: "x1*(1 - x1)".into(),
                bounds: "0,1".into(),
            },
            Convex,
            "weighted sandwich with a positive weight symmetric about the midpoint",
        ),
        CorpusEntry::new(
            "fejer-2d",
            "x1^2*x2^2",
            CorpusCheck::Fejer {
                weight: "1 + x1*(1 - x1) + (x2 - 0.5)^2".into(),
                bounds: "0,1;0,1".into(),
            },
            Coordinatewise,
            "weighted sandwich with a weight symmetric about every axis midpoint",
        ),
        CorpusEntry::new(
            "jensen-2d",
            "x1^2 + exp(x2)",
            CorpusCheck::Jensen {
                bounds: "0,1;-1,2".into(),
                points: "0,0.5,1;-1,2".into(),
                alphas: "0.2,0.3,0.5;0.25,0.75".into(),
            },
            Convex,
            "Jensen-type bound with several points per coordinate",
        ),
        CorpusEntry::new(
            "jensen-3d",
            "x1*x2*x3",
            CorpusCheck::Jensen {
                bounds: "0,1;0,2;-1,1".into(),
                points: "0,0.25,1;0,2;-1,0,0.5,1".into(),
                alphas: "0.5,0.25,0.25;0.4,0.6;0.1,0.2,0.3,0.4".into(),
            },
            Coordinatewise,
            "Jensen-type bound with several points per coordinate",
        ),
        CorpusEntry::new(
            "defining-inequality",
            "x1^2*x2 + x2^2",
            CorpusCheck::DefiningGap {
                bounds: "0,1;0,1".into(),
                samples: 2000,
            },
            Coordinatewise,
            "corner-weighted convexity inequality defining coordinatewise convexity",
        ),
        CorpusEntry::new(
            "majorization",
            "exp(x1)*(1 + x2^2)",
            CorpusCheck::Majorization {
                bounds: "0,1;0,1".into(),
                samples: 2000,
            },
            Convex,
            "outer pair dominates inner pair with equal sums along one axis",
        ),
        CorpusEntry::new(
            "matrix-2x2-squares",
            "x1^2 + x2^2 + x3^2 + x4^2",
            CorpusCheck::Matrix {
                lower: "0,0;0,0".into(),
                upper: "1,1;1,1".into(),
                rows: 2,
            },
            Convex,
            "matrix-interval sandwich over row-major flattened entries",
        ),
        CorpusEntry::new(
            "matrix-2x2-product",
            "x1*x2*x3*x4",
            CorpusCheck::Matrix {
                lower: "0,0;0,0".into(),
                upper: "1,1;1,1".into(),
                rows: 2,
            },
            Coordinatewise,
            "matrix-interval sandwich over row-major flattened entries",
        ),
    ]
}

pub fn run_corpus(opts: &CorpusOptions) -> Result<CorpusSummary> {
    run_corpus_entries(&builtin_corpus(), opts)
}

/// Runs `entries` in order. Per-entry failures and errors land in the
/// results; only invalid options or duplicate names are returned as errors.
pub fn run_corpus_entries(entries: &[CorpusEntry], opts: &CorpusOptions) -> Result<CorpusSummary> {
    if !(opts.tolerance > 0.0 && opts.tolerance.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {}",
            opts.tolerance
        )));
    }
    if opts.trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let mut seen = HashSet::new();
    for e in entries {
        if !seen.insert(e.name.as_str()) {
            return Err(Error::InvalidArgument(format!(
                "duplicate corpus entry name `{}`",
                e.name
            )));
        }
    }
    let rule = QuadratureRule::gauss_legendre(opts.quad_nodes)?;
    let run_one = |e: &CorpusEntry| {
        run_entry(e, &rule, opts).unwrap_or_else(|err| {
            let mut r = CheckResult::new(e.name.clone(), e.check.name());
            r.provenance = Some(e.provenance.clone());
            r.expected_class = Some(e.expected);
            r.reason = Some(format!("error: {err}"));
            r
        })
    };
    let results: Vec<CheckResult> = if opts.parallel {
        entries.par_iter().map(run_one).collect()
    } else {
        entries.iter().map(run_one).collect()
    };
    let passed = results.iter().filter(|r| r.passed).count();
    Ok(CorpusSummary {
        total: results.len(),
        passed,
        failed: results.len() - passed,
        results,
    })
}

fn class_checks(
    f: &Expr,
    domain: &Hyperbox,
    class: ConvexityClass,
    opts: &CorpusOptions,
) -> Result<Vec<PropertyCheck>> {
    let (trials, tol, seed) = (opts.trials, opts.tolerance, opts.seed);
    Ok(match class {
        ConvexityClass::Convex => vec![
            PropertyCheck::new(
                "coordinatewise_convex",
                false,
                is_nfold_convex_fn(f, domain, trials, tol, seed)?,
            ),
            PropertyCheck::new(
                "jointly_convex",
                false,
                is_convex_fn(f, domain, trials, tol, seed)?,
            ),
        ],
        ConvexityClass::Coordinatewise => vec![
            PropertyCheck::new(
                "coordinatewise_convex",
                false,
                is_nfold_convex_fn(f, domain, trials, tol, seed)?,
            ),
            PropertyCheck::new(
                "jointly_convex",
                true,
                is_convex_fn(f, domain, trials, tol, seed)?,
            ),
        ],
        ConvexityClass::Concave => vec![PropertyCheck::new(
            "coordinatewise_concave",
            false,
            is_nfold_convex_fn(&Negated(f), domain, trials, tol, seed)?,
        )],
    })
}

fn run_entry(e: &CorpusEntry, rule: &QuadratureRule, opts: &CorpusOptions) -> Result<CheckResult> {
    let direction = e.expected.direction();
    let (domain, mut result, f) = match &e.check {
        CorpusCheck::Sandwich { bounds } => {
            let domain = args::parse_box(bounds)?;
            let f = parse_for_dim(&e.function, domain.dim(), "function")?;
            let report = crate::bounds::hh_sandwich(&f, &domain, rule, opts.tolerance, direction)?;
            (domain, bounds_result(&e.name, "sandwich", report), f)
        }
        CorpusCheck::Fejer { weight, bounds } => {
            let domain = args::parse_box(bounds)?;
            let f = parse_for_dim(&e.function, domain.dim(), "function")?;
            let p = parse_for_dim(weight, domain.dim(), "weight")?;
            let r = fejer_result(
                &e.name,
                &f,
                &p,
                &domain,
                rule,
                opts.tolerance,
                opts.trials,
                opts.seed,
            )?;
            (domain, r, f)
        }
        CorpusCheck::Jensen {
            bounds,
            points,
            alphas,
        } => {
            let domain = args::parse_box(bounds)?;
            let instance =
                JensenInstance::new(args::parse_groups(points)?, args::parse_groups(alphas)?)?;
            if instance.dim() != domain.dim() {
                return Err(Error::DimensionMismatch {
                    expected: domain.dim(),
                    found: instance.dim(),
                });
            }
            let f = parse_for_dim(&e.function, domain.dim(), "function")?;
            let r = jensen_result(&e.name, &f, &instance, direction, opts.tolerance)?;
            (domain, r, f)
        }
        CorpusCheck::Matrix { lower, upper, rows } => {
            let iv = MatrixInterval::new(
                args::parse_matrix(lower, *rows)?,
                args::parse_matrix(upper, *rows)?,
            )?;
            let f = parse_for_dim(&e.function, rows * rows, "function")?;
            let report = matrix_hh_sandwich(&f, &iv, rule, opts.tolerance, direction)?;
            (
                matrix_interval_to_box(&iv),
                bounds_result(&e.name, "matrix_sandwich", report),
                f,
            )
        }
        CorpusCheck::DefiningGap { bounds, samples } => {
            let domain = args::parse_box(bounds)?;
            let f = parse_for_dim(&e.function, domain.dim(), "function")?;
            let stats = match direction {
                Direction::Convex => defining_gaps(&f, &domain, *samples, opts.seed)?,
                Direction::Concave => defining_gaps(&Negated(&f), &domain, *samples, opts.seed)?,
            };
            (
                domain,
                gap_result(&e.name, "defining_gap", stats, opts.tolerance),
                f,
            )
        }
        CorpusCheck::Majorization { bounds, samples } => {
            let domain = args::parse_box(bounds)?;
            let f = parse_for_dim(&e.function, domain.dim(), "function")?;
            let stats = match direction {
                Direction::Convex => majorization_gaps(&f, &domain, *samples, opts.seed)?,
                Direction::Concave => {
                    majorization_gaps(&Negated(&f), &domain, *samples, opts.seed)?
                }
            };
            (
                domain,
                gap_result(&e.name, "majorization", stats, opts.tolerance),
                f,
            )
        }
    };
    let class = class_checks(&f, &domain, e.expected, opts)?;
    if let Some(bad) = class.iter().find(|c| !c.passed) {
        result.passed = false;
        if result.reason.is_none() {
            result.reason = Some(if bad.expect_falsified {
                format!("expected {} to be falsified", bad.property)
            } else {
                format!("{} falsified: {}", bad.property, bad.verdict.describe())
            });
        }
    }
    let mut properties = class;
    properties.append(&mut result.properties);
    result.properties = properties;
    result.provenance = Some(e.provenance.clone());
    result.expected_class = Some(e.expected);
    Ok(result)
}

fn gap_result(name: &str, check: &'static str, stats: GapStats, tolerance: f64) -> CheckResult {
    let mut r = CheckResult::new(name, check);
    r.passed = stats.min_gap >= -tolerance;
    if !r.passed {
        r.reason = Some(format!("negative gap {:e}", stats.min_gap));
    }
    r.gaps = Some(stats);
    r
}

fn collect_stats(gaps: &[f64]) -> GapStats {
    GapStats {
        samples: gaps.len(),
        min_gap: gaps.iter().copied().fold(f64::INFINITY, f64::min),
        max_gap: gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

fn defining_gaps<F: ScalarFn + ?Sized>(
    f: &F,
    domain: &Hyperbox,
    samples: usize,
    seed: u64,
) -> Result<GapStats> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = domain.dim();
    let gaps = (0..samples)
        .map(|_| {
            let x = Vector::new(domain.sample(&mut rng))?;
            let y = Vector::new(domain.sample(&mut rng))?;
            let t = WeightParam::new((0..n).map(|_| rng.random_range(0.0..=1.0)).collect())?;
            defining_inequality_gap(f, &x, &y, &t)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(collect_stats(&gaps))
}

fn majorization_gaps<F: ScalarFn + ?Sized>(
    f: &F,
    domain: &Hyperbox,
    samples: usize,
    seed: u64,
) -> Result<GapStats> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gaps = (0..samples)
        .map(|_| {
            let z = Vector::new(domain.sample(&mut rng))?;
            let axis = rng.random_range(0..domain.dim());
            let (lo, hi) = domain.bounds(axis);
            let a = rng.random_range(lo..=hi);
            let b = rng.random_range(lo..=hi);
            let (y1, y2) = (a.min(b), a.max(b));
            let (x1, x2) = admissible_pair(y1, y2, rng.random_range(0.0..=1.0));
            lemma_corner_majorization_gap(f, &z, axis, x1, x2, y1, y2)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(collect_stats(&gaps))
}
