//! Command-line front end: argument model, command dispatch and the JSON /
//! CSV report documents. The `hhcube` binary is a thin wrapper around
//! [`run`].

pub mod args;
pub mod corpus;
pub mod report;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bounds::{
    fejer_sandwich, hh_sandwich, jensen_bound, BoundsReport, Direction, JensenBound, JensenInstance,
};
use crate::convexity::{
    is_convex_fn, is_nfold_convex_fn, Verdict, ViolationKind, DEFAULT_TOLERANCE,
};
use crate::domain::Hyperbox;
use crate::error::{Error, Result};
use crate::expr::{parse, Expr, SourceSpan};
use crate::function::{Negated, ScalarFn};
use crate::matrix::{matrix_hh_sandwich, MatrixInterval};
use crate::quadrature::{QuadratureRule, DEFAULT_NODES};

pub use corpus::{
    builtin_corpus, run_corpus, run_corpus_entries, ConvexityClass, CorpusCheck, CorpusEntry,
    CorpusOptions, CorpusSummary,
};
pub use report::SCHEMA_VERSION;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    CheckConvexity,
    Sandwich,
    Fejer,
    Jensen,
    MatrixSandwich,
    Corpus,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CheckConvexity => "check-convexity",
            Command::Sandwich => "sandwich",
            Command::Fejer => "fejer",
            Command::Jensen => "jensen",
            Command::MatrixSandwich => "matrix-sandwich",
            Command::Corpus => "corpus",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Which convexity notion `check-convexity` falsifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ConvexityKind {
    /// Convex in each coordinate separately.
    #[default]
    Coordinatewise,
    /// Jointly convex.
    Joint,
}

/// Everything a single invocation needs. Echoed into the report as
/// `inputs`, except the output path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(rename = "fn")]
    pub function: Option<String>,
    pub weight: Option<String>,
    #[serde(rename = "box")]
    pub box_spec: Option<String>,
    pub matrix_a: Option<String>,
    pub matrix_b: Option<String>,
    pub rows: Option<usize>,
    pub points: Option<String>,
    pub alphas: Option<String>,
    pub concave: bool,
    pub class: ConvexityKind,
    pub quad_nodes: usize,
    pub trials: usize,
    pub tolerance: f64,
    pub seed: u64,
    pub format: Format,
    pub parallel: bool,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            function: None,
            weight: None,
            box_spec: None,
            matrix_a: None,
            matrix_b: None,
            rows: None,
            points: None,
            alphas: None,
            concave: false,
            class: ConvexityKind::default(),
            quad_nodes: DEFAULT_NODES,
            trials: 10_000,
            tolerance: DEFAULT_TOLERANCE,
            seed: 0,
            format: Format::Json,
            parallel: false,
            out: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "--tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidArgument("--trials must be at least 1".into()));
        }
        if self.quad_nodes == 0 {
            return Err(Error::InvalidArgument(
                "--quad-nodes must be at least 1".into(),
            ));
        }
        Ok(())
    }

    fn direction(&self) -> Direction {
        if self.concave {
            Direction::Concave
        } else {
            Direction::Convex
        }
    }
}

/// Command-line arguments of `hhcube`.
#[derive(Debug, Parser)]
#[command(
    name = "hhcube",
    version,
    about = "Midpoint / mean / corner bounds for coordinatewise-convex functions on boxes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Falsify coordinatewise (or joint) convexity of --fn on --box.
    CheckConvexity(CommonArgs),
    /// Midpoint <= mean <= corner-average check of --fn on --box.
    Sandwich(CommonArgs),
    /// Weighted sandwich with a symmetric positive --weight.
    Fejer(CommonArgs),
    /// Discrete Jensen-type bound for --points / --alphas.
    Jensen(CommonArgs),
    /// Sandwich over the matrix interval [--matrix-a, --matrix-b].
    MatrixSandwich(CommonArgs),
    /// Run the built-in regression corpus.
    Corpus(CommonArgs),
}

#[derive(Debug, Clone, clap::Args)]
pub struct CommonArgs {
    /// Function of x1..xn, e.g. "x1^2 + x2^2".
    #[arg(long = "fn", allow_hyphen_values = true)]
    pub function: Option<String>,
    /// Weight function for `fejer`.
    #[arg(long, allow_hyphen_values = true)]
    pub weight: Option<String>,
    /// Box as "lo,hi;lo,hi;...".
    #[arg(long = "box", allow_hyphen_values = true)]
    pub box_spec: Option<String>,
    /// Lower matrix, row-major comma-separated entries.
    #[arg(long, allow_hyphen_values = true)]
    pub matrix_a: Option<String>,
    /// Upper matrix, row-major comma-separated entries.
    #[arg(long, allow_hyphen_values = true)]
    pub matrix_b: Option<String>,
    /// Matrix size n for n x n matrices.
    #[arg(long)]
    pub rows: Option<usize>,
    /// Jensen points per coordinate: "x11,x12;x21,x22,x23".
    #[arg(long, allow_hyphen_values = true)]
    pub points: Option<String>,
    /// Jensen weights, same shape as --points.
    #[arg(long, allow_hyphen_values = true)]
    pub alphas: Option<String>,
    /// Check the reversed (concave) direction.
    #[arg(long)]
    pub concave: bool,
    #[arg(long, value_enum, default_value_t = ConvexityKind::Coordinatewise)]
    pub class: ConvexityKind,
    #[arg(long, default_value_t = DEFAULT_NODES)]
    pub quad_nodes: usize,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output path, or "-" for standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run corpus entries in parallel (same report).
    #[arg(long)]
    pub parallel: bool,
}

impl From<Cli> for RunConfig {
    fn from(cli: Cli) -> Self {
        let (command, a) = match cli.command {
            CliCommand::CheckConvexity(a) => (Command::CheckConvexity, a),
            CliCommand::Sandwich(a) => (Command::Sandwich, a),
            CliCommand::Fejer(a) => (Command::Fejer, a),
            CliCommand::Jensen(a) => (Command::Jensen, a),
            CliCommand::MatrixSandwich(a) => (Command::MatrixSandwich, a),
            CliCommand::Corpus(a) => (Command::Corpus, a),
        };
        RunConfig {
            command,
            function: a.function,
            weight: a.weight,
            box_spec: a.box_spec,
            matrix_a: a.matrix_a,
            matrix_b: a.matrix_b,
            rows: a.rows,
            points: a.points,
            alphas: a.alphas,
            concave: a.concave,
            class: a.class,
            quad_nodes: a.quad_nodes,
            trials: a.trials,
            tolerance: a.tolerance,
            seed: a.seed,
            format: a.format,
            parallel: a.parallel,
            out: a.out.filter(|p| p.as_os_str() != "-"),
        }
    }
}

/// A convexity-type verdict together with the outcome the check expects.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyCheck {
    pub property: &'static str,
    pub expect_falsified: bool,
    pub passed: bool,
    pub verdict: Verdict,
}

impl PropertyCheck {
    pub fn new(property: &'static str, expect_falsified: bool, verdict: Verdict) -> Self {
        Self {
            property,
            expect_falsified,
            passed: verdict.is_falsified() == expect_falsified,
            verdict,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapStats {
    pub samples: usize,
    pub min_gap: f64,
    pub max_gap: f64,
}

/// One check in a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub check: &'static str,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_class: Option<ConvexityClass>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub properties: Vec<PropertyCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jensen: Option<JensenBound>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gaps: Option<GapStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl CheckResult {
    fn new(name: impl Into<String>, check: &'static str) -> Self {
        Self {
            name: name.into(),
            check,
            passed: false,
            provenance: None,
            expected_class: None,
            properties: Vec::new(),
            bounds: None,
            jensen: None,
            gaps: None,
            reason: None,
        }
    }

    fn csv_row(&self) -> report::CsvRow {
        let mut row = report::CsvRow {
            name: self.name.clone(),
            lower: None,
            mean: None,
            upper: None,
            quad_error: None,
            verified: self.passed,
        };
        if let Some(b) = &self.bounds {
            row.lower = Some(b.lower);
            row.mean = Some(b.mean);
            row.upper = Some(b.upper);
            row.quad_error = Some(b.quad_error);
        } else if let Some(j) = &self.jensen {
            row.lower = Some(j.lhs);
            row.upper = Some(j.rhs);
        }
        row
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorInfo {
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub span: Option<SourceSpan>,
}

impl From<&Error> for ErrorInfo {
    fn from(e: &Error) -> Self {
        let span = match e {
            Error::Parse(p) => Some(p.span),
            _ => None,
        };
        Self {
            message: e.to_string(),
            span,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Serialize)]
struct Report<'a> {
    schema: u32,
    command: &'static str,
    inputs: &'a RunConfig,
    results: &'a [CheckResult],
    #[serde(skip_serializing_if = "Option::is_none")]
    summary: Option<Summary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<ErrorInfo>,
    exit_status: i32,
}

/// Exit status plus the rendered report document.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub exit_status: i32,
    pub report: String,
    pub results: Vec<CheckResult>,
    pub error: Option<ErrorInfo>,
}

/// Runs one command. Exit status is 0 when every check passes, 1 when a
/// check fails (the report carries the witness), 2 on usage or evaluation
/// errors. The report depends only on `config`.
pub fn run(config: &RunConfig) -> RunOutcome {
    let (results, summary, error) = match execute(config) {
        Ok((results, summary)) => (results, summary, None),
        Err(e) => (Vec::new(), None, Some(ErrorInfo::from(&e))),
    };
    let exit_status = if error.is_some() {
        EXIT_ERROR
    } else if results.iter().all(|r| r.passed) {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    };
    let report = match config.format {
        Format::Json => report::to_json(&Report {
            schema: SCHEMA_VERSION,
            command: config.command.name(),
            inputs: config,
            results: &results,
            summary,
            error: error.clone(),
            exit_status,
        }),
        Format::Csv => {
            report::to_csv(&results.iter().map(CheckResult::csv_row).collect::<Vec<_>>())
        }
    };
    RunOutcome {
        exit_status,
        report,
        results,
        error,
    }
}

fn required<'a>(value: &'a Option<String>, flag: &str) -> Result<&'a str> {
    value
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument(format!("{flag} is required for this command")))
}

/// Parses `source` and checks it only references variables up to `dim`.
pub(crate) fn parse_for_dim(source: &str, dim: usize, what: &str) -> Result<Expr> {
    let e = parse(source)?;
    if e.max_var_index() > dim {
        return Err(Error::InvalidArgument(format!(
            "{what} references x{} but the domain has dimension {dim}",
            e.max_var_index()
        )));
    }
    Ok(e)
}

fn execute(config: &RunConfig) -> Result<(Vec<CheckResult>, Option<Summary>)> {
    config.validate()?;
    let rule = QuadratureRule::gauss_legendre(config.quad_nodes)?;
    let name = config.command.name();
    let result = match config.command {
        Command::Corpus => {
            let summary = run_corpus(&CorpusOptions::from(config))?;
            let s = Summary {
                total: summary.total,
                passed: summary.passed,
                failed: summary.failed,
            };
            return Ok((summary.results, Some(s)));
        }
        Command::CheckConvexity => {
            let domain = args::parse_box(required(&config.box_spec, "--box")?)?;
            let f = parse_for_dim(required(&config.function, "--fn")?, domain.dim(), "--fn")?;
            let mut r = CheckResult::new(name, "convexity");
            let verdict = match (config.class, config.concave) {
                (ConvexityKind::Coordinatewise, false) => {
                    is_nfold_convex_fn(&f, &domain, config.trials, config.tolerance, config.seed)?
                }
                (ConvexityKind::Coordinatewise, true) => is_nfold_convex_fn(
                    &Negated(&f),
                    &domain,
                    config.trials,
                    config.tolerance,
                    config.seed,
                )?,
                (ConvexityKind::Joint, false) => {
                    is_convex_fn(&f, &domain, config.trials, config.tolerance, config.seed)?
                }
                (ConvexityKind::Joint, true) => is_convex_fn(
                    &Negated(&f),
                    &domain,
                    config.trials,
                    config.tolerance,
                    config.seed,
                )?,
            };
            let property = match (config.class, config.concave) {
                (ConvexityKind::Coordinatewise, false) => "coordinatewise_convex",
                (ConvexityKind::Coordinatewise, true) => "coordinatewise_concave",
                (ConvexityKind::Joint, false) => "jointly_convex",
                (ConvexityKind::Joint, true) => "jointly_concave",
            };
            let check = PropertyCheck::new(property, false, verdict);
            r.passed = check.passed;
            r.properties.push(check);
            r
        }
        Command::Sandwich => {
            let domain = args::parse_box(required(&config.box_spec, "--box")?)?;
            let f = parse_for_dim(required(&config.function, "--fn")?, domain.dim(), "--fn")?;
            let report = hh_sandwich(&f, &domain, &rule, config.tolerance, config.direction())?;
            bounds_result(name, "sandwich", report)
        }
        Command::Fejer => {
            let domain = args::parse_box(required(&config.box_spec, "--box")?)?;
            let f = parse_for_dim(required(&config.function, "--fn")?, domain.dim(), "--fn")?;
            let p = parse_for_dim(
                required(&config.weight, "--weight")?,
                domain.dim(),
                "--weight",
            )?;
            fejer_result(
                name,
                &f,
                &p,
                &domain,
                &rule,
                config.tolerance,
                config.trials,
                config.seed,
            )?
        }
        Command::Jensen => {
            let points = args::parse_groups(required(&config.points, "--points")?)?;
            let alphas = args::parse_groups(required(&config.alphas, "--alphas")?)?;
            let instance = JensenInstance::new(points, alphas)?;
            let f = parse_for_dim(required(&config.function, "--fn")?, instance.dim(), "--fn")?;
            jensen_result(name, &f, &instance, config.direction(), config.tolerance)?
        }
        Command::MatrixSandwich => {
            let rows = config.rows.ok_or_else(|| {
                Error::InvalidArgument("--rows is required for this command".into())
            })?;
            let a = args::parse_matrix(required(&config.matrix_a, "--matrix-a")?, rows)?;
            let b = args::parse_matrix(required(&config.matrix_b, "--matrix-b")?, rows)?;
            let iv = MatrixInterval::new(a, b)?;
            let f = parse_for_dim(required(&config.function, "--fn")?, rows * rows, "--fn")?;
            let report = matrix_hh_sandwich(&f, &iv, &rule, config.tolerance, config.direction())?;
            bounds_result(name, "matrix_sandwich", report)
        }
    };
    Ok((vec![result], None))
}

pub(crate) fn bounds_result(name: &str, check: &'static str, report: BoundsReport) -> CheckResult {
    let mut r = CheckResult::new(name, check);
    r.passed = report.verified;
    if !report.verified {
        r.reason = Some(match report.direction {
            Direction::Convex => "sandwich violated: expected lower <= mean <= upper".into(),
            Direction::Concave => {
                "reversed sandwich violated: expected lower >= mean >= upper".into()
            }
        });
    }
    r.bounds = Some(report);
    r
}

/// Weighted sandwich; a rejected weight is a failed check, not an error.
#[allow(clippy::too_many_arguments)]
pub(crate) fn fejer_result<F: ScalarFn + ?Sized, P: ScalarFn + ?Sized>(
    name: &str,
    f: &F,
    p: &P,
    domain: &Hyperbox,
    rule: &QuadratureRule,
    tolerance: f64,
    trials: usize,
    seed: u64,
) -> Result<CheckResult> {
    match fejer_sandwich(f, p, domain, rule, tolerance, trials, seed) {
        Ok(report) => Ok(bounds_result(name, "fejer", report)),
        Err(Error::WeightRejected(verdict)) => {
            let mut r = CheckResult::new(name, "fejer");
            let what = match verdict.witness.as_ref().map(|w| w.kind) {
                Some(ViolationKind::NonPositive) => "non-positive",
                _ => "asymmetric",
            };
            r.reason = Some(format!("weight falsified: {what}"));
            r.properties.push(PropertyCheck::new(
                "symmetric_positive_weight",
                false,
                *verdict,
            ));
            Ok(r)
        }
        Err(e) => Err(e),
    }
}

pub(crate) fn jensen_result<F: ScalarFn + ?Sized>(
    name: &str,
    f: &F,
    instance: &JensenInstance,
    direction: Direction,
    tolerance: f64,
) -> Result<CheckResult> {
    let bound = jensen_bound(f, instance)?;
    let mut r = CheckResult::new(name, "jensen");
    r.passed = match direction {
        Direction::Convex => bound.gap >= -tolerance,
        Direction::Concave => bound.gap <= tolerance,
    };
    if !r.passed {
        r.reason = Some("Jensen-type bound violated".into());
    }
    r.jensen = Some(bound);
    Ok(r)
}
