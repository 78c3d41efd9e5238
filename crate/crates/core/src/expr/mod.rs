//! A small expression language for scalar functions of `x1..xn`.
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := primary ("^" unary)?
//! primary := NUMBER | VAR | FUNC "(" expr ("," expr)* ")" | "(" expr ")"
//! VAR     := "x" [1-9][0-9]*
//! FUNC    := "exp" | "abs" | "sqrt" | "max" | "min"
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-x1^2`
//! is `-(x1^2)` and `2^-1` is `0.5`.

mod parse;

use std::fmt;

pub use parse::{parse, ParseError, ParseErrorKind, SourceSpan};

use crate::error::EvalError;
use crate::function::ScalarFn;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Abs,
    Sqrt,
    Max,
    Min,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Func::Exp,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            "max" => Func::Max,
            "min" => Func::Min,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
            Func::Max => "max",
            Func::Min => "min",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Max | Func::Min => 2,
            Func::Exp | Func::Abs | Func::Sqrt => 1,
        }
    }
}

/// Parse tree. Variables are 1-based: `Var(1)` is `x1`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl Expr {
    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// Largest variable index referenced, 0 for a constant expression.
    pub fn max_var_index(&self) -> usize {
        match self {
            Expr::Num(_) => 0,
            Expr::Var(i) => *i,
            Expr::Neg(e) => e.max_var_index(),
            Expr::Binary(_, l, r) => l.max_var_index().max(r.max_var_index()),
            Expr::Call(_, args) => args.iter().map(Expr::max_var_index).max().unwrap_or(0),
        }
    }

    /// Evaluates at `point`, where `x1` is `point[0]`.
    pub fn evaluate(&self, point: &[f64]) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => *point
                .get(i.wrapping_sub(1))
                .ok_or(EvalError::UnboundVariable {
                    index: *i,
                    dim: point.len(),
                })?,
            Expr::Neg(e) => -e.evaluate(point)?,
            Expr::Binary(op, l, r) => {
                let a = l.evaluate(point)?;
                let b = r.evaluate(point)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(EvalError::Domain(format!("division by zero ({a} / 0)")));
                        }
                        a / b
                    }
                    BinOp::Pow => pow(a, b)?,
                }
            }
            Expr::Call(func, args) => {
                let a = args[0].evaluate(point)?;
                match func {
                    Func::Exp => a.exp(),
                    Func::Abs => a.abs(),
                    Func::Sqrt => {
                        if a < 0.0 {
                            return Err(EvalError::Domain(format!("sqrt of negative value {a}")));
                        }
                        a.sqrt()
                    }
                    Func::Max => a.max(args[1].evaluate(point)?),
                    Func::Min => a.min(args[1].evaluate(point)?),
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::Domain(format!("overflow evaluating `{self}`")))
        }
    }
}

fn pow(base: f64, exponent: f64) -> Result<f64, EvalError> {
    if base < 0.0 && exponent.fract() != 0.0 {
        return Err(EvalError::Domain(format!(
            "negative base {base} with non-integer exponent {exponent}"
        )));
    }
    if base == 0.0 && exponent < 0.0 {
        return Err(EvalError::Domain(format!(
            "zero raised to negative power {exponent}"
        )));
    }
    if exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64 {
        Ok(base.powi(exponent as i32))
    } else {
        Ok(base.powf(exponent))
    }
}

impl ScalarFn for Expr {
    fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        self.evaluate(x)
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

/// Fully parenthesized form that reparses to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var(i) => write!(f, "x{i}"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> Expr {
        parse(s).unwrap_or_else(|e| panic!("{s}: {e}"))
    }

    fn var(i: usize) -> Box<Expr> {
        Box::new(Expr::Var(i))
    }

    #[test]
    fn product_of_two_variables() {
        assert_eq!(p("x1*x2"), Expr::Binary(BinOp::Mul, var(1), var(2)));
    }

    #[test]
    fn power_binds_tighter_than_negation() {
        assert_eq!(
            p("-x1^2"),
            Expr::Neg(Box::new(Expr::Binary(
                BinOp::Pow,
                var(1),
                Box::new(Expr::Num(2.0))
            )))
        );
        assert_eq!(p("-x1^2").evaluate(&[3.0]).unwrap(), -9.0);
        assert_eq!(p("2^-1").evaluate(&[]).unwrap(), 0.5);
    }

    #[test]
    fn power_is_right_associative() {
        assert_eq!(p("2^3^2").evaluate(&[]).unwrap(), 512.0);
        assert_eq!(p("(2^3)^2").evaluate(&[]).unwrap(), 64.0);
    }

    #[test]
    fn left_associative_arithmetic() {
        assert_eq!(p("8 - 3 - 2").evaluate(&[]).unwrap(), 3.0);
        assert_eq!(p("8 / 4 / 2").evaluate(&[]).unwrap(), 1.0);
        assert_eq!(p("1 + 2 * 3").evaluate(&[]).unwrap(), 7.0);
        assert_eq!(p("- 2 * 3").evaluate(&[]).unwrap(), -6.0);
    }

    #[test]
    fn binary_max() {
        let e = p("max(x1, 1 - x2)");
        assert_eq!(
            e,
            Expr::Call(
                Func::Max,
                vec![
                    Expr::Var(1),
                    Expr::binary(BinOp::Sub, Expr::Num(1.0), Expr::Var(2))
                ]
            )
        );
        assert_eq!(e.evaluate(&[0.2, 0.5]).unwrap(), 0.5);
    }

    #[test]
    fn numbers() {
        assert_eq!(p("1.5e2").evaluate(&[]).unwrap(), 150.0);
        assert_eq!(p("2E-1").evaluate(&[]).unwrap(), 0.2);
        assert_eq!(p("  42 ").evaluate(&[]).unwrap(), 42.0);
        assert!(parse("1.").is_err());
        assert!(parse("1e").is_err());
        assert!(parse("1e999").is_err());
        assert!(parse("0x1f").is_err());
    }

    #[test]
    fn evaluation_examples() {
        assert_eq!(p("x1*x2").evaluate(&[0.5, 0.5]).unwrap(), 0.25);
        assert_eq!(p("x1^2 + x2^2").evaluate(&[1.0, 1.0]).unwrap(), 2.0);
        assert_eq!(p("exp(x1)").evaluate(&[0.0]).unwrap(), 1.0);
        assert_eq!(
            p("abs(x1) + sqrt(x2) + min(x1, x2)")
                .evaluate(&[-1.0, 4.0])
                .unwrap(),
            2.0
        );
    }

    #[test]
    fn evaluation_errors() {
        assert_eq!(
            p("x3").evaluate(&[1.0, 2.0]),
            Err(EvalError::UnboundVariable { index: 3, dim: 2 })
        );
        assert!(matches!(
            p("1 / x1").evaluate(&[0.0]),
            Err(EvalError::Domain(_))
        ));
        assert!(matches!(
            p("sqrt(x1)").evaluate(&[-1.0]),
            Err(EvalError::Domain(_))
        ));
        assert!(matches!(
            p("x1 ^ 0.5").evaluate(&[-4.0]),
            Err(EvalError::Domain(_))
        ));
        assert!(matches!(
            p("0 ^ -1").evaluate(&[]),
            Err(EvalError::Domain(_))
        ));
        assert!(matches!(
            p("exp(x1)").evaluate(&[1000.0]),
            Err(EvalError::Domain(_))
        ));
        assert_eq!(p("x1 ^ 3").evaluate(&[-2.0]).unwrap(), -8.0);
    }

    #[test]
    fn max_var_index_examples() {
        assert_eq!(p("x1*x3").max_var_index(), 3);
        assert_eq!(p("2 + 2").max_var_index(), 0);
        assert_eq!(p("max(x2, x2)").max_var_index(), 2);
    }

    #[test]
    fn parse_errors_carry_spans() {
        let e = parse("foo(x1)").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownFunction);
        assert_eq!(e.span, SourceSpan { start: 0, end: 3 });

        let e = parse("exp(x1, x2)").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Arity);
        assert_eq!(e.span, SourceSpan { start: 0, end: 11 });

        let e = parse("max(x1)").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Arity);

        let e = parse("x1 +").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Syntax);
        assert_eq!(e.span, SourceSpan { start: 4, end: 4 });

        let e = parse("(x1").unwrap_err();
        assert_eq!(e.span, SourceSpan { start: 3, end: 3 });

        assert_eq!(
            parse("x0").unwrap_err().span,
            SourceSpan { start: 0, end: 2 }
        );
        assert!(parse("x01").is_err());
        assert!(parse("y").is_err());
        assert!(parse("x1 x2").is_err());
        assert!(parse("").is_err());
        assert_eq!(
            parse("x1 $ 2").unwrap_err().span,
            SourceSpan { start: 3, end: 4 }
        );
        assert_eq!(
            parse("x1 é").unwrap_err().span,
            SourceSpan { start: 3, end: 5 }
        );
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0.0..100.0f64).prop_map(Expr::Num),
            (1usize..5).prop_map(Expr::Var),
        ];
        leaf.prop_recursive(4, 32, 3, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
                (
                    prop_oneof![
                        Just(BinOp::Add),
                        Just(BinOp::Sub),
                        Just(BinOp::Mul),
                        Just(BinOp::Div),
                        Just(BinOp::Pow)
                    ],
                    inner.clone(),
                    inner.clone()
                )
                    .prop_map(|(op, l, r)| Expr::binary(op, l, r)),
                inner.clone().prop_map(|e| Expr::Call(Func::Exp, vec![e])),
                inner.clone().prop_map(|e| Expr::Call(Func::Abs, vec![e])),
                (inner.clone(), inner).prop_map(|(a, b)| Expr::Call(Func::Min, vec![a, b])),
            ]
        })
    }

    proptest! {
        #[test]
        fn display_round_trips(e in arb_expr()) {
            let printed = e.to_string();
            let reparsed = parse(&printed).unwrap();
            prop_assert_eq!(reparsed, e);
        }

        #[test]
        fn parse_error_spans_within_input(s in "[x0-9+*/^()a-z., -]{0,24}") {
            if let Err(e) = parse(&s) {
                prop_assert!(e.span.start <= e.span.end);
                prop_assert!(e.span.end <= s.len());
            }
        }

        #[test]
        fn evaluation_is_deterministic(e in arb_expr(), x in prop::collection::vec(-3.0..3.0f64, 4)) {
            let a = e.evaluate(&x);
            let b = e.evaluate(&x);
            prop_assert_eq!(&a, &b);
            if let Ok(v) = a {
                prop_assert!(v.is_finite());
            }
        }
    }
}
