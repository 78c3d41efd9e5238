use std::fmt;

use serde::Serialize;
use thiserror::Error;

use super::{BinOp, Expr, Func};

/// Byte range `start..end` into the parsed source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

impl SourceSpan {
    fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Self { start, end }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseErrorKind {
    Syntax,
    UnknownFunction,
    Arity,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error("{message} at {span}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub span: SourceSpan,
    pub message: String,
}

impl ParseError {
    fn syntax(span: SourceSpan, message: impl Into<String>) -> Self {
        Self {
            kind: ParseErrorKind::Syntax,
            span,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Var(usize),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Var(i) => format!("variable x{i}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, SourceSpan)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let single = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = single {
            out.push((tok, SourceSpan::new(start, start + 1)));
            i += 1;
        } else if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            i = lex_number(bytes, i)?;
            let span = SourceSpan::new(start, i);
            let text = &src[start..i];
            let value: f64 = text
                .parse()
                .map_err(|_| ParseError::syntax(span, format!("malformed number `{text}`")))?;
            if !value.is_finite() {
                return Err(ParseError::syntax(
                    span,
                    format!("number `{text}` overflows"),
                ));
            }
            out.push((Tok::Num(value), span));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let span = SourceSpan::new(start, i);
            out.push((ident_token(&src[start..i], span)?, span));
        } else {
            // step over a whole UTF-8 character so the span stays on a boundary
            let ch = src[start..].chars().next().unwrap_or('?');
            let span = SourceSpan::new(start, start + ch.len_utf8());
            return Err(ParseError::syntax(
                span,
                format!("unexpected character `{ch}`"),
            ));
        }
    }
    Ok(out)
}

fn lex_number(bytes: &[u8], mut i: usize) -> Result<usize, ParseError> {
    let digits = |bytes: &[u8], mut i: usize| {
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        i
    };
    let start = i;
    i = digits(bytes, i);
    if i < bytes.len() && bytes[i] == b'.' {
        let after = digits(bytes, i + 1);
        if after == i + 1 {
            return Err(ParseError::syntax(
                SourceSpan::new(start, i + 1),
                "expected digits after decimal point",
            ));
        }
        i = after;
    }
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        let after = digits(bytes, j);
        if after == j {
            return Err(ParseError::syntax(
                SourceSpan::new(start, j),
                "expected exponent digits",
            ));
        }
        i = after;
    }
    Ok(i)
}

fn ident_token(text: &str, span: SourceSpan) -> Result<Tok, ParseError> {
    if let Some(digits) = text.strip_prefix('x') {
        if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
            if digits.starts_with('0') {
                return Err(ParseError::syntax(
                    span,
                    format!("invalid variable `{text}`: indices start at x1 without leading zeros"),
                ));
            }
            let index = digits.parse().map_err(|_| {
                ParseError::syntax(span, format!("variable index `{text}` too large"))
            })?;
            return Ok(Tok::Var(index));
        }
    }
    Ok(Tok::Ident(text.to_string()))
}

struct Parser<'a> {
    toks: &'a [(Tok, SourceSpan)],
    pos: usize,
    len: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn span(&self) -> SourceSpan {
        self.toks
            .get(self.pos)
            .map(|(_, s)| *s)
            .unwrap_or(SourceSpan::new(self.len, self.len))
    }

    fn bump(&mut self) -> Option<(Tok, SourceSpan)> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok) -> Result<SourceSpan, ParseError> {
        match self.peek() {
            Some(t) if *t == want => Ok(self.bump().unwrap().1),
            Some(t) => Err(ParseError::syntax(
                self.span(),
                format!("expected {}, found {}", want.describe(), t.describe()),
            )),
            None => Err(ParseError::syntax(
                self.span(),
                format!("expected {}, found end of input", want.describe()),
            )),
        }
    }

    // expr := term (("+" | "-") term)*
    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    // term := unary (("*" | "/") unary)*
    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    // unary := "-" unary | power
    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    // power := primary ("^" unary)?   -- right-associative, binds tighter than negation
    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.peek() == Some(&Tok::Caret) {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::binary(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let span = self.span();
        match self.bump() {
            Some((Tok::Num(v), _)) => Ok(Expr::Num(v)),
            Some((Tok::Var(i), _)) => Ok(Expr::Var(i)),
            Some((Tok::LParen, _)) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Some((Tok::Ident(name), name_span)) => self.call(&name, name_span),
            Some((t, _)) => Err(ParseError::syntax(
                span,
                format!(
                    "expected a number, variable, function or `(`, found {}",
                    t.describe()
                ),
            )),
            None => Err(ParseError::syntax(span, "unexpected end of input")),
        }
    }

    fn call(&mut self, name: &str, name_span: SourceSpan) -> Result<Expr, ParseError> {
        let func = Func::from_name(name).ok_or_else(|| ParseError {
            kind: ParseErrorKind::UnknownFunction,
            span: name_span,
            message: format!(
                "unknown function `{name}` (expected one of exp, abs, sqrt, max, min)"
            ),
        })?;
        self.expect(Tok::LParen)?;
        let mut args = vec![self.expr()?];
        while self.peek() == Some(&Tok::Comma) {
            self.bump();
            args.push(self.expr()?);
        }
        let close = self.expect(Tok::RParen)?;
        if args.len() != func.arity() {
            return Err(ParseError {
                kind: ParseErrorKind::Arity,
                span: SourceSpan::new(name_span.start, close.end),
                message: format!(
                    "`{name}` takes {} argument(s), got {}",
                    func.arity(),
                    args.len()
                ),
            });
        }
        Ok(Expr::Call(func, args))
    }
}

pub fn parse(source: &str) -> Result<Expr, ParseError> {
    let toks = lex(source)?;
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        len: source.len(),
    };
    let e = p.expr()?;
    if let Some(t) = p.peek() {
        return Err(ParseError::syntax(
            p.span(),
            format!("unexpected {} after expression", t.describe()),
        ));
    }
    Ok(e)
}
