//! The expression language for φ and g.
//!
//! ```text
//! expr := term (('+' | '-') term)*
//! term := number ['*' term] | atom
//! atom := 'x' '[' index ']' | 'norm' '(' 'x' ')' | 'abs' '(' expr ')'
//!       | 'pow' '(' expr ',' number ')' | '(' expr ')'
//! ```
//!
//! Coordinates are 1-based. Numbers may carry a leading minus sign.

use std::fmt;

use fracmc_core::problem::holder_of;
use fracmc_core::{Function, Shape};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Lit(f64),
    /// 0-based coordinate.
    Coord(usize),
    Norm,
    Abs(Box<Expr>),
    Pow(Box<Expr>, f64),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Scale(f64, Box<Expr>),
}

/// A syntax error; `pos` is a byte offset into `src`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParseError {
    pub src: String,
    pub pos: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.src)?;
        writeln!(f, "{}^", " ".repeat(self.pos))?;
        write!(f, "position {}: {}", self.pos, self.kind)
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("expected {}", .0.join(" or "))]
    Expected(Vec<&'static str>),
    #[error("coordinate x[{index}] out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("fractional power of a possibly negative base; wrap the base in abs(...) or use norm(x)")]
    NegativeBase,
    #[error("negative exponent {0}; powers must be nonnegative")]
    NegativeExponent(f64),
    #[error("number {0} is not finite")]
    NonFinite(String),
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    dim: usize,
}

/// Parses `src` for functions on `R^dim`.
pub fn parse_expression(src: &str, dim: usize) -> Result<Expr, ParseError> {
    let mut p = Parser { src, bytes: src.as_bytes(), pos: 0, dim };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.bytes.len() {
        return Err(p.error(ParseErrorKind::Expected(vec!["'+'", "'-'", "end of input"])));
    }
    Ok(e)
}

impl Parser<'_> {
    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError { src: self.src.to_string(), pos: self.pos, kind }
    }

    fn expected(&self, what: &[&'static str]) -> ParseError {
        self.error(ParseErrorKind::Expected(what.to_vec()))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8, what: &'static str) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.expected(&[what]))
        }
    }

    fn starts_number(&mut self) -> bool {
        match self.peek() {
            Some(b'0'..=b'9' | b'.') => true,
            Some(b'-') => matches!(self.bytes.get(self.pos + 1), Some(b'0'..=b'9' | b'.')),
            _ => false,
        }
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        if !self.starts_number() {
            return Err(self.expected(&["number"]));
        }
        let start = self.pos;
        if self.bytes[self.pos] == b'-' {
            self.pos += 1;
        }
        while self.pos < self.bytes.len() && (self.bytes[self.pos].is_ascii_digit() || self.bytes[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < self.bytes.len() && matches!(self.bytes[self.pos], b'e' | b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.bytes.len() && matches!(self.bytes[self.pos], b'+' | b'-') {
                self.pos += 1;
            }
            let digits = self.pos;
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == digits {
                self.pos = save;
            }
        }
        let text = &self.src[start..self.pos];
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            Ok(_) => {
                self.pos = start;
                Err(self.error(ParseErrorKind::NonFinite(text.to_string())))
            }
            Err(_) => {
                self.pos = start;
                Err(self.expected(&["number"]))
            }
        }
    }

    fn ident(&mut self) -> &str {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        &self.src[start..self.pos]
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.peek() == Some(b'-') {
                self.pos += 1;
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        if self.starts_number() {
            let v = self.number()?;
            if self.eat(b'*') {
                return Ok(Expr::Scale(v, Box::new(self.term()?)));
            }
            return Ok(Expr::Lit(v));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        const ATOMS: [&str; 6] = ["number", "x[i]", "norm(x)", "abs(...)", "pow(...)", "'('"];
        if self.eat(b'(') {
            let e = self.expr()?;
            self.expect(b')', "')'")?;
            return Ok(e);
        }
        let start = self.pos;
        let name = self.ident().to_string();
        match name.as_str() {
            "x" => {
                self.expect(b'[', "'['")?;
                self.skip_ws();
                let at = self.pos;
                let digits_start = self.pos;
                while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let index: usize = self.src[digits_start..self.pos].parse().map_err(|_| {
                    self.pos = at;
                    self.expected(&["coordinate index"])
                })?;
                if index == 0 || index > self.dim {
                    self.pos = at;
                    return Err(self.error(ParseErrorKind::IndexOutOfRange { index, dim: self.dim }));
                }
                self.expect(b']', "']'")?;
                Ok(Expr::Coord(index - 1))
            }
            "norm" => {
                self.expect(b'(', "'('")?;
                let at = self.pos;
                if self.ident() != "x" {
                    self.pos = at;
                    self.skip_ws();
                    return Err(self.expected(&["x"]));
                }
                self.expect(b')', "')'")?;
                Ok(Expr::Norm)
            }
            "abs" => {
                self.expect(b'(', "'('")?;
                let e = self.expr()?;
                self.expect(b')', "')'")?;
                Ok(Expr::Abs(Box::new(e)))
            }
            "pow" => {
                self.expect(b'(', "'('")?;
                let base = self.expr()?;
                self.expect(b',', "','")?;
                self.skip_ws();
                let at = self.pos;
                let p = self.number()?;
                if p < 0.0 {
                    self.pos = at;
                    return Err(self.error(ParseErrorKind::NegativeExponent(p)));
                }
                if p.fract() != 0.0 && !base.is_nonnegative() {
                    self.pos = at;
                    return Err(self.error(ParseErrorKind::NegativeBase));
                }
                self.expect(b')', "')'")?;
                Ok(Expr::Pow(Box::new(base), p))
            }
            _ => {
                self.pos = start;
                self.skip_ws();
                Err(self.expected(&ATOMS))
            }
        }
    }
}

impl Expr {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Lit(v) => *v,
            Expr::Coord(i) => x[*i],
            Expr::Norm => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Expr::Abs(e) => e.eval(x).abs(),
            Expr::Pow(e, p) => e.eval(x).powf(*p),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Scale(k, e) => k * e.eval(x),
        }
    }

    /// Sign analysis: true when the value is ≥ 0 for every input.
    pub fn is_nonnegative(&self) -> bool {
        match self {
            Expr::Lit(v) => *v >= 0.0,
            Expr::Coord(_) => false,
            Expr::Norm | Expr::Abs(_) => true,
            Expr::Pow(e, p) => e.is_nonnegative() || (p.fract() == 0.0 && (p / 2.0).fract() == 0.0),
            Expr::Add(a, b) => a.is_nonnegative() && b.is_nonnegative(),
            Expr::Sub(a, b) => a.is_nonnegative() && matches!(**b, Expr::Lit(v) if v <= 0.0),
            Expr::Scale(k, e) => *k >= 0.0 && e.is_nonnegative(),
        }
    }

    fn depends_on_x(&self) -> bool {
        match self {
            Expr::Lit(_) => false,
            Expr::Coord(_) | Expr::Norm => true,
            Expr::Abs(e) | Expr::Pow(e, _) | Expr::Scale(_, e) => e.depends_on_x(),
            Expr::Add(a, b) | Expr::Sub(a, b) => a.depends_on_x() || b.depends_on_x(),
        }
    }

    /// Closed-form shape: constants and `κ pow(norm(x), η)`.
    pub fn shape(&self) -> Shape {
        if !self.depends_on_x() {
            return Shape::Const(self.eval(&[]));
        }
        match self {
            Expr::Norm => Shape::Power { kappa: 1.0, eta: 1.0 },
            Expr::Pow(e, eta) if **e == Expr::Norm => Shape::Power { kappa: 1.0, eta: *eta },
            Expr::Scale(k, e) => match e.shape() {
                Shape::Power { kappa, eta } => Shape::Power { kappa: k * kappa, eta },
                _ => Shape::Opaque,
            },
            _ => Shape::Opaque,
        }
    }

    /// The callback handed to the estimator.
    pub fn to_function(&self) -> Function {
        match self.shape() {
            Shape::Const(k) => Function::constant(k),
            Shape::Power { kappa, eta } => Function::power(kappa, eta),
            Shape::Opaque => {
                let e = self.clone();
                Function::opaque(move |x: &[f64]| e.eval(x))
            }
        }
    }
}

/// Hölder pair and growth exponent read off a catalog shape.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metadata {
    pub gamma: f64,
    pub lip: f64,
    pub growth: f64,
}

/// `None` means unknown: the caller must declare γ, L and the growth.
pub fn derive_metadata(expr: &Expr, beta: f64) -> Option<Metadata> {
    let shape = expr.shape();
    let growth = match shape {
        Shape::Const(_) => 0.0,
        Shape::Power { kappa, eta } => {
            if kappa == 0.0 {
                0.0
            } else {
                eta
            }
        }
        Shape::Opaque => return None,
    };
    let (gamma, lip) = holder_of(shape, beta)?;
    Some(Metadata { gamma, lip, growth })
}

fn needs_parens(e: &Expr) -> bool {
    matches!(e, Expr::Add(..) | Expr::Sub(..))
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Lit(v) => write!(f, "{v:?}"),
            Expr::Coord(i) => write!(f, "x[{}]", i + 1),
            Expr::Norm => f.write_str("norm(x)"),
            Expr::Abs(e) => write!(f, "abs({e})"),
            Expr::Pow(e, p) => write!(f, "pow({e}, {p:?})"),
            Expr::Add(a, b) => {
                if needs_parens(b) {
                    write!(f, "{a} + ({b})")
                } else {
                    write!(f, "{a} + {b}")
                }
            }
            Expr::Sub(a, b) => {
                if needs_parens(b) {
                    write!(f, "{a} - ({b})")
                } else {
                    write!(f, "{a} - {b}")
                }
            }
            Expr::Scale(k, e) => {
                if needs_parens(e) {
                    write!(f, "{k:?}*({e})")
                } else {
                    write!(f, "{k:?}*{e}")
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn catalog_examples() {
        let e = parse_expression("pow(norm(x),0.5)", 1).unwrap();
        assert_eq!(e.eval(&[4.0]), 2.0);
        assert_eq!(e.shape(), Shape::Power { kappa: 1.0, eta: 0.5 });
        assert_eq!(parse_expression("1", 1).unwrap(), Expr::Lit(1.0));
        let m = derive_metadata(&e, 1.5).unwrap();
        assert_eq!((m.gamma, m.lip, m.growth), (0.5, 1.0, 0.5));
        let c = derive_metadata(&parse_expression("1", 1).unwrap(), 1.5).unwrap();
        assert_eq!((c.lip, c.growth), (0.0, 0.0));
        assert!(derive_metadata(&parse_expression("x[1]+pow(norm(x),0.5)", 1).unwrap(), 1.5).is_none());
        let s = parse_expression("2.5*pow(norm(x), 0.25)", 3).unwrap();
        assert_eq!(s.shape(), Shape::Power { kappa: 2.5, eta: 0.25 });
        assert_eq!(parse_expression("2 + 3", 1).unwrap().shape(), Shape::Const(5.0));
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_expression("pow(x[3],2)", 2).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::IndexOutOfRange { index: 3, dim: 2 });
        assert_eq!(err.pos, 6);
        let err = parse_expression("pow(x[1], 0.5)", 1).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::NegativeBase);
        assert_eq!(err.pos, 10);
        assert!(parse_expression("pow(abs(x[1]), 0.5)", 1).is_ok());
        assert!(parse_expression("pow(x[1], 2)", 1).is_ok());
        assert!(parse_expression("pow(pow(x[1], 2), 0.5)", 1).is_ok());
        let err = parse_expression("1 + ", 1).unwrap_err();
        assert_eq!(err.pos, 4);
        assert!(matches!(err.kind, ParseErrorKind::Expected(_)));
        let err = parse_expression("sin(x[1])", 1).unwrap_err();
        assert_eq!(err.pos, 0);
        assert!(parse_expression("1 2", 1).is_err());
        assert!(parse_expression("pow(norm(x), -1)", 1).is_err());
        assert!(parse_expression("1e999", 1).is_err());
        assert!(parse_expression("", 1).is_err());
        let shown = err.to_string();
        assert!(shown.contains("position 0"), "{shown}");
    }

    #[test]
    fn precedence_and_minus() {
        let e = parse_expression("3 - 2*x[1] - -1", 1).unwrap();
        assert_eq!(e.eval(&[5.0]), 3.0 - 10.0 + 1.0);
        let e = parse_expression("2*(x[1] + 1)", 1).unwrap();
        assert_eq!(e.eval(&[1.0]), 4.0);
        let e = parse_expression("1e-3*abs(x[2])", 2).unwrap();
        assert_eq!(e.eval(&[0.0, -2000.0]), 2.0);
    }

    fn leaf() -> impl Strategy<Value = Expr> {
        prop_oneof![(-1e6..1e6f64).prop_map(Expr::Lit), (0..3usize).prop_map(Expr::Coord), Just(Expr::Norm),]
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        leaf().prop_recursive(5, 40, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| Expr::Abs(Box::new(e))),
                (inner.clone(), 0u8..4).prop_map(|(e, p)| Expr::Pow(Box::new(e), p as f64)),
                (inner.clone(), 0.0..3.0f64).prop_map(|(e, p)| Expr::Pow(Box::new(Expr::Abs(Box::new(e))), p)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
                (-1e3..1e3f64, inner).prop_map(|(k, e)| Expr::Scale(k, Box::new(e))),
            ]
        })
    }

    /// Evaluation that reports any non-finite intermediate as `None`.
    fn eval_finite(e: &Expr, x: &[f64]) -> Option<f64> {
        let v = match e {
            Expr::Abs(a) => eval_finite(a, x)?.abs(),
            Expr::Pow(a, p) => eval_finite(a, x)?.powf(*p),
            Expr::Add(a, b) => eval_finite(a, x)? + eval_finite(b, x)?,
            Expr::Sub(a, b) => eval_finite(a, x)? - eval_finite(b, x)?,
            Expr::Scale(k, a) => k * eval_finite(a, x)?,
            leaf => leaf.eval(x),
        };
        v.is_finite().then_some(v)
    }

    proptest! {
        #[test]
        fn display_round_trips(e in arb_expr()) {
            let shown = e.to_string();
            let back = parse_expression(&shown, 3).unwrap();
            prop_assert_eq!(&back, &e);
            prop_assert_eq!(back.to_string(), shown);
        }

        #[test]
        fn evaluation_is_total_on_finite_inputs(e in arb_expr(), x in proptest::collection::vec(-1e3..1e3f64, 3)) {
            // NaN can only come from overflow, never from a negative base under a fractional power
            let v = e.eval(&x);
            if v.is_nan() {
                prop_assert!(eval_finite(&e, &x).is_none());
            }
            let parsed = parse_expression(&e.to_string(), 3).unwrap();
            prop_assert_eq!(parsed.eval(&x).to_bits(), v.to_bits());
        }
    }
}
