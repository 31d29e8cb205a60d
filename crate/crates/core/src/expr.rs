//! Expression mini-language for chart components and warping functions.
//!
//! Grammar (standard precedence, `^` binds tightest, then unary minus, then
//! `* /`, then `+ -`; `+ - * /` associate left, `^` right):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' power)?
//! atom   := number | ident | ident '(' expr ')' | '(' expr ')'
//! ```
//!
//! Exponents must fold to a numeric constant at parse time. The canonical
//! printer round-trips: `parse(print(e)) == e`.

use crate::error::{GeomError, Result};

/// Binary operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Built-in scalar functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "tan" => Some(Func::Tan),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }
}

/// Expression AST. Parameters are stored by name and resolved against a
/// parameter list when a chart is built.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Literal(f64),
    Param(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn lit(v: f64) -> Expr {
        Expr::Literal(v)
    }

    pub fn param(name: &str) -> Expr {
        Expr::Param(name.to_string())
    }

    pub fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }

    pub fn add(self, rhs: Expr) -> Expr {
        Expr::Binary(BinOp::Add, Box::new(self), Box::new(rhs))
    }

    pub fn sub(self, rhs: Expr) -> Expr {
        Expr::Binary(BinOp::Sub, Box::new(self), Box::new(rhs))
    }

    pub fn mul(self, rhs: Expr) -> Expr {
        Expr::Binary(BinOp::Mul, Box::new(self), Box::new(rhs))
    }

    pub fn div(self, rhs: Expr) -> Expr {
        Expr::Binary(BinOp::Div, Box::new(self), Box::new(rhs))
    }

    pub fn pow(self, exponent: f64) -> Expr {
        Expr::Binary(BinOp::Pow, Box::new(self), Box::new(Expr::Literal(exponent)))
    }

    pub fn call(f: Func, arg: Expr) -> Expr {
        Expr::Call(f, Box::new(arg))
    }

    /// All parameter names referenced by the expression, in first-use order.
    pub fn identifiers(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_identifiers(&mut out);
        out
    }

    fn collect_identifiers<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Literal(_) => {}
            Expr::Param(name) => {
                if !out.contains(&name.as_str()) {
                    out.push(name);
                }
            }
            Expr::Neg(inner) => inner.collect_identifiers(out),
            Expr::Binary(_, a, b) => {
                a.collect_identifiers(out);
                b.collect_identifiers(out);
            }
            Expr::Call(_, arg) => arg.collect_identifiers(out),
        }
    }

    /// Evaluate with parameters bound by position in `names`.
    pub fn eval(&self, names: &[String], point: &[f64]) -> Result<f64> {
        let v = self.eval_inner(names, point)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(GeomError::DomainError {
                detail: format!("expression evaluated to {v}"),
            })
        }
    }

    fn eval_inner(&self, names: &[String], point: &[f64]) -> Result<f64> {
        match self {
            Expr::Literal(v) => Ok(*v),
            Expr::Param(name) => {
                let idx = names
                    .iter()
                    .position(|n| n == name)
                    .ok_or_else(|| GeomError::UnknownIdentifier { name: name.clone() })?;
                Ok(point[idx])
            }
            Expr::Neg(inner) => Ok(-inner.eval_inner(names, point)?),
            Expr::Binary(op, a, b) => {
                let x = a.eval_inner(names, point)?;
                let y = b.eval_inner(names, point)?;
                match op {
                    BinOp::Add => Ok(x + y),
                    BinOp::Sub => Ok(x - y),
                    BinOp::Mul => Ok(x * y),
                    BinOp::Div => {
                        if y == 0.0 {
                            Err(GeomError::DomainError {
                                detail: "division by zero".into(),
                            })
                        } else {
                            Ok(x / y)
                        }
                    }
                    BinOp::Pow => pow_checked(x, y),
                }
            }
            Expr::Call(f, arg) => {
                let x = arg.eval_inner(names, point)?;
                match f {
                    Func::Sin => Ok(x.sin()),
                    Func::Cos => Ok(x.cos()),
                    Func::Tan => {
                        let t = x.tan();
                        if t.is_finite() {
                            Ok(t)
                        } else {
                            Err(GeomError::DomainError {
                                detail: "tan at a pole".into(),
                            })
                        }
                    }
                    Func::Exp => Ok(x.exp()),
                    Func::Log => {
                        if x > 0.0 {
                            Ok(x.ln())
                        } else {
                            Err(GeomError::DomainError {
                                detail: format!("log of non-positive value {x}"),
                            })
                        }
                    }
                    Func::Sqrt => {
                        if x > 0.0 {
                            Ok(x.sqrt())
                        } else {
                            Err(GeomError::DomainError {
                                detail: format!("sqrt of non-positive value {x}"),
                            })
                        }
                    }
                }
            }
        }
    }

    /// Fold to a constant when the expression contains no parameters.
    pub fn const_value(&self) -> Option<f64> {
        self.eval(&[], &[]).ok()
    }

    /// Canonical printer; inserts only the parentheses precedence requires.
    pub fn print(&self) -> String {
        let mut s = String::new();
        self.print_into(&mut s, 0);
        s
    }

    // prec levels: 0 = top, 1 = additive, 2 = multiplicative, 3 = unary, 4 = power atom
    fn print_into(&self, out: &mut String, parent: u8) {
        match self {
            Expr::Literal(v) => {
                if *v < 0.0 {
                    // keep literals non-negative in printed form so reparsing
                    // yields Neg(Literal) == Neg(Literal)
                    out.push_str(&format!("({v})"));
                } else {
                    out.push_str(&format!("{v}"));
                }
            }
            Expr::Param(name) => out.push_str(name),
            Expr::Neg(inner) => {
                let needs = parent >= 4;
                if needs {
                    out.push('(');
                }
                out.push('-');
                inner.print_into(out, 3);
                if needs {
                    out.push(')');
                }
            }
            Expr::Binary(op, a, b) => {
                let (prec, sym) = match op {
                    BinOp::Add => (1, " + "),
                    BinOp::Sub => (1, " - "),
                    BinOp::Mul => (2, " * "),
                    BinOp::Div => (2, " / "),
                    BinOp::Pow => (4, "^"),
                };
                let needs = parent > prec;
                if needs {
                    out.push('(');
                }
                // `^` parenthesizes a non-atomic base so that a chained base
                // like (a^2)^3 does not reparse right-associatively; for the
                // left-associative operators the right operand goes one level
                // up to force parens in a - (b - c), a / (b / c).
                let (lhs_parent, rhs_parent) = if *op == BinOp::Pow {
                    (prec + 1, prec)
                } else {
                    (prec, prec + 1)
                };
                a.print_into(out, lhs_parent);
                out.push_str(sym);
                b.print_into(out, rhs_parent);
                if needs {
                    out.push(')');
                }
            }
            Expr::Call(f, arg) => {
                out.push_str(f.name());
                out.push('(');
                arg.print_into(out, 0);
                out.push(')');
            }
        }
    }
}

fn pow_checked(base: f64, exponent: f64) -> Result<f64> {
    if exponent.fract() == 0.0 {
        if base == 0.0 && exponent < 0.0 {
            return Err(GeomError::DomainError {
                detail: "zero raised to a negative power".into(),
            });
        }
        Ok(base.powi(exponent as i32))
    } else if base > 0.0 {
        Ok(base.powf(exponent))
    } else {
        Err(GeomError::DomainError {
            detail: format!("non-positive base {base} with fractional exponent"),
        })
    }
}

/// Parse failure, reported with the byte offset of the offending token.
#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokenize(src: &'a str) -> std::result::Result<Vec<(Token, usize)>, ParseError> {
        let mut lx = Lexer {
            src: src.as_bytes(),
            pos: 0,
        };
        let mut out = Vec::new();
        while let Some((tok, at)) = lx.next_token()? {
            out.push((tok, at));
        }
        Ok(out)
    }

    fn next_token(&mut self) -> std::result::Result<Option<(Token, usize)>, ParseError> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        let at = self.pos;
        let c = self.src[self.pos];
        let tok = match c {
            b'+' => Token::Plus,
            b'-' => Token::Minus,
            b'*' => Token::Star,
            b'/' => Token::Slash,
            b'^' => Token::Caret,
            b'(' => Token::LParen,
            b')' => Token::RParen,
            b'0'..=b'9' | b'.' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.')
                {
                    self.pos += 1;
                }
                // exponent part like 1e-5
                if self.pos < self.src.len()
                    && (self.src[self.pos] == b'e' || self.src[self.pos] == b'E')
                {
                    let mut probe = self.pos + 1;
                    if probe < self.src.len() && (self.src[probe] == b'+' || self.src[probe] == b'-')
                    {
                        probe += 1;
                    }
                    if probe < self.src.len() && self.src[probe].is_ascii_digit() {
                        self.pos = probe;
                        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                            self.pos += 1;
                        }
                    }
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
                    offset: start,
                    message: format!("malformed number `{text}`"),
                })?;
                return Ok(Some((Token::Number(value), at)));
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                return Ok(Some((Token::Ident(text.to_string()), at)));
            }
            other => {
                return Err(ParseError::Syntax {
                    offset: at,
                    message: format!("unexpected character `{}`", other as char),
                })
            }
        };
        self.pos += 1;
        Ok(Some((tok, at)))
    }
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map(|(_, a)| *a).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Token, what: &str) -> std::result::Result<(), ParseError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(ParseError::Syntax {
                offset: self.offset(),
                message: format!("expected {what}"),
            })
        }
    }

    fn parse_expr(&mut self) -> std::result::Result<Expr, ParseError> {
        let mut lhs = self.parse_term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    let rhs = self.parse_term()?;
                    lhs = lhs.add(rhs);
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    let rhs = self.parse_term()?;
                    lhs = lhs.sub(rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_term(&mut self) -> std::result::Result<Expr, ParseError> {
        let mut lhs = self.parse_unary()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    let rhs = self.parse_unary()?;
                    lhs = lhs.mul(rhs);
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    let rhs = self.parse_unary()?;
                    lhs = lhs.div(rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_unary(&mut self) -> std::result::Result<Expr, ParseError> {
        if self.peek() == Some(&Token::Minus) {
            self.pos += 1;
            Ok(self.parse_unary()?.neg())
        } else {
            self.parse_power()
        }
    }

    fn parse_power(&mut self) -> std::result::Result<Expr, ParseError> {
        let base = self.parse_atom()?;
        if self.peek() == Some(&Token::Caret) {
            self.pos += 1;
            let at = self.offset();
            // right-associative; allow a leading sign, then fold to a constant
            let exponent = if self.peek() == Some(&Token::Minus) {
                self.pos += 1;
                self.parse_power()?.neg()
            } else {
                self.parse_power()?
            };
            let value = exponent.const_value().ok_or(ParseError::Syntax {
                offset: at,
                message: "exponent must be a numeric constant".into(),
            })?;
            Ok(Expr::Binary(
                BinOp::Pow,
                Box::new(base),
                Box::new(Expr::Literal(value)),
            ))
        } else {
            Ok(base)
        }
    }

    fn parse_atom(&mut self) -> std::result::Result<Expr, ParseError> {
        let at = self.offset();
        match self.bump() {
            Some(Token::Number(v)) => Ok(Expr::Literal(v)),
            Some(Token::Ident(name)) => {
                if self.peek() == Some(&Token::LParen) {
                    let func = Func::from_name(&name)
                        .ok_or(ParseError::UnknownFunction { name, offset: at })?;
                    self.pos += 1;
                    let arg = self.parse_expr()?;
                    self.expect(Token::RParen, "`)` closing the call")?;
                    Ok(Expr::Call(func, Box::new(arg)))
                } else {
                    Ok(Expr::Param(name))
                }
            }
            Some(Token::LParen) => {
                let inner = self.parse_expr()?;
                self.expect(Token::RParen, "`)`")?;
                Ok(inner)
            }
            _ => Err(ParseError::Syntax {
                offset: at,
                message: "expected a number, identifier, or `(`".into(),
            }),
        }
    }
}

/// Parse one expression; whitespace-insensitive.
pub fn parse_expression(text: &str) -> std::result::Result<Expr, ParseError> {
    let tokens = Lexer::tokenize(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: text.len(),
    };
    let expr = parser.parse_expr()?;
    if parser.pos != parser.tokens.len() {
        return Err(ParseError::Syntax {
            offset: parser.offset(),
            message: "trailing input".into(),
        });
    }
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(text: &str) -> Expr {
        parse_expression(text).unwrap()
    }

    #[test]
    fn grammar_example() {
        assert_eq!(
            p("u*cos(z)"),
            Expr::param("u").mul(Expr::call(Func::Cos, Expr::param("z")))
        );
    }

    #[test]
    fn precedence() {
        let names = vec![];
        assert_eq!(p("1+2*3").eval(&names, &[]).unwrap(), 7.0);
        assert_eq!(p("2*3^2").eval(&names, &[]).unwrap(), 18.0);
        assert_eq!(p("-2^2").eval(&names, &[]).unwrap(), -4.0);
        assert_eq!(p("2^3^2").eval(&names, &[]).unwrap(), 512.0);
        assert_eq!(p("8/4/2").eval(&names, &[]).unwrap(), 1.0);
        assert_eq!(p("8-4-2").eval(&names, &[]).unwrap(), 2.0);
    }

    #[test]
    fn sqrt_arithmetic() {
        let names = vec!["u".to_string(), "v".to_string()];
        let got = p("sqrt(1+u^2+v^2)").eval(&names, &[1.0, 1.0]).unwrap();
        assert!((got - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn whitespace_insensitive() {
        assert_eq!(p("u * cos( z )"), p("u*cos(z)"));
    }

    #[test]
    fn syntax_error_reports_offset() {
        match parse_expression("u + ") {
            Err(ParseError::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("expected syntax error, got {other:?}"),
        }
        match parse_expression("u + $") {
            Err(ParseError::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_function() {
        match parse_expression("sinh(u)") {
            Err(ParseError::UnknownFunction { name, offset }) => {
                assert_eq!(name, "sinh");
                assert_eq!(offset, 0);
            }
            other => panic!("expected unknown function, got {other:?}"),
        }
    }

    #[test]
    fn non_constant_exponent_rejected() {
        assert!(matches!(
            parse_expression("u^v"),
            Err(ParseError::Syntax { .. })
        ));
        // constant-foldable exponents are fine
        assert_eq!(p("u^(1/2)"), Expr::param("u").pow(0.5));
        assert_eq!(p("u^-2"), Expr::param("u").pow(-2.0));
    }

    #[test]
    fn unknown_identifier_at_eval() {
        let names = vec!["u".to_string()];
        assert!(matches!(
            p("u + q").eval(&names, &[1.0]),
            Err(GeomError::UnknownIdentifier { .. })
        ));
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            p("1/0").eval(&[], &[]),
            Err(GeomError::DomainError { .. })
        ));
        assert!(matches!(
            p("log(-1)").eval(&[], &[]),
            Err(GeomError::DomainError { .. })
        ));
        assert!(matches!(
            p("sqrt(-2)").eval(&[], &[]),
            Err(GeomError::DomainError { .. })
        ));
    }

    #[test]
    fn hostile_inputs() {
        assert_eq!(p("((u))"), Expr::param("u"));
        assert_eq!(p("--u"), Expr::param("u").neg().neg());
        assert_eq!(p("1e-5").const_value(), Some(1e-5));
        assert_eq!(p("2E3").const_value(), Some(2000.0));
        // `e` alone is an identifier, and a dangling exponent marker stays
        // part of the next token stream
        assert_eq!(p("e"), Expr::param("e"));
        assert!(matches!(p("2e"), Expr::Binary(..)) || p("2e") == Expr::lit(2.0).mul(Expr::param("e")));
        let deep = format!("{}u{}", "(".repeat(64), ")".repeat(64));
        assert_eq!(p(&deep), Expr::param("u"));
        assert!(parse_expression("(u").is_err());
        assert!(parse_expression(")u(").is_err());
        assert!(parse_expression("").is_err());
        assert!(parse_expression("sin u").is_err() || p("sin u") != Expr::param("sin"));
    }

    #[test]
    fn printer_round_trip_corpus() {
        let corpus = [
            "u*cos(z)",
            "sqrt(1+u^2+v^2)",
            "-u^2 + 3*v",
            "(u+v)*(u-v)",
            "u/(v+1) - exp(-u)",
            "tan(u) / (1 + tan(u)^2)",
            "u - (v - w)",
            "u / (v / w)",
            "-(u+v)",
            "2^-2 * u",
            "log(u) + sin(cos(v))",
        ];
        for text in corpus {
            let first = p(text);
            let printed = first.print();
            let second =
                parse_expression(&printed).unwrap_or_else(|e| panic!("reparse `{printed}`: {e}"));
            assert_eq!(first, second, "round trip failed for `{text}` -> `{printed}`");
        }
    }
}
