//! The expression language in which geometry components are written.
//!
//! Grammar, loosest to tightest binding:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := primary ('^' unary)?          // right-associative
//! primary:= number | ident | ident '(' expr ')' | '(' expr ')'
//! ```
//!
//! so `-x^2` parses as `-(x^2)`. Identifiers are `[A-Za-z_][A-Za-z0-9_]*`,
//! numbers are decimal with optional exponent, whitespace is insignificant.
//! There are no conditionals: every component function must be smooth on the
//! guarded region of its chart.

use crate::error::{GeomError, Result};
use crate::jet::Jet;
use std::collections::HashMap;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Sinh,
    Cosh,
    Tanh,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            _ => return None,
        })
    }

    fn name(&self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
        }
    }
}

/// Parsed expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarExpr {
    Num(f64),
    Var(String),
    Neg(Box<ScalarExpr>),
    Bin(BinOp, Box<ScalarExpr>, Box<ScalarExpr>),
    Call(Func, Box<ScalarExpr>),
}

struct Parser<'a> {
    input: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(input: &'a str) -> Self {
        Parser { input, bytes: input.as_bytes(), pos: 0 }
    }

    fn err(&self, msg: impl Into<String>) -> GeomError {
        GeomError::Parse { offset: self.pos, msg: msg.into() }
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

    fn expr(&mut self) -> Result<ScalarExpr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = ScalarExpr::Bin(BinOp::Add, Box::new(lhs), Box::new(rhs));
                }
                Some(b'-') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = ScalarExpr::Bin(BinOp::Sub, Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<ScalarExpr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    lhs = ScalarExpr::Bin(BinOp::Mul, Box::new(lhs), Box::new(rhs));
                }
                Some(b'/') => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    lhs = ScalarExpr::Bin(BinOp::Div, Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<ScalarExpr> {
        if self.eat(b'-') {
            let inner = self.unary()?;
            Ok(ScalarExpr::Neg(Box::new(inner)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<ScalarExpr> {
        let base = self.primary()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            // Right-associative; the exponent may carry a unary minus.
            let exponent = self.unary()?;
            Ok(ScalarExpr::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)))
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<ScalarExpr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident_or_call(),
            Some(c) => Err(self.err(format!(
                "expected number, identifier or `(`, found `{}`",
                c as char
            ))),
            None => Err(self.err("expected number, identifier or `(`, found end of input")),
        }
    }

    fn number(&mut self) -> Result<ScalarExpr> {
        let start = self.pos;
        while self.pos < self.bytes.len() && (self.bytes[self.pos].is_ascii_digit() || self.bytes[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < self.bytes.len() && (self.bytes[self.pos] == b'e' || self.bytes[self.pos] == b'E') {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.bytes.len() && (self.bytes[self.pos] == b'+' || self.bytes[self.pos] == b'-') {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                // `e` belonged to something else (e.g. an identifier follows).
                self.pos = mark;
            }
        }
        let text = &self.input[start..self.pos];
        text.parse::<f64>()
            .map(ScalarExpr::Num)
            .map_err(|_| GeomError::Parse { offset: start, msg: format!("invalid number `{text}`") })
    }

    fn ident_or_call(&mut self) -> Result<ScalarExpr> {
        let start = self.pos;
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = &self.input[start..self.pos];
        if self.peek() == Some(b'(') {
            let func = Func::from_name(name).ok_or_else(|| GeomError::UnknownFunction(name.to_string()))?;
            self.pos += 1;
            let arg = self.expr()?;
            if !self.eat(b')') {
                return Err(self.err("expected `)` after function argument"));
            }
            Ok(ScalarExpr::Call(func, Box::new(arg)))
        } else {
            Ok(ScalarExpr::Var(name.to_string()))
        }
    }
}

/// Parse a textual expression into a tree.
pub fn parse(text: &str) -> Result<ScalarExpr> {
    let mut p = Parser::new(text);
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

impl ScalarExpr {
    /// All variable names in first-occurrence order, deduplicated.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            ScalarExpr::Num(_) => {}
            ScalarExpr::Var(name) => {
                if !out.iter().any(|v| v == name) {
                    out.push(name.clone());
                }
            }
            ScalarExpr::Neg(inner) => inner.collect_vars(out),
            ScalarExpr::Bin(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            ScalarExpr::Call(_, arg) => arg.collect_vars(out),
        }
    }

    /// Evaluate over the jet ring; every free variable must be bound.
    pub fn eval_jet(&self, env: &HashMap<String, Jet>) -> Result<Jet> {
        match self {
            ScalarExpr::Num(v) => {
                let any = env
                    .values()
                    .next()
                    .ok_or_else(|| GeomError::InvalidInput("constant expression needs a nonempty environment to fix the jet space".into()))?;
                Ok(Jet::constant(any.space(), *v))
            }
            ScalarExpr::Var(name) => env
                .get(name)
                .cloned()
                .ok_or_else(|| GeomError::UnboundVariable(name.clone())),
            ScalarExpr::Neg(inner) => Ok(inner.eval_jet(env)?.neg()),
            ScalarExpr::Bin(op, a, b) => {
                let ja = a.eval_jet(env)?;
                match op {
                    BinOp::Add => ja.add(&b.eval_jet(env)?),
                    BinOp::Sub => ja.sub(&b.eval_jet(env)?),
                    BinOp::Mul => ja.mul(&b.eval_jet(env)?),
                    BinOp::Div => ja.div(&b.eval_jet(env)?),
                    BinOp::Pow => {
                        // A constant exponent keeps negative bases legal.
                        if let Some(p) = b.const_value() {
                            ja.pow_real(p)
                        } else {
                            let jb = b.eval_jet(env)?;
                            ja.ln()?.mul(&jb)?.exp()
                        }
                    }
                }
            }
            ScalarExpr::Call(func, arg) => {
                let j = arg.eval_jet(env)?;
                match func {
                    Func::Sin => j.sin(),
                    Func::Cos => j.cos(),
                    Func::Tan => j.tan(),
                    Func::Exp => j.exp(),
                    Func::Ln => j.ln(),
                    Func::Sqrt => j.sqrt(),
                    Func::Abs => j.abs(),
                    Func::Sinh => j.sinh(),
                    Func::Cosh => j.cosh(),
                    Func::Tanh => j.tanh(),
                }
            }
        }
    }

    /// Plain floating-point evaluation. Used for guards and for oracles that
    /// must stay independent of the jet kernel.
    pub fn eval_f64(&self, env: &HashMap<String, f64>) -> Result<f64> {
        match self {
            ScalarExpr::Num(v) => Ok(*v),
            ScalarExpr::Var(name) => env
                .get(name)
                .copied()
                .ok_or_else(|| GeomError::UnboundVariable(name.clone())),
            ScalarExpr::Neg(inner) => Ok(-inner.eval_f64(env)?),
            ScalarExpr::Bin(op, a, b) => {
                let x = a.eval_f64(env)?;
                let y = b.eval_f64(env)?;
                Ok(match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => x / y,
                    BinOp::Pow => x.powf(y),
                })
            }
            ScalarExpr::Call(func, arg) => {
                let x = arg.eval_f64(env)?;
                Ok(match func {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Tan => x.tan(),
                    Func::Exp => x.exp(),
                    Func::Ln => {
                        if x <= 0.0 {
                            return Err(GeomError::Domain {
                                func: "ln".into(),
                                detail: format!("argument {x} is not positive"),
                            });
                        }
                        x.ln()
                    }
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(GeomError::Domain {
                                func: "sqrt".into(),
                                detail: format!("argument {x} is negative"),
                            });
                        }
                        x.sqrt()
                    }
                    Func::Abs => x.abs(),
                    Func::Sinh => x.sinh(),
                    Func::Cosh => x.cosh(),
                    Func::Tanh => x.tanh(),
                })
            }
        }
    }

    /// Value of a constant subexpression, if it contains no variables.
    pub fn const_value(&self) -> Option<f64> {
        match self {
            ScalarExpr::Num(v) => Some(*v),
            ScalarExpr::Var(_) => None,
            ScalarExpr::Neg(inner) => inner.const_value().map(|v| -v),
            ScalarExpr::Bin(op, a, b) => {
                let x = a.const_value()?;
                let y = b.const_value()?;
                Some(match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => x / y,
                    BinOp::Pow => x.powf(y),
                })
            }
            ScalarExpr::Call(_, _) => None,
        }
    }

    pub fn num(v: f64) -> ScalarExpr {
        ScalarExpr::Num(v)
    }

    pub fn var(name: &str) -> ScalarExpr {
        ScalarExpr::Var(name.to_string())
    }
}

impl fmt::Display for ScalarExpr {
    /// Fully parenthesized form; reparsing yields a structurally identical tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarExpr::Num(v) => {
                if *v < 0.0 || v.fract() != 0.0 || v.abs() >= 1e15 {
                    write!(f, "({v})")
                } else {
                    write!(f, "{v}")
                }
            }
            ScalarExpr::Var(name) => write!(f, "{name}"),
            ScalarExpr::Neg(inner) => write!(f, "(-{inner})"),
            ScalarExpr::Bin(op, a, b) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a} {sym} {b})")
            }
            ScalarExpr::Call(func, arg) => write!(f, "{}({arg})", func.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::{Jet, JetSpace};
    use approx::assert_relative_eq;

    fn env2(x: f64, y: f64) -> HashMap<String, Jet> {
        let s = JetSpace::get(2, 4);
        let mut env = HashMap::new();
        env.insert("x".to_string(), Jet::variable(&s, 0, x).unwrap());
        env.insert("y".to_string(), Jet::variable(&s, 1, y).unwrap());
        env
    }

    #[test]
    fn parses_nested_negation_and_division() {
        let e = parse("-(1 - 2/r)").unwrap();
        let expected = ScalarExpr::Neg(Box::new(ScalarExpr::Bin(
            BinOp::Sub,
            Box::new(ScalarExpr::Num(1.0)),
            Box::new(ScalarExpr::Bin(
                BinOp::Div,
                Box::new(ScalarExpr::Num(2.0)),
                Box::new(ScalarExpr::Var("r".into())),
            )),
        )));
        assert_eq!(e, expected);
    }

    #[test]
    fn power_binds_tighter_than_unary_minus() {
        let e = parse("-x^2").unwrap();
        let expected = ScalarExpr::Neg(Box::new(ScalarExpr::Bin(
            BinOp::Pow,
            Box::new(ScalarExpr::Var("x".into())),
            Box::new(ScalarExpr::Num(2.0)),
        )));
        assert_eq!(e, expected);
    }

    #[test]
    fn function_call_power() {
        let e = parse("sin(theta)^2").unwrap();
        let expected = ScalarExpr::Bin(
            BinOp::Pow,
            Box::new(ScalarExpr::Call(Func::Sin, Box::new(ScalarExpr::Var("theta".into())))),
            Box::new(ScalarExpr::Num(2.0)),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn incomplete_input_reports_offset() {
        match parse("x +") {
            Err(GeomError::Parse { offset, .. }) => assert_eq!(offset, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_function_is_rejected_by_name() {
        match parse("foo(x)") {
            Err(GeomError::UnknownFunction(name)) => assert_eq!(name, "foo"),
            other => panic!("expected unknown function, got {other:?}"),
        }
    }

    #[test]
    fn eval_jet_matches_by_hand() {
        let e = parse("x^2 + y").unwrap();
        let v = e.eval_jet(&env2(3.0, 4.0)).unwrap();
        assert_relative_eq!(v.value(), 13.0, epsilon = 1e-14);
        assert_relative_eq!(v.d(0), 6.0, epsilon = 1e-14);
        assert_relative_eq!(v.d(1), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn exp_of_zero_product_is_constant_one() {
        let e = parse("exp(0*x)").unwrap();
        let v = e.eval_jet(&env2(5.0, 0.0)).unwrap();
        assert_relative_eq!(v.value(), 1.0, epsilon = 1e-15);
        assert!(v.coeffs()[1..].iter().all(|c| c.abs() < 1e-15));
    }

    #[test]
    fn ln_domain_error_names_function() {
        let e = parse("ln(r - 2)").unwrap();
        let s = JetSpace::get(1, 4);
        let mut env = HashMap::new();
        env.insert("r".to_string(), Jet::variable(&s, 0, 2.0).unwrap());
        match e.eval_jet(&env) {
            Err(GeomError::Domain { func, .. }) => assert_eq!(func, "ln"),
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn unbound_variable_named() {
        let e = parse("x + z").unwrap();
        match e.eval_jet(&env2(0.0, 0.0)) {
            Err(GeomError::UnboundVariable(name)) => assert_eq!(name, "z"),
            other => panic!("expected unbound variable, got {other:?}"),
        }
    }

    #[test]
    fn free_vars_in_first_occurrence_order() {
        assert_eq!(parse("x + y*x").unwrap().free_vars(), vec!["x", "y"]);
        assert!(parse("3.5").unwrap().free_vars().is_empty());
        assert_eq!(
            parse("sin(phi) + f_0_1").unwrap().free_vars(),
            vec!["phi", "f_0_1"]
        );
    }

    #[test]
    fn display_round_trips() {
        for text in [
            "-(1 - 2/r)",
            "sin(theta)^2",
            "-x^2",
            "x^-2",
            "1.5e-3 * x / (y + 2)",
            "sqrt(abs(x)) + tanh(y)",
            "x^(y + 1)",
        ] {
            let e = parse(text).unwrap();
            let printed = e.to_string();
            let reparsed = parse(&printed).unwrap();
            assert_eq!(e, reparsed, "round trip failed for `{text}` -> `{printed}`");
        }
    }

    #[test]
    fn constant_eval_matches_f64() {
        let e = parse("2^10 + 3.5*2 - 1/4").unwrap();
        let s = JetSpace::get(1, 2);
        let mut env = HashMap::new();
        env.insert("dummy".to_string(), Jet::variable(&s, 0, 0.0).unwrap());
        let v = e.eval_jet(&env).unwrap();
        assert_eq!(v.value(), 1024.0 + 7.0 - 0.25);
    }

    #[test]
    fn integer_pow_of_negative_base_via_caret() {
        let e = parse("(-x)^3").unwrap();
        let v = e.eval_jet(&env2(2.0, 0.0)).unwrap();
        assert_relative_eq!(v.value(), -8.0, epsilon = 1e-13);
    }
}
