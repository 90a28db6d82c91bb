//! Complex-valued coefficient expressions and their recursive-descent parser.
//!
//! Grammar (whitespace is ignored):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('-' | '+') unary | factor
//! factor := base ('^' signed-int)?
//! base   := number | 'i' | VAR | '(' expr ')' | ('exp' | 'log') '(' expr ')'
//! ```
//!
//! `VAR` is `z` for equation coefficients and `y` for rational maps. Unary
//! signs are accepted as a convenience on top of the core grammar.

use std::fmt;

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::numerics::Polynomial;
use crate::scalar::{is_finite, log_upper, powi, to_pair, Cplx, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub enum Node<T: Scalar> {
    Num(Cplx<T>),
    Var,
    Neg(Box<Node<T>>),
    Add(Box<Node<T>>, Box<Node<T>>),
    Sub(Box<Node<T>>, Box<Node<T>>),
    Mul(Box<Node<T>>, Box<Node<T>>),
    Div(Box<Node<T>>, Box<Node<T>>),
    Pow(Box<Node<T>>, i32),
    Exp(Box<Node<T>>),
    Log(Box<Node<T>>),
}

/// An expression tree in one complex variable.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffExpr<T: Scalar> {
    root: Node<T>,
    var: char,
}

impl<T: Scalar> CoeffExpr<T> {
    /// Parses `src` with `z` as the variable.
    pub fn parse(src: &str) -> Result<Self> {
        Self::parse_in(src, 'z')
    }

    /// Parses `src` with the given variable symbol.
    pub fn parse_in(src: &str, var: char) -> Result<Self> {
        let mut p = Parser {
            src: src.as_bytes(),
            pos: 0,
            var,
        };
        let root = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(CoeffExpr { root, var })
    }

    pub fn constant(c: Cplx<T>) -> Self {
        CoeffExpr {
            root: Node::Num(c),
            var: 'z',
        }
    }

    pub fn from_node(root: Node<T>, var: char) -> Self {
        CoeffExpr { root, var }
    }

    pub fn node(&self) -> &Node<T> {
        &self.root
    }

    pub fn var(&self) -> char {
        self.var
    }

    /// `true` when the variable does not occur.
    pub fn is_constant(&self) -> bool {
        !contains_var(&self.root)
    }

    /// Evaluates at `z`. Division by zero, `log 0` and non-finite results
    /// are reported as [`Error::Singular`].
    pub fn eval(&self, z: Cplx<T>) -> Result<Cplx<T>> {
        eval(&self.root, z)
    }

    /// Converts to `num/den` polynomials in the variable. Fails when the
    /// variable occurs under `exp` or `log`.
    pub fn to_rational(&self) -> Result<(Polynomial<T>, Polynomial<T>)> {
        to_rational(&self.root)
    }
}

impl<T: Scalar> fmt::Display for CoeffExpr<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(&self.root, self.var, f)
    }
}

fn contains_var<T: Scalar>(n: &Node<T>) -> bool {
    match n {
        Node::Num(_) => false,
        Node::Var => true,
        Node::Neg(a) | Node::Pow(a, _) | Node::Exp(a) | Node::Log(a) => contains_var(a),
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
            contains_var(a) || contains_var(b)
        }
    }
}

fn singular<T: Scalar>(what: &str, z: Cplx<T>) -> Error {
    Error::Singular {
        what: what.into(),
        at: to_pair(z),
    }
}

fn eval<T: Scalar>(n: &Node<T>, z: Cplx<T>) -> Result<Cplx<T>> {
    let v = match n {
        Node::Num(c) => *c,
        Node::Var => z,
        Node::Neg(a) => -eval(a, z)?,
        Node::Add(a, b) => eval(a, z)? + eval(b, z)?,
        Node::Sub(a, b) => eval(a, z)? - eval(b, z)?,
        Node::Mul(a, b) => eval(a, z)? * eval(b, z)?,
        Node::Div(a, b) => {
            let d = eval(b, z)?;
            if d.is_zero() {
                return Err(singular("division by zero", z));
            }
            eval(a, z)? / d
        }
        Node::Pow(a, k) => {
            let base = eval(a, z)?;
            if *k < 0 && base.is_zero() {
                return Err(singular("negative power of zero", z));
            }
            powi(base, *k)
        }
        Node::Exp(a) => eval(a, z)?.exp(),
        Node::Log(a) => {
            let x = eval(a, z)?;
            if x.is_zero() {
                return Err(singular("log of zero", z));
            }
            log_upper(x)
        }
    };
    if !is_finite(v) {
        return Err(singular("non-finite value", z));
    }
    Ok(v)
}

type Rational<T> = (Polynomial<T>, Polynomial<T>);

fn to_rational<T: Scalar>(n: &Node<T>) -> Result<Rational<T>> {
    let one = || Polynomial::constant(Complex::one());
    Ok(match n {
        Node::Num(c) => (Polynomial::constant(*c), one()),
        Node::Var => (Polynomial::var(), one()),
        Node::Neg(a) => {
            let (p, q) = to_rational(a)?;
            (p.mul_scalar(-Complex::<T>::one()), q)
        }
        Node::Add(a, b) | Node::Sub(a, b) => {
            let (p1, q1) = to_rational(a)?;
            let (p2, q2) = to_rational(b)?;
            let l = p1.mul(&q2);
            let r = p2.mul(&q1);
            let num = if matches!(n, Node::Add(..)) {
                l.add(&r)
            } else {
                l.sub(&r)
            };
            (num, q1.mul(&q2))
        }
        Node::Mul(a, b) => {
            let (p1, q1) = to_rational(a)?;
            let (p2, q2) = to_rational(b)?;
            (p1.mul(&p2), q1.mul(&q2))
        }
        Node::Div(a, b) => {
            let (p1, q1) = to_rational(a)?;
            let (p2, q2) = to_rational(b)?;
            if p2.is_zero() {
                return Err(Error::Invalid("division by the zero polynomial".into()));
            }
            (p1.mul(&q2), q1.mul(&p2))
        }
        Node::Pow(a, k) => {
            let (p, q) = to_rational(a)?;
            if *k >= 0 {
                (p.pow(*k as u32), q.pow(*k as u32))
            } else {
                if p.is_zero() {
                    return Err(Error::Invalid(
                        "negative power of the zero polynomial".into(),
                    ));
                }
                (q.pow(k.unsigned_abs()), p.pow(k.unsigned_abs()))
            }
        }
        Node::Exp(_) | Node::Log(_) => {
            if contains_var(n) {
                return Err(Error::Invalid(
                    "exp/log of the variable is not rational".into(),
                ));
            }
            (Polynomial::constant(eval(n, Complex::zero())?), one())
        }
    })
}

fn write_num<T: Scalar>(c: &Cplx<T>, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let (re, im) = to_pair(*c);
    match (re == 0.0, im == 0.0) {
        (_, true) => write!(f, "{re}"),
        (true, false) => write!(f, "{im}*i"),
        _ => write!(f, "({re}+{im}*i)"),
    }
}

fn write_node<T: Scalar>(n: &Node<T>, var: char, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let bin = |f: &mut fmt::Formatter<'_>, a: &Node<T>, op: &str, b: &Node<T>| -> fmt::Result {
        write!(f, "(")?;
        write_node(a, var, f)?;
        write!(f, "{op}")?;
        write_node(b, var, f)?;
        write!(f, ")")
    };
    match n {
        Node::Num(c) => write_num(c, f),
        Node::Var => write!(f, "{var}"),
        Node::Neg(a) => {
            write!(f, "(-")?;
            write_node(a, var, f)?;
            write!(f, ")")
        }
        Node::Add(a, b) => bin(f, a, "+", b),
        Node::Sub(a, b) => bin(f, a, "-", b),
        Node::Mul(a, b) => bin(f, a, "*", b),
        Node::Div(a, b) => bin(f, a, "/", b),
        Node::Pow(a, k) => {
            write!(f, "(")?;
            write_node(a, var, f)?;
            write!(f, ")^{k}")
        }
        Node::Exp(a) | Node::Log(a) => {
            write!(
                f,
                "{}(",
                if matches!(n, Node::Exp(_)) {
                    "exp"
                } else {
                    "log"
                }
            )?;
            write_node(a, var, f)?;
            write!(f, ")")
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    var: char,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Syntax {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", c as char)))
        }
    }

    fn expr<T: Scalar>(&mut self) -> Result<Node<T>> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term<T: Scalar>(&mut self) -> Result<Node<T>> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary<T: Scalar>(&mut self) -> Result<Node<T>> {
        if self.eat(b'-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.factor()
    }

    fn factor<T: Scalar>(&mut self) -> Result<Node<T>> {
        let base = self.base()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        self.skip_ws();
        let start = self.pos;
        if matches!(self.src.get(self.pos), Some(b'-' | b'+')) {
            self.pos += 1;
        }
        while self.src.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        let k: i32 = text.parse().map_err(|_| Error::Syntax {
            offset: start,
            message: "exponent must be a signed integer".into(),
        })?;
        Ok(Node::Pow(Box::new(base), k))
    }

    fn base<T: Scalar>(&mut self) -> Result<Node<T>> {
        let Some(c) = self.peek() else {
            return Err(self.error("unexpected end of input"));
        };
        if c == b'(' {
            self.pos += 1;
            let e = self.expr()?;
            self.expect(b')')?;
            return Ok(e);
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number();
        }
        if c.is_ascii_alphabetic() {
            let start = self.pos;
            while self
                .src
                .get(self.pos)
                .is_some_and(|c| c.is_ascii_alphanumeric())
            {
                self.pos += 1;
            }
            let word = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
            return match word {
                "i" => Ok(Node::Num(Complex::new(T::zero(), T::one()))),
                "exp" | "log" => {
                    self.expect(b'(')?;
                    let arg = Box::new(self.expr()?);
                    self.expect(b')')?;
                    Ok(if word == "exp" {
                        Node::Exp(arg)
                    } else {
                        Node::Log(arg)
                    })
                }
                w if w.len() == 1 && w.starts_with(self.var) => Ok(Node::Var),
                _ => Err(Error::Syntax {
                    offset: start,
                    message: format!("unknown identifier '{word}'"),
                }),
            };
        }
        Err(self.error(&format!("unexpected character '{}'", c as char)))
    }

    fn number<T: Scalar>(&mut self) -> Result<Node<T>> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.src.get(p.pos).is_some_and(|c| c.is_ascii_digit()) {
                p.pos += 1;
            }
        };
        digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'-' | b'+')) {
                self.pos += 1;
            }
            if self.src.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
                digits(self);
            } else {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        let v = T::from_str_radix(text, 10).map_err(|_| Error::Syntax {
            offset: start,
            message: format!("malformed number '{text}'"),
        })?;
        Ok(Node::Num(Complex::new(v, T::zero())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;
    use crate::DoubleDouble;
    use num_traits::Float;

    fn at(src: &str, z: Cplx<f64>) -> Cplx<f64> {
        CoeffExpr::<f64>::parse(src).unwrap().eval(z).unwrap()
    }

    #[test]
    fn arithmetic_and_precedence() {
        assert_eq!(at("2*z + 1", cx(3.0, 0.0)), cx(7.0, 0.0));
        assert_eq!(at("1 + 2*3^2", cx(0.0, 0.0)), cx(19.0, 0.0));
        assert_eq!(at("(1 - z)/(2)", cx(5.0, 0.0)), cx(-2.0, 0.0));
        assert_eq!(at("-z^2", cx(3.0, 0.0)), cx(-9.0, 0.0));
        assert_eq!(at("z^-2", cx(2.0, 0.0)), cx(0.25, 0.0));
    }

    #[test]
    fn functions_and_imaginary_unit() {
        assert_eq!(at("exp(z)", cx(0.0, 0.0)), cx(1.0, 0.0));
        assert!((at("(1+i)^2", cx(0.0, 0.0)) - cx(0.0, 2.0)).norm() < 1e-15);
        let l = at("log(z)", cx(-1.0, 0.0));
        assert!((l - cx(0.0, std::f64::consts::PI)).norm() < 1e-15);
    }

    #[test]
    fn syntax_errors_report_offsets() {
        match CoeffExpr::<f64>::parse("2*(z+1") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 6),
            other => panic!("{other:?}"),
        }
        match CoeffExpr::<f64>::parse("2 $ z") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("{other:?}"),
        }
        assert!(CoeffExpr::<f64>::parse("sin(z)").is_err());
        assert!(CoeffExpr::<f64>::parse("z^1.5").is_err());
        assert!(CoeffExpr::<f64>::parse("y").is_err());
    }

    #[test]
    fn singularities_surface_at_evaluation() {
        let e = CoeffExpr::<f64>::parse("1/z").unwrap();
        assert!(matches!(e.eval(cx(0.0, 0.0)), Err(Error::Singular { .. })));
        let e = CoeffExpr::<f64>::parse("log(z)").unwrap();
        assert!(matches!(e.eval(cx(0.0, 0.0)), Err(Error::Singular { .. })));
    }

    #[test]
    fn rational_conversion() {
        let e = CoeffExpr::<f64>::parse_in("y/(1+y)", 'y').unwrap();
        let (p, q) = e.to_rational().unwrap();
        let y = cx(0.3, 0.2);
        assert!((p.eval(y) / q.eval(y) - y / (y + 1.0)).norm() < 1e-15);
        assert!(CoeffExpr::<f64>::parse_in("exp(y)", 'y')
            .unwrap()
            .to_rational()
            .is_err());
        assert!(CoeffExpr::<f64>::parse_in("exp(1)*y", 'y')
            .unwrap()
            .to_rational()
            .is_ok());
    }

    #[test]
    fn literals_parse_at_full_precision() {
        let e = CoeffExpr::<DoubleDouble>::parse("0.1").unwrap();
        let v = e.eval(Complex::zero()).unwrap().re;
        let err = v * DoubleDouble::int(10) - DoubleDouble::one();
        assert!(err.abs().f64() < 1e-31);
    }

    #[test]
    fn display_reparses_to_same_values() {
        let e = CoeffExpr::<f64>::parse("2*z^2 - exp(i*z)/(3+z)").unwrap();
        let again = CoeffExpr::<f64>::parse(&e.to_string()).unwrap();
        let z = cx(0.4, -1.1);
        assert!((e.eval(z).unwrap() - again.eval(z).unwrap()).norm() < 1e-14);
    }
}
