//! Closed-form scalar functions of one variable `t`.
//!
//! Grammar (loosest to tightest binding):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' exponent)?
//! exponent:= ['-'] INTEGER | '(' ['-'] INTEGER ')'
//! primary := NUMBER | 't' | 'pi' | FUNC '(' expr ')' | '(' expr ')'
//! FUNC    := sin | cos | exp | log | sqrt
//! ```
//!
//! Expressions are evaluated generically over [`JetScalar`], so the same tree
//! yields plain values, [`Jet2`]s or truncated Taylor [`Series`].

mod jet;
mod parse;
mod series;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use thiserror::Error;

pub use jet::Jet2;
pub use parse::{parse, ParseError};
pub use series::Series;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Pi,
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

/// Number-like types an [`Expr`] can be evaluated over.
pub trait JetScalar:
    Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    /// Whether the type carries derivative channels (which makes `sqrt`
    /// undefined at zero).
    const DIFFERENTIATES: bool;

    /// A constant with the same shape as `self`.
    fn lift(&self, c: f64) -> Self;
    fn value(&self) -> f64;
    fn recip(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn powi(&self, k: i32) -> Self;
}

impl JetScalar for f64 {
    const DIFFERENTIATES: bool = false;

    fn lift(&self, c: f64) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn recip(&self) -> Self {
        1.0 / self
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn powi(&self, k: i32) -> Self {
        f64::powi(*self, k)
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("domain error: {op} of {value} in `{subexpr}`")]
    Domain {
        op: &'static str,
        subexpr: String,
        value: f64,
    },
    #[error("division by zero in `{subexpr}`")]
    DivisionByZero { subexpr: String },
    #[error("non-finite result {value} in `{subexpr}`")]
    NonFinite { subexpr: String, value: f64 },
}

impl Expr {
    pub fn eval(&self, t: f64) -> Result<f64, EvalError> {
        self.eval_generic(&t)
    }

    /// Value, first and second derivative at `t`.
    pub fn eval_jet2(&self, t: f64) -> Result<Jet2, EvalError> {
        self.eval_generic(&Jet2::variable(t))
    }

    /// Taylor series of length `len` about `t`.
    pub fn eval_series(&self, t: f64, len: usize) -> Result<Series, EvalError> {
        self.eval_generic(&Series::variable(t, len))
    }

    pub fn eval_generic<S: JetScalar>(&self, t: &S) -> Result<S, EvalError> {
        let out = match self {
            Expr::Const(c) => t.lift(*c),
            Expr::Var => t.clone(),
            Expr::Pi => t.lift(std::f64::consts::PI),
            Expr::Neg(a) => -a.eval_generic(t)?,
            Expr::Binary(op, a, b) => {
                let a = a.eval_generic(t)?;
                let b = b.eval_generic(t)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b.value() == 0.0 {
                            return Err(EvalError::DivisionByZero {
                                subexpr: self.to_string(),
                            });
                        }
                        a * b.recip()
                    }
                }
            }
            Expr::Pow(a, k) => {
                let base = a.eval_generic(t)?;
                if *k < 0 && base.value() == 0.0 {
                    return Err(EvalError::DivisionByZero {
                        subexpr: self.to_string(),
                    });
                }
                base.powi(*k)
            }
            Expr::Call(f, a) => {
                let x = a.eval_generic(t)?;
                let v = x.value();
                let domain = |op| EvalError::Domain {
                    op,
                    subexpr: self.to_string(),
                    value: v,
                };
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Log => {
                        if v <= 0.0 {
                            return Err(domain("log"));
                        }
                        x.ln()
                    }
                    Func::Sqrt => {
                        if v < 0.0 || (S::DIFFERENTIATES && v == 0.0) {
                            return Err(domain("sqrt"));
                        }
                        x.sqrt()
                    }
                }
            }
        };
        let v = out.value();
        if !v.is_finite() {
            return Err(EvalError::NonFinite {
                subexpr: self.to_string(),
                value: v,
            });
        }
        Ok(out)
    }
}

/// Fully parenthesized rendering; reparsing yields the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Var => f.write_str("t"),
            Expr::Pi => f.write_str("pi"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Pow(a, k) if *k < 0 => write!(f, "({a})^({k})"),
            Expr::Pow(a, k) => write!(f, "({a})^{k}"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

/// A smooth function of one variable that can be evaluated as a 2-jet.
pub trait SmoothFn: Send + Sync + fmt::Debug {
    fn jet2(&self, t: f64) -> Result<Jet2, EvalError>;

    fn value(&self, t: f64) -> Result<f64, EvalError> {
        self.jet2(t).map(|j| j.v)
    }
}

/// A parsed closed-form function together with its source text.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarFn {
    source: String,
    expr: Expr,
}

impl ScalarFn {
    pub fn parse(src: &str) -> Result<Self, ParseError> {
        Ok(ScalarFn {
            source: src.trim().to_string(),
            expr: parse(src)?,
        })
    }

    pub fn constant(c: f64) -> Self {
        ScalarFn {
            source: format!("{c:?}"),
            expr: Expr::Const(c),
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn series(&self, t: f64, len: usize) -> Result<Series, EvalError> {
        self.expr.eval_series(t, len)
    }

    pub fn shared(self) -> Arc<dyn SmoothFn> {
        Arc::new(self)
    }
}

impl SmoothFn for ScalarFn {
    fn jet2(&self, t: f64) -> Result<Jet2, EvalError> {
        self.expr.eval_jet2(t)
    }

    fn value(&self, t: f64) -> Result<f64, EvalError> {
        self.expr.eval(t)
    }
}

impl fmt::Display for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}
