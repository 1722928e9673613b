//! Immutable scalar expression trees.
//!
//! Expressions are parsed from an infix grammar (see [`Expression::parse`]),
//! evaluated under variable [`Bindings`], and differentiated exactly by the
//! usual chain/product/quotient rules. Trees are immutable after
//! construction and cheap to share (`Arc` children), so they can be
//! evaluated concurrently without synchronization.
//!
//! There is deliberately no algebraic simplification pass beyond local
//! constant folding in the smart constructors; correctness is defined by
//! evaluation, not by normal forms.

mod compile;
mod parse;

pub use compile::{Compiled, CompileError};
pub use parse::ParseError;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use core::fmt;

use crate::fmath;

/// Unary operations. `Neg` is the grammar's unary minus; the rest are the
/// supported named functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Arctan,
}

impl UnaryOp {
    /// Function-call name as it appears in the grammar, or `None` for `Neg`.
    pub fn name(self) -> Option<&'static str> {
        match self {
            UnaryOp::Neg => None,
            UnaryOp::Sin => Some("sin"),
            UnaryOp::Cos => Some("cos"),
            UnaryOp::Tan => Some("tan"),
            UnaryOp::Exp => Some("exp"),
            UnaryOp::Ln => Some("ln"),
            UnaryOp::Sqrt => Some("sqrt"),
            UnaryOp::Arctan => Some("arctan"),
        }
    }

    pub(crate) fn from_name(name: &str) -> Option<UnaryOp> {
        Some(match name {
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "tan" => UnaryOp::Tan,
            "exp" => UnaryOp::Exp,
            "ln" => UnaryOp::Ln,
            "sqrt" => UnaryOp::Sqrt,
            "arctan" => UnaryOp::Arctan,
            _ => return None,
        })
    }
}

/// Binary operations: `+ - * /` and `^` (real power).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

/// An immutable expression tree over named real variables.
///
/// Structural equality (`PartialEq`) is node-by-node; printing with
/// `Display` produces fully parenthesized text that parses back to a
/// structurally identical tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expression {
    Const(f64),
    Var(String),
    Unary(UnaryOp, Arc<Expression>),
    Binary(BinOp, Arc<Expression>, Arc<Expression>),
}

/// Variable bindings for evaluation: a name → value map with duplicates
/// rejected at definition time.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Bindings {
    map: BTreeMap<String, f64>,
}

/// Evaluation failure: an unbound variable or a real-domain violation.
#[derive(Debug, Clone, PartialEq)]
pub enum EvalError {
    UnboundVariable(String),
    DuplicateName(String),
    /// Division with an exactly zero divisor.
    DivisionByZero,
    /// Argument outside the operation's real domain (`ln` of a non-positive
    /// value, `sqrt` of a negative value, fractional power of a negative
    /// base, ...). Carries the offending operation name and argument.
    Domain { op: &'static str, arg: f64 },
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::UnboundVariable(name) => write!(f, "unbound variable `{name}`"),
            EvalError::DuplicateName(name) => write!(f, "duplicate binding for `{name}`"),
            EvalError::DivisionByZero => write!(f, "division by zero"),
            EvalError::Domain { op, arg } => {
                write!(f, "domain error: {op}({arg}) is not a finite real")
            }
        }
    }
}

impl core::error::Error for EvalError {}

impl Bindings {
    pub fn new() -> Self {
        Bindings::default()
    }

    /// Binds `name` to `value`; rejects duplicate names.
    pub fn define(&mut self, name: &str, value: f64) -> Result<(), EvalError> {
        if self.map.contains_key(name) {
            return Err(EvalError::DuplicateName(name.to_string()));
        }
        self.map.insert(name.to_string(), value);
        Ok(())
    }

    /// Builds bindings from `(name, value)` pairs; rejects duplicates.
    pub fn from_pairs<'a, I>(pairs: I) -> Result<Self, EvalError>
    where
        I: IntoIterator<Item = (&'a str, f64)>,
    {
        let mut b = Bindings::new();
        for (name, value) in pairs {
            b.define(name, value)?;
        }
        Ok(b)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.map.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.map.contains_key(name)
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.map.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

/// Applies a unary operation with domain checking shared by the tree and
/// compiled evaluators, so both produce bitwise-identical results.
pub(crate) fn apply_unary(op: UnaryOp, x: f64) -> Result<f64, EvalError> {
    let y = match op {
        UnaryOp::Neg => -x,
        UnaryOp::Sin => fmath::sin(x),
        UnaryOp::Cos => fmath::cos(x),
        UnaryOp::Tan => fmath::tan(x),
        UnaryOp::Exp => fmath::exp(x),
        UnaryOp::Ln => {
            if x <= 0.0 {
                return Err(EvalError::Domain { op: "ln", arg: x });
            }
            fmath::ln(x)
        }
        UnaryOp::Sqrt => {
            if x < 0.0 {
                return Err(EvalError::Domain { op: "sqrt", arg: x });
            }
            fmath::sqrt(x)
        }
        UnaryOp::Arctan => fmath::atan(x),
    };
    if y.is_nan() && !x.is_nan() {
        return Err(EvalError::Domain {
            op: op.name().unwrap_or("neg"),
            arg: x,
        });
    }
    Ok(y)
}

pub(crate) fn apply_binary(op: BinOp, a: f64, b: f64) -> Result<f64, EvalError> {
    let y = match op {
        BinOp::Add => a + b,
        BinOp::Sub => a - b,
        BinOp::Mul => a * b,
        BinOp::Div => {
            if b == 0.0 {
                return Err(EvalError::DivisionByZero);
            }
            a / b
        }
        BinOp::Pow => fmath::pow(a, b),
    };
    if y.is_nan() && !a.is_nan() && !b.is_nan() {
        return Err(EvalError::Domain {
            op: match op {
                BinOp::Pow => "pow",
                _ => op.symbol(),
            },
            arg: a,
        });
    }
    Ok(y)
}

impl Expression {
    /// Parses an infix expression. Precedence, tightest first:
    /// `^`, unary minus, `* /`, `+ -`; same-precedence operators associate
    /// left. `pi` is a built-in constant; supported functions are
    /// `sin cos tan exp ln sqrt arctan`, written `f(x)`. Whitespace is
    /// insignificant.
    pub fn parse(text: &str) -> Result<Expression, ParseError> {
        parse::parse(text)
    }

    pub fn constant(value: f64) -> Expression {
        Expression::Const(value)
    }

    pub fn var(name: &str) -> Expression {
        Expression::Var(name.to_string())
    }

    /// Smart constructor for a unary node; folds operations on finite
    /// constants and collapses double negation.
    pub fn unary(op: UnaryOp, a: Expression) -> Expression {
        match (&op, &a) {
            (UnaryOp::Neg, Expression::Const(c)) => return Expression::Const(-c),
            (UnaryOp::Neg, Expression::Unary(UnaryOp::Neg, inner)) => {
                return inner.as_ref().clone()
            }
            (_, Expression::Const(c)) => {
                if let Ok(v) = apply_unary(op, *c) {
                    if v.is_finite() {
                        return Expression::Const(v);
                    }
                }
            }
            _ => {}
        }
        Expression::Unary(op, Arc::new(a))
    }

    pub fn neg(a: Expression) -> Expression {
        Expression::unary(UnaryOp::Neg, a)
    }

    /// Smart constructor for a binary node; folds constant operands and
    /// applies identity/zero rules (`0 + x`, `1 * x`, `x ^ 1`, ...).
    pub fn binary(op: BinOp, a: Expression, b: Expression) -> Expression {
        use Expression::Const;
        if let (Const(x), Const(y)) = (&a, &b) {
            if let Ok(v) = apply_binary(op, *x, *y) {
                if v.is_finite() {
                    return Const(v);
                }
            }
        }
        match op {
            BinOp::Add => {
                if a == Const(0.0) {
                    return b;
                }
                if b == Const(0.0) {
                    return a;
                }
            }
            BinOp::Sub => {
                if b == Const(0.0) {
                    return a;
                }
                if a == Const(0.0) {
                    return Expression::neg(b);
                }
            }
            BinOp::Mul => {
                if a == Const(0.0) || b == Const(0.0) {
                    return Const(0.0);
                }
                if a == Const(1.0) {
                    return b;
                }
                if b == Const(1.0) {
                    return a;
                }
            }
            BinOp::Div => {
                if a == Const(0.0) {
                    return Const(0.0);
                }
                if b == Const(1.0) {
                    return a;
                }
            }
            BinOp::Pow => {
                if b == Const(1.0) {
                    return a;
                }
                if b == Const(0.0) {
                    return Const(1.0);
                }
            }
        }
        Expression::Binary(op, Arc::new(a), Arc::new(b))
    }

    pub fn add(a: Expression, b: Expression) -> Expression {
        Expression::binary(BinOp::Add, a, b)
    }
    pub fn sub(a: Expression, b: Expression) -> Expression {
        Expression::binary(BinOp::Sub, a, b)
    }
    pub fn mul(a: Expression, b: Expression) -> Expression {
        Expression::binary(BinOp::Mul, a, b)
    }
    pub fn div(a: Expression, b: Expression) -> Expression {
        Expression::binary(BinOp::Div, a, b)
    }
    pub fn pow(a: Expression, b: Expression) -> Expression {
        Expression::binary(BinOp::Pow, a, b)
    }

    /// Evaluates the tree under `bindings`. Every free variable must be
    /// bound; domain violations are reported as errors rather than NaN.
    pub fn evaluate(&self, bindings: &Bindings) -> Result<f64, EvalError> {
        match self {
            Expression::Const(c) => Ok(*c),
            Expression::Var(name) => bindings
                .get(name)
                .ok_or_else(|| EvalError::UnboundVariable(name.clone())),
            Expression::Unary(op, a) => apply_unary(*op, a.evaluate(bindings)?),
            Expression::Binary(op, a, b) => {
                apply_binary(*op, a.evaluate(bindings)?, b.evaluate(bindings)?)
            }
        }
    }

    /// Exact symbolic partial derivative with respect to `var`.
    ///
    /// `u ^ v` with a non-constant exponent differentiates through the
    /// `exp/ln` identity: `d(u^v) = u^v (v' ln u + v u' / u)`.
    pub fn differentiate(&self, var: &str) -> Expression {
        use Expression as E;
        match self {
            E::Const(_) => E::Const(0.0),
            E::Var(name) => {
                if name == var {
                    E::Const(1.0)
                } else {
                    E::Const(0.0)
                }
            }
            E::Unary(op, a) => {
                let da = a.differentiate(var);
                if da == E::Const(0.0) {
                    return E::Const(0.0);
                }
                let a = a.as_ref().clone();
                match op {
                    UnaryOp::Neg => E::neg(da),
                    UnaryOp::Sin => E::mul(E::unary(UnaryOp::Cos, a), da),
                    UnaryOp::Cos => E::neg(E::mul(E::unary(UnaryOp::Sin, a), da)),
                    UnaryOp::Tan => E::div(
                        da,
                        E::pow(E::unary(UnaryOp::Cos, a), E::Const(2.0)),
                    ),
                    UnaryOp::Exp => E::mul(E::unary(UnaryOp::Exp, a), da),
                    UnaryOp::Ln => E::div(da, a),
                    UnaryOp::Sqrt => E::div(
                        da,
                        E::mul(E::Const(2.0), E::unary(UnaryOp::Sqrt, a)),
                    ),
                    UnaryOp::Arctan => E::div(
                        da,
                        E::add(E::Const(1.0), E::pow(a, E::Const(2.0))),
                    ),
                }
            }
            E::Binary(op, a, b) => {
                let (da, db) = (a.differentiate(var), b.differentiate(var));
                let (a, b) = (a.as_ref().clone(), b.as_ref().clone());
                match op {
                    BinOp::Add => E::add(da, db),
                    BinOp::Sub => E::sub(da, db),
                    BinOp::Mul => E::add(E::mul(da, b), E::mul(a, db)),
                    BinOp::Div => E::div(
                        E::sub(E::mul(da, b.clone()), E::mul(a, db)),
                        E::pow(b, E::Const(2.0)),
                    ),
                    BinOp::Pow => match b {
                        E::Const(c) => E::mul(
                            E::mul(E::Const(c), E::pow(a, E::Const(c - 1.0))),
                            da,
                        ),
                        _ => {
                            // u^v = exp(v ln u):
                            // d(u^v) = u^v (v' ln u + v u' / u)
                            let term = E::add(
                                E::mul(db, E::unary(UnaryOp::Ln, a.clone())),
                                E::div(E::mul(b.clone(), da), a.clone()),
                            );
                            E::mul(E::pow(a, b), term)
                        }
                    },
                }
            }
        }
    }

    /// Replaces every occurrence of the named variables by the mapped
    /// expressions (simultaneous substitution).
    pub fn substitute(&self, map: &BTreeMap<String, Expression>) -> Expression {
        match self {
            Expression::Const(c) => Expression::Const(*c),
            Expression::Var(name) => match map.get(name) {
                Some(e) => e.clone(),
                None => Expression::Var(name.clone()),
            },
            Expression::Unary(op, a) => Expression::unary(*op, a.substitute(map)),
            Expression::Binary(op, a, b) => {
                Expression::binary(*op, a.substitute(map), b.substitute(map))
            }
        }
    }

    /// The set of free variable names.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expression::Const(_) => {}
            Expression::Var(name) => {
                out.insert(name.clone());
            }
            Expression::Unary(_, a) => a.collect_vars(out),
            Expression::Binary(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Compiles the tree against a fixed variable order for fast repeated
    /// evaluation.
    pub fn compile(&self, vars: &[&str]) -> Result<Compiled, CompileError> {
        Compiled::new(self, vars)
    }
}

impl fmt::Display for Expression {
    /// Fully parenthesized printing: every binary node is wrapped in
    /// parentheses, unary minus prints as `(-x)`, functions as `f(x)`.
    /// The output parses back to a structurally identical tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expression::Const(c) => {
                if c.is_finite() {
                    write!(f, "{c}")
                } else {
                    // Non-finite constants cannot arise from parsing; print
                    // a division form so the text stays grammatical.
                    write!(f, "(1/0)")
                }
            }
            Expression::Var(name) => write!(f, "{name}"),
            Expression::Unary(UnaryOp::Neg, a) => write!(f, "(-{a})"),
            Expression::Unary(op, a) => {
                write!(f, "{}({a})", op.name().expect("named function"))
            }
            Expression::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
        }
    }
}

/// Convenience: central finite difference of `expr` in `var` at the bound
/// point, with step `h`. This is the independent oracle used by tests to
/// cross-check [`Expression::differentiate`]; it deliberately goes through
/// `evaluate` only.
pub fn central_difference(
    expr: &Expression,
    var: &str,
    bindings: &Bindings,
    h: f64,
) -> Result<f64, EvalError> {
    let x = bindings
        .get(var)
        .ok_or_else(|| EvalError::UnboundVariable(var.to_string()))?;
    let mut hi = bindings.clone();
    hi.map.insert(var.to_string(), x + h);
    let mut lo = bindings.clone();
    lo.map.insert(var.to_string(), x - h);
    Ok((expr.evaluate(&hi)? - expr.evaluate(&lo)?) / (2.0 * h))
}
