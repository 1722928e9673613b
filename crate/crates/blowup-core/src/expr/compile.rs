//! Stack-machine compilation of expression trees.
//!
//! Equilibrium searches evaluate the same Jacobian entries thousands of
//! times; walking the tree with name lookups per node is the dominant cost.
//! `Compiled` flattens a tree to postfix ops with variable names resolved to
//! argument slots once. Arithmetic goes through the same `apply_*` helpers
//! as the tree evaluator, so results are bitwise identical.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::{apply_binary, apply_unary, BinOp, EvalError, Expression, UnaryOp};

#[derive(Debug, Clone, Copy)]
enum Op {
    PushConst(f64),
    PushVar(usize),
    Unary(UnaryOp),
    Binary(BinOp),
}

/// An expression compiled against a fixed variable ordering.
#[derive(Debug, Clone)]
pub struct Compiled {
    ops: Vec<Op>,
    arity: usize,
    max_stack: usize,
}

/// A free variable of the expression is missing from the compile-time
/// variable list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompileError {
    pub variable: String,
}

impl fmt::Display for CompileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "variable `{}` is not in the compile slot list", self.variable)
    }
}

impl core::error::Error for CompileError {}

impl Compiled {
    /// Flattens `expr` with variables resolved against `vars` (slot order).
    pub fn new(expr: &Expression, vars: &[&str]) -> Result<Compiled, CompileError> {
        let mut ops = Vec::new();
        flatten(expr, vars, &mut ops)?;
        let mut depth = 0usize;
        let mut max_stack = 0usize;
        for op in &ops {
            match op {
                Op::PushConst(_) | Op::PushVar(_) => depth += 1,
                Op::Unary(_) => {}
                Op::Binary(_) => depth -= 1,
            }
            max_stack = max_stack.max(depth);
        }
        Ok(Compiled {
            ops,
            arity: vars.len(),
            max_stack,
        })
    }

    /// Number of argument slots expected by [`Compiled::eval`].
    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Evaluates with `args[i]` bound to the i-th compile-time variable.
    pub fn eval(&self, args: &[f64]) -> Result<f64, EvalError> {
        let mut stack = Vec::with_capacity(self.max_stack);
        self.eval_with(args, &mut stack)
    }

    /// Evaluation with a caller-provided scratch stack, for hot loops.
    pub fn eval_with(&self, args: &[f64], stack: &mut Vec<f64>) -> Result<f64, EvalError> {
        debug_assert_eq!(args.len(), self.arity);
        stack.clear();
        for op in &self.ops {
            match *op {
                Op::PushConst(c) => stack.push(c),
                Op::PushVar(slot) => stack.push(args[slot]),
                Op::Unary(u) => {
                    let x = stack.last_mut().expect("stack underflow");
                    *x = apply_unary(u, *x)?;
                }
                Op::Binary(b) => {
                    let rhs = stack.pop().expect("stack underflow");
                    let lhs = stack.last_mut().expect("stack underflow");
                    *lhs = apply_binary(b, *lhs, rhs)?;
                }
            }
        }
        debug_assert_eq!(stack.len(), 1);
        Ok(stack[0])
    }
}

fn flatten(expr: &Expression, vars: &[&str], out: &mut Vec<Op>) -> Result<(), CompileError> {
    match expr {
        Expression::Const(c) => out.push(Op::PushConst(*c)),
        Expression::Var(name) => {
            let slot = vars
                .iter()
                .position(|v| v == name)
                .ok_or_else(|| CompileError {
                    variable: name.to_string(),
                })?;
            out.push(Op::PushVar(slot));
        }
        Expression::Unary(op, a) => {
            flatten(a, vars, out)?;
            out.push(Op::Unary(*op));
        }
        Expression::Binary(op, a, b) => {
            flatten(a, vars, out)?;
            flatten(b, vars, out)?;
            out.push(Op::Binary(*op));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Bindings;

    #[test]
    fn compiled_matches_tree_evaluation_bitwise() {
        let e = Expression::parse("p^2/(2*m) - m*cos(q) + exp(q/3)").unwrap();
        let c = e.compile(&["q", "p", "m"]).unwrap();
        let b = Bindings::from_pairs([("q", 0.3), ("p", -1.7), ("m", 2.5)]).unwrap();
        let tree = e.evaluate(&b).unwrap();
        let fast = c.eval(&[0.3, -1.7, 2.5]).unwrap();
        assert_eq!(tree.to_bits(), fast.to_bits());
    }

    #[test]
    fn missing_slot_is_a_compile_error() {
        let e = Expression::parse("x + y").unwrap();
        let err = e.compile(&["x"]).unwrap_err();
        assert_eq!(err.variable, "y");
    }

    #[test]
    fn runtime_domain_errors_surface() {
        let e = Expression::parse("ln(x)").unwrap();
        let c = e.compile(&["x"]).unwrap();
        assert!(c.eval(&[-1.0]).is_err());
    }
}
