//! Postfix compilation for hot evaluation paths.
//!
//! The ODE integrator evaluates the same component expressions at every
//! stage of every step; a flat postfix program avoids the pointer chasing of
//! the tree walker there.

use super::{eval, Node, Ratio, UnaryFn};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
enum Op {
    Num(f64),
    Var(usize),
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Pow(Ratio),
    Unary(UnaryFn),
    Atan2,
}

/// A [`super::ScalarExpr`] flattened into a stack program.
#[derive(Clone, Debug)]
pub struct CompiledExpr {
    ops: Vec<Op>,
    stack_need: usize,
}

pub(super) fn compile(root: &Node) -> CompiledExpr {
    let mut ops = Vec::new();
    let mut depth = 0usize;
    let mut max_depth = 0usize;
    emit(root, &mut ops, &mut depth, &mut max_depth);
    CompiledExpr {
        ops,
        stack_need: max_depth,
    }
}

fn emit(n: &Node, ops: &mut Vec<Op>, depth: &mut usize, max_depth: &mut usize) {
    match n {
        Node::Num(c) => push(ops, Op::Num(*c), depth, max_depth),
        Node::Var(i) => push(ops, Op::Var(*i), depth, max_depth),
        Node::Add(a, b) => binary(Op::Add, a, b, ops, depth, max_depth),
        Node::Sub(a, b) => binary(Op::Sub, a, b, ops, depth, max_depth),
        Node::Mul(a, b) => binary(Op::Mul, a, b, ops, depth, max_depth),
        Node::Div(a, b) => binary(Op::Div, a, b, ops, depth, max_depth),
        Node::Atan2(a, b) => binary(Op::Atan2, a, b, ops, depth, max_depth),
        Node::Pow(a, r) => {
            emit(a, ops, depth, max_depth);
            ops.push(Op::Pow(*r));
        }
        Node::Neg(a) => {
            emit(a, ops, depth, max_depth);
            ops.push(Op::Neg);
        }
        Node::Unary(f, a) => {
            emit(a, ops, depth, max_depth);
            ops.push(Op::Unary(*f));
        }
    }
}

fn binary(op: Op, a: &Node, b: &Node, ops: &mut Vec<Op>, depth: &mut usize, max_depth: &mut usize) {
    emit(a, ops, depth, max_depth);
    emit(b, ops, depth, max_depth);
    ops.push(op);
    *depth -= 1;
}

fn push(ops: &mut Vec<Op>, op: Op, depth: &mut usize, max_depth: &mut usize) {
    ops.push(op);
    *depth += 1;
    *max_depth = (*max_depth).max(*depth);
}

impl CompiledExpr {
    pub fn stack_need(&self) -> usize {
        self.stack_need
    }

    /// Evaluates using a caller-provided stack to avoid per-call allocation.
    pub fn eval(&self, vals: &[f64], stack: &mut Vec<f64>) -> Result<f64> {
        stack.clear();
        stack.reserve(self.stack_need);
        for op in &self.ops {
            match op {
                Op::Num(c) => stack.push(*c),
                Op::Var(i) => stack.push(vals[*i]),
                Op::Add => {
                    let b = stack.pop().unwrap();
                    let a = stack.last_mut().unwrap();
                    *a += b;
                }
                Op::Sub => {
                    let b = stack.pop().unwrap();
                    let a = stack.last_mut().unwrap();
                    *a -= b;
                }
                Op::Mul => {
                    let b = stack.pop().unwrap();
                    let a = stack.last_mut().unwrap();
                    *a *= b;
                }
                Op::Div => {
                    let b = stack.pop().unwrap();
                    if b == 0.0 {
                        return Err(Error::Domain("division by zero".into()));
                    }
                    let a = stack.last_mut().unwrap();
                    *a /= b;
                }
                Op::Neg => {
                    let a = stack.last_mut().unwrap();
                    *a = -*a;
                }
                Op::Pow(r) => {
                    let a = stack.last_mut().unwrap();
                    *a = eval::pow_ratio(*a, *r)?;
                }
                Op::Unary(f) => {
                    let a = stack.last_mut().unwrap();
                    *a = eval::apply_unary(*f, *a)?;
                }
                Op::Atan2 => {
                    let b = stack.pop().unwrap();
                    let a = stack.last_mut().unwrap();
                    *a = a.atan2(b);
                }
            }
        }
        let v = stack.pop().expect("program leaves one value");
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Domain("non-finite result".into()))
        }
    }
}
