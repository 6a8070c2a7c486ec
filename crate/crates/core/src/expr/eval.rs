//! Tree-walking evaluator with explicit domain errors.

use super::{Node, Ratio, UnaryFn};
use crate::error::{Error, Result};

/// Evaluates `n` on a value slice. Denominators with magnitude at most
/// `sing_tol` raise a domain error; `sing_tol = 0.0` flags only exact zeros.
pub(super) fn eval_node(n: &Node, vals: &[f64], sing_tol: f64) -> Result<f64> {
    let v = eval_rec(n, vals, sing_tol)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain("non-finite result".into()))
    }
}

fn eval_rec(n: &Node, vals: &[f64], sing_tol: f64) -> Result<f64> {
    Ok(match n {
        Node::Num(c) => *c,
        Node::Var(i) => vals[*i],
        Node::Add(a, b) => eval_rec(a, vals, sing_tol)? + eval_rec(b, vals, sing_tol)?,
        Node::Sub(a, b) => eval_rec(a, vals, sing_tol)? - eval_rec(b, vals, sing_tol)?,
        Node::Mul(a, b) => eval_rec(a, vals, sing_tol)? * eval_rec(b, vals, sing_tol)?,
        Node::Div(a, b) => {
            let num = eval_rec(a, vals, sing_tol)?;
            let den = eval_rec(b, vals, sing_tol)?;
            if den.abs() <= sing_tol {
                return Err(Error::Domain("division by zero".into()));
            }
            num / den
        }
        Node::Pow(base, exp) => {
            let b = eval_rec(base, vals, sing_tol)?;
            pow_ratio(b, *exp)?
        }
        Node::Neg(a) => -eval_rec(a, vals, sing_tol)?,
        Node::Unary(f, a) => {
            let x = eval_rec(a, vals, sing_tol)?;
            apply_unary(*f, x)?
        }
        Node::Atan2(a, b) => {
            let y = eval_rec(a, vals, sing_tol)?;
            let x = eval_rec(b, vals, sing_tol)?;
            y.atan2(x)
        }
    })
}

pub(super) fn pow_ratio(base: f64, exp: Ratio) -> Result<f64> {
    if exp.is_integer() {
        let n = exp.num();
        if base == 0.0 && n < 0 {
            return Err(Error::Domain("zero raised to a negative power".into()));
        }
        if n.abs() <= i32::MAX as i64 {
            Ok(base.powi(n as i32))
        } else {
            Ok(base.powf(n as f64))
        }
    } else {
        if base < 0.0 {
            return Err(Error::Domain(
                "negative base with fractional exponent".into(),
            ));
        }
        if base == 0.0 && exp.num() < 0 {
            return Err(Error::Domain("zero raised to a negative power".into()));
        }
        Ok(base.powf(exp.to_f64()))
    }
}

pub(super) fn apply_unary(f: UnaryFn, x: f64) -> Result<f64> {
    Ok(match f {
        UnaryFn::Sin => x.sin(),
        UnaryFn::Cos => x.cos(),
        UnaryFn::Tan => x.tan(),
        UnaryFn::Exp => x.exp(),
        UnaryFn::Log => {
            if x <= 0.0 {
                return Err(Error::Domain("logarithm of a nonpositive value".into()));
            }
            x.ln()
        }
        UnaryFn::Abs => x.abs(),
        UnaryFn::Sqrt => {
            if x < 0.0 {
                return Err(Error::Domain("square root of a negative value".into()));
            }
            x.sqrt()
        }
        UnaryFn::Atan => x.atan(),
    })
}
