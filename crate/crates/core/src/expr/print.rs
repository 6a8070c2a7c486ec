//! Precedence-aware pretty printer. Output re-parses to the same tree, which
//! the round-trip property tests rely on. Note that unary minus binds tighter
//! than `^` in the grammar, so `-(x^2)` and `(-x)^2` print differently.

use super::{Node, Ratio};
use std::fmt;

// operand context levels: 1 sum, 2 product-left, 3 neg, 4 product-right, 5 atom
fn prec(n: &Node) -> u8 {
    match n {
        Node::Add(..) | Node::Sub(..) => 1,
        Node::Mul(..) | Node::Div(..) => 2,
        Node::Neg(..) => 3,
        Node::Pow(..) => 4,
        _ => 5,
    }
}

pub(super) fn write_node(f: &mut fmt::Formatter<'_>, n: &Node, names: &[String]) -> fmt::Result {
    write_prec(f, n, names, 0)
}

fn write_prec(f: &mut fmt::Formatter<'_>, n: &Node, names: &[String], min: u8) -> fmt::Result {
    if prec(n) < min {
        write!(f, "(")?;
        write_prec(f, n, names, 0)?;
        return write!(f, ")");
    }
    match n {
        Node::Num(c) => write!(f, "{c}"),
        Node::Var(i) => write!(f, "{}", names[*i]),
        Node::Add(a, b) => {
            write_prec(f, a, names, 1)?;
            write!(f, " + ")?;
            write_prec(f, b, names, 2)
        }
        Node::Sub(a, b) => {
            write_prec(f, a, names, 1)?;
            write!(f, " - ")?;
            write_prec(f, b, names, 2)
        }
        Node::Mul(a, b) => {
            write_prec(f, a, names, 2)?;
            write!(f, "*")?;
            write_prec(f, b, names, 4)
        }
        Node::Div(a, b) => {
            write_prec(f, a, names, 2)?;
            write!(f, "/")?;
            write_prec(f, b, names, 4)
        }
        Node::Neg(a) => {
            write!(f, "-")?;
            // a literal after `-` would fold into the constant on re-parse
            if matches!(**a, Node::Num(_)) {
                write!(f, "(")?;
                write_prec(f, a, names, 0)?;
                write!(f, ")")
            } else {
                write_prec(f, a, names, 5)
            }
        }
        Node::Pow(base, exp) => {
            match **base {
                Node::Num(_) | Node::Var(_) | Node::Unary(..) | Node::Atan2(..) => {
                    write_prec(f, base, names, 0)?;
                }
                _ => {
                    write!(f, "(")?;
                    write_prec(f, base, names, 0)?;
                    write!(f, ")")?;
                }
            }
            write_exponent(f, exp)
        }
        Node::Unary(func, a) => {
            write!(f, "{}(", func.name())?;
            write_prec(f, a, names, 0)?;
            write!(f, ")")
        }
        Node::Atan2(a, b) => {
            write!(f, "atan2(")?;
            write_prec(f, a, names, 0)?;
            write!(f, ", ")?;
            write_prec(f, b, names, 0)?;
            write!(f, ")")
        }
    }
}

fn write_exponent(f: &mut fmt::Formatter<'_>, exp: &Ratio) -> fmt::Result {
    if exp.is_integer() && exp.num() >= 0 {
        write!(f, "^{}", exp.num())
    } else if exp.is_integer() {
        write!(f, "^({})", exp.num())
    } else {
        write!(f, "^({}/{})", exp.num(), exp.den())
    }
}
