//! Symbolic differentiation. Results are normalized by the caller.

use super::{Node, Ratio, UnaryFn};

pub(super) fn diff_node(n: &Node, var: usize) -> Node {
    match n {
        Node::Num(_) => Node::Num(0.0),
        Node::Var(i) => Node::Num(if *i == var { 1.0 } else { 0.0 }),
        Node::Add(a, b) => Node::Add(diff_node(a, var).into(), diff_node(b, var).into()),
        Node::Sub(a, b) => Node::Sub(diff_node(a, var).into(), diff_node(b, var).into()),
        Node::Mul(a, b) => {
            // (uv)' = u'v + uv'
            let left = Node::Mul(diff_node(a, var).into(), b.clone());
            let right = Node::Mul(a.clone(), diff_node(b, var).into());
            Node::Add(left.into(), right.into())
        }
        Node::Div(a, b) => {
            // (u/v)' = (u'v - uv')/v^2
            let num = Node::Sub(
                Node::Mul(diff_node(a, var).into(), b.clone()).into(),
                Node::Mul(a.clone(), diff_node(b, var).into()).into(),
            );
            Node::Div(num.into(), Node::Pow(b.clone(), Ratio::integer(2)).into())
        }
        Node::Pow(base, exp) => {
            // (u^r)' = r u^(r-1) u'
            if exp.is_zero() {
                return Node::Num(0.0);
            }
            let down = *exp - Ratio::ONE;
            Node::Mul(
                Node::Mul(
                    Node::Num(exp.to_f64()).into(),
                    Node::Pow(base.clone(), down).into(),
                )
                .into(),
                diff_node(base, var).into(),
            )
        }
        Node::Neg(a) => Node::Neg(diff_node(a, var).into()),
        Node::Unary(f, a) => {
            // log(|u|)' is u'/u on its domain, same as log(u)'
            if let (UnaryFn::Log, Node::Unary(UnaryFn::Abs, u)) = (f, a.as_ref()) {
                return Node::Div(diff_node(u, var).into(), u.clone());
            }
            let da = diff_node(a, var);
            diff_unary(*f, a, da)
        }
        Node::Atan2(y, x) => {
            // d atan2(y, x) = (x dy - y dx) / (x^2 + y^2)
            let num = Node::Sub(
                Node::Mul(x.clone(), diff_node(y, var).into()).into(),
                Node::Mul(y.clone(), diff_node(x, var).into()).into(),
            );
            let den = Node::Add(
                Node::Pow(x.clone(), Ratio::integer(2)).into(),
                Node::Pow(y.clone(), Ratio::integer(2)).into(),
            );
            Node::Div(num.into(), den.into())
        }
    }
}

fn diff_unary(f: UnaryFn, a: &Node, da: Node) -> Node {
    match f {
        UnaryFn::Sin => Node::Mul(Node::Unary(UnaryFn::Cos, a.clone().into()).into(), da.into()),
        UnaryFn::Cos => Node::Neg(
            Node::Mul(Node::Unary(UnaryFn::Sin, a.clone().into()).into(), da.into()).into(),
        ),
        UnaryFn::Tan => Node::Div(
            da.into(),
            Node::Pow(
                Node::Unary(UnaryFn::Cos, a.clone().into()).into(),
                Ratio::integer(2),
            )
            .into(),
        ),
        UnaryFn::Exp => Node::Mul(Node::Unary(UnaryFn::Exp, a.clone().into()).into(), da.into()),
        UnaryFn::Log => Node::Div(da.into(), a.clone().into()),
        UnaryFn::Abs => Node::Mul(
            Node::Div(a.clone().into(), Node::Unary(UnaryFn::Abs, a.clone().into()).into()).into(),
            da.into(),
        ),
        UnaryFn::Sqrt => Node::Div(
            da.into(),
            Node::Mul(
                Node::Num(2.0).into(),
                Node::Unary(UnaryFn::Sqrt, a.clone().into()).into(),
            )
            .into(),
        ),
        UnaryFn::Atan => Node::Div(
            da.into(),
            Node::Add(
                Node::Num(1.0).into(),
                Node::Pow(a.clone().into(), Ratio::integer(2)).into(),
            )
            .into(),
        ),
    }
}
