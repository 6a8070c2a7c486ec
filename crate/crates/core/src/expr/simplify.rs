//! Rule-based conservative normalizer.
//!
//! The normal form is a flattened sum of signed terms, each a coefficient
//! times a sorted product of `base^rational` factors. Products and sums are
//! rebuilt left-associatively, so printing a normal form and re-parsing it
//! yields a structurally identical tree. Sums are never distributed over
//! products; anything the rules cannot kill is left for numeric zero testing.

use super::{Node, Ratio, UnaryFn};
use std::cmp::Ordering;

pub(super) fn normalize(n: &Node) -> Node {
    match n {
        Node::Num(c) => Node::Num(canonical_num(*c)),
        Node::Var(i) => Node::Var(*i),
        Node::Unary(f, a) => {
            let a = normalize(a);
            if let Node::Num(c) = a {
                if let Some(v) = fold_unary(*f, c) {
                    return Node::Num(canonical_num(v));
                }
            }
            Node::Unary(*f, a.into())
        }
        Node::Atan2(a, b) => {
            let a = normalize(a);
            let b = normalize(b);
            if let (Node::Num(x), Node::Num(y)) = (&a, &b) {
                return Node::Num(canonical_num(x.atan2(*y)));
            }
            Node::Atan2(a.into(), b.into())
        }
        _ => {
            let mut terms = Vec::new();
            collect_terms(n, 1.0, &mut terms);
            rebuild_sum(merge_terms(terms))
        }
    }
}

fn canonical_num(c: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else {
        c
    }
}

fn fold_unary(f: UnaryFn, c: f64) -> Option<f64> {
    let v = match f {
        UnaryFn::Sin => c.sin(),
        UnaryFn::Cos => c.cos(),
        UnaryFn::Tan => c.tan(),
        UnaryFn::Exp => c.exp(),
        UnaryFn::Log => c.ln(),
        UnaryFn::Abs => c.abs(),
        UnaryFn::Sqrt => c.sqrt(),
        UnaryFn::Atan => c.atan(),
    };
    v.is_finite().then_some(v)
}

struct Term {
    coef: f64,
    factors: Vec<(Node, Ratio)>,
}

fn collect_terms(n: &Node, sign: f64, out: &mut Vec<Term>) {
    match n {
        Node::Add(a, b) => {
            collect_terms(a, sign, out);
            collect_terms(b, sign, out);
        }
        Node::Sub(a, b) => {
            collect_terms(a, sign, out);
            collect_terms(b, -sign, out);
        }
        Node::Neg(a) => collect_terms(a, -sign, out),
        other => {
            let mut term = Term {
                coef: sign,
                factors: Vec::new(),
            };
            collect_factors(other, Ratio::ONE, &mut term);
            term.factors.sort_by(|a, b| node_cmp(&a.0, &b.0).then(a.1.cmp_value(&b.1)));
            merge_factor_exponents(&mut term);
            // a lone sum factor under a unit coefficient is part of this
            // sum, not a product; splice it so rebuilds stay stable
            if term.factors.len() == 1
                && term.factors[0].1 == Ratio::ONE
                && (term.coef == 1.0 || term.coef == -1.0)
                && matches!(term.factors[0].0, Node::Add(..) | Node::Sub(..))
            {
                let inner = term.factors.pop().unwrap().0;
                collect_terms(&inner, term.coef, out);
                return;
            }
            out.push(term);
        }
    }
}

// `exp` is always an integer ratio here; fractional exponents go through
// push_base, which only recurses with integer exponents.
fn collect_factors(n: &Node, exp: Ratio, t: &mut Term) {
    debug_assert!(exp.is_integer());
    match n {
        Node::Mul(a, b) => {
            collect_factors(a, exp, t);
            collect_factors(b, exp, t);
        }
        Node::Div(a, b) => {
            collect_factors(a, exp, t);
            collect_factors(b, -exp, t);
        }
        Node::Neg(a) => {
            if exp.num() % 2 != 0 {
                t.coef = -t.coef;
            }
            collect_factors(a, exp, t);
        }
        Node::Pow(b, r) => push_base(normalize(b), exp * *r, t),
        Node::Num(c) => push_base(Node::Num(*c), exp, t),
        other => push_base(normalize(other), exp, t),
    }
}

fn push_base(base: Node, e: Ratio, t: &mut Term) {
    if e.is_zero() {
        return;
    }
    if let Node::Num(c) = base {
        if let Some(v) = fold_const_pow(c, e) {
            t.coef *= v;
            return;
        }
        t.factors.push((Node::Num(c), e));
        return;
    }
    if e.is_integer()
        && matches!(
            base,
            Node::Mul(..) | Node::Div(..) | Node::Neg(..) | Node::Pow(..)
        )
    {
        collect_factors(&base, e, t);
    } else {
        t.factors.push((base, e));
    }
}

fn fold_const_pow(c: f64, e: Ratio) -> Option<f64> {
    if e.is_integer() {
        if e.num().abs() <= 300 {
            let v = c.powi(e.num() as i32);
            return v.is_finite().then_some(v);
        }
        None
    } else if c > 0.0 {
        let v = c.powf(e.to_f64());
        v.is_finite().then_some(v)
    } else if c == 0.0 && e.num() > 0 {
        Some(0.0)
    } else {
        None
    }
}

fn merge_factor_exponents(t: &mut Term) {
    let mut merged: Vec<(Node, Ratio)> = Vec::with_capacity(t.factors.len());
    for (base, exp) in t.factors.drain(..) {
        match merged.last_mut() {
            Some((prev, e)) if *prev == base => {
                *e = *e + exp;
            }
            _ => merged.push((base, exp)),
        }
    }
    merged.retain(|(_, e)| !e.is_zero());
    t.factors = merged;
}

fn merge_terms(mut terms: Vec<Term>) -> Vec<Term> {
    terms.sort_by(|a, b| cmp_factor_lists(&a.factors, &b.factors));
    let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
    for term in terms {
        match merged.last_mut() {
            Some(prev) if cmp_factor_lists(&prev.factors, &term.factors) == Ordering::Equal => {
                prev.coef += term.coef;
            }
            _ => merged.push(term),
        }
    }
    merged.retain(|t| t.coef != 0.0);
    merged
}

// constants sort after everything else, so "x + 2" rather than "2 + x"
fn cmp_factor_lists(a: &[(Node, Ratio)], b: &[(Node, Ratio)]) -> Ordering {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return Ordering::Equal,
        (true, false) => return Ordering::Greater,
        (false, true) => return Ordering::Less,
        _ => {}
    }
    for ((na, ea), (nb, eb)) in a.iter().zip(b.iter()) {
        let c = node_cmp(na, nb).then(ea.cmp_value(eb));
        if c != Ordering::Equal {
            return c;
        }
    }
    a.len().cmp(&b.len())
}

fn rebuild_sum(terms: Vec<Term>) -> Node {
    let mut iter = terms.into_iter();
    let first = match iter.next() {
        None => return Node::Num(0.0),
        Some(t) => t,
    };
    let mut acc = rebuild_term(first.coef, &first.factors);
    for t in iter {
        if t.coef < 0.0 {
            acc = Node::Sub(acc.into(), rebuild_term(-t.coef, &t.factors).into());
        } else {
            acc = Node::Add(acc.into(), rebuild_term(t.coef, &t.factors).into());
        }
    }
    acc
}

fn rebuild_term(coef: f64, factors: &[(Node, Ratio)]) -> Node {
    if factors.is_empty() {
        return Node::Num(canonical_num(coef));
    }
    let negative = coef < 0.0;
    let mag = coef.abs();

    let mut numerator: Vec<Node> = Vec::new();
    let mut denominator: Vec<Node> = Vec::new();
    for (base, exp) in factors {
        if exp.num() > 0 {
            numerator.push(factor_node(base, *exp));
        } else {
            denominator.push(factor_node(base, -*exp));
        }
    }
    if mag != 1.0 || numerator.is_empty() {
        numerator.insert(0, Node::Num(mag));
    }
    if negative {
        let head = numerator.remove(0);
        let signed = match head {
            Node::Num(c) => Node::Num(-c),
            other => Node::Neg(other.into()),
        };
        numerator.insert(0, signed);
    }
    let num_chain = mul_chain(numerator);
    if denominator.is_empty() {
        num_chain
    } else {
        Node::Div(num_chain.into(), mul_chain(denominator).into())
    }
}

fn factor_node(base: &Node, exp: Ratio) -> Node {
    if exp == Ratio::ONE {
        base.clone()
    } else {
        Node::Pow(base.clone().into(), exp)
    }
}

fn mul_chain(nodes: Vec<Node>) -> Node {
    let mut iter = nodes.into_iter();
    let mut acc = iter.next().expect("chain is nonempty");
    for n in iter {
        acc = Node::Mul(acc.into(), n.into());
    }
    acc
}

// total deterministic order on nodes, used for canonical factor/term sorting
pub(super) fn node_cmp(a: &Node, b: &Node) -> Ordering {
    fn rank(n: &Node) -> u8 {
        match n {
            Node::Num(_) => 0,
            Node::Var(_) => 1,
            Node::Unary(..) => 2,
            Node::Atan2(..) => 3,
            Node::Pow(..) => 4,
            Node::Neg(..) => 5,
            Node::Mul(..) => 6,
            Node::Div(..) => 7,
            Node::Add(..) => 8,
            Node::Sub(..) => 9,
        }
    }
    match (a, b) {
        (Node::Num(x), Node::Num(y)) => x.total_cmp(y),
        (Node::Var(i), Node::Var(j)) => i.cmp(j),
        (Node::Unary(f, x), Node::Unary(g, y)) => (*f as u8).cmp(&(*g as u8)).then_with(|| node_cmp(x, y)),
        (Node::Atan2(x1, y1), Node::Atan2(x2, y2)) => {
            node_cmp(x1, x2).then_with(|| node_cmp(y1, y2))
        }
        (Node::Pow(x, r), Node::Pow(y, s)) => node_cmp(x, y).then(r.cmp_value(s)),
        (Node::Neg(x), Node::Neg(y)) => node_cmp(x, y),
        (Node::Add(x1, y1), Node::Add(x2, y2))
        | (Node::Sub(x1, y1), Node::Sub(x2, y2))
        | (Node::Mul(x1, y1), Node::Mul(x2, y2))
        | (Node::Div(x1, y1), Node::Div(x2, y2)) => {
            node_cmp(x1, x2).then_with(|| node_cmp(y1, y2))
        }
        _ => rank(a).cmp(&rank(b)),
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse, Coords};

    fn simp(src: &str) -> String {
        let c = Coords::new(vec!["x", "y", "z"]).unwrap();
        parse(src, &c).unwrap().simplify().to_string()
    }

    #[test]
    fn identities() {
        assert_eq!(simp("x + 0"), "x");
        assert_eq!(simp("0 + x"), "x");
        assert_eq!(simp("x*1"), "x");
        assert_eq!(simp("x*0"), "0");
        assert_eq!(simp("x^0"), "1");
        assert_eq!(simp("x^1"), "x");
        assert_eq!(simp("x/1"), "x");
        assert_eq!(simp("0/x"), "0");
    }

    #[test]
    fn like_terms_cancel() {
        assert_eq!(simp("x - x"), "0");
        assert_eq!(simp("-y*(2*x) + x*(2*y)"), "0");
        assert_eq!(simp("x*y - y*x"), "0");
    }

    #[test]
    fn exponent_merging() {
        assert_eq!(simp("x*x"), "x^2");
        assert_eq!(simp("x^2/x"), "x");
        assert_eq!(simp("x/y - x*y/y^2"), "0");
        assert_eq!(simp("x^(1/2)*x^(1/2)"), "x");
    }

    #[test]
    fn constant_folding() {
        assert_eq!(simp("2*3 + 1"), "7");
        assert_eq!(simp("sin(0)"), "0");
        assert_eq!(simp("2^3"), "8");
        assert_eq!(simp("x - 2 + 5"), "x + 3");
    }

    #[test]
    fn no_distribution_over_sums() {
        assert_eq!(simp("(x + y)*(x + y)"), "(x + y)^2");
        assert_eq!(simp("(x + y)*z"), "z*(x + y)");
    }

    #[test]
    fn idempotent_on_samples() {
        let c = Coords::new(vec!["x", "y", "z"]).unwrap();
        for src in [
            "x*y - 3/(x - y) + sin(x)^2",
            "-x*y*z + 2*x - atan2(y, x)",
            "(x + 1)^(1/2)/x^3",
            "exp(x)*exp(x) - y",
        ] {
            let once = parse(src, &c).unwrap().simplify();
            let twice = once.simplify();
            assert_eq!(once, twice, "simplify not idempotent on `{src}`");
        }
    }
}
