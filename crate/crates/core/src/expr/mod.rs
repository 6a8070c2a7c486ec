//! Symbolic scalar expressions over named coordinates.
//!
//! This is the expression kernel used everywhere else in the crate: vector
//! field components, projection components, cross-section constraints and
//! first-integral candidates are all [`ScalarExpr`] values. The operation set
//! is deliberately small (arithmetic, rational powers and a fixed list of
//! elementary functions), which keeps symbolic differentiation closed and the
//! simplifier predictable.
//!
//! Expressions are immutable after construction. Every symbol in a tree is an
//! index into a shared [`Coords`] list, so evaluation works on plain `&[f64]`
//! slices in coordinate order.
//!
//! The simplifier is rule based and conservative: constant folding, 0/1
//! identities, exponent merging within products and like-term merging within
//! sums. Anything it cannot reduce to the literal constant `0` can still be
//! tested for zero numerically via [`is_zero`].

mod compile;
mod diff;
mod eval;
mod parse;
mod print;
mod simplify;
mod zero;

pub use compile::CompiledExpr;
pub use zero::{is_zero, is_zero_with, ZeroVerdict, DEFAULT_ZERO_SAMPLES, DEFAULT_ZERO_TOL};

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Ordered list of coordinate names shared by expressions and fields.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Coords {
    names: Arc<Vec<String>>,
}

impl Coords {
    pub fn new<S: Into<String>>(names: Vec<S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::Config("coordinate list must be nonempty".into()));
        }
        for (i, n) in names.iter().enumerate() {
            if !is_valid_symbol(n) {
                return Err(Error::Config(format!("invalid coordinate name `{n}`")));
            }
            if names[..i].contains(n) {
                return Err(Error::Config(format!("duplicate coordinate name `{n}`")));
            }
        }
        Ok(Coords {
            names: Arc::new(names),
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

fn is_valid_symbol(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Reduced rational number used for exponents.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Ratio {
    num: i64,
    den: i64, // > 0
}

impl Ratio {
    pub const ZERO: Ratio = Ratio { num: 0, den: 1 };
    pub const ONE: Ratio = Ratio { num: 1, den: 1 };

    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::Config("rational exponent with zero denominator".into()));
        }
        Ok(Self::reduced(num, den))
    }

    fn reduced(num: i64, den: i64) -> Self {
        debug_assert!(den != 0);
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()).max(1) as i64;
        let (mut num, mut den) = (num / g, den / g);
        if den < 0 {
            num = -num;
            den = -den;
        }
        Ratio { num, den }
    }

    pub fn integer(n: i64) -> Self {
        Ratio { num: n, den: 1 }
    }

    pub fn num(&self) -> i64 {
        self.num
    }

    pub fn den(&self) -> i64 {
        self.den
    }

    pub fn is_integer(&self) -> bool {
        self.den == 1
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn cmp_value(&self, other: &Ratio) -> std::cmp::Ordering {
        (self.num as i128 * other.den as i128).cmp(&(other.num as i128 * self.den as i128))
    }
}

impl std::ops::Add for Ratio {
    type Output = Ratio;
    fn add(self, other: Ratio) -> Ratio {
        Self::reduced(self.num * other.den + other.num * self.den, self.den * other.den)
    }
}

impl std::ops::Sub for Ratio {
    type Output = Ratio;
    fn sub(self, other: Ratio) -> Ratio {
        Self::reduced(self.num * other.den - other.num * self.den, self.den * other.den)
    }
}

impl std::ops::Mul for Ratio {
    type Output = Ratio;
    fn mul(self, other: Ratio) -> Ratio {
        Self::reduced(self.num * other.num, self.den * other.den)
    }
}

impl std::ops::Neg for Ratio {
    type Output = Ratio;
    fn neg(self) -> Ratio {
        Ratio {
            num: -self.num,
            den: self.den,
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Elementary unary functions.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum UnaryFn {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Abs,
    Sqrt,
    Atan,
}

impl UnaryFn {
    pub fn name(&self) -> &'static str {
        match self {
            UnaryFn::Sin => "sin",
            UnaryFn::Cos => "cos",
            UnaryFn::Tan => "tan",
            UnaryFn::Exp => "exp",
            UnaryFn::Log => "log",
            UnaryFn::Abs => "abs",
            UnaryFn::Sqrt => "sqrt",
            UnaryFn::Atan => "atan",
        }
    }

    pub fn from_name(name: &str) -> Option<UnaryFn> {
        match name {
            "sin" => Some(UnaryFn::Sin),
            "cos" => Some(UnaryFn::Cos),
            "tan" => Some(UnaryFn::Tan),
            "exp" => Some(UnaryFn::Exp),
            "log" => Some(UnaryFn::Log),
            "abs" => Some(UnaryFn::Abs),
            "sqrt" => Some(UnaryFn::Sqrt),
            "atan" => Some(UnaryFn::Atan),
            _ => None,
        }
    }
}

/// Expression tree node. `Var` indices refer to a [`Coords`] list.
#[derive(Clone, PartialEq, Debug)]
pub enum Node {
    Num(f64),
    Var(usize),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Ratio),
    Neg(Box<Node>),
    Unary(UnaryFn, Box<Node>),
    Atan2(Box<Node>, Box<Node>),
}

impl Node {
    pub(crate) fn max_var(&self) -> Option<usize> {
        match self {
            Node::Num(_) => None,
            Node::Var(i) => Some(*i),
            Node::Add(a, b)
            | Node::Sub(a, b)
            | Node::Mul(a, b)
            | Node::Div(a, b)
            | Node::Atan2(a, b) => match (a.max_var(), b.max_var()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
            Node::Pow(a, _) | Node::Neg(a) | Node::Unary(_, a) => a.max_var(),
        }
    }

    /// Replaces `Var(i)` by `Var(map[i])`.
    pub(crate) fn remap_vars(&self, map: &[usize]) -> Node {
        match self {
            Node::Num(c) => Node::Num(*c),
            Node::Var(i) => Node::Var(map[*i]),
            Node::Add(a, b) => Node::Add(a.remap_vars(map).into(), b.remap_vars(map).into()),
            Node::Sub(a, b) => Node::Sub(a.remap_vars(map).into(), b.remap_vars(map).into()),
            Node::Mul(a, b) => Node::Mul(a.remap_vars(map).into(), b.remap_vars(map).into()),
            Node::Div(a, b) => Node::Div(a.remap_vars(map).into(), b.remap_vars(map).into()),
            Node::Pow(a, r) => Node::Pow(a.remap_vars(map).into(), *r),
            Node::Neg(a) => Node::Neg(a.remap_vars(map).into()),
            Node::Unary(f, a) => Node::Unary(*f, a.remap_vars(map).into()),
            Node::Atan2(a, b) => Node::Atan2(a.remap_vars(map).into(), b.remap_vars(map).into()),
        }
    }

    /// Replaces `Var(i)` by `subs[&i]` where present.
    pub(crate) fn substitute(&self, subs: &HashMap<usize, Node>) -> Node {
        match self {
            Node::Num(c) => Node::Num(*c),
            Node::Var(i) => subs.get(i).cloned().unwrap_or(Node::Var(*i)),
            Node::Add(a, b) => Node::Add(a.substitute(subs).into(), b.substitute(subs).into()),
            Node::Sub(a, b) => Node::Sub(a.substitute(subs).into(), b.substitute(subs).into()),
            Node::Mul(a, b) => Node::Mul(a.substitute(subs).into(), b.substitute(subs).into()),
            Node::Div(a, b) => Node::Div(a.substitute(subs).into(), b.substitute(subs).into()),
            Node::Pow(a, r) => Node::Pow(a.substitute(subs).into(), *r),
            Node::Neg(a) => Node::Neg(a.substitute(subs).into()),
            Node::Unary(f, a) => Node::Unary(*f, a.substitute(subs).into()),
            Node::Atan2(a, b) => Node::Atan2(a.substitute(subs).into(), b.substitute(subs).into()),
        }
    }
}

/// Immutable symbolic expression over a shared coordinate list.
#[derive(Clone, PartialEq, Debug)]
pub struct ScalarExpr {
    coords: Coords,
    root: Node,
}

impl ScalarExpr {
    /// Wraps a raw node, checking that all variable indices are declared.
    pub fn from_node(coords: Coords, root: Node) -> Result<Self> {
        if let Some(mx) = root.max_var() {
            if mx >= coords.len() {
                return Err(Error::CoordMismatch(format!(
                    "expression references coordinate index {mx}, but only {} are declared",
                    coords.len()
                )));
            }
        }
        Ok(ScalarExpr { coords, root })
    }

    pub fn constant(coords: Coords, value: f64) -> Self {
        ScalarExpr {
            coords,
            root: Node::Num(value),
        }
    }

    pub fn coordinate(coords: Coords, name: &str) -> Result<Self> {
        let idx = coords
            .index_of(name)
            .ok_or_else(|| Error::UnboundSymbol { name: name.into() })?;
        Ok(ScalarExpr {
            coords,
            root: Node::Var(idx),
        })
    }

    pub fn coords(&self) -> &Coords {
        &self.coords
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Evaluates at a point given as a slice in coordinate order.
    pub fn eval_slice(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.coords.len() {
            return Err(Error::Dimension(format!(
                "expected {} coordinate values, got {}",
                self.coords.len(),
                values.len()
            )));
        }
        eval::eval_node(&self.root, values, 0.0)
    }

    /// Evaluates at a point where some denominator magnitudes below
    /// `sing_tol` are treated as singular. Used by the numeric zero test.
    pub(crate) fn eval_guarded(&self, values: &[f64], sing_tol: f64) -> Result<f64> {
        eval::eval_node(&self.root, values, sing_tol)
    }

    /// Evaluates at a point given as a name → value binding.
    pub fn evaluate(&self, binding: &HashMap<String, f64>) -> Result<f64> {
        let mut values = Vec::with_capacity(self.coords.len());
        for name in self.coords.names() {
            match binding.get(name) {
                Some(v) => values.push(*v),
                None => return Err(Error::UnboundSymbol { name: name.clone() }),
            }
        }
        self.eval_slice(&values)
    }

    /// Exact symbolic partial derivative with respect to a declared coordinate.
    pub fn differentiate(&self, symbol: &str) -> Result<ScalarExpr> {
        let idx = self.coords.index_of(symbol).ok_or_else(|| Error::UnboundSymbol {
            name: symbol.into(),
        })?;
        Ok(self.differentiate_index(idx))
    }

    pub fn differentiate_index(&self, index: usize) -> ScalarExpr {
        let d = diff::diff_node(&self.root, index);
        ScalarExpr {
            coords: self.coords.clone(),
            root: simplify::normalize(&d),
        }
    }

    /// Rule-based conservative normal form.
    pub fn simplify(&self) -> ScalarExpr {
        ScalarExpr {
            coords: self.coords.clone(),
            root: simplify::normalize(&self.root),
        }
    }

    /// True when simplification reduces the expression to the constant 0.
    pub fn is_zero_symbolic(&self) -> bool {
        matches!(simplify::normalize(&self.root), Node::Num(c) if c == 0.0)
    }

    /// Flattens the tree into a postfix program for fast repeated evaluation.
    pub fn compile(&self) -> CompiledExpr {
        compile::compile(&self.root)
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print::write_node(f, &self.root, self.coords.names())
    }
}

/// Parses an expression string against a declared coordinate list.
pub fn parse(text: &str, coords: &Coords) -> Result<ScalarExpr> {
    let root = parse::parse_node(text, coords)?;
    Ok(ScalarExpr {
        coords: coords.clone(),
        root,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy() -> Coords {
        Coords::new(vec!["x", "y"]).unwrap()
    }

    #[test]
    fn parse_builds_expected_trees() {
        let c = xy();
        let e = parse("x^2 + y", &c).unwrap();
        assert_eq!(
            e.root(),
            &Node::Add(
                Box::new(Node::Pow(Box::new(Node::Var(0)), Ratio::integer(2))),
                Box::new(Node::Var(1)),
            )
        );
        let e = parse("-y", &c).unwrap();
        assert_eq!(e.root(), &Node::Neg(Box::new(Node::Var(1))));
        // well-formed nonlinear expression
        parse("x*log(abs(x))", &c).unwrap();
    }

    #[test]
    fn parse_rejects_undeclared_symbols() {
        let c = xy();
        match parse("x + z", &c) {
            Err(Error::UndeclaredSymbol { name, .. }) => assert_eq!(name, "z"),
            other => panic!("expected undeclared-symbol error, got {other:?}"),
        }
    }

    #[test]
    fn parse_reports_syntax_error_position() {
        let c = xy();
        match parse("x + * y", &c) {
            Err(Error::Syntax { position, .. }) => assert_eq!(position, 4),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn evaluate_basic_cases() {
        let c = xy();
        let e = parse("sin(x)", &c).unwrap();
        assert_eq!(e.eval_slice(&[0.0, 0.0]).unwrap(), 0.0);
        let e = parse("x^2 + y^2", &c).unwrap();
        assert_eq!(e.eval_slice(&[3.0, 4.0]).unwrap(), 25.0);
    }

    #[test]
    fn evaluate_singular_denominator_is_domain_error() {
        let c = xy();
        let e = parse("x/y", &c).unwrap();
        assert!(matches!(e.eval_slice(&[1.0, 0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn evaluate_unbound_symbol_is_reported() {
        let c = xy();
        let e = parse("x + y", &c).unwrap();
        let mut binding = HashMap::new();
        binding.insert("x".to_string(), 1.0);
        assert!(matches!(
            e.evaluate(&binding),
            Err(Error::UnboundSymbol { .. })
        ));
    }

    #[test]
    fn differentiate_product_rule_base_case() {
        let c = xy();
        let e = parse("x*y", &c).unwrap();
        let d = e.differentiate("x").unwrap();
        assert_eq!(d.root(), &Node::Var(1));
    }

    #[test]
    fn differentiate_sum_of_squares() {
        let c = xy();
        let e = parse("x^2 + y^2", &c).unwrap();
        let d = e.differentiate("x").unwrap();
        assert_eq!(d.to_string(), "2*x");
    }

    #[test]
    fn differentiate_log_abs() {
        let c = xy();
        let e = parse("log(abs(x))", &c).unwrap();
        let d = e.differentiate("x").unwrap();
        assert_eq!(d.to_string(), "1/x");
    }

    #[test]
    fn print_then_parse_is_structurally_stable() {
        let c = xy();
        for src in [
            "x^2 + y",
            "-y",
            "x*log(abs(x))",
            "x - 2*y + 3",
            "atan2(y, x)",
            "x^(1/2)*y^(-2)",
            "(x + y)^3/(x - y)",
        ] {
            let e = parse(src, &c).unwrap().simplify();
            let round = parse(&e.to_string(), &c).unwrap();
            assert_eq!(round, e, "round trip failed for `{src}` printed `{e}`");
        }
    }

    #[test]
    fn coordinate_lists_are_validated() {
        assert!(Coords::new(Vec::<String>::new()).is_err());
        assert!(Coords::new(vec!["x", "x"]).is_err());
        assert!(Coords::new(vec!["2x"]).is_err());
        assert!(Coords::new(vec!["x", "y_dot", "_tmp"]).is_ok());
    }

    #[test]
    fn expressions_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<ScalarExpr>();
        assert_send_sync::<Coords>();
    }

    #[test]
    fn ratio_arithmetic_reduces() {
        let r = Ratio::new(2, 4).unwrap();
        assert_eq!((r.num(), r.den()), (1, 2));
        let r = Ratio::new(1, -2).unwrap();
        assert_eq!((r.num(), r.den()), (-1, 2));
        assert_eq!(r + Ratio::new(1, 2).unwrap(), Ratio::ZERO);
        assert_eq!(
            Ratio::new(1, 3).unwrap() * Ratio::integer(6),
            Ratio::integer(2)
        );
    }
}
