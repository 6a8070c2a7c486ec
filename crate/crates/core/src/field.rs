//! Vector fields, projection maps, Lie brackets and first prolongation.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::expr::{self, Coords, Node, ScalarExpr};

/// A vector field Σ η^α ∂/∂x^α on coordinates `coords`. Only autonomous
/// fields are representable: components may reference the coordinates and
/// nothing else.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    coords: Coords,
    components: Vec<ScalarExpr>,
}

impl VectorField {
    pub fn new(coords: Coords, components: Vec<ScalarExpr>) -> Result<Self> {
        if components.len() != coords.len() {
            return Err(Error::Dimension(format!(
                "{} components for {} coordinates",
                components.len(),
                coords.len()
            )));
        }
        for c in &components {
            if c.coords() != &coords {
                return Err(Error::CoordMismatch(
                    "component expression declared on different coordinates".into(),
                ));
            }
        }
        Ok(VectorField { coords, components })
    }

    /// Parses one expression string per component.
    pub fn parse(coords: &Coords, components: &[&str]) -> Result<Self> {
        let exprs = components
            .iter()
            .map(|s| expr::parse(s, coords))
            .collect::<Result<Vec<_>>>()?;
        Self::new(coords.clone(), exprs)
    }

    pub fn coords(&self) -> &Coords {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[ScalarExpr] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &ScalarExpr {
        &self.components[i]
    }

    pub fn zero(coords: Coords) -> Self {
        let components = (0..coords.len())
            .map(|_| ScalarExpr::constant(coords.clone(), 0.0))
            .collect();
        VectorField { coords, components }
    }

    pub fn negated(&self) -> Self {
        let components = self
            .components
            .iter()
            .map(|c| {
                ScalarExpr::from_node(self.coords.clone(), Node::Neg(c.root().clone().into()))
                    .expect("same coords")
                    .simplify()
            })
            .collect();
        VectorField {
            coords: self.coords.clone(),
            components,
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.components.iter().map(|c| c.eval_slice(x)).collect()
    }

    /// Directional derivative w(F) = Σ η^β ∂F/∂x^β, simplified.
    pub fn apply(&self, f: &ScalarExpr) -> Result<ScalarExpr> {
        if f.coords() != &self.coords {
            return Err(Error::CoordMismatch(
                "scalar is declared on different coordinates".into(),
            ));
        }
        let mut acc = Node::Num(0.0);
        for (beta, eta) in self.components.iter().enumerate() {
            let df = f.differentiate_index(beta);
            acc = Node::Add(
                acc.into(),
                Node::Mul(eta.root().clone().into(), df.root().clone().into()).into(),
            );
        }
        Ok(ScalarExpr::from_node(self.coords.clone(), acc)?.simplify())
    }

    /// Lie bracket [v, w]^α = v(w^α) − w(v^α).
    pub fn lie_bracket(&self, other: &VectorField) -> Result<VectorField> {
        if self.coords != other.coords {
            return Err(Error::CoordMismatch(
                "bracket requires identical coordinates".into(),
            ));
        }
        let components = (0..self.dim())
            .map(|alpha| {
                let a = self.apply(&other.components[alpha])?;
                let b = other.apply(&self.components[alpha])?;
                Ok(
                    ScalarExpr::from_node(
                        self.coords.clone(),
                        Node::Sub(a.root().clone().into(), b.root().clone().into()),
                    )?
                    .simplify(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        VectorField::new(self.coords.clone(), components)
    }
}

/// Chart guard relations. Guards are strict inequalities on a scalar
/// expression; `NonZero` uses a small magnitude floor so evaluation near the
/// excluded set is also refused.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GuardRel {
    NonZero,
    Positive,
    Negative,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Guard {
    expr: ScalarExpr,
    rel: GuardRel,
}

const GUARD_NONZERO_FLOOR: f64 = 1e-12;

impl Guard {
    pub fn new(expr: ScalarExpr, rel: GuardRel) -> Self {
        Guard { expr, rel }
    }

    /// Parses `"<expr> != 0"`, `"<expr> > 0"` or `"<expr> < 0"`.
    pub fn parse(text: &str, coords: &Coords) -> Result<Self> {
        let (lhs, rel) = if let Some(p) = text.find("!=") {
            (&text[..p], GuardRel::NonZero)
        } else if let Some(p) = text.find('>') {
            (&text[..p], GuardRel::Positive)
        } else if let Some(p) = text.find('<') {
            (&text[..p], GuardRel::Negative)
        } else {
            return Err(Error::Config(format!(
                "guard `{text}` must contain `!=`, `>` or `<`"
            )));
        };
        let rhs_start = match rel {
            GuardRel::NonZero => text.find("!=").unwrap() + 2,
            _ => text.find(['>', '<']).unwrap() + 1,
        };
        let rhs = text[rhs_start..].trim();
        if rhs != "0" {
            return Err(Error::Config(format!(
                "guard `{text}` must compare against 0"
            )));
        }
        Ok(Guard::new(expr::parse(lhs.trim(), coords)?, rel))
    }

    pub fn satisfied(&self, x: &[f64]) -> Result<bool> {
        let v = self.expr.eval_slice(x)?;
        Ok(match self.rel {
            GuardRel::NonZero => v.abs() > GUARD_NONZERO_FLOOR,
            GuardRel::Positive => v > 0.0,
            GuardRel::Negative => v < 0.0,
        })
    }
}

/// A smooth map π: R^m → R^n, n ≤ m, given componentwise by expressions in
/// the source coordinates. Guards restrict the chart domain; `angular`
/// marks target coordinates that live on a circle so residuals compare
/// modulo 2π.
#[derive(Clone, Debug)]
pub struct ProjectionMap {
    source: Coords,
    target: Coords,
    components: Vec<ScalarExpr>,
    jacobian: Vec<Vec<ScalarExpr>>,
    guards: Vec<Guard>,
    angular: Vec<bool>,
}

impl ProjectionMap {
    pub fn new(source: Coords, target: Coords, components: Vec<ScalarExpr>) -> Result<Self> {
        if components.len() != target.len() {
            return Err(Error::Dimension(format!(
                "{} components for {} target coordinates",
                components.len(),
                target.len()
            )));
        }
        if target.len() > source.len() {
            return Err(Error::Dimension(format!(
                "target dimension {} exceeds source dimension {}",
                target.len(),
                source.len()
            )));
        }
        for c in &components {
            if c.coords() != &source {
                return Err(Error::CoordMismatch(
                    "projection component declared on different coordinates".into(),
                ));
            }
        }
        let jacobian = components
            .iter()
            .map(|c| (0..source.len()).map(|j| c.differentiate_index(j)).collect())
            .collect();
        let n = components.len();
        Ok(ProjectionMap {
            source,
            target,
            components,
            jacobian,
            guards: Vec::new(),
            angular: vec![false; n],
        })
    }

    pub fn parse(source: &Coords, target: &Coords, components: &[&str]) -> Result<Self> {
        let exprs = components
            .iter()
            .map(|s| expr::parse(s, source))
            .collect::<Result<Vec<_>>>()?;
        Self::new(source.clone(), target.clone(), exprs)
    }

    pub fn with_guards(mut self, guards: Vec<Guard>) -> Self {
        self.guards = guards;
        self
    }

    pub fn with_angular(mut self, angular: Vec<bool>) -> Result<Self> {
        if angular.len() != self.components.len() {
            return Err(Error::Dimension(
                "angular flags must match target dimension".into(),
            ));
        }
        self.angular = angular;
        Ok(self)
    }

    pub fn source(&self) -> &Coords {
        &self.source
    }

    pub fn target(&self) -> &Coords {
        &self.target
    }

    pub fn components(&self) -> &[ScalarExpr] {
        &self.components
    }

    pub fn source_dim(&self) -> usize {
        self.source.len()
    }

    pub fn target_dim(&self) -> usize {
        self.components.len()
    }

    pub fn guards(&self) -> &[Guard] {
        &self.guards
    }

    pub fn guards_ok(&self, x: &[f64]) -> Result<bool> {
        for g in &self.guards {
            if !g.satisfied(x)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn require_chart(&self, x: &[f64]) -> Result<()> {
        if self.guards_ok(x)? {
            Ok(())
        } else {
            Err(Error::ChartViolation { point: x.to_vec() })
        }
    }

    /// Evaluates π(x); refuses points outside the chart guards.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.require_chart(x)?;
        self.components.iter().map(|c| c.eval_slice(x)).collect()
    }

    /// Numeric Jacobian Dπ(x) from the symbolic partials.
    pub fn jacobian_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.require_chart(x)?;
        let (n, m) = (self.target_dim(), self.source_dim());
        let mut j = DMatrix::zeros(n, m);
        for (i, row) in self.jacobian.iter().enumerate() {
            for (k, e) in row.iter().enumerate() {
                j[(i, k)] = e.eval_slice(x)?;
            }
        }
        Ok(j)
    }

    /// Pushforward π_*(v|_x) = Dπ(x)·v(x).
    pub fn pushforward(&self, v: &VectorField, x: &[f64]) -> Result<Vec<f64>> {
        if v.coords() != &self.source {
            return Err(Error::CoordMismatch(
                "field lives on different coordinates than the projection source".into(),
            ));
        }
        let j = self.jacobian_at(x)?;
        let vx = nalgebra::DVector::from_vec(v.eval(x)?);
        Ok((j * vx).iter().copied().collect())
    }

    /// Rank of the numeric Jacobian at `x` (singular values above
    /// `tol`·σ_max count).
    pub fn rank_at(&self, x: &[f64], tol: f64) -> Result<usize> {
        let j = self.jacobian_at(x)?;
        let svd = j.svd(false, false);
        let smax = svd.singular_values.max();
        if smax == 0.0 {
            return Ok(0);
        }
        Ok(svd.singular_values.iter().filter(|s| **s > tol * smax).count())
    }

    /// Fraction of sampled chart points where the Jacobian has full rank n.
    /// The constant-rank hypothesis asks for ≥ 0.95.
    pub fn full_rank_fraction(
        &self,
        domain: &crate::sample::DomainBox,
        n_samples: usize,
        tol: f64,
        seed: u64,
    ) -> Result<f64> {
        let mut sampler = crate::sample::HaltonSampler::new(self.source_dim(), seed)?;
        let mut ok = 0usize;
        let mut seen = 0usize;
        let mut attempts = 0usize;
        while seen < n_samples && attempts < n_samples * 10 {
            attempts += 1;
            let x = sampler.next_point(domain);
            if !self.guards_ok(&x).unwrap_or(false) {
                continue;
            }
            match self.rank_at(&x, tol) {
                Ok(r) => {
                    seen += 1;
                    if r == self.target_dim() {
                        ok += 1;
                    }
                }
                Err(Error::Domain(_)) => continue,
                Err(e) => return Err(e),
            }
        }
        if seen == 0 {
            return Err(Error::Sampling { hits: 0, attempts });
        }
        Ok(ok as f64 / seen as f64)
    }

    /// Componentwise distance on the target, comparing angular coordinates
    /// along the shortest arc.
    pub fn target_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), self.target_dim());
        debug_assert_eq!(b.len(), self.target_dim());
        let mut sum = 0.0;
        for i in 0..a.len() {
            let d = if self.angular[i] {
                angle_diff(a[i], b[i])
            } else {
                a[i] - b[i]
            };
            sum += d * d;
        }
        sum.sqrt()
    }

    /// Identity chart on the given coordinates.
    pub fn identity(coords: &Coords) -> Result<Self> {
        let components = (0..coords.len())
            .map(|i| ScalarExpr::from_node(coords.clone(), Node::Var(i)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(coords.clone(), coords.clone(), components)
    }
}

/// Shortest-arc difference of two angles.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut d = (a - b) % two_pi;
    if d > std::f64::consts::PI {
        d -= two_pi;
    } else if d < -std::f64::consts::PI {
        d += two_pi;
    }
    d
}

/// Ordered set of k vector fields spanning a Lie algebra of generators.
#[derive(Clone, Debug)]
pub struct LieBasis {
    coords: Coords,
    generators: Vec<VectorField>,
}

impl LieBasis {
    pub fn new(generators: Vec<VectorField>) -> Result<Self> {
        let first = generators
            .first()
            .ok_or_else(|| Error::Config("a Lie basis needs at least one generator".into()))?;
        let coords = first.coords().clone();
        for g in &generators {
            if g.coords() != &coords {
                return Err(Error::CoordMismatch(
                    "generators live on different coordinates".into(),
                ));
            }
        }
        Ok(LieBasis { coords, generators })
    }

    pub fn coords(&self) -> &Coords {
        &self.coords
    }

    /// Number of generators k.
    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[VectorField] {
        &self.generators
    }

    pub fn generator(&self, i: usize) -> &VectorField {
        &self.generators[i]
    }

    /// m×k matrix whose columns are the generator values at x.
    pub fn value_matrix(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let m = self.coords.len();
        let k = self.len();
        let mut w = DMatrix::zeros(m, k);
        for (i, g) in self.generators.iter().enumerate() {
            let col = g.eval(x)?;
            for (r, v) in col.iter().enumerate() {
                w[(r, i)] = *v;
            }
        }
        Ok(w)
    }

    /// True when the generators are linearly independent at x (regular
    /// action hypothesis).
    pub fn regular_at(&self, x: &[f64], tol: f64) -> Result<bool> {
        let w = self.value_matrix(x)?;
        let svd = w.svd(false, false);
        let smax = svd.singular_values.max();
        if smax == 0.0 {
            return Ok(false);
        }
        let rank = svd.singular_values.iter().filter(|s| **s > tol * smax).count();
        Ok(rank == self.len())
    }
}

/// A vector field on the first jet space (t, x, ẋ) with zero t-component.
#[derive(Clone, Debug)]
pub struct ProlongedField {
    field: VectorField,
    base_dim: usize,
}

impl ProlongedField {
    pub fn field(&self) -> &VectorField {
        &self.field
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    /// Jet coordinates: t, x¹..x^m, then the velocity coordinates.
    pub fn coords(&self) -> &Coords {
        self.field.coords()
    }
}

/// Builds the jet coordinate list (t, x.., x_dot..) for a base system.
fn jet_coords(base: &Coords) -> Result<Coords> {
    let mut names: Vec<String> = vec!["t".to_string()];
    names.extend(base.names().iter().cloned());
    names.extend(base.names().iter().map(|n| format!("{n}_dot")));
    Coords::new(names).map_err(|_| {
        Error::Config(
            "coordinate names collide with jet coordinates (`t` or `*_dot` already in use)".into(),
        )
    })
}

/// First prolongation of an autonomous field: x-components are copied and
/// the velocity components are Σ_β ẋ^β ∂η^α/∂x^β.
pub fn prolong1(w: &VectorField) -> Result<ProlongedField> {
    let m = w.dim();
    let jet = jet_coords(w.coords())?;
    // base index i maps to jet index i + 1
    let shift: Vec<usize> = (1..=m).collect();

    let mut components = Vec::with_capacity(2 * m + 1);
    components.push(ScalarExpr::constant(jet.clone(), 0.0)); // τ = 0
    for comp in w.components() {
        let node = comp.root().remap_vars(&shift);
        components.push(ScalarExpr::from_node(jet.clone(), node)?);
    }
    for alpha in 0..m {
        let mut acc = Node::Num(0.0);
        for beta in 0..m {
            let d = w.component(alpha).differentiate_index(beta);
            let d_jet = d.root().remap_vars(&shift);
            let xdot_beta = Node::Var(1 + m + beta);
            acc = Node::Add(
                acc.into(),
                Node::Mul(xdot_beta.into(), d_jet.into()).into(),
            );
        }
        components.push(ScalarExpr::from_node(jet.clone(), acc)?.simplify());
    }
    Ok(ProlongedField {
        field: VectorField::new(jet, components)?,
        base_dim: m,
    })
}

/// Applies pr¹w to the system expressions ẋ^k − ξ^k(x) of the field v and
/// substitutes ẋ := ξ(x). The prolongation criterion for autonomous systems
/// says the result equals [v, w]; the property suite checks exactly that.
pub fn prolong_apply_to_system(w: &VectorField, v: &VectorField) -> Result<VectorField> {
    if w.coords() != v.coords() {
        return Err(Error::CoordMismatch(
            "fields live on different coordinates".into(),
        ));
    }
    let m = v.dim();
    let pr = prolong1(w)?;
    let jet = pr.coords().clone();
    let shift: Vec<usize> = (1..=m).collect();

    // substitution ẋ^γ → ξ^γ(x), expressed on jet coordinates
    let mut subs = HashMap::new();
    for gamma in 0..m {
        subs.insert(1 + m + gamma, v.component(gamma).root().remap_vars(&shift));
    }

    // map jet indices back down to base coordinates (t and ẋ must be gone)
    let mut down = vec![usize::MAX; jet.len()];
    for (i, slot) in down.iter_mut().enumerate().skip(1).take(m) {
        *slot = i - 1;
    }

    let mut components = Vec::with_capacity(m);
    for k in 0..m {
        let delta = Node::Sub(
            Node::Var(1 + m + k).into(),
            v.component(k).root().remap_vars(&shift).into(),
        );
        let delta = ScalarExpr::from_node(jet.clone(), delta)?;
        let action = pr.field().apply(&delta)?;
        let substituted = action.root().substitute(&subs);
        let base_node = substituted.remap_vars(&down);
        components.push(ScalarExpr::from_node(v.coords().clone(), base_node)?.simplify());
    }
    VectorField::new(v.coords().clone(), components)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn xy() -> Coords {
        Coords::new(vec!["x", "y"]).unwrap()
    }

    #[test]
    fn apply_kills_scaling_invariant() {
        let c = xy();
        let w = VectorField::parse(&c, &["x", "y"]).unwrap();
        let f = parse("x/y", &c).unwrap();
        assert!(w.apply(&f).unwrap().is_zero_symbolic());
    }

    #[test]
    fn apply_kills_rotation_invariant() {
        let c = xy();
        let v = VectorField::parse(&c, &["-y", "x"]).unwrap();
        let f = parse("x^2 + y^2", &c).unwrap();
        assert!(v.apply(&f).unwrap().is_zero_symbolic());
    }

    #[test]
    fn apply_to_constant_is_zero() {
        let c = xy();
        let w = VectorField::parse(&c, &["x*y", "sin(x)"]).unwrap();
        let f = parse("3.5", &c).unwrap();
        assert!(w.apply(&f).unwrap().is_zero_symbolic());
    }

    #[test]
    fn bracket_with_self_vanishes() {
        let c = xy();
        let v = VectorField::parse(&c, &["-y + x^2", "x*y"]).unwrap();
        let b = v.lie_bracket(&v).unwrap();
        assert!(b.components().iter().all(|e| e.is_zero_symbolic()));
    }

    #[test]
    fn rotation_commutes_with_scaling() {
        let c = xy();
        let v = VectorField::parse(&c, &["-y", "x"]).unwrap();
        let w = VectorField::parse(&c, &["x", "y"]).unwrap();
        let b = v.lie_bracket(&w).unwrap();
        assert!(b.components().iter().all(|e| e.is_zero_symbolic()));
    }

    #[test]
    fn standard_bracket_identity() {
        // [∂x, x∂x] = ∂x
        let c = xy();
        let v = VectorField::parse(&c, &["1", "0"]).unwrap();
        let w = VectorField::parse(&c, &["x", "0"]).unwrap();
        let b = v.lie_bracket(&w).unwrap();
        assert_eq!(b.component(0).to_string(), "1");
        assert!(b.component(1).is_zero_symbolic());
    }

    #[test]
    fn pushforward_of_invariant_is_zero() {
        let c = xy();
        let t = Coords::new(vec!["r2"]).unwrap();
        let pi = ProjectionMap::parse(&c, &t, &["x^2 + y^2"]).unwrap();
        let v = VectorField::parse(&c, &["-y", "x"]).unwrap();
        let p = pi.pushforward(&v, &[1.0, 2.0]).unwrap();
        assert!(p[0].abs() < 1e-14);
    }

    #[test]
    fn pushforward_through_identity_returns_field_value() {
        let c = xy();
        let pi = ProjectionMap::identity(&c).unwrap();
        let v = VectorField::parse(&c, &["x + y", "x*y"]).unwrap();
        let p = pi.pushforward(&v, &[2.0, 3.0]).unwrap();
        assert_eq!(p, vec![5.0, 6.0]);
    }

    #[test]
    fn pushforward_jordan_component() {
        // π = y on (a x + y) ∂x + a y ∂y with a = 1 at (2, 3) gives a·y = 3
        let c = xy();
        let t = Coords::new(vec!["u"]).unwrap();
        let pi = ProjectionMap::parse(&c, &t, &["y"]).unwrap();
        let v = VectorField::parse(&c, &["x + y", "y"]).unwrap();
        let p = pi.pushforward(&v, &[2.0, 3.0]).unwrap();
        assert_eq!(p, vec![3.0]);
    }

    #[test]
    fn guards_refuse_points() {
        let c = xy();
        let t = Coords::new(vec!["q"]).unwrap();
        let guard = Guard::parse("y != 0", &c).unwrap();
        let pi = ProjectionMap::parse(&c, &t, &["x/y"]).unwrap().with_guards(vec![guard]);
        assert!(pi.eval(&[1.0, 2.0]).is_ok());
        assert!(matches!(
            pi.eval(&[1.0, 0.0]),
            Err(Error::ChartViolation { .. })
        ));
    }

    #[test]
    fn prolongation_of_shear_field() {
        // w = x ∂y prolongs to x ∂y + ẋ ∂/∂ẏ
        let c = xy();
        let w = VectorField::parse(&c, &["0", "x"]).unwrap();
        let pr = prolong1(&w).unwrap();
        let names = pr.coords().names();
        assert_eq!(names, &["t", "x", "y", "x_dot", "y_dot"]);
        let f = pr.field();
        assert!(f.component(0).is_zero_symbolic()); // τ = 0
        assert!(f.component(1).is_zero_symbolic());
        assert_eq!(f.component(2).to_string(), "x");
        assert!(f.component(3).is_zero_symbolic()); // d0/dx terms
        assert_eq!(f.component(4).to_string(), "x_dot");
    }

    #[test]
    fn prolongation_of_constant_field_adds_nothing() {
        let c = xy();
        let w = VectorField::parse(&c, &["2", "-1"]).unwrap();
        let pr = prolong1(&w).unwrap();
        let f = pr.field();
        assert!(f.component(3).is_zero_symbolic());
        assert!(f.component(4).is_zero_symbolic());
    }

    #[test]
    fn prolongation_of_euler_field() {
        let c = xy();
        let w = VectorField::parse(&c, &["x", "y"]).unwrap();
        let pr = prolong1(&w).unwrap();
        let f = pr.field();
        assert_eq!(f.component(3).to_string(), "x_dot");
        assert_eq!(f.component(4).to_string(), "y_dot");
    }

    #[test]
    fn prolonged_action_matches_bracket_for_rotation_pair() {
        let c = xy();
        let v = VectorField::parse(&c, &["-y", "x"]).unwrap();
        let w = VectorField::parse(&c, &["x", "y"]).unwrap();
        let act = prolong_apply_to_system(&w, &v).unwrap();
        assert!(act.components().iter().all(|e| e.is_zero_symbolic()));
    }

    #[test]
    fn prolonged_action_of_field_on_itself_vanishes() {
        let c = xy();
        let v = VectorField::parse(&c, &["x^2 - y", "x*y + 1"]).unwrap();
        let act = prolong_apply_to_system(&v, &v).unwrap();
        for e in act.components() {
            let b = crate::sample::DomainBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
            assert!(crate::expr::is_zero(e, &b, 1e-9, 0).unwrap().is_zero());
        }
    }

    #[test]
    fn jet_name_collision_is_an_error() {
        let c = Coords::new(vec!["t", "x"]).unwrap();
        let w = VectorField::parse(&c, &["x", "t"]).unwrap();
        assert!(prolong1(&w).is_err());
    }

    #[test]
    fn field_types_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<VectorField>();
        assert_send_sync::<ProjectionMap>();
        assert_send_sync::<LieBasis>();
    }
}
