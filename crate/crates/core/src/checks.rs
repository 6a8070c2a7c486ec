//! Decision procedures: symmetry, closure, invariance, fiber consistency
//! and projection classification.
//!
//! Every check returns a [`CheckReport`]. Symbolic verdicts mean the
//! simplifier killed the condition exactly; numeric verdicts carry the
//! largest residual seen over the sample set. `Inconclusive` is reserved
//! for situations where a theorem hypothesis fails (rank collapse of the
//! generator set, sampling starvation); the tool must not assert results
//! outside their hypotheses.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{self, ScalarExpr, ZeroVerdict};
use crate::field::{LieBasis, ProjectionMap, VectorField};
use crate::flow::{self, IntegratorConfig};
use crate::sample::{DomainBox, HaltonSampler};

pub const DEFAULT_CLOSURE_SAMPLES: usize = 128;
pub const DEFAULT_N_FIBERS: usize = 16;
/// Group parameters for fiber generation are drawn from this symmetric box.
pub const FIBER_EPS_RANGE: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Symbolic,
    Numeric,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckReport {
    pub verdict: Verdict,
    pub method: Method,
    pub max_residual: f64,
    pub witness: Option<Vec<f64>>,
    pub details: String,
}

impl CheckReport {
    pub fn pass_symbolic(details: impl Into<String>) -> Self {
        CheckReport {
            verdict: Verdict::Pass,
            method: Method::Symbolic,
            max_residual: 0.0,
            witness: None,
            details: details.into(),
        }
    }

    pub fn pass_numeric(max_residual: f64, details: impl Into<String>) -> Self {
        CheckReport {
            verdict: Verdict::Pass,
            method: Method::Numeric,
            max_residual,
            witness: None,
            details: details.into(),
        }
    }

    // a failing report always carries a witness point
    pub fn fail(max_residual: f64, witness: Vec<f64>, details: impl Into<String>) -> Self {
        CheckReport {
            verdict: Verdict::Fail,
            method: Method::Numeric,
            max_residual,
            witness: Some(witness),
            details: details.into(),
        }
    }

    pub fn inconclusive(witness: Option<Vec<f64>>, details: impl Into<String>) -> Self {
        CheckReport {
            verdict: Verdict::Inconclusive,
            method: Method::Numeric,
            max_residual: f64::NAN,
            witness,
            details: details.into(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProjectionClass {
    TrivialDynamics,
    NontrivialDynamics,
}

/// Aggregates per-expression zero verdicts into one report.
fn aggregate_zero_checks(
    labeled: Vec<(String, ZeroVerdict)>,
    pass_detail: &str,
) -> CheckReport {
    let mut all_symbolic = true;
    let mut max_abs = 0.0f64;
    for (label, verdict) in &labeled {
        match verdict {
            ZeroVerdict::ZeroSymbolic => {}
            ZeroVerdict::ZeroNumeric { max_abs: m } => {
                all_symbolic = false;
                max_abs = max_abs.max(*m);
            }
            ZeroVerdict::NonZero { point, value } => {
                return CheckReport::fail(
                    value.abs(),
                    point.clone(),
                    format!("{label} is nonzero ({value:.6e})"),
                );
            }
        }
    }
    if all_symbolic {
        CheckReport::pass_symbolic(format!("{pass_detail} (symbolically zero)"))
    } else {
        CheckReport::pass_numeric(max_abs, format!("{pass_detail} (numerically zero)"))
    }
}

/// Infinitesimal symmetry criterion: w generates a symmetry of the system
/// driven by v exactly when [v, w] = 0.
pub fn is_symmetry(
    v: &VectorField,
    w: &VectorField,
    domain: &DomainBox,
    tol: f64,
    seed: u64,
) -> Result<CheckReport> {
    let bracket = v.lie_bracket(w)?;
    let mut labeled = Vec::new();
    for (alpha, comp) in bracket.components().iter().enumerate() {
        let verdict = expr::is_zero(comp, domain, tol, seed)?;
        labeled.push((
            format!("bracket component [v,w]^{}", v.coords().name(alpha)),
            verdict,
        ));
    }
    Ok(aggregate_zero_checks(labeled, "[v, w] = 0"))
}

/// Closure condition [v, 𝔤] ⊆ 𝔤, tested pointwise: at each sample the
/// bracket [v, w_i] must lie in the span of the generator values. Point
/// dependent coefficients are accepted.
pub fn closure_check(
    v: &VectorField,
    g: &LieBasis,
    domain: &DomainBox,
    n_samples: usize,
    tol: f64,
    seed: u64,
) -> Result<CheckReport> {
    if v.coords() != g.coords() {
        return Err(Error::CoordMismatch(
            "field and generators live on different coordinates".into(),
        ));
    }
    let brackets = g
        .generators()
        .iter()
        .map(|w| v.lie_bracket(w))
        .collect::<Result<Vec<_>>>()?;

    let points = sample_points(domain, n_samples, seed, |x| {
        g.value_matrix(x).is_ok() && brackets.iter().all(|b| b.eval(x).is_ok())
    })?;

    let rank_tol = 1e-10;
    let results: Vec<Result<PointOutcome>> = points
        .par_iter()
        .map(|x| closure_at_point(x, g, &brackets, rank_tol))
        .collect();

    let mut max_rel = 0.0f64;
    for (x, r) in points.iter().zip(results) {
        match r? {
            PointOutcome::RankCollapse => {
                return Ok(CheckReport::inconclusive(
                    Some(x.clone()),
                    "generator values are rank deficient at a sample point (regularity violated)",
                ));
            }
            PointOutcome::Residual(rel) => {
                if rel >= tol {
                    return Ok(CheckReport::fail(
                        rel,
                        x.clone(),
                        "[v, w_i] leaves the span of the generators",
                    ));
                }
                max_rel = max_rel.max(rel);
            }
        }
    }
    Ok(CheckReport::pass_numeric(
        max_rel,
        format!(
            "[v, g] stayed in span(g) at {} sample points",
            points.len()
        ),
    ))
}

enum PointOutcome {
    RankCollapse,
    Residual(f64),
}

fn closure_at_point(
    x: &[f64],
    g: &LieBasis,
    brackets: &[VectorField],
    rank_tol: f64,
) -> Result<PointOutcome> {
    let w = g.value_matrix(x)?;
    let svd = w.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let rank = if smax == 0.0 {
        0
    } else {
        svd.singular_values.iter().filter(|s| **s > rank_tol * smax).count()
    };
    if rank < g.len() {
        return Ok(PointOutcome::RankCollapse);
    }
    let mut worst = 0.0f64;
    for b in brackets {
        let bx = nalgebra::DVector::from_vec(b.eval(x)?);
        let coeffs = svd.solve(&bx, rank_tol * smax.max(1.0)).map_err(|e| {
            Error::Numerical(format!("least squares solve failed: {e}"))
        })?;
        let residual = (&w * coeffs - &bx).norm();
        // relative residual; brackets can be large or tiny depending on scaling
        let rel = residual / (1.0 + bx.norm());
        worst = worst.max(rel);
    }
    Ok(PointOutcome::Residual(worst))
}

/// G-invariance of the projection: w_i(π^α) = 0 for every generator and
/// component.
pub fn invariance_check(
    pi: &ProjectionMap,
    g: &LieBasis,
    domain: &DomainBox,
    tol: f64,
    seed: u64,
) -> Result<CheckReport> {
    if pi.source() != g.coords() {
        return Err(Error::CoordMismatch(
            "projection and generators live on different coordinates".into(),
        ));
    }
    let mut labeled = Vec::new();
    for (i, w) in g.generators().iter().enumerate() {
        for (alpha, comp) in pi.components().iter().enumerate() {
            let e = w.apply(comp)?;
            let verdict = expr::is_zero(&e, domain, tol, seed)?;
            labeled.push((format!("w_{i}(pi^{alpha})"), verdict));
        }
    }
    Ok(aggregate_zero_checks(labeled, "w_i(pi) = 0 for all generators"))
}

/// Direct test of the fiber condition: points connected by group flows must
/// have equal pushforwards. Requires `invariance_check` to have passed so
/// that orbits actually lie inside fibers.
#[allow(clippy::too_many_arguments)]
pub fn fiber_consistency_check(
    pi: &ProjectionMap,
    v: &VectorField,
    g: &LieBasis,
    domain: &DomainBox,
    n_fibers: usize,
    tol: f64,
    seed: u64,
    cfg: &IntegratorConfig,
) -> Result<CheckReport> {
    use rand::Rng;
    use rand::SeedableRng;

    if pi.source() != v.coords() || pi.source() != g.coords() {
        return Err(Error::CoordMismatch(
            "projection, field and generators must share coordinates".into(),
        ));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut sampler = HaltonSampler::new(domain.dim(), seed)?;

    // pre-generate (base point, fiber mate) pairs sequentially for determinism
    let mut pairs: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(n_fibers);
    let mut attempts = 0usize;
    let max_attempts = n_fibers.saturating_mul(10);
    while pairs.len() < n_fibers && attempts < max_attempts {
        attempts += 1;
        let x = sampler.next_point(domain);
        if !pi.guards_ok(&x).unwrap_or(false) {
            continue;
        }
        let eps: Vec<f64> = (0..g.len())
            .map(|_| rng.random_range(-FIBER_EPS_RANGE..FIBER_EPS_RANGE))
            .collect();
        let y = match flow::group_flow(g, &eps, &x, cfg) {
            Ok(y) => y,
            Err(_) => continue,
        };
        // resample when the flow escapes the domain or its chart
        if !domain.contains(&y) || !pi.guards_ok(&y).unwrap_or(false) {
            continue;
        }
        pairs.push((x, y));
    }
    if pairs.len() < n_fibers {
        return Ok(CheckReport::inconclusive(
            None,
            format!(
                "could not generate {n_fibers} fiber pairs inside the domain ({} found in {attempts} attempts)",
                pairs.len()
            ),
        ));
    }

    let residuals: Vec<Result<f64>> = pairs
        .par_iter()
        .map(|(x, y)| {
            let px = pi.pushforward(v, x)?;
            let py = pi.pushforward(v, y)?;
            let d: f64 = px
                .iter()
                .zip(&py)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            Ok(d)
        })
        .collect();

    let mut max_res = 0.0f64;
    for ((x, _), r) in pairs.iter().zip(residuals) {
        let d = r?;
        if d >= tol {
            return Ok(CheckReport::fail(
                d,
                x.clone(),
                "pushforward differs between fiber mates",
            ));
        }
        max_res = max_res.max(d);
    }
    Ok(CheckReport::pass_numeric(
        max_res,
        format!("pushforwards agreed on {} fibers", pairs.len()),
    ))
}

/// Distinguishes projections onto invariants of the motion (π_*(v) = 0
/// everywhere) from projections carrying genuine coarse dynamics.
pub fn classify_projection(
    pi: &ProjectionMap,
    v: &VectorField,
    domain: &DomainBox,
    n_samples: usize,
    tol: f64,
    seed: u64,
) -> Result<ProjectionClass> {
    let points = sample_points(domain, n_samples, seed, |x| {
        pi.guards_ok(x).unwrap_or(false) && pi.pushforward(v, x).is_ok()
    })?;
    for x in &points {
        let p = pi.pushforward(v, x)?;
        if p.iter().any(|c| c.abs() >= tol) {
            return Ok(ProjectionClass::NontrivialDynamics);
        }
    }
    Ok(ProjectionClass::TrivialDynamics)
}

/// First-integral test: v(F) = 0 on the domain.
pub fn first_integral_check(
    f: &ScalarExpr,
    v: &VectorField,
    domain: &DomainBox,
    tol: f64,
    seed: u64,
) -> Result<CheckReport> {
    let e = v.apply(f)?;
    let verdict = expr::is_zero(&e, domain, tol, seed)?;
    Ok(aggregate_zero_checks(
        vec![("v(F)".to_string(), verdict)],
        "v(F) = 0",
    ))
}

/// Samples points of the domain accepted by `usable`, failing when more
/// than 90% of attempts are rejected.
fn sample_points(
    domain: &DomainBox,
    n: usize,
    seed: u64,
    usable: impl Fn(&[f64]) -> bool,
) -> Result<Vec<Vec<f64>>> {
    let mut sampler = HaltonSampler::new(domain.dim(), seed)?;
    let mut points = Vec::with_capacity(n);
    let mut attempts = 0usize;
    let max_attempts = n.saturating_mul(10);
    while points.len() < n && attempts < max_attempts {
        attempts += 1;
        let x = sampler.next_point(domain);
        if usable(&x) {
            points.push(x);
        }
    }
    if points.len() < n {
        return Err(Error::Sampling {
            hits: points.len(),
            attempts,
        });
    }
    Ok(points)
}
