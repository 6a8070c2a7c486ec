//! Numerical quotient map construction by canonicalization onto a
//! cross-section.
//!
//! The quotient map is represented procedurally rather than in closed form:
//! a point is flowed along the group generators until it hits the section
//! (Newton iteration on the flow parameters), and chart expressions are read
//! off at the representative. Two points map to the same chart value exactly
//! when they lie on the same orbit, which is the defining property of the
//! quotient projection.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::checks::CheckReport;
use crate::error::{Error, Result};
use crate::expr::{Coords, ScalarExpr};
use crate::field::{Guard, LieBasis};
use crate::flow::{group_flow, IntegratorConfig};
use crate::sample::{DomainBox, HaltonSampler};

pub const DEFAULT_NEWTON_TOL: f64 = 1e-10;
pub const DEFAULT_NEWTON_MAX_ITER: usize = 50;
/// Finite-difference step for the Newton Jacobian ∂s/∂ε.
const JACOBIAN_FD_STEP: f64 = 1e-6;
/// Newton restart offsets, used when the zero start has a singular Jacobian
/// or converges to a root outside the section guards.
const NEWTON_PROBES: [f64; 7] = [0.0, 0.4, -0.4, 0.9, -0.9, 1.7, -1.7];

/// A cross-section of the group orbits: the zero set of k constraint
/// expressions, with n = m − k chart expressions read off on the section and
/// a validity box limiting where canonicalization may start. Guards select a
/// branch when an orbit crosses the constraint set more than once (a section
/// `{y = 0, x > 0}` carries the guard `x > 0`).
#[derive(Clone, Debug)]
pub struct CrossSection {
    coords: Coords,
    constraints: Vec<ScalarExpr>,
    chart: Vec<ScalarExpr>,
    validity: DomainBox,
    guards: Vec<Guard>,
}

impl CrossSection {
    pub fn new(
        coords: Coords,
        constraints: Vec<ScalarExpr>,
        chart: Vec<ScalarExpr>,
        validity: DomainBox,
    ) -> Result<Self> {
        let m = coords.len();
        let k = constraints.len();
        if k == 0 {
            return Err(Error::Config("a cross-section needs at least one constraint".into()));
        }
        if k >= m {
            return Err(Error::TrivialQuotient(format!(
                "{k} constraints on a {m}-dimensional space leave no chart coordinates"
            )));
        }
        if chart.len() != m - k {
            return Err(Error::Dimension(format!(
                "expected {} chart expressions, got {}",
                m - k,
                chart.len()
            )));
        }
        if validity.dim() != m {
            return Err(Error::Dimension(
                "validity box dimension differs from the coordinate count".into(),
            ));
        }
        for e in constraints.iter().chain(chart.iter()) {
            if e.coords() != &coords {
                return Err(Error::CoordMismatch(
                    "section expression declared on different coordinates".into(),
                ));
            }
        }
        Ok(CrossSection {
            coords,
            constraints,
            chart,
            validity,
            guards: Vec::new(),
        })
    }

    pub fn with_guards(mut self, guards: Vec<Guard>) -> Self {
        self.guards = guards;
        self
    }

    pub fn guards_ok(&self, x: &[f64]) -> Result<bool> {
        for g in &self.guards {
            if !g.satisfied(x)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn parse(
        coords: &Coords,
        constraints: &[&str],
        chart: &[&str],
        validity: DomainBox,
    ) -> Result<Self> {
        let cons = constraints
            .iter()
            .map(|s| crate::expr::parse(s, coords))
            .collect::<Result<Vec<_>>>()?;
        let ch = chart
            .iter()
            .map(|s| crate::expr::parse(s, coords))
            .collect::<Result<Vec<_>>>()?;
        CrossSection::new(coords.clone(), cons, ch, validity)
    }

    pub fn coords(&self) -> &Coords {
        &self.coords
    }

    pub fn constraint_dim(&self) -> usize {
        self.constraints.len()
    }

    pub fn chart_dim(&self) -> usize {
        self.chart.len()
    }

    pub fn validity(&self) -> &DomainBox {
        &self.validity
    }

    pub fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.constraints.iter().map(|s| s.eval_slice(x)).collect()
    }

    pub fn chart_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.chart.iter().map(|c| c.eval_slice(x)).collect()
    }

    /// Transversality matrix [w_i(s_j)] at a point; orbits cross the section
    /// cleanly where this is nonsingular.
    pub fn transversality_matrix(&self, g: &LieBasis, x: &[f64]) -> Result<DMatrix<f64>> {
        if g.coords() != &self.coords {
            return Err(Error::CoordMismatch(
                "generators and section live on different coordinates".into(),
            ));
        }
        let k = self.constraint_dim();
        if g.len() != k {
            return Err(Error::Dimension(format!(
                "{} generators but {} section constraints",
                g.len(),
                k
            )));
        }
        let mut m = DMatrix::zeros(k, k);
        for (j, s) in self.constraints.iter().enumerate() {
            for (i, w) in g.generators().iter().enumerate() {
                m[(j, i)] = w.apply(s)?.eval_slice(x)?;
            }
        }
        Ok(m)
    }

    /// Smallest singular value of the transversality matrix at `x`.
    pub fn transversality_margin(&self, g: &LieBasis, x: &[f64]) -> Result<f64> {
        let m = self.transversality_matrix(g, x)?;
        let svd = m.svd(false, false);
        Ok(svd.singular_values.min())
    }
}

/// Flows `x` along group combinations until the section constraints vanish.
/// Returns the orbit representative and the parameters used.
pub fn canonicalize(
    g: &LieBasis,
    sec: &CrossSection,
    x: &[f64],
    tol: f64,
    max_iter: usize,
    cfg: &IntegratorConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if g.coords() != sec.coords() {
        return Err(Error::CoordMismatch(
            "generators and section live on different coordinates".into(),
        ));
    }
    let k = g.len();
    if k != sec.constraint_dim() {
        return Err(Error::Dimension(format!(
            "{} generators but {} section constraints",
            k,
            sec.constraint_dim()
        )));
    }
    if !sec.validity().contains(x) {
        return Err(Error::ChartViolation { point: x.to_vec() });
    }

    let f_of = |eps: &[f64]| -> Result<DVector<f64>> {
        let y = group_flow(g, eps, x, cfg)?;
        Ok(DVector::from_vec(sec.residual(&y)?))
    };

    // restart from a few probe offsets: the zero start can sit where the
    // transversality matrix is singular, and guarded sections need the
    // branch the guards select
    let mut last_err = Error::NewtonDiverged {
        residual: f64::NAN,
        iterations: 0,
    };
    for &probe in &NEWTON_PROBES {
        let eps0 = vec![probe; k];
        match newton_solve(&f_of, eps0, tol, max_iter) {
            Ok(eps) => {
                let point = group_flow(g, &eps, x, cfg)?;
                if sec.guards_ok(&point)? {
                    return Ok((point, eps));
                }
                last_err = Error::ChartViolation { point };
            }
            Err(e) => last_err = e,
        }
    }
    Err(last_err)
}

fn newton_solve(
    f_of: &dyn Fn(&[f64]) -> Result<DVector<f64>>,
    mut eps: Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let k = eps.len();
    let mut f = f_of(&eps)?;
    for iteration in 0..=max_iter {
        if f.amax() < tol {
            return Ok(eps);
        }
        if iteration == max_iter {
            break;
        }
        // finite-difference Jacobian ∂s/∂ε
        let mut jac = DMatrix::zeros(k, k);
        for j in 0..k {
            let mut ep = eps.clone();
            let mut em = eps.clone();
            ep[j] += JACOBIAN_FD_STEP;
            em[j] -= JACOBIAN_FD_STEP;
            let fp = f_of(&ep)?;
            let fm = f_of(&em)?;
            for i in 0..k {
                jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * JACOBIAN_FD_STEP);
            }
        }
        let lu = jac.lu();
        let delta = lu.solve(&(-&f)).ok_or(Error::NewtonDiverged {
            residual: f.amax(),
            iterations: iteration,
        })?;

        // damped update: halve the step until the residual improves
        let mut lambda = 1.0;
        let mut improved = false;
        for _ in 0..25 {
            let trial: Vec<f64> = eps
                .iter()
                .zip(delta.iter())
                .map(|(e, d)| e + lambda * d)
                .collect();
            match f_of(&trial) {
                Ok(ft) if ft.amax() < f.amax() * (1.0 - 1e-4 * lambda) || ft.amax() < tol => {
                    eps = trial;
                    f = ft;
                    improved = true;
                    break;
                }
                _ => lambda *= 0.5,
            }
        }
        if !improved {
            return Err(Error::NewtonDiverged {
                residual: f.amax(),
                iterations: iteration + 1,
            });
        }
    }
    Err(Error::NewtonDiverged {
        residual: f.amax(),
        iterations: max_iter,
    })
}

/// Chart coordinates of the orbit representative of `x`.
pub fn quotient_map(
    g: &LieBasis,
    sec: &CrossSection,
    x: &[f64],
    tol: f64,
    max_iter: usize,
    cfg: &IntegratorConfig,
) -> Result<Vec<f64>> {
    let (rep, _) = canonicalize(g, sec, x, tol, max_iter, cfg)?;
    sec.chart_values(&rep)
}

/// Checks constancy of the quotient map along the generator directions by
/// finite differences: |q(Φ_{δe_i}(x)) − q(x)|/δ must stay below tolerance.
#[allow(clippy::too_many_arguments)]
pub fn verify_quotient_invariance(
    g: &LieBasis,
    sec: &CrossSection,
    domain: &DomainBox,
    n_samples: usize,
    tol: f64,
    seed: u64,
    cfg: &IntegratorConfig,
) -> Result<CheckReport> {
    const DELTA: f64 = 1e-4;
    let mut sampler = HaltonSampler::new(domain.dim(), seed)?;
    let mut points = Vec::with_capacity(n_samples);
    let mut attempts = 0usize;
    while points.len() < n_samples && attempts < n_samples * 10 {
        attempts += 1;
        let x = sampler.next_point(domain);
        if sec.validity().contains(&x) {
            points.push(x);
        }
    }
    if points.is_empty() {
        return Ok(CheckReport::inconclusive(
            None,
            "no sample points inside the section validity box",
        ));
    }

    let outcomes: Vec<Result<(f64, Vec<f64>)>> = points
        .par_iter()
        .map(|x| {
            let q0 = quotient_map(g, sec, x, DEFAULT_NEWTON_TOL, DEFAULT_NEWTON_MAX_ITER, cfg)?;
            let mut worst = 0.0f64;
            for i in 0..g.len() {
                let mut eps = vec![0.0; g.len()];
                eps[i] = DELTA;
                let moved = group_flow(g, &eps, x, cfg)?;
                let q1 =
                    quotient_map(g, sec, &moved, DEFAULT_NEWTON_TOL, DEFAULT_NEWTON_MAX_ITER, cfg)?;
                let diff = q0
                    .iter()
                    .zip(&q1)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
                    / DELTA;
                worst = worst.max(diff);
            }
            Ok((worst, x.clone()))
        })
        .collect();

    let mut max_rate = 0.0f64;
    for o in outcomes {
        let (rate, x) = o?;
        if rate >= tol {
            return Ok(CheckReport::fail(
                rate,
                x,
                "quotient map varies along a generator direction",
            ));
        }
        max_rate = max_rate.max(rate);
    }
    Ok(CheckReport::pass_numeric(
        max_rate,
        format!("quotient map orbit-constant at {} samples", points.len()),
    ))
}

/// Pairwise chart-overlap consistency: on sampled points where both sections
/// apply, the two numerically constructed quotient maps must induce the same
/// partition. Same-orbit pairs must agree in both charts and separated
/// orbits must stay separated in both.
#[allow(clippy::too_many_arguments)]
pub fn section_overlap_check(
    g: &LieBasis,
    sec_a: &CrossSection,
    sec_b: &CrossSection,
    overlap: &DomainBox,
    n_samples: usize,
    tol: f64,
    seed: u64,
    cfg: &IntegratorConfig,
) -> Result<CheckReport> {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut sampler = HaltonSampler::new(overlap.dim(), seed)?;

    let mut checked = 0usize;
    let mut attempts = 0usize;
    let mut max_dev = 0.0f64;
    while checked < n_samples && attempts < n_samples * 10 {
        attempts += 1;
        let x = sampler.next_point(overlap);
        if !(sec_a.validity().contains(&x) && sec_b.validity().contains(&x)) {
            continue;
        }
        let eps: Vec<f64> = (0..g.len()).map(|_| rng.random_range(-0.3..0.3)).collect();
        let y = match group_flow(g, &eps, &x, cfg) {
            Ok(y) => y,
            Err(_) => continue,
        };
        if !(sec_a.validity().contains(&y) && sec_b.validity().contains(&y)) {
            continue;
        }
        let qa_x = quotient_map(g, sec_a, &x, DEFAULT_NEWTON_TOL, DEFAULT_NEWTON_MAX_ITER, cfg)?;
        let qa_y = quotient_map(g, sec_a, &y, DEFAULT_NEWTON_TOL, DEFAULT_NEWTON_MAX_ITER, cfg)?;
        let qb_x = quotient_map(g, sec_b, &x, DEFAULT_NEWTON_TOL, DEFAULT_NEWTON_MAX_ITER, cfg)?;
        let qb_y = quotient_map(g, sec_b, &y, DEFAULT_NEWTON_TOL, DEFAULT_NEWTON_MAX_ITER, cfg)?;
        let da = norm_diff(&qa_x, &qa_y);
        let db = norm_diff(&qb_x, &qb_y);
        // same orbit: both charts must see the same point
        if da >= tol || db >= tol {
            return Ok(CheckReport::fail(
                da.max(db),
                x,
                "charts disagree on an orbit in the overlap region",
            ));
        }
        max_dev = max_dev.max(da.max(db));
        checked += 1;
    }
    if checked < n_samples {
        return Ok(CheckReport::inconclusive(
            None,
            format!("only {checked} usable overlap samples in {attempts} attempts"),
        ));
    }
    Ok(CheckReport::pass_numeric(
        max_dev,
        format!("charts agree on {checked} overlap orbits"),
    ))
}

fn norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
