//! Numerical integration of flows, fiber generation and trajectory-level
//! commuting-diagram verification.
//!
//! The adaptive integrator is a Dormand–Prince 5(4) embedded pair; the fixed
//! integrator is classical RK4 with `max_step` as its step. Accepted steps
//! keep state and derivative so trajectories interpolate with cubic Hermite
//! polynomials between steps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checks::CheckReport;
use crate::error::{Error, Result};
use crate::expr::CompiledExpr;
use crate::field::{LieBasis, ProjectionMap, VectorField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IntegrationMethod {
    /// Classical RK4 with fixed step `max_step`.
    FixedRk4,
    /// Dormand–Prince 5(4) with embedded error control.
    AdaptiveRk45,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub method: IntegrationMethod,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: IntegrationMethod::AdaptiveRk45,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: f64::INFINITY,
            max_steps: 1_000_000,
        }
    }
}

impl IntegratorConfig {
    fn validate(&self, span: f64) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::Config("integrator tolerances must be positive".into()));
        }
        if self.method == IntegrationMethod::FixedRk4
            && !(self.max_step.is_finite() && self.max_step > 0.0)
        {
            return Err(Error::Config(
                "fixed RK4 uses max_step as its step; it must be finite and positive".into(),
            ));
        }
        if span < 0.0 {
            return Err(Error::Config("integration span must be forward in time".into()));
        }
        Ok(())
    }
}

/// Number of evenly spaced checkpoints used by the diagram residual.
pub const DIAGRAM_CHECKPOINTS: usize = 17;

/// Accepted integration steps of one initial condition, with enough data
/// for dense output.
#[derive(Clone, Debug)]
pub struct Trajectory {
    names: Vec<String>,
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    derivs: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn t0(&self) -> f64 {
        self.times[0]
    }

    pub fn t1(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().unwrap()
    }

    /// Cubic Hermite interpolation between accepted steps.
    pub fn sample(&self, t: f64) -> Result<Vec<f64>> {
        let (t0, t1) = (self.t0(), self.t1());
        if t < t0 - 1e-12 || t > t1 + 1e-12 {
            return Err(Error::Config(format!(
                "sample time {t} outside trajectory span [{t0}, {t1}]"
            )));
        }
        let t = t.clamp(t0, t1);
        if self.times.len() == 1 {
            return Ok(self.states[0].clone());
        }
        // locate the step interval containing t
        let idx = match self.times.binary_search_by(|probe| probe.total_cmp(&t)) {
            Ok(i) => return Ok(self.states[i].clone()),
            Err(i) => i.saturating_sub(1).min(self.times.len() - 2),
        };
        let (ta, tb) = (self.times[idx], self.times[idx + 1]);
        let h = tb - ta;
        let s = (t - ta) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let ya = &self.states[idx];
        let yb = &self.states[idx + 1];
        let fa = &self.derivs[idx];
        let fb = &self.derivs[idx + 1];
        Ok((0..ya.len())
            .map(|i| h00 * ya[i] + h10 * h * fa[i] + h01 * yb[i] + h11 * h * fb[i])
            .collect())
    }

    /// Writes the accepted samples as CSV with header `t,x1,...,xm`.
    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        write!(out, "t")?;
        for n in &self.names {
            write!(out, ",{n}")?;
        }
        writeln!(out)?;
        for (t, state) in self.times.iter().zip(&self.states) {
            write!(out, "{t}")?;
            for v in state {
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

struct CompiledField {
    programs: Vec<CompiledExpr>,
}

impl CompiledField {
    fn new(v: &VectorField) -> Self {
        CompiledField {
            programs: v.components().iter().map(|c| c.compile()).collect(),
        }
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64], stack: &mut Vec<f64>) -> Result<()> {
        for (i, p) in self.programs.iter().enumerate() {
            out[i] = p.eval(x, stack)?;
        }
        Ok(())
    }
}

// Dormand–Prince 5(4) tableau; stage times are not needed for autonomous fields
const DP_A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates ẋ = v(x) from `x0` over `t_span = (t0, t1)`, t1 ≥ t0.
pub fn integrate(
    v: &VectorField,
    x0: &[f64],
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let (t0, t1) = t_span;
    cfg.validate(t1 - t0)?;
    if x0.len() != v.dim() {
        return Err(Error::Dimension(format!(
            "initial state has {} entries for a {}-dimensional field",
            x0.len(),
            v.dim()
        )));
    }
    let field = CompiledField::new(v);
    let names = v.coords().names().to_vec();
    match cfg.method {
        IntegrationMethod::FixedRk4 => integrate_rk4(&field, names, x0, t0, t1, cfg),
        IntegrationMethod::AdaptiveRk45 => integrate_dp45(&field, names, x0, t0, t1, cfg),
    }
}

fn check_finite(y: &[f64], t: f64) -> Result<()> {
    if y.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Blowup { t })
    }
}

fn integrate_rk4(
    field: &CompiledField,
    names: Vec<String>,
    x0: &[f64],
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let dim = x0.len();
    let mut stack = Vec::new();
    let mut y = x0.to_vec();
    let mut f = vec![0.0; dim];
    field.eval_into(&y, &mut f, &mut stack)?;

    let mut traj = Trajectory {
        names,
        times: vec![t0],
        states: vec![y.clone()],
        derivs: vec![f.clone()],
    };
    if t1 == t0 {
        return Ok(traj);
    }

    let n_steps = ((t1 - t0) / cfg.max_step).ceil() as usize;
    if n_steps > cfg.max_steps {
        return Err(Error::StepLimit {
            t: t0,
            max_steps: cfg.max_steps,
        });
    }
    let h = (t1 - t0) / n_steps as f64;
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut tmp = vec![0.0; dim];
    for step in 0..n_steps {
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * h * f[i];
        }
        field.eval_into(&tmp, &mut k2, &mut stack)?;
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        field.eval_into(&tmp, &mut k3, &mut stack)?;
        for i in 0..dim {
            tmp[i] = y[i] + h * k3[i];
        }
        field.eval_into(&tmp, &mut k4, &mut stack)?;
        for i in 0..dim {
            y[i] += h / 6.0 * (f[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t_next = t0 + (step + 1) as f64 * h;
        check_finite(&y, t_next)?;
        field.eval_into(&y, &mut f, &mut stack)?;
        traj.times.push(t_next);
        traj.states.push(y.clone());
        traj.derivs.push(f.clone());
    }
    Ok(traj)
}

fn integrate_dp45(
    field: &CompiledField,
    names: Vec<String>,
    x0: &[f64],
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let dim = x0.len();
    let mut stack = Vec::new();
    let mut y = x0.to_vec();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; dim]; 7];
    field.eval_into(&y, &mut k[0], &mut stack)?;

    let mut traj = Trajectory {
        names,
        times: vec![t0],
        states: vec![y.clone()],
        derivs: vec![k[0].clone()],
    };
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(traj);
    }

    let mut t = t0;
    // initial step guess; the controller corrects it within a few steps
    let f_norm = k[0].iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut h = (0.01 * (1.0 + y.iter().map(|v| v * v).sum::<f64>().sqrt()) / (1.0 + f_norm))
        .min(span / 10.0)
        .min(cfg.max_step)
        .max(1e-12);

    let mut tmp = vec![0.0; dim];
    let mut y5 = vec![0.0; dim];
    let mut steps = 0usize;
    while t < t1 {
        steps += 1;
        if steps > cfg.max_steps {
            return Err(Error::StepLimit {
                t,
                max_steps: cfg.max_steps,
            });
        }
        h = h.min(t1 - t).min(cfg.max_step);
        if h < f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::StepLimit {
                t,
                max_steps: cfg.max_steps,
            });
        }

        let mut eval_failed = false;
        for (stage, a_row) in DP_A.iter().enumerate().skip(1) {
            for i in 0..dim {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(stage) {
                    acc += a_row[j] * kj[i];
                }
                tmp[i] = y[i] + h * acc;
            }
            let (_, tail) = k.split_at_mut(stage);
            match field.eval_into(&tmp, &mut tail[0], &mut stack) {
                Ok(()) => {}
                Err(Error::Domain(_)) | Err(Error::Blowup { .. }) => {
                    eval_failed = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if eval_failed {
            // retreat: the step left the field's domain
            h *= 0.25;
            if h < 1e-15 {
                return Err(Error::Blowup { t });
            }
            continue;
        }

        let mut err_norm = 0.0f64;
        for i in 0..dim {
            let mut v5 = 0.0;
            let mut v4 = 0.0;
            for j in 0..7 {
                v5 += DP_B5[j] * k[j][i];
                v4 += DP_B4[j] * k[j][i];
            }
            y5[i] = y[i] + h * v5;
            let scale = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y5[i].abs());
            let e = h * (v5 - v4) / scale;
            err_norm += e * e;
        }
        err_norm = (err_norm / dim as f64).sqrt();

        if err_norm <= 1.0 {
            t += h;
            // snap to the endpoint so float accumulation cannot leave a
            // sliver step behind
            if t1 - t < 1e-12 * (1.0 + t1.abs()) {
                t = t1;
            }
            check_finite(&y5, t)?;
            y.copy_from_slice(&y5);
            // FSAL: stage 7 is the derivative at the accepted state
            let last = k[6].clone();
            k[0].copy_from_slice(&last);
            traj.times.push(t);
            traj.states.push(y.clone());
            traj.derivs.push(k[0].clone());
        }
        let scale = if err_norm == 0.0 {
            5.0
        } else {
            (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= scale;
    }
    Ok(traj)
}

/// Composition exp(ε₁w₁)∘…∘exp(ε_k w_k)(x₀): the last generator flows
/// first. Negative parameters flow along the negated generator.
pub fn group_flow(
    g: &LieBasis,
    eps: &[f64],
    x0: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<f64>> {
    if eps.len() != g.len() {
        return Err(Error::Dimension(format!(
            "{} parameters for {} generators",
            eps.len(),
            g.len()
        )));
    }
    let mut x = x0.to_vec();
    for (i, &e) in eps.iter().enumerate().rev() {
        if e == 0.0 {
            continue;
        }
        let (field, span) = if e < 0.0 {
            (g.generator(i).negated(), -e)
        } else {
            (g.generator(i).clone(), e)
        };
        let traj = integrate(&field, &x, (0.0, span), cfg)?;
        x = traj.final_state().to_vec();
    }
    Ok(x)
}

/// Trajectory-level commuting diagram: compares π(φ_t(x₀)) against
/// ψ_t(π(x₀)) at evenly spaced checkpoints, and verifies π-relatedness
/// ‖Dπ·v − w(π)‖ pointwise along the lower trajectory.
#[allow(clippy::too_many_arguments)]
pub fn diagram_check(
    v: &VectorField,
    pi: &ProjectionMap,
    w_reduced: &VectorField,
    x0_set: &[Vec<f64>],
    t_final: f64,
    cfg: &IntegratorConfig,
    tol: f64,
) -> Result<CheckReport> {
    if w_reduced.coords() != pi.target() {
        return Err(Error::CoordMismatch(
            "reduced field must live on the projection target coordinates".into(),
        ));
    }
    if x0_set.is_empty() {
        return Err(Error::Config("diagram check needs at least one initial condition".into()));
    }

    let outcomes: Vec<Result<(f64, Vec<f64>)>> = x0_set
        .par_iter()
        .map(|x0| diagram_residual(v, pi, w_reduced, x0, t_final, cfg))
        .collect();

    let mut max_res = 0.0f64;
    let mut worst_point: Option<Vec<f64>> = None;
    for o in outcomes {
        let (r, at) = o?;
        if r > max_res {
            max_res = r;
            worst_point = Some(at);
        }
    }
    if max_res < tol {
        Ok(CheckReport::pass_numeric(
            max_res,
            format!(
                "diagram commutes over [0, {t_final}] at {} checkpoints per trajectory",
                DIAGRAM_CHECKPOINTS
            ),
        ))
    } else {
        Ok(CheckReport::fail(
            max_res,
            worst_point.unwrap_or_default(),
            "projected trajectory departs from the reduced flow",
        ))
    }
}

fn diagram_residual(
    v: &VectorField,
    pi: &ProjectionMap,
    w_reduced: &VectorField,
    x0: &[f64],
    t_final: f64,
    cfg: &IntegratorConfig,
) -> Result<(f64, Vec<f64>)> {
    let lower = integrate(v, x0, (0.0, t_final), cfg)?;
    let y0 = pi.eval(x0)?;
    let upper = integrate(w_reduced, &y0, (0.0, t_final), cfg)?;

    let mut max_res = 0.0f64;
    let mut worst = x0.to_vec();
    for j in 0..DIAGRAM_CHECKPOINTS {
        let t = t_final * j as f64 / (DIAGRAM_CHECKPOINTS - 1) as f64;
        let xl = lower.sample(t)?;
        let projected = pi.eval(&xl)?;
        let reduced = upper.sample(t)?;
        let r = pi.target_distance(&projected, &reduced);

        // π-relatedness at the trajectory sample
        let push = pi.pushforward(v, &xl)?;
        let wv = w_reduced.eval(&projected)?;
        let rel: f64 = push
            .iter()
            .zip(&wv)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();

        let local = r.max(rel);
        if local > max_res {
            max_res = local;
            worst = xl;
        }
    }
    Ok((max_res, worst))
}

/// Largest separation of π along the trajectories of two same-fiber points:
/// sup_t ‖π(φ_t x) − π(φ_t y)‖ over the checkpoint grid. Zero (to
/// tolerance) exactly when the flow respects the fiber structure.
pub fn fiber_divergence(
    v: &VectorField,
    pi: &ProjectionMap,
    x: &[f64],
    y: &[f64],
    t_final: f64,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    let px = pi.eval(x)?;
    let py = pi.eval(y)?;
    if pi.target_distance(&px, &py) > 1e-10 {
        return Err(Error::Config(
            "fiber divergence requires two points on a common fiber".into(),
        ));
    }
    let tx = integrate(v, x, (0.0, t_final), cfg)?;
    let ty = integrate(v, y, (0.0, t_final), cfg)?;
    let mut sup = 0.0f64;
    for j in 0..DIAGRAM_CHECKPOINTS {
        let t = t_final * j as f64 / (DIAGRAM_CHECKPOINTS - 1) as f64;
        let a = pi.eval(&tx.sample(t)?)?;
        let b = pi.eval(&ty.sample(t)?)?;
        sup = sup.max(pi.target_distance(&a, &b));
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Coords;

    fn xy() -> Coords {
        Coords::new(vec!["x", "y"]).unwrap()
    }

    fn circle() -> VectorField {
        VectorField::parse(&xy(), &["-y", "x"]).unwrap()
    }

    #[test]
    fn circle_quarter_turn() {
        let cfg = IntegratorConfig::default();
        let traj = integrate(&circle(), &[1.0, 0.0], (0.0, std::f64::consts::FRAC_PI_2), &cfg)
            .unwrap();
        let end = traj.final_state();
        assert!((end[0]).abs() < 1e-8, "x(π/2) = {}", end[0]);
        assert!((end[1] - 1.0).abs() < 1e-8, "y(π/2) = {}", end[1]);
    }

    #[test]
    fn zero_field_stays_put() {
        let cfg = IntegratorConfig::default();
        let v = VectorField::zero(xy());
        let traj = integrate(&v, &[0.3, -0.7], (0.0, 5.0), &cfg).unwrap();
        assert_eq!(traj.final_state(), &[0.3, -0.7]);
    }

    #[test]
    fn jordan_decay() {
        // ẋ = a x + y, ẏ = a y with a = -0.5: analytic y = e^{at},
        // x = (x0 + t y0) e^{at}
        let cfg = IntegratorConfig::default();
        let v = VectorField::parse(&xy(), &["-0.5*x + y", "-0.5*y"]).unwrap();
        let t = 6.0;
        let traj = integrate(&v, &[1.0, 1.0], (0.0, t), &cfg).unwrap();
        let decay = (-0.5f64 * t).exp();
        let expect = [(1.0 + t) * decay, decay];
        let end = traj.final_state();
        assert!((end[0] - expect[0]).abs() < 1e-9);
        assert!((end[1] - expect[1]).abs() < 1e-9);
    }

    #[test]
    fn blowup_is_detected() {
        let c = Coords::new(vec!["x"]).unwrap();
        let v = VectorField::parse(&c, &["x^2"]).unwrap();
        let cfg = IntegratorConfig {
            max_steps: 20_000,
            ..Default::default()
        };
        let r = integrate(&v, &[1.0], (0.0, 2.0), &cfg);
        assert!(
            matches!(r, Err(Error::Blowup { .. }) | Err(Error::StepLimit { .. })),
            "expected escape, got {r:?}"
        );
    }

    #[test]
    fn group_flow_scaling_and_rotation() {
        let cfg = IntegratorConfig::default();
        let scaling = LieBasis::new(vec![VectorField::parse(&xy(), &["x", "y"]).unwrap()]).unwrap();
        let out = group_flow(&scaling, &[std::f64::consts::LN_2], &[1.0, 1.0], &cfg).unwrap();
        assert!((out[0] - 2.0).abs() < 1e-9 && (out[1] - 2.0).abs() < 1e-9);

        let out = group_flow(&scaling, &[0.0], &[0.4, -0.2], &cfg).unwrap();
        assert_eq!(out, vec![0.4, -0.2]);

        let rotation = LieBasis::new(vec![circle()]).unwrap();
        let out = group_flow(&rotation, &[std::f64::consts::PI], &[1.0, 0.0], &cfg).unwrap();
        assert!((out[0] + 1.0).abs() < 1e-8 && out[1].abs() < 1e-8);
    }

    #[test]
    fn trajectory_csv_header_and_rows() {
        let cfg = IntegratorConfig {
            method: IntegrationMethod::FixedRk4,
            max_step: 0.5,
            ..Default::default()
        };
        let traj = integrate(&circle(), &[1.0, 0.0], (0.0, 1.0), &cfg).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,x,y");
        assert_eq!(lines.count(), traj.len());
    }

    #[test]
    fn jordan_diagram_pass_and_fail() {
        let cfg = IntegratorConfig::default();
        let c = xy();
        let v = VectorField::parse(&c, &["-0.5*x + y", "-0.5*y"]).unwrap();
        let x0s = vec![vec![1.0, 1.0], vec![-0.5, 2.0]];

        // π = y with reduced flow ẏ = -0.5 y commutes
        let ty = Coords::new(vec!["u"]).unwrap();
        let pi_y = ProjectionMap::parse(&c, &ty, &["y"]).unwrap();
        let w = VectorField::parse(&ty, &["-0.5*u"]).unwrap();
        let r = diagram_check(&v, &pi_y, &w, &x0s, 5.0, &cfg, 1e-8).unwrap();
        assert!(r.passed(), "residual {} details {}", r.max_residual, r.details);

        // π = x is not self-contained
        let tx = Coords::new(vec!["u"]).unwrap();
        let pi_x = ProjectionMap::parse(&c, &tx, &["x"]).unwrap();
        let wx = VectorField::parse(&tx, &["-0.5*u"]).unwrap();
        let r = diagram_check(&v, &pi_x, &wx, &x0s, 5.0, &cfg, 1e-8).unwrap();
        assert!(!r.passed());
        assert!(r.witness.is_some());
    }

    #[test]
    fn fiber_divergence_jordan() {
        let cfg = IntegratorConfig::default();
        let c = xy();
        let v = VectorField::parse(&c, &["0.0*x + y", "0.0*y"]).unwrap(); // a = 0
        let ty = Coords::new(vec!["u"]).unwrap();

        let pi_y = ProjectionMap::parse(&c, &ty, &["y"]).unwrap();
        let d = fiber_divergence(&v, &pi_y, &[0.0, 1.0], &[5.0, 1.0], 3.0, &cfg).unwrap();
        assert!(d < 1e-8, "divergence {d}");

        let pi_x = ProjectionMap::parse(&c, &ty, &["x"]).unwrap();
        let d = fiber_divergence(&v, &pi_x, &[1.0, 0.0], &[1.0, 1.0], 1.0, &cfg).unwrap();
        assert!(d > 0.1, "divergence {d}");

        let d = fiber_divergence(&v, &pi_x, &[1.0, 1.0], &[1.0, 1.0], 1.0, &cfg).unwrap();
        assert_eq!(d, 0.0);
    }
}
