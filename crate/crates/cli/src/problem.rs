//! Problem-file ingestion: strict JSON schema plus dimensional validation,
//! then construction of the core objects.

use std::path::Path;

use serde::{Deserialize, Serialize};

use fibermap::{
    Coords, CrossSection, DomainBox, Guard, IntegrationMethod, IntegratorConfig, LieBasis,
    LinearProjection, LinearSystem, ProjectionMap, VectorField,
};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

impl From<fibermap::Error> for ConfigError {
    fn from(e: fibermap::Error) -> Self {
        ConfigError(e.to_string())
    }
}

pub type ConfigResult<T> = Result<T, ConfigError>;

fn field_err<T>(path: &str, message: impl std::fmt::Display) -> ConfigResult<T> {
    Err(ConfigError(format!("{path}: {message}")))
}

/// On-disk problem description. Unknown fields are rejected.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub coords: Vec<String>,
    #[serde(default)]
    pub vector_field: Option<Vec<String>>,
    #[serde(default)]
    pub generators: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub projection: Option<ProjectionSpec>,
    #[serde(default)]
    pub reduced_field: Option<Vec<String>>,
    #[serde(default)]
    pub matrix_a: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub matrix_p: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub sections: Option<Vec<SectionSpec>>,
    pub domain: BoxSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_n_fibers")]
    pub n_fibers: usize,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub integrator: IntegratorSpec,
}

fn default_samples() -> usize {
    128
}

fn default_n_fibers() -> usize {
    16
}

fn default_t_final() -> f64 {
    5.0
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectionSpec {
    pub target_coords: Vec<String>,
    pub components: Vec<String>,
    #[serde(default)]
    pub guards: Vec<String>,
    #[serde(default)]
    pub angular: Option<Vec<bool>>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SectionSpec {
    pub constraints: Vec<String>,
    pub chart: Vec<String>,
    pub validity: BoxSpec,
    #[serde(default)]
    pub guards: Vec<String>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Symbolic/numeric zero tests (symmetry, invariance, first integrals,
    /// classification).
    #[serde(default = "d_zero")]
    pub zero: f64,
    /// Pointwise span membership in the closure check.
    #[serde(default = "d_closure")]
    pub closure: f64,
    /// Pushforward agreement between fiber mates.
    #[serde(default = "d_fiber")]
    pub fiber: f64,
    /// Commuting-diagram residual.
    #[serde(default = "d_diagram")]
    pub diagram: f64,
    /// Kernel invariance and structure-constant residuals.
    #[serde(default = "d_linear")]
    pub linear: f64,
    /// Newton residual for canonicalization onto a section.
    #[serde(default = "d_newton")]
    pub newton: f64,
    /// Orbit constancy of the numerically constructed quotient map.
    #[serde(default = "d_quotient")]
    pub quotient: f64,
}

fn d_zero() -> f64 {
    1e-9
}
fn d_closure() -> f64 {
    1e-8
}
fn d_fiber() -> f64 {
    1e-7
}
fn d_diagram() -> f64 {
    1e-6
}
fn d_linear() -> f64 {
    1e-8
}
fn d_newton() -> f64 {
    1e-10
}
fn d_quotient() -> f64 {
    1e-6
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            zero: d_zero(),
            closure: d_closure(),
            fiber: d_fiber(),
            diagram: d_diagram(),
            linear: d_linear(),
            newton: d_newton(),
            quotient: d_quotient(),
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    #[serde(default = "d_method")]
    pub method: MethodSpec,
    #[serde(default = "d_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "d_abs_tol")]
    pub abs_tol: f64,
    /// Step size for rk4; optional cap for rk45.
    #[serde(default)]
    pub max_step: Option<f64>,
    #[serde(default = "d_max_steps")]
    pub max_steps: usize,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
pub enum MethodSpec {
    #[serde(rename = "rk45")]
    Rk45,
    #[serde(rename = "rk4")]
    Rk4,
}

fn d_method() -> MethodSpec {
    MethodSpec::Rk45
}
fn d_rel_tol() -> f64 {
    1e-10
}
fn d_abs_tol() -> f64 {
    1e-12
}
fn d_max_steps() -> usize {
    1_000_000
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        IntegratorSpec {
            method: d_method(),
            rel_tol: d_rel_tol(),
            abs_tol: d_abs_tol(),
            max_step: None,
            max_steps: d_max_steps(),
        }
    }
}

impl IntegratorSpec {
    pub fn to_config(self) -> ConfigResult<IntegratorConfig> {
        let method = match self.method {
            MethodSpec::Rk45 => IntegrationMethod::AdaptiveRk45,
            MethodSpec::Rk4 => IntegrationMethod::FixedRk4,
        };
        if method == IntegrationMethod::FixedRk4 && self.max_step.is_none() {
            return field_err("integrator.max_step", "rk4 requires an explicit step");
        }
        Ok(IntegratorConfig {
            method,
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step.unwrap_or(f64::INFINITY),
            max_steps: self.max_steps,
        })
    }
}

impl ProblemFile {
    pub fn load(path: &Path) -> ConfigResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        let problem: ProblemFile = serde_path_to_error::deserialize(de)
            .map_err(|e| ConfigError(format!("{}: {e}", e.path())))?;
        problem.validate()?;
        Ok(problem)
    }

    /// Dimensional consistency across all declared objects.
    fn validate(&self) -> ConfigResult<()> {
        let m = self.coords.len();
        if m == 0 {
            return field_err("coords", "must be nonempty");
        }
        if let Some(v) = &self.vector_field {
            if v.len() != m {
                return field_err(
                    "vector_field",
                    format!("expected {m} components, found {}", v.len()),
                );
            }
        }
        if let Some(gens) = &self.generators {
            if gens.is_empty() {
                return field_err("generators", "must be nonempty when present");
            }
            for (i, g) in gens.iter().enumerate() {
                if g.len() != m {
                    return field_err(
                        &format!("generators[{i}]"),
                        format!("expected {m} components, found {}", g.len()),
                    );
                }
            }
        }
        if let Some(p) = &self.projection {
            let n = p.target_coords.len();
            if n == 0 || n > m {
                return field_err(
                    "projection.target_coords",
                    format!("target dimension must be in 1..={m}, found {n}"),
                );
            }
            if p.components.len() != n {
                return field_err(
                    "projection.components",
                    format!("expected {n} components, found {}", p.components.len()),
                );
            }
            if let Some(a) = &p.angular {
                if a.len() != n {
                    return field_err(
                        "projection.angular",
                        format!("expected {n} flags, found {}", a.len()),
                    );
                }
            }
            if let Some(r) = &self.reduced_field {
                if r.len() != n {
                    return field_err(
                        "reduced_field",
                        format!("expected {n} components, found {}", r.len()),
                    );
                }
            }
        }
        if let Some(a) = &self.matrix_a {
            if a.len() != m || a.iter().any(|row| row.len() != m) {
                return field_err("matrix_a", format!("expected an {m}×{m} matrix"));
            }
        }
        if let Some(p) = &self.matrix_p {
            if p.is_empty() || p.iter().any(|row| row.len() != m) {
                return field_err("matrix_p", format!("expected rows of length {m}"));
            }
        }
        if let Some(sections) = &self.sections {
            for (i, s) in sections.iter().enumerate() {
                if s.constraints.is_empty() || s.constraints.len() >= m {
                    return field_err(
                        &format!("sections[{i}].constraints"),
                        format!("expected 1..{m} constraints"),
                    );
                }
                if s.chart.len() != m - s.constraints.len() {
                    return field_err(
                        &format!("sections[{i}].chart"),
                        format!(
                            "expected {} chart expressions, found {}",
                            m - s.constraints.len(),
                            s.chart.len()
                        ),
                    );
                }
                if s.validity.lo.len() != m || s.validity.hi.len() != m {
                    return field_err(
                        &format!("sections[{i}].validity"),
                        format!("expected {m}-dimensional bounds"),
                    );
                }
            }
        }
        if self.domain.lo.len() != m || self.domain.hi.len() != m {
            return field_err("domain", format!("expected {m}-dimensional bounds"));
        }
        Ok(())
    }

    pub fn coords(&self) -> ConfigResult<Coords> {
        Ok(Coords::new(self.coords.clone())?)
    }

    pub fn domain(&self) -> ConfigResult<DomainBox> {
        Ok(DomainBox::new(self.domain.lo.clone(), self.domain.hi.clone())?)
    }

    pub fn vector_field(&self) -> ConfigResult<VectorField> {
        let coords = self.coords()?;
        let exprs = self
            .vector_field
            .as_ref()
            .ok_or_else(|| ConfigError("vector_field: required by this command".into()))?;
        let strs: Vec<&str> = exprs.iter().map(String::as_str).collect();
        VectorField::parse(&coords, &strs)
            .map_err(|e| ConfigError(format!("vector_field: {e}")))
    }

    pub fn generators(&self) -> ConfigResult<LieBasis> {
        let coords = self.coords()?;
        let gens = self
            .generators
            .as_ref()
            .ok_or_else(|| ConfigError("generators: required by this command".into()))?;
        let fields = gens
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let strs: Vec<&str> = g.iter().map(String::as_str).collect();
                VectorField::parse(&coords, &strs)
                    .map_err(|e| ConfigError(format!("generators[{i}]: {e}")))
            })
            .collect::<ConfigResult<Vec<_>>>()?;
        Ok(LieBasis::new(fields)?)
    }

    pub fn projection(&self) -> ConfigResult<ProjectionMap> {
        let coords = self.coords()?;
        let spec = self
            .projection
            .as_ref()
            .ok_or_else(|| ConfigError("projection: required by this command".into()))?;
        let target = Coords::new(spec.target_coords.clone())
            .map_err(|e| ConfigError(format!("projection.target_coords: {e}")))?;
        let strs: Vec<&str> = spec.components.iter().map(String::as_str).collect();
        let mut pi = ProjectionMap::parse(&coords, &target, &strs)
            .map_err(|e| ConfigError(format!("projection.components: {e}")))?;
        let guards = spec
            .guards
            .iter()
            .enumerate()
            .map(|(i, g)| {
                Guard::parse(g, &coords)
                    .map_err(|e| ConfigError(format!("projection.guards[{i}]: {e}")))
            })
            .collect::<ConfigResult<Vec<_>>>()?;
        pi = pi.with_guards(guards);
        if let Some(a) = &spec.angular {
            pi = pi.with_angular(a.clone())?;
        }
        Ok(pi)
    }

    pub fn reduced_field(&self) -> ConfigResult<VectorField> {
        let spec = self
            .projection
            .as_ref()
            .ok_or_else(|| ConfigError("projection: required by this command".into()))?;
        let target = Coords::new(spec.target_coords.clone())?;
        let exprs = self
            .reduced_field
            .as_ref()
            .ok_or_else(|| ConfigError("reduced_field: required by this command".into()))?;
        let strs: Vec<&str> = exprs.iter().map(String::as_str).collect();
        VectorField::parse(&target, &strs)
            .map_err(|e| ConfigError(format!("reduced_field: {e}")))
    }

    pub fn linear_system(&self) -> ConfigResult<LinearSystem> {
        let rows = self
            .matrix_a
            .as_ref()
            .ok_or_else(|| ConfigError("matrix_a: required by this command".into()))?;
        LinearSystem::from_rows(rows).map_err(|e| ConfigError(format!("matrix_a: {e}")))
    }

    pub fn linear_projection(&self) -> ConfigResult<Option<LinearProjection>> {
        match &self.matrix_p {
            None => Ok(None),
            Some(rows) => Ok(Some(
                LinearProjection::from_rows(rows)
                    .map_err(|e| ConfigError(format!("matrix_p: {e}")))?,
            )),
        }
    }

    pub fn cross_sections(&self) -> ConfigResult<Vec<CrossSection>> {
        let coords = self.coords()?;
        let specs = self
            .sections
            .as_ref()
            .ok_or_else(|| ConfigError("sections: required by this command".into()))?;
        specs
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let validity = DomainBox::new(s.validity.lo.clone(), s.validity.hi.clone())
                    .map_err(|e| ConfigError(format!("sections[{i}].validity: {e}")))?;
                let cons: Vec<&str> = s.constraints.iter().map(String::as_str).collect();
                let chart: Vec<&str> = s.chart.iter().map(String::as_str).collect();
                let sec = CrossSection::parse(&coords, &cons, &chart, validity)
                    .map_err(|e| ConfigError(format!("sections[{i}]: {e}")))?;
                let guards = s
                    .guards
                    .iter()
                    .enumerate()
                    .map(|(j, g)| {
                        Guard::parse(g, &coords)
                            .map_err(|e| ConfigError(format!("sections[{i}].guards[{j}]: {e}")))
                    })
                    .collect::<ConfigResult<Vec<_>>>()?;
                Ok(sec.with_guards(guards))
            })
            .collect()
    }
}
