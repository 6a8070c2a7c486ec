//! Machine-readable reports. The JSON on standard output is byte-identical
//! for identical problem file, seed and flags; the human summary goes to
//! standard error.

use serde::Serialize;

use fibermap::checks::{CheckReport, ProjectionClass, Verdict};
use fibermap::linear::{matrix_rows, LinearReduction, StructureConstants};

use crate::problem::{IntegratorSpec, Tolerances};

#[derive(Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub problem: String,
    pub seed: u64,
    pub config: ConfigEcho,
    pub checks: Vec<NamedCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<ProjectionClass>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reductions: Option<Vec<ReductionOut>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub structure_constants: Option<StructureConstants>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub verdict: Verdict,
}

#[derive(Serialize)]
pub struct ConfigEcho {
    pub samples: usize,
    pub n_fibers: usize,
    pub t_final: f64,
    pub tolerances: Tolerances,
    pub integrator: IntegratorSpec,
}

#[derive(Serialize)]
pub struct NamedCheck {
    pub name: String,
    pub report: CheckReport,
}

/// Matrices serialized row major; `kernel` columns span the eliminated
/// subspace, so they are emitted as a list of basis vectors.
#[derive(Serialize)]
pub struct ReductionOut {
    pub kernel_dim: usize,
    pub kernel_basis: Vec<Vec<f64>>,
    pub p: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
}

impl ReductionOut {
    pub fn from_reduction(r: &LinearReduction) -> Self {
        let kt = r.kernel.transpose();
        ReductionOut {
            kernel_dim: r.kernel_dim(),
            kernel_basis: matrix_rows(&kt),
            p: matrix_rows(&r.p),
            b: matrix_rows(&r.b),
        }
    }
}

impl Report {
    pub fn new(command: &str, problem: &str, seed: u64, config: ConfigEcho) -> Self {
        Report {
            tool: "fibermap",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            problem: problem.to_string(),
            seed,
            config,
            checks: Vec::new(),
            classification: None,
            reductions: None,
            structure_constants: None,
            note: None,
            verdict: Verdict::Pass,
        }
    }

    pub fn push_check(&mut self, name: impl Into<String>, report: CheckReport) {
        self.checks.push(NamedCheck {
            name: name.into(),
            report,
        });
    }

    /// Worst verdict across all recorded checks.
    pub fn finalize_verdict(&mut self) {
        let mut verdict = Verdict::Pass;
        for c in &self.checks {
            match (c.report.verdict, verdict) {
                (Verdict::Fail, _) => verdict = Verdict::Fail,
                (Verdict::Inconclusive, Verdict::Pass) => verdict = Verdict::Inconclusive,
                _ => {}
            }
        }
        self.verdict = verdict;
    }

    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Inconclusive => 3,
        }
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }

    pub fn human_summary(&self) -> String {
        let mut lines = Vec::new();
        lines.push(format!("fibermap {}: {}", self.command, self.problem));
        for c in &self.checks {
            let residual = if c.report.max_residual.is_finite() {
                format!(" (residual {:.3e})", c.report.max_residual)
            } else {
                String::new()
            };
            lines.push(format!(
                "  {:<28} {:?}{residual} — {}",
                c.name, c.report.verdict, c.report.details
            ));
        }
        if let Some(class) = &self.classification {
            lines.push(format!("  classification: {class:?}"));
        }
        if let Some(reductions) = &self.reductions {
            lines.push(format!("  linear reductions found: {}", reductions.len()));
        }
        if let Some(note) = &self.note {
            lines.push(format!("  note: {note}"));
        }
        lines.push(format!("  verdict: {:?}", self.verdict));
        lines.join("\n")
    }
}
