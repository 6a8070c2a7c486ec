//! Command-line front end: problem-file ingestion, check orchestration and
//! machine-readable reports.
//!
//! Exit codes: 0 all checks pass, 1 some check fails, 2 usage or
//! configuration error, 3 inconclusive (a hypothesis needed by the theory
//! could not be established on the sampled domain).

mod problem;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fibermap::checks::{
    classify_projection, closure_check, fiber_consistency_check, invariance_check, is_symmetry,
};
use fibermap::flow::diagram_check;
use fibermap::linear::{enumerate_linear_reductions, kernel_invariance_check, reduced_matrix};
use fibermap::quotient::{canonicalize, section_overlap_check, verify_quotient_invariance};
use fibermap::{HaltonSampler, IntegratorConfig};

use problem::{ConfigError, ProblemFile};
use report::{ConfigEcho, Report, ReductionOut};

#[derive(Parser)]
#[command(
    name = "fibermap",
    version,
    about = "Decides whether a smooth dynamical system admits a coarser deterministic description"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check [v, w] = 0 for every supplied generator
    CheckSymmetry(CommonArgs),
    /// Check the closure condition [v, g] ⊆ span(g) pointwise
    CheckClosure(CommonArgs),
    /// Check G-invariance w_i(π) = 0 of the projection
    CheckInvariance(CommonArgs),
    /// Generate fiber mates by group flows and compare pushforwards
    CheckFibers(CommonArgs),
    /// Verify the trajectory-level commuting diagram for π and the reduced field
    VerifyDiagram(CommonArgs),
    /// Classify the projection as trivial or nontrivial coarse dynamics
    Classify(CommonArgs),
    /// Enumerate linear reductions of ẋ = A x (and check matrix_p when given)
    ReduceLinear(CommonArgs),
    /// Canonicalize sample points onto the declared cross-sections
    QuotientBuild(CommonArgs),
    /// Verify orbit constancy of the numerically constructed quotient map
    QuotientVerify(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Problem file (JSON)
    problem: PathBuf,
    /// Override the tolerance used by this command's primary check
    #[arg(long)]
    tol: Option<f64>,
    /// Override the problem file's random seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of sample points
    #[arg(long)]
    samples: Option<usize>,
    /// Override the trajectory horizon
    #[arg(long = "t-final")]
    t_final: Option<f64>,
    /// Worker threads for sample evaluation (0 = automatic)
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Also write the JSON report to this path
    #[arg(long)]
    report: Option<PathBuf>,
}

/// Initial conditions used by verify-diagram.
const DIAGRAM_X0_COUNT: usize = 8;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::CheckSymmetry(a) => ("check-symmetry", a),
        Command::CheckClosure(a) => ("check-closure", a),
        Command::CheckInvariance(a) => ("check-invariance", a),
        Command::CheckFibers(a) => ("check-fibers", a),
        Command::VerifyDiagram(a) => ("verify-diagram", a),
        Command::Classify(a) => ("classify", a),
        Command::ReduceLinear(a) => ("reduce-linear", a),
        Command::QuotientBuild(a) => ("quotient-build", a),
        Command::QuotientVerify(a) => ("quotient-verify", a),
    };

    if args.threads > 0 {
        // ignore failure: the global pool can only be set once
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(args.threads)
            .build_global();
    }

    match run(name, args) {
        Ok(report) => {
            print!("{}", report.to_json());
            eprintln!("{}", report.human_summary());
            if let Some(path) = &args.report {
                if let Err(e) = std::fs::write(path, report.to_json()) {
                    eprintln!("fibermap: cannot write report to {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("fibermap: {e}");
            ExitCode::from(2)
        }
    }
}

struct Ctx {
    problem: ProblemFile,
    seed: u64,
    samples: usize,
    t_final: f64,
    tol_override: Option<f64>,
    cfg: IntegratorConfig,
}

fn run(name: &str, args: &CommonArgs) -> Result<Report, ConfigError> {
    let problem = ProblemFile::load(&args.problem)?;
    let cfg = problem.integrator.to_config()?;
    let ctx = Ctx {
        seed: args.seed.unwrap_or(problem.seed),
        samples: args.samples.unwrap_or(problem.samples),
        t_final: args.t_final.unwrap_or(problem.t_final),
        tol_override: args.tol,
        cfg,
        problem,
    };

    let echo = ConfigEcho {
        samples: ctx.samples,
        n_fibers: ctx.problem.n_fibers,
        t_final: ctx.t_final,
        tolerances: ctx.problem.tolerances,
        integrator: ctx.problem.integrator,
    };
    let mut report = Report::new(name, &args.problem.display().to_string(), ctx.seed, echo);

    match name {
        "check-symmetry" => cmd_check_symmetry(&ctx, &mut report)?,
        "check-closure" => cmd_check_closure(&ctx, &mut report)?,
        "check-invariance" => cmd_check_invariance(&ctx, &mut report)?,
        "check-fibers" => cmd_check_fibers(&ctx, &mut report)?,
        "verify-diagram" => cmd_verify_diagram(&ctx, &mut report)?,
        "classify" => cmd_classify(&ctx, &mut report)?,
        "reduce-linear" => cmd_reduce_linear(&ctx, &mut report)?,
        "quotient-build" => cmd_quotient_build(&ctx, &mut report)?,
        "quotient-verify" => cmd_quotient_verify(&ctx, &mut report)?,
        _ => unreachable!("command names are fixed above"),
    }

    report.finalize_verdict();
    Ok(report)
}

fn cmd_check_symmetry(ctx: &Ctx, report: &mut Report) -> Result<(), ConfigError> {
    let v = ctx.problem.vector_field()?;
    let g = ctx.problem.generators()?;
    let domain = ctx.problem.domain()?;
    let tol = ctx.tol_override.unwrap_or(ctx.problem.tolerances.zero);
    for (i, w) in g.generators().iter().enumerate() {
        let r = is_symmetry(&v, w, &domain, tol, ctx.seed)?;
        report.push_check(format!("symmetry[{i}]"), r);
    }
    Ok(())
}

fn cmd_check_closure(ctx: &Ctx, report: &mut Report) -> Result<(), ConfigError> {
    let v = ctx.problem.vector_field()?;
    let g = ctx.problem.generators()?;
    let domain = ctx.problem.domain()?;
    let tol = ctx.tol_override.unwrap_or(ctx.problem.tolerances.closure);
    let r = closure_check(&v, &g, &domain, ctx.samples, tol, ctx.seed)?;
    report.push_check("closure", r);
    Ok(())
}

fn cmd_check_invariance(ctx: &Ctx, report: &mut Report) -> Result<(), ConfigError> {
    let pi = ctx.problem.projection()?;
    let g = ctx.problem.generators()?;
    let domain = ctx.problem.domain()?;
    let tol = ctx.tol_override.unwrap_or(ctx.problem.tolerances.zero);
    let r = invariance_check(&pi, &g, &domain, tol, ctx.seed)?;
    report.push_check("invariance", r);
    Ok(())
}

fn cmd_check_fibers(ctx: &Ctx, report: &mut Report) -> Result<(), ConfigError> {
    let pi = ctx.problem.projection()?;
    let v = ctx.problem.vector_field()?;
    let g = ctx.problem.generators()?;
    let domain = ctx.problem.domain()?;

    // invariance is the precondition for orbits to stay inside fibers
    let inv = invariance_check(&pi, &g, &domain, ctx.problem.tolerances.zero, ctx.seed)?;
    let inv_ok = inv.passed();
    report.push_check("invariance (precondition)", inv);
    if !inv_ok {
        return Ok(());
    }

    let tol = ctx.tol_override.unwrap_or(ctx.problem.tolerances.fiber);
    let r = fiber_consistency_check(
        &pi,
        &v,
        &g,
        &domain,
        ctx.problem.n_fibers,
        tol,
        ctx.seed,
        &ctx.cfg,
    )?;
    report.push_check("fiber consistency", r);
    Ok(())
}

fn cmd_verify_diagram(ctx: &Ctx, report: &mut Report) -> Result<(), ConfigError> {
    let v = ctx.problem.vector_field()?;
    let pi = ctx.problem.projection()?;
    let w_reduced = ctx.problem.reduced_field()?;
    let domain = ctx.problem.domain()?;
    let tol = ctx.tol_override.unwrap_or(ctx.problem.tolerances.diagram);

    // deterministic sample of chart-compatible initial conditions
    let mut sampler = HaltonSampler::new(domain.dim(), ctx.seed)?;
    let mut x0s = Vec::with_capacity(DIAGRAM_X0_COUNT);
    let mut attempts = 0;
    while x0s.len() < DIAGRAM_X0_COUNT && attempts < DIAGRAM_X0_COUNT * 20 {
        attempts += 1;
        let x = sampler.next_point(&domain);
        if pi.guards_ok(&x).unwrap_or(false) && pi.eval(&x).is_ok() && v.eval(&x).is_ok() {
            x0s.push(x);
        }
    }
    if x0s.is_empty() {
        return Err(ConfigError(
            "domain: no usable initial conditions inside the chart guards".into(),
        ));
    }
    let r = diagram_check(&v, &pi, &w_reduced, &x0s, ctx.t_final, &ctx.cfg, tol)?;
    report.push_check("commuting diagram", r);
    Ok(())
}

fn cmd_classify(ctx: &Ctx, report: &mut Report) -> Result<(), ConfigError> {
    let pi = ctx.problem.projection()?;
    let v = ctx.problem.vector_field()?;
    let domain = ctx.problem.domain()?;
    let tol = ctx.tol_override.unwrap_or(ctx.problem.tolerances.zero);
    let class = classify_projection(&pi, &v, &domain, ctx.samples, tol, ctx.seed)?;
    report.classification = Some(class);
    report.note = Some(match class {
        fibermap::ProjectionClass::TrivialDynamics => {
            "projection lands on invariants of the motion".into()
        }
        fibermap::ProjectionClass::NontrivialDynamics => {
            "projection carries genuine coarse dynamics".into()
        }
    });
    Ok(())
}

fn cmd_reduce_linear(ctx: &Ctx, report: &mut Report) -> Result<(), ConfigError> {
    let a = ctx.problem.linear_system()?;
    let tol = ctx.tol_override.unwrap_or(ctx.problem.tolerances.linear);
    let reductions = enumerate_linear_reductions(&a, tol, fibermap::linear::DEFAULT_MAX_SUBSETS)?;
    if reductions.is_empty() {
        report.note = Some("no real linear reduction".into());
    }
    report.reductions = Some(reductions.iter().map(ReductionOut::from_reduction).collect());

    if let Some(p) = ctx.problem.linear_projection()? {
        let (check, sc) = kernel_invariance_check(&a, &p, tol)?;
        let passed = check.passed();
        report.push_check("kernel invariance (matrix_p)", check);
        report.structure_constants = sc;
        if passed {
            let b = reduced_matrix(&a, &p)?;
            report.reductions.get_or_insert_with(Vec::new).push(ReductionOut {
                kernel_dim: a.dim() - p.matrix().nrows(),
                kernel_basis: fibermap::linear::matrix_rows(
                    &fibermap::linear::kernel_basis(&p, 1e-10)?.transpose(),
                ),
                p: fibermap::linear::matrix_rows(p.matrix()),
                b: fibermap::linear::matrix_rows(&b),
            });
        }
    }
    Ok(())
}

fn cmd_quotient_build(ctx: &Ctx, report: &mut Report) -> Result<(), ConfigError> {
    let g = ctx.problem.generators()?;
    let sections = ctx.problem.cross_sections()?;
    let domain = ctx.problem.domain()?;
    let newton_tol = ctx.problem.tolerances.newton;

    for (i, sec) in sections.iter().enumerate() {
        let mut sampler = HaltonSampler::new(domain.dim(), ctx.seed)?;
        let mut canonicalized = 0usize;
        let mut tried = 0usize;
        let mut attempts = 0usize;
        let mut max_residual = 0.0f64;
        let mut min_margin = f64::INFINITY;
        let mut witness = None;
        let budget = ctx.samples.clamp(4, 32);
        while tried < budget && attempts < budget * 10 {
            attempts += 1;
            let x = sampler.next_point(&domain);
            if !sec.validity().contains(&x) {
                continue;
            }
            tried += 1;
            match canonicalize(&g, sec, &x, newton_tol, 50, &ctx.cfg) {
                Ok((rep, _eps)) => {
                    canonicalized += 1;
                    let residual = sec
                        .residual(&rep)?
                        .iter()
                        .fold(0.0f64, |m, r| m.max(r.abs()));
                    max_residual = max_residual.max(residual);
                    if let Ok(margin) = sec.transversality_margin(&g, &rep) {
                        min_margin = min_margin.min(margin);
                    }
                }
                Err(_) => {
                    witness.get_or_insert(x);
                }
            }
        }
        let name = format!("section[{i}] canonicalization");
        if tried == 0 {
            report.push_check(
                name,
                fibermap::CheckReport::inconclusive(
                    None,
                    "no sample points inside the section validity box",
                ),
            );
        } else if canonicalized == tried {
            report.push_check(
                name,
                fibermap::CheckReport::pass_numeric(
                    max_residual,
                    format!(
                        "{canonicalized}/{tried} points canonicalized; transversality margin ≥ {min_margin:.3e}"
                    ),
                ),
            );
        } else {
            report.push_check(
                name,
                fibermap::CheckReport::fail(
                    f64::NAN,
                    witness.unwrap_or_default(),
                    format!("{canonicalized}/{tried} points canonicalized"),
                ),
            );
        }
    }
    Ok(())
}

fn cmd_quotient_verify(ctx: &Ctx, report: &mut Report) -> Result<(), ConfigError> {
    let g = ctx.problem.generators()?;
    let sections = ctx.problem.cross_sections()?;
    let domain = ctx.problem.domain()?;
    let tol = ctx.tol_override.unwrap_or(ctx.problem.tolerances.quotient);
    let n = ctx.samples.clamp(4, 32);

    for (i, sec) in sections.iter().enumerate() {
        let r = verify_quotient_invariance(&g, sec, &domain, n, tol, ctx.seed, &ctx.cfg)?;
        report.push_check(format!("section[{i}] orbit constancy"), r);
    }
    for i in 0..sections.len() {
        for j in (i + 1)..sections.len() {
            let r = section_overlap_check(
                &g,
                &sections[i],
                &sections[j],
                &domain,
                n.min(12),
                tol,
                ctx.seed,
                &ctx.cfg,
            )?;
            report.push_check(format!("sections[{i}]×[{j}] overlap"), r);
        }
    }
    Ok(())
}
