//! Complete treatment of the linear case ẋ = A x, π(x) = P x.
//!
//! A linear projection is a valid coarse-graining exactly when ker(P) is
//! A-invariant. Two independent predicates implement the two proof routes:
//! the kernel route tests ‖P A W‖ directly, the structure-constant route
//! fits A W = W K and tests the fit residual. The property suite checks the
//! routes agree on a randomized corpus.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::checks::CheckReport;
use crate::error::{Error, Result};
use crate::expr::{Coords, Node, ScalarExpr};
use crate::field::VectorField;

/// Relative SVD tolerance used for rank and nullspace decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_SUBSETS: usize = 1 << 10;

/// ẋ = A x.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    a: DMatrix<f64>,
}

impl LinearSystem {
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension(format!(
                "system matrix must be square, got {}×{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("system matrix has non-finite entries".into()));
        }
        Ok(LinearSystem { a })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("matrix rows have unequal lengths".into()));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }
}

/// π(x) = P x with full row rank.
#[derive(Clone, Debug)]
pub struct LinearProjection {
    p: DMatrix<f64>,
}

impl LinearProjection {
    pub fn new(p: DMatrix<f64>) -> Result<Self> {
        if p.nrows() > p.ncols() {
            return Err(Error::Dimension(format!(
                "projection must map down: got {}×{}",
                p.nrows(),
                p.ncols()
            )));
        }
        let svd = p.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let rank = if smax == 0.0 {
            0
        } else {
            svd.singular_values
                .iter()
                .filter(|s| **s > DEFAULT_RANK_TOL * smax)
                .count()
        };
        if rank < p.nrows() {
            return Err(Error::RankDeficient(format!(
                "projection has rank {rank}, expected full row rank {}",
                p.nrows()
            )));
        }
        Ok(LinearProjection { p })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        if n == 0 || rows.iter().any(|r| r.len() != m) {
            return Err(Error::Dimension("projection rows are empty or ragged".into()));
        }
        Self::new(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }
}

/// Coefficients K with A W ≈ W K for a kernel basis W.
#[derive(Clone, Debug, Serialize)]
pub struct StructureConstants {
    pub k: Vec<Vec<f64>>,
    pub residual: f64,
}

impl StructureConstants {
    fn from_matrix(k: &DMatrix<f64>, residual: f64) -> Self {
        StructureConstants {
            k: matrix_rows(k),
            residual,
        }
    }
}

pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Orthonormal basis of ker(P) as columns.
pub fn kernel_basis(p: &LinearProjection, tol: f64) -> Result<DMatrix<f64>> {
    let m = p.matrix().ncols();
    match nullspace(p.matrix(), tol) {
        Some(w) => {
            let rank = m - w.ncols();
            if rank < p.matrix().nrows() {
                return Err(Error::RankDeficient(format!(
                    "projection has rank {rank} < {}",
                    p.matrix().nrows()
                )));
            }
            Ok(w)
        }
        None => Err(Error::NoReduction(
            "projection is full rank on the whole space; its kernel is trivial".into(),
        )),
    }
}

fn dims_match(a: &LinearSystem, p: &LinearProjection) -> Result<()> {
    if a.dim() != p.matrix().ncols() {
        return Err(Error::Dimension(format!(
            "system is {0}×{0} but projection has {1} columns",
            a.dim(),
            p.matrix().ncols()
        )));
    }
    Ok(())
}

/// Route A: ker(P) is A-invariant iff ‖P A W‖/‖A‖ vanishes. On a pass the
/// structure constants K = Wᵀ A W are returned with their fit residual.
pub fn kernel_invariance_check(
    a: &LinearSystem,
    p: &LinearProjection,
    tol: f64,
) -> Result<(CheckReport, Option<StructureConstants>)> {
    dims_match(a, p)?;
    let w = kernel_basis(p, DEFAULT_RANK_TOL)?;
    let paw = p.matrix() * a.matrix() * &w;
    let residual = paw.norm() / a.matrix().norm().max(f64::MIN_POSITIVE);
    if residual < tol {
        let sc = fit_structure_constants(a.matrix(), &w);
        Ok((
            CheckReport::pass_numeric(
                residual,
                format!("ker(P) is A-invariant (dim {})", w.ncols()),
            ),
            Some(sc),
        ))
    } else {
        // a kernel vector that A maps out of the kernel witnesses the failure
        let witness: Vec<f64> = w.column(0).iter().copied().collect();
        Ok((
            CheckReport::fail(residual, witness, "A maps ker(P) outside ker(P)"),
            None,
        ))
    }
}

fn fit_structure_constants(a: &DMatrix<f64>, w: &DMatrix<f64>) -> StructureConstants {
    let aw = a * w;
    // W has orthonormal columns, so the least-squares fit is K = Wᵀ A W
    let k = w.transpose() * &aw;
    let residual = (&aw - w * &k).norm() / aw.norm().max(f64::MIN_POSITIVE);
    StructureConstants::from_matrix(&k, residual)
}

/// Route B: fit A W = W K by least squares and test the fit residual. An
/// exact fit is precisely the closure condition for the kernel generators.
pub fn structure_constant_check(
    a: &LinearSystem,
    p: &LinearProjection,
    tol: f64,
) -> Result<(CheckReport, StructureConstants)> {
    dims_match(a, p)?;
    let w = kernel_basis(p, DEFAULT_RANK_TOL)?;
    let sc = fit_structure_constants(a.matrix(), &w);
    let report = if sc.residual < tol {
        CheckReport::pass_numeric(
            sc.residual,
            "A W = W K holds for fitted structure constants".to_string(),
        )
    } else {
        let witness: Vec<f64> = w.column(0).iter().copied().collect();
        CheckReport::fail(
            sc.residual,
            witness,
            "A W leaves the span of the kernel basis",
        )
    };
    Ok((report, sc))
}

/// Reduced dynamics matrix B = P A P⁺ with the intertwining identity
/// B P = P A verified to 1e-10.
pub fn reduced_matrix(a: &LinearSystem, p: &LinearProjection) -> Result<DMatrix<f64>> {
    let (report, _) = kernel_invariance_check(a, p, 1e-8)?;
    if !report.passed() {
        return Err(Error::NoReduction(format!(
            "kernel is not A-invariant (residual {:.3e})",
            report.max_residual
        )));
    }
    let p_pinv = p
        .matrix()
        .clone()
        .pseudo_inverse(DEFAULT_RANK_TOL)
        .map_err(|e| Error::Numerical(format!("pseudo-inverse failed: {e}")))?;
    let b = p.matrix() * a.matrix() * p_pinv;
    let check = (&b * p.matrix() - p.matrix() * a.matrix()).norm();
    // roundoff in the construction scales with ‖P‖·‖A‖
    let scale = (1.0 + p.matrix().norm() * a.matrix().norm()).max(1.0);
    if check > 1e-10 * scale {
        return Err(Error::Numerical(format!(
            "intertwining identity B P = P A violated ({check:.3e})"
        )));
    }
    Ok(b)
}

/// One linear reduction: an A-invariant kernel subspace, a projection with
/// that kernel, and the reduced matrix.
#[derive(Clone, Debug)]
pub struct LinearReduction {
    pub kernel: DMatrix<f64>,
    pub p: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

impl LinearReduction {
    pub fn kernel_dim(&self) -> usize {
        self.kernel.ncols()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum SpectralBlock {
    Real(f64),
    // complex pair α ± βi stored with β > 0
    Pair(f64, f64),
}

/// Partial enumeration of linear reductions: every sum of eigenspaces of
/// distinct real eigenvalues and complex-conjugate pairs, capped at
/// `max_subsets` subset candidates. Invariant-subspace lattices of repeated
/// eigenvalues are infinite, so enumeration by spectral blocks is
/// deliberately partial.
pub fn enumerate_linear_reductions(
    a: &LinearSystem,
    tol: f64,
    max_subsets: usize,
) -> Result<Vec<LinearReduction>> {
    let m = a.dim();
    let blocks = spectral_blocks(a.matrix());
    let nb = blocks.len();
    if nb == 0 {
        return Ok(Vec::new());
    }

    let mut out: Vec<LinearReduction> = Vec::new();
    let mut kernels: Vec<DMatrix<f64>> = Vec::new();
    let total = 1usize << nb.min(20);
    for (tried, mask) in (1..total).enumerate() {
        if tried >= max_subsets {
            break;
        }

        // kernel candidate: nullspace of the annihilating polynomial of the
        // selected blocks
        let mut poly = DMatrix::<f64>::identity(m, m);
        for (i, b) in blocks.iter().enumerate() {
            if mask & (1 << i) == 0 {
                continue;
            }
            match b {
                SpectralBlock::Real(lambda) => {
                    poly = &poly * (a.matrix() - DMatrix::<f64>::identity(m, m) * *lambda);
                }
                SpectralBlock::Pair(alpha, beta) => {
                    let quad = a.matrix() * a.matrix()
                        - a.matrix() * (2.0 * alpha)
                        + DMatrix::<f64>::identity(m, m) * (alpha * alpha + beta * beta);
                    poly = &poly * quad;
                }
            }
        }
        let w = match nullspace(&poly, tol.max(DEFAULT_RANK_TOL)) {
            Some(w) if w.ncols() >= 1 && w.ncols() < m => w,
            _ => continue,
        };

        // complement rows give the projection; verify invariance before emitting
        let p_mat = orthogonal_complement_rows(&w);
        let p = match LinearProjection::new(p_mat) {
            Ok(p) => p,
            Err(_) => continue,
        };
        let (report, _) = kernel_invariance_check(a, &p, tol.max(1e-8))?;
        if !report.passed() {
            continue;
        }
        if kernels.iter().any(|k| same_subspace(k, &w, 1e-6)) {
            continue;
        }
        let b = reduced_matrix(a, &p)?;
        kernels.push(w.clone());
        out.push(LinearReduction { kernel: w, p: p.p, b });
    }
    Ok(out)
}

fn spectral_blocks(a: &DMatrix<f64>) -> Vec<SpectralBlock> {
    let eigs = a.clone().complex_eigenvalues();
    let scale = 1.0 + a.norm();
    let cluster_tol = 1e-8 * scale;
    let mut blocks: Vec<SpectralBlock> = Vec::new();
    for e in eigs.iter() {
        let candidate = if e.im.abs() <= cluster_tol {
            SpectralBlock::Real(e.re)
        } else {
            SpectralBlock::Pair(e.re, e.im.abs())
        };
        let duplicate = blocks.iter().any(|b| match (b, &candidate) {
            (SpectralBlock::Real(x), SpectralBlock::Real(y)) => (x - y).abs() <= cluster_tol,
            (SpectralBlock::Pair(x, u), SpectralBlock::Pair(y, v)) => {
                (x - y).abs() <= cluster_tol && (u - v).abs() <= cluster_tol
            }
            _ => false,
        });
        if !duplicate {
            blocks.push(candidate);
        }
    }
    // deterministic block order
    blocks.sort_by(|a, b| {
        let key = |s: &SpectralBlock| match s {
            SpectralBlock::Real(x) => (*x, 0.0),
            SpectralBlock::Pair(x, y) => (*x, *y),
        };
        let (ka, kb) = (key(a), key(b));
        ka.0.total_cmp(&kb.0).then(ka.1.total_cmp(&kb.1))
    });
    blocks
}

/// Orthonormal nullspace basis as columns, or None when the nullspace is
/// trivial. Wide matrices are padded with zero rows so the SVD carries a
/// full set of right singular vectors.
fn nullspace(m: &DMatrix<f64>, tol: f64) -> Option<DMatrix<f64>> {
    let n = m.ncols();
    let work = if m.nrows() < n {
        let mut padded = DMatrix::zeros(n, n);
        padded.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        padded
    } else {
        m.clone()
    };
    let svd = work.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let smax = svd.singular_values.max();
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let rank = if smax == 0.0 {
        0
    } else {
        order
            .iter()
            .filter(|&&i| svd.singular_values[i] > tol * smax)
            .count()
    };
    let k = n - rank;
    if k == 0 {
        return None;
    }
    let mut w = DMatrix::zeros(n, k);
    for j in 0..k {
        let row = order[rank + j];
        for i in 0..n {
            w[(i, j)] = v_t[(row, i)];
        }
    }
    Some(w)
}

/// Rows spanning the orthogonal complement of the column space of `w`.
fn orthogonal_complement_rows(w: &DMatrix<f64>) -> DMatrix<f64> {
    let wt = w.transpose();
    let ns = nullspace(&wt, DEFAULT_RANK_TOL).expect("w has fewer columns than rows");
    ns.transpose()
}

/// Compares column spaces via their orthogonal projectors.
pub fn same_subspace(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return false;
    }
    let pa = a * a.transpose();
    let pb = b * b.transpose();
    (pa - pb).norm() < tol
}

/// Largest principal angle (as its sine) between two column spaces with
/// orthonormal bases.
pub fn subspace_gap(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let pa = a * a.transpose();
    let pb = b * b.transpose();
    (pa - pb).svd(false, false).singular_values.max()
}

/// The two symmetries every linear system has: the dynamics field itself and
/// the Euler scaling field.
pub fn trivial_symmetries(a: &LinearSystem, coords: &Coords) -> Result<(VectorField, VectorField)> {
    let dynamics = linear_field(a.matrix(), coords)?;
    let euler = {
        let comps = (0..coords.len())
            .map(|i| ScalarExpr::from_node(coords.clone(), Node::Var(i)))
            .collect::<Result<Vec<_>>>()?;
        VectorField::new(coords.clone(), comps)?
    };
    Ok((dynamics, euler))
}

/// The vector field x ↦ A x as symbolic components.
pub fn linear_field(a: &DMatrix<f64>, coords: &Coords) -> Result<VectorField> {
    if a.nrows() != coords.len() || a.ncols() != coords.len() {
        return Err(Error::Dimension(format!(
            "{}×{} matrix on {} coordinates",
            a.nrows(),
            a.ncols(),
            coords.len()
        )));
    }
    let comps = (0..a.nrows())
        .map(|alpha| {
            let mut acc = Node::Num(0.0);
            for beta in 0..a.ncols() {
                let c = a[(alpha, beta)];
                if c == 0.0 {
                    continue;
                }
                acc = Node::Add(
                    acc.into(),
                    Node::Mul(Node::Num(c).into(), Node::Var(beta).into()).into(),
                );
            }
            Ok(ScalarExpr::from_node(coords.clone(), acc)?.simplify())
        })
        .collect::<Result<Vec<_>>>()?;
    VectorField::new(coords.clone(), comps)
}

/// Matrix exponential by scaling and squaring with a Taylor core. Accurate
/// to ~1e-13 for the moderate matrices this crate handles.
pub fn expm(a: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    let m = a.nrows();
    let at = a * t;
    let norm = at.norm();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil().max(0.0) as u32
    } else {
        0
    };
    let scaled = &at / 2f64.powi(squarings as i32);
    let mut term = DMatrix::<f64>::identity(m, m);
    let mut sum = DMatrix::<f64>::identity(m, m);
    for k in 1..=18 {
        term = &term * &scaled / k as f64;
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}
