//! Randomized properties of the linear theory: agreement of the two
//! invariance predicates, closure of the enumeration under its own check,
//! and the commuting diagram for emitted reductions.

mod common;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fibermap::linear::{
    enumerate_linear_reductions, expm, kernel_invariance_check, linear_field, reduced_matrix,
    structure_constant_check,
};
use fibermap::{IntegratorConfig, LinearProjection, LinearSystem};

fn random_matrix(rng: &mut impl Rng, n: usize, m: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, m, |_, _| rng.random_range(-1.0..1.0))
}

/// A system with a known invariant kernel plus a projection whose kernel is
/// exactly that subspace.
fn invariant_pair(rng: &mut impl Rng, m: usize, k: usize) -> (LinearSystem, LinearProjection) {
    // orthogonal basis: first k columns span the invariant subspace
    let q = random_matrix(rng, m, m).qr().q();
    let mut block = random_matrix(rng, m, m);
    // zero the lower-left block so span(q_1..q_k) is invariant
    for i in k..m {
        for j in 0..k {
            block[(i, j)] = 0.0;
        }
    }
    let a = &q * block * q.transpose();
    // rows spanning the orthogonal complement, mixed by a random invertible map
    let n = m - k;
    let mut p = DMatrix::zeros(n, m);
    for i in 0..n {
        for j in 0..m {
            p[(i, j)] = q[(j, k + i)];
        }
    }
    let mix = loop {
        let r = random_matrix(rng, n, n);
        if r.determinant().abs() > 0.1 {
            break r;
        }
    };
    (
        LinearSystem::new(a).unwrap(),
        LinearProjection::new(mix * p).unwrap(),
    )
}

#[test]
fn route_equivalence_on_random_corpus() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let tol = 1e-8;
    let mut agreements = 0;
    for round in 0..200 {
        let m = rng.random_range(2..=6usize);
        let (a, p) = if round % 2 == 0 {
            let n = rng.random_range(1..m);
            loop {
                let a = LinearSystem::new(random_matrix(&mut rng, m, m)).unwrap();
                if let Ok(p) = LinearProjection::new(random_matrix(&mut rng, n, m)) {
                    break (a, p);
                }
            }
        } else {
            let k = rng.random_range(1..m);
            invariant_pair(&mut rng, m, k)
        };
        let (route_a, _) = kernel_invariance_check(&a, &p, tol).unwrap();
        let (route_b, _) = structure_constant_check(&a, &p, tol).unwrap();
        assert_eq!(
            route_a.verdict, route_b.verdict,
            "routes disagree (round {round}): A {:?} ({:.3e}) vs B {:?} ({:.3e})",
            route_a.verdict, route_a.max_residual, route_b.verdict, route_b.max_residual
        );
        agreements += 1;
    }
    assert_eq!(agreements, 200);
}

#[test]
fn constructed_invariant_pairs_pass_both_routes() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..50 {
        let m = rng.random_range(3..=6usize);
        let k = rng.random_range(1..m);
        let (a, p) = invariant_pair(&mut rng, m, k);
        let (ra, sc) = kernel_invariance_check(&a, &p, 1e-8).unwrap();
        assert!(ra.passed(), "route A residual {:.3e}", ra.max_residual);
        let sc = sc.unwrap();
        assert!(sc.residual < 1e-8, "structure residual {:.3e}", sc.residual);
        let (rb, _) = structure_constant_check(&a, &p, 1e-8).unwrap();
        assert!(rb.passed());
    }
}

#[test]
fn enumeration_is_closed_under_the_invariance_check() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..25 {
        let m = rng.random_range(2..=6usize);
        let a = LinearSystem::new(random_matrix(&mut rng, m, m)).unwrap();
        for r in enumerate_linear_reductions(&a, 1e-8, 1 << 10).unwrap() {
            let p = LinearProjection::new(r.p.clone()).unwrap();
            let (report, _) = kernel_invariance_check(&a, &p, 1e-8).unwrap();
            assert!(
                report.passed(),
                "emitted reduction fails its own check: residual {:.3e}",
                report.max_residual
            );
        }
    }
}

/// For every emitted reduction, P·e^{tA}·x0 equals e^{tB}·P·x0 over
/// t ∈ [0, 5]. The exponentials are computed through two routes: the ODE
/// integrator on the linear field and scaling-and-squaring, which must
/// themselves agree.
#[test]
fn linear_commuting_diagram() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let cfg = IntegratorConfig::default();
    for _ in 0..8 {
        let m = rng.random_range(2..=5usize);
        // moderate spectra keep e^{tA} in a testable range over t ≤ 5
        let a_mat = random_matrix(&mut rng, m, m) * 0.4;
        let a = LinearSystem::new(a_mat.clone()).unwrap();
        let coords =
            fibermap::Coords::new((0..m).map(|i| format!("x{}", i + 1)).collect::<Vec<_>>())
                .unwrap();
        let field = linear_field(&a_mat, &coords).unwrap();

        for reduction in enumerate_linear_reductions(&a, 1e-8, 1 << 10).unwrap() {
            let p = &reduction.p;
            let b = &reduction.b;
            for _ in 0..10 {
                let mut x0 = DVector::from_fn(m, |_, _| rng.random_range(-1.0..1.0));
                x0 /= x0.norm();

                // integrator route for the full flow at t = 5
                let traj = fibermap::flow::integrate(
                    &field,
                    x0.as_slice(),
                    (0.0, 5.0),
                    &cfg,
                )
                .unwrap();

                let mut sup = 0.0f64;
                for step in 0..=10 {
                    let t = 5.0 * step as f64 / 10.0;
                    let full = expm(&a_mat, t) * &x0;
                    let reduced = expm(b, t) * (p * &x0);
                    sup = sup.max((p * &full - reduced).norm());
                    if step == 10 {
                        // the two exponential routes agree
                        let via_integrator =
                            DVector::from_vec(traj.final_state().to_vec());
                        assert!(
                            (&full - &via_integrator).norm() < 1e-9 * (1.0 + full.norm()),
                            "integrator and scaling-squaring disagree: {:.3e}",
                            (&full - &via_integrator).norm()
                        );
                    }
                }
                assert!(sup < 1e-8, "diagram residual {sup:.3e} for m = {m}");
            }
        }
    }
}

/// Oracle-constructed decomposition: conjugate two known diagonalizable
/// blocks through a random invertible map and check that enumeration
/// recovers both block subspaces.
#[test]
fn enumeration_recovers_conjugated_blocks() {
    use fibermap::linear::subspace_gap;
    let mut rng = ChaCha8Rng::seed_from_u64(123);
    for _ in 0..10 {
        // spectra are disjoint by construction
        let left = DMatrix::from_row_slice(
            3,
            3,
            &[-1.0, 0.6, 0.0, -0.6, -1.0, 0.0, 0.0, 0.0, -2.0],
        );
        let right = DMatrix::from_row_slice(
            3,
            3,
            &[1.5, 0.0, 0.0, 0.0, 0.8, 0.4, 0.0, -0.4, 0.8],
        );
        let s = loop {
            let s = random_matrix(&mut rng, 6, 6);
            if s.determinant().abs() > 0.05 {
                break s;
            }
        };
        let s_inv = s.clone().try_inverse().unwrap();
        let mut block = DMatrix::zeros(6, 6);
        block.view_mut((0, 0), (3, 3)).copy_from(&left);
        block.view_mut((3, 3), (3, 3)).copy_from(&right);
        let a = LinearSystem::new(&s * block * s_inv).unwrap();

        let reductions = enumerate_linear_reductions(&a, 1e-8, 1 << 10).unwrap();
        let left_span = s.view((0, 0), (6, 3)).clone_owned().qr().q();
        let right_span = s.view((0, 3), (6, 3)).clone_owned().qr().q();
        for target in [&left_span, &right_span] {
            let best = reductions
                .iter()
                .filter(|r| r.kernel_dim() == 3)
                .map(|r| subspace_gap(&r.kernel, target))
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-8, "subspace angle {best:.3e}");
        }
    }
}

#[test]
fn reduced_matrix_intertwines() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..30 {
        let m = rng.random_range(3..=6usize);
        let k = rng.random_range(1..m);
        let (a, p) = invariant_pair(&mut rng, m, k);
        let b = reduced_matrix(&a, &p).unwrap();
        let residual = (&b * p.matrix() - p.matrix() * a.matrix()).norm();
        assert!(residual < 1e-9 * (1.0 + a.matrix().norm()));
    }
}
