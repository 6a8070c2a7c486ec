//! Bracket algebra properties: antisymmetry, the Jacobi identity, the
//! prolongation criterion and pushforward linearity.

mod common;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fibermap::field::prolong_apply_to_system;
use fibermap::{is_zero, Coords, DomainBox, ProjectionMap, VectorField};

fn unit_box(dim: usize) -> DomainBox {
    DomainBox::new(vec![-1.0; dim], vec![1.0; dim]).unwrap()
}

#[test]
fn bracket_antisymmetry_is_symbolic() {
    let coords = common::xyz();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..200 {
        let v = common::poly_field(&coords, &mut rng, 2);
        let w = common::poly_field(&coords, &mut rng, 2);
        let vw = v.lie_bracket(&w).unwrap();
        let wv = w.lie_bracket(&v).unwrap();
        for alpha in 0..3 {
            let sum = fibermap::parse(
                &format!("({}) + ({})", vw.component(alpha), wv.component(alpha)),
                &coords,
            )
            .unwrap();
            assert!(
                sum.is_zero_symbolic(),
                "[v,w] + [w,v] not symbolically zero: {sum}"
            );
        }
    }
}

#[test]
fn jacobi_identity_numeric() {
    let coords = common::xyz();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let domain = unit_box(3);
    let mut sampler = fibermap::HaltonSampler::new(3, 5).unwrap();
    for _ in 0..40 {
        let u = common::poly_field(&coords, &mut rng, 2);
        let v = common::poly_field(&coords, &mut rng, 2);
        let w = common::poly_field(&coords, &mut rng, 2);
        let t1 = u.lie_bracket(&v.lie_bracket(&w).unwrap()).unwrap();
        let t2 = v.lie_bracket(&w.lie_bracket(&u).unwrap()).unwrap();
        let t3 = w.lie_bracket(&u.lie_bracket(&v).unwrap()).unwrap();
        for _ in 0..32 {
            let x = sampler.next_point(&domain);
            let a = t1.eval(&x).unwrap();
            let b = t2.eval(&x).unwrap();
            let c = t3.eval(&x).unwrap();
            let residual = (0..3)
                .map(|i| (a[i] + b[i] + c[i]).abs())
                .fold(0.0f64, f64::max);
            assert!(residual < 1e-7, "Jacobi residual {residual} at {x:?}");
        }
    }
}

#[test]
fn prolongation_criterion_matches_bracket() {
    let coords = common::xyz();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let domain = unit_box(3);
    for round in 0..50 {
        let v = common::poly_field(&coords, &mut rng, 2);
        let w = common::poly_field(&coords, &mut rng, 2);
        let action = prolong_apply_to_system(&w, &v).unwrap();
        let bracket = v.lie_bracket(&w).unwrap();
        for alpha in 0..3 {
            let difference = fibermap::parse(
                &format!("({}) - ({})", action.component(alpha), bracket.component(alpha)),
                &coords,
            )
            .unwrap();
            let verdict = is_zero(&difference, &domain, 1e-9, round).unwrap();
            assert!(
                verdict.is_zero(),
                "component {alpha}: {difference} verdict {verdict:?}"
            );
        }
    }
}

#[test]
fn pushforward_is_linear_in_the_field() {
    let coords = common::xyz();
    let target = Coords::new(vec!["p", "q"]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let pi = ProjectionMap::parse(&coords, &target, &["x^2 + y*z", "z - x"]).unwrap();
    let mut sampler = fibermap::HaltonSampler::new(3, 9).unwrap();
    let domain = unit_box(3);
    for _ in 0..20 {
        let v = common::poly_field(&coords, &mut rng, 2);
        let w = common::poly_field(&coords, &mut rng, 2);
        let a: f64 = rng.random_range(-2.0..2.0);
        let b: f64 = rng.random_range(-2.0..2.0);
        let combo_components: Vec<String> = (0..3)
            .map(|i| format!("{a}*({}) + {b}*({})", v.component(i), w.component(i)))
            .collect();
        let combo = VectorField::parse(
            &coords,
            &combo_components.iter().map(String::as_str).collect::<Vec<_>>(),
        )
        .unwrap();
        let x = sampler.next_point(&domain);
        let pv = pi.pushforward(&v, &x).unwrap();
        let pw = pi.pushforward(&w, &x).unwrap();
        let pc = pi.pushforward(&combo, &x).unwrap();
        for i in 0..2 {
            let expect = a * pv[i] + b * pw[i];
            assert!(
                (pc[i] - expect).abs() < 1e-9 * (1.0 + expect.abs()),
                "linearity violated: {} vs {expect}",
                pc[i]
            );
        }
    }
}

/// The symbolic Jacobian route inside pushforward agrees with finite
/// differences of the projection map.
#[test]
fn pushforward_matches_finite_difference_jacobian() {
    let coords = common::xyz();
    let target = Coords::new(vec!["p", "q"]).unwrap();
    let pi = ProjectionMap::parse(&coords, &target, &["x*y - z^2", "atan2(y, 1 + x^2)"]).unwrap();
    let v = VectorField::parse(&coords, &["y", "-x", "x*z"]).unwrap();
    let mut sampler = fibermap::HaltonSampler::new(3, 13).unwrap();
    let domain = unit_box(3);
    let h = 1e-6;
    for _ in 0..25 {
        let x = sampler.next_point(&domain);
        let push = pi.pushforward(&v, &x).unwrap();
        let vx = v.eval(&x).unwrap();
        // finite-difference directional derivative of π along v
        let mut xp = x.clone();
        let mut xm = x.clone();
        for j in 0..3 {
            xp[j] += h * vx[j];
            xm[j] -= h * vx[j];
        }
        let fp = pi.eval(&xp).unwrap();
        let fm = pi.eval(&xm).unwrap();
        for (i, p) in push.iter().enumerate() {
            let fd = (fp[i] - fm[i]) / (2.0 * h);
            assert!(
                (p - fd).abs() < 1e-6 * (1.0 + fd.abs()),
                "pushforward {p} vs finite difference {fd}"
            );
        }
    }
}
