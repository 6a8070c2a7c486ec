//! Quotient construction properties: idempotence, orbit constancy,
//! partition compatibility with a closed-form invariant, and two-chart
//! overlap consistency.

mod common;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fibermap::quotient::{canonicalize, quotient_map, section_overlap_check, CrossSection};
use fibermap::{
    Coords, DomainBox, Guard, IntegratorConfig, LieBasis, VectorField,
};

fn scaling() -> (Coords, LieBasis) {
    let c = Coords::new(vec!["x", "y"]).unwrap();
    let g = LieBasis::new(vec![VectorField::parse(&c, &["x", "y"]).unwrap()]).unwrap();
    (c, g)
}

fn unit_circle_section(c: &Coords) -> CrossSection {
    let validity = DomainBox::new(vec![-20.0, -20.0], vec![20.0, 20.0]).unwrap();
    CrossSection::parse(c, &["x^2 + y^2 - 1"], &["atan2(y, x)"], validity).unwrap()
}

#[test]
fn canonicalize_is_idempotent() {
    let (c, g) = scaling();
    let sec = unit_circle_section(&c);
    let cfg = IntegratorConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let x = [rng.random_range(0.2..3.0), rng.random_range(0.2..3.0)];
        let (rep, _) = canonicalize(&g, &sec, &x, 1e-10, 50, &cfg).unwrap();
        let (rep2, eps2) = canonicalize(&g, &sec, &rep, 1e-10, 50, &cfg).unwrap();
        assert!(common::norm_diff(&rep, &rep2) < 1e-9);
        assert!(common::norm_inf(&eps2) < 1e-9);
    }
}

#[test]
fn quotient_map_is_orbit_constant() {
    let (c, g) = scaling();
    let sec = unit_circle_section(&c);
    let cfg = IntegratorConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for _ in 0..15 {
        let x = [rng.random_range(0.3..2.0), rng.random_range(0.3..2.0)];
        let q = quotient_map(&g, &sec, &x, 1e-10, 50, &cfg).unwrap();
        for _ in 0..4 {
            let eps = [rng.random_range(-1.0..1.0)];
            let y = fibermap::flow::group_flow(&g, &eps, &x, &cfg).unwrap();
            let qy = quotient_map(&g, &sec, &y, 1e-10, 50, &cfg).unwrap();
            assert!(
                common::norm_diff(&q, &qy) < 1e-8,
                "orbit constancy violated: {q:?} vs {qy:?}"
            );
        }
    }
}

/// On the chart y > 0.1 the closed form x/y has the same level sets as the
/// numerically constructed quotient map: equal closed-form values exactly
/// when equal chart values.
#[test]
fn partition_matches_closed_form_ratio() {
    let (c, g) = scaling();
    let sec = unit_circle_section(&c);
    let cfg = IntegratorConfig::default();
    let closed = fibermap::parse("x/y", &c).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(56);

    // same-orbit pairs: both maps agree the points are equal
    for _ in 0..10 {
        let x = [rng.random_range(-1.5..1.5), rng.random_range(0.2..2.0)];
        let eps = [rng.random_range(-1.0..1.0)];
        let y = fibermap::flow::group_flow(&g, &eps, &x, &cfg).unwrap();
        if y[1] <= 0.1 {
            continue;
        }
        let dc = (closed.eval_slice(&x).unwrap() - closed.eval_slice(&y).unwrap()).abs();
        let dq = common::norm_diff(
            &quotient_map(&g, &sec, &x, 1e-10, 50, &cfg).unwrap(),
            &quotient_map(&g, &sec, &y, 1e-10, 50, &cfg).unwrap(),
        );
        assert!(dc < 1e-8, "closed form split an orbit: {dc}");
        assert!(dq < 1e-8, "quotient map split an orbit: {dq}");
    }

    // clearly distinct orbits: both maps separate them
    for _ in 0..10 {
        let x = [rng.random_range(-1.5..1.5), rng.random_range(0.2..2.0)];
        let mut y = [rng.random_range(-1.5..1.5), rng.random_range(0.2..2.0)];
        let ratio_gap = |a: &[f64], b: &[f64]| {
            (closed.eval_slice(a).unwrap() - closed.eval_slice(b).unwrap()).abs()
        };
        if ratio_gap(&x, &y) < 0.05 {
            y[0] += 0.5; // push onto a visibly different ray
        }
        let dq = common::norm_diff(
            &quotient_map(&g, &sec, &x, 1e-10, 50, &cfg).unwrap(),
            &quotient_map(&g, &sec, &y, 1e-10, 50, &cfg).unwrap(),
        );
        assert!(
            dq > 1e-4,
            "quotient map identified distinct orbits {x:?} and {y:?}"
        );
    }
}

/// The first-integral construction of the rotation group: section {y = 0,
/// x > 0} with chart x recovers the radius, a first integral of the motion.
#[test]
fn rotation_quotient_recovers_radius() {
    let c = Coords::new(vec!["x", "y"]).unwrap();
    let g = LieBasis::new(vec![VectorField::parse(&c, &["-y", "x"]).unwrap()]).unwrap();
    let validity = DomainBox::new(vec![-10.0, -10.0], vec![10.0, 10.0]).unwrap();
    let sec = CrossSection::parse(&c, &["y"], &["x"], validity)
        .unwrap()
        .with_guards(vec![Guard::parse("x > 0", &c).unwrap()]);
    let cfg = IntegratorConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(78);
    for _ in 0..10 {
        let x = [rng.random_range(-2.0..2.0), rng.random_range(0.2..2.0)];
        let q = quotient_map(&g, &sec, &x, 1e-10, 50, &cfg).unwrap();
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
        assert!((q[0] - r).abs() < 1e-8, "chart {q:?} vs radius {r}");
    }
}

/// Two half-plane sections for the scaling group agree on their overlap.
#[test]
fn two_chart_overlap_consistency() {
    let (c, g) = scaling();
    let validity_a = DomainBox::new(vec![-20.0, 0.001], vec![20.0, 20.0]).unwrap();
    let sec_a = CrossSection::parse(&c, &["y - 1"], &["x"], validity_a).unwrap();
    let validity_b = DomainBox::new(vec![0.001, -20.0], vec![20.0, 20.0]).unwrap();
    let sec_b = CrossSection::parse(&c, &["x - 1"], &["y"], validity_b).unwrap();

    // overlap: open first quadrant away from the axes
    let overlap = DomainBox::new(vec![0.2, 0.2], vec![2.0, 2.0]).unwrap();
    let cfg = IntegratorConfig::default();
    let report = section_overlap_check(&g, &sec_a, &sec_b, &overlap, 24, 1e-7, 3, &cfg).unwrap();
    assert!(report.passed(), "details: {}", report.details);
}
