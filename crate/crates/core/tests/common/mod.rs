//! Shared helpers for the integration test suites.

#![allow(dead_code)]

use rand::Rng;

use fibermap::{Coords, ScalarExpr, VectorField};

/// Random polynomial with integer coefficients in [-3, 3] and total degree
/// at most `degree`, built as an expression string.
pub fn poly_expr(coords: &Coords, rng: &mut impl Rng, degree: usize) -> ScalarExpr {
    let names = coords.names();
    let mut monomials: Vec<Vec<usize>> = Vec::new();
    collect_monomials(names.len(), degree, &mut vec![0; names.len()], 0, &mut monomials);

    let mut terms = Vec::new();
    for exps in &monomials {
        if rng.random_range(0.0..1.0) > 0.5 {
            continue;
        }
        let coef: i64 = rng.random_range(-3..=3);
        if coef == 0 {
            continue;
        }
        let mut term = coef.to_string();
        for (i, &e) in exps.iter().enumerate() {
            match e {
                0 => {}
                1 => term.push_str(&format!("*{}", names[i])),
                _ => term.push_str(&format!("*{}^{}", names[i], e)),
            }
        }
        terms.push(term);
    }
    let text = if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join(" + ")
    };
    fibermap::parse(&text, coords).expect("generated polynomial parses")
}

fn collect_monomials(
    m: usize,
    remaining: usize,
    current: &mut Vec<usize>,
    axis: usize,
    out: &mut Vec<Vec<usize>>,
) {
    if axis == m {
        out.push(current.clone());
        return;
    }
    for e in 0..=remaining {
        current[axis] = e;
        collect_monomials(m, remaining - e, current, axis + 1, out);
    }
    current[axis] = 0;
}

/// Random polynomial vector field of the given degree.
pub fn poly_field(coords: &Coords, rng: &mut impl Rng, degree: usize) -> VectorField {
    let comps = (0..coords.len())
        .map(|_| poly_expr(coords, rng, degree))
        .collect();
    VectorField::new(coords.clone(), comps).expect("components share coords")
}

pub fn xyz() -> Coords {
    Coords::new(vec!["x", "y", "z"]).unwrap()
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, b| a.max(b.abs()))
}

pub fn norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
