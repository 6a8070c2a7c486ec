//! Symbolic-then-numeric zero testing.
//!
//! Probabilistic soundness: an analytic function that vanishes on 64
//! well-spread points of a positive-volume box is zero on the box with
//! overwhelming probability. Points where evaluation is singular (tiny
//! denominators, log of nonpositive values) are rejected and resampled.

use super::ScalarExpr;
use crate::error::{Error, Result};
use crate::sample::{DomainBox, HaltonSampler};

pub const DEFAULT_ZERO_TOL: f64 = 1e-9;
pub const DEFAULT_ZERO_SAMPLES: usize = 64;

/// Denominators smaller than this in magnitude mark a sample as singular.
const SINGULAR_REJECT_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum ZeroVerdict {
    /// Simplification reduced the expression to the constant 0.
    ZeroSymbolic,
    /// All sampled values were below tolerance.
    ZeroNumeric { max_abs: f64 },
    /// First sampled point where the expression exceeded tolerance.
    NonZero { point: Vec<f64>, value: f64 },
}

impl ZeroVerdict {
    pub fn is_zero(&self) -> bool {
        !matches!(self, ZeroVerdict::NonZero { .. })
    }
}

pub fn is_zero(e: &ScalarExpr, domain: &DomainBox, tol: f64, seed: u64) -> Result<ZeroVerdict> {
    is_zero_with(e, domain, tol, DEFAULT_ZERO_SAMPLES, seed)
}

pub fn is_zero_with(
    e: &ScalarExpr,
    domain: &DomainBox,
    tol: f64,
    n_samples: usize,
    seed: u64,
) -> Result<ZeroVerdict> {
    if tol <= 0.0 {
        return Err(Error::Config("zero-test tolerance must be positive".into()));
    }
    if domain.dim() != e.coords().len() {
        return Err(Error::Dimension(format!(
            "domain box has {} axes but the expression has {} coordinates",
            domain.dim(),
            e.coords().len()
        )));
    }
    let simplified = e.simplify();
    if simplified.is_zero_symbolic() {
        return Ok(ZeroVerdict::ZeroSymbolic);
    }

    let mut sampler = HaltonSampler::new(domain.dim(), seed)?;
    let max_attempts = n_samples.saturating_mul(10);
    let mut hits = 0usize;
    let mut attempts = 0usize;
    let mut max_abs = 0.0f64;
    while hits < n_samples && attempts < max_attempts {
        attempts += 1;
        let x = sampler.next_point(domain);
        match simplified.eval_guarded(&x, SINGULAR_REJECT_TOL) {
            Ok(v) => {
                hits += 1;
                if v.abs() >= tol {
                    return Ok(ZeroVerdict::NonZero { point: x, value: v });
                }
                max_abs = max_abs.max(v.abs());
            }
            Err(Error::Domain(_)) => continue,
            Err(other) => return Err(other),
        }
    }
    if hits < n_samples {
        return Err(Error::Sampling { hits, attempts });
    }
    Ok(ZeroVerdict::ZeroNumeric { max_abs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Coords};

    fn setup(src: &str) -> (ScalarExpr, DomainBox) {
        let c = Coords::new(vec!["x", "y"]).unwrap();
        let e = parse(src, &c).unwrap();
        let b = DomainBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        (e, b)
    }

    #[test]
    fn exact_cancellation_is_symbolic() {
        let (e, b) = setup("x - x");
        assert_eq!(is_zero(&e, &b, 1e-9, 0).unwrap(), ZeroVerdict::ZeroSymbolic);
    }

    #[test]
    fn rotation_invariant_derivative_is_symbolic() {
        let (e, b) = setup("-y*(2*x) + x*(2*y)");
        assert_eq!(is_zero(&e, &b, 1e-9, 0).unwrap(), ZeroVerdict::ZeroSymbolic);
    }

    #[test]
    fn product_is_nonzero_with_witness() {
        let (e, b) = setup("x*y");
        match is_zero(&e, &b, 1e-9, 0).unwrap() {
            ZeroVerdict::NonZero { point, value } => {
                assert_eq!(value, point[0] * point[1]);
            }
            other => panic!("expected NonZero, got {other:?}"),
        }
    }

    #[test]
    fn trig_identity_is_numeric_zero() {
        let (e, b) = setup("sin(x)^2 + cos(x)^2 - 1");
        match is_zero(&e, &b, 1e-9, 0).unwrap() {
            ZeroVerdict::ZeroNumeric { max_abs } => assert!(max_abs < 1e-12),
            other => panic!("expected ZeroNumeric, got {other:?}"),
        }
    }

    #[test]
    fn everywhere_singular_expression_exhausts_sampling() {
        let c = Coords::new(vec!["x"]).unwrap();
        let e = parse("log(-1 - abs(x))", &c).unwrap();
        let b = DomainBox::new(vec![-1.0], vec![1.0]).unwrap();
        assert!(matches!(
            is_zero(&e, &b, 1e-9, 0),
            Err(Error::Sampling { .. })
        ));
    }
}
