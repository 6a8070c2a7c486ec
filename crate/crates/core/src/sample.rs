//! Sampling boxes and low-discrepancy point streams.

use crate::error::{Error, Result};

/// Axis-aligned box with positive volume, used as a sampling domain.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl DomainBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::Dimension(format!(
                "box bounds have lengths {} and {}",
                lo.len(),
                hi.len()
            )));
        }
        for (i, (a, b)) in lo.iter().zip(&hi).enumerate() {
            if !(a.is_finite() && b.is_finite() && b > a) {
                return Err(Error::Config(format!(
                    "box must have positive volume: axis {i} is [{a}, {b}]"
                )));
            }
        }
        Ok(DomainBox { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    /// Maps a unit-cube point into the box.
    pub fn map_unit(&self, u: &[f64]) -> Vec<f64> {
        debug_assert_eq!(u.len(), self.dim());
        u.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(t, (a, b))| a + t * (b - a))
            .collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (a, b))| *v >= *a && *v <= *b)
    }
}

const PRIMES: [u64; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];

/// Halton low-discrepancy sequence; the seed offsets the start index so
/// different seeds give different (but reproducible) point streams.
#[derive(Clone, Debug)]
pub struct HaltonSampler {
    dim: usize,
    index: u64,
}

impl HaltonSampler {
    pub fn new(dim: usize, seed: u64) -> Result<Self> {
        if dim == 0 || dim > PRIMES.len() {
            return Err(Error::Dimension(format!(
                "sampler supports 1..={} dimensions, got {dim}",
                PRIMES.len()
            )));
        }
        Ok(HaltonSampler {
            dim,
            index: 1 + seed % 8192,
        })
    }

    pub fn next_unit(&mut self) -> Vec<f64> {
        let i = self.index;
        self.index += 1;
        (0..self.dim).map(|d| radical_inverse(PRIMES[d], i)).collect()
    }

    pub fn next_point(&mut self, domain: &DomainBox) -> Vec<f64> {
        let u = self.next_unit();
        domain.map_unit(&u)
    }
}

fn radical_inverse(base: u64, mut i: u64) -> f64 {
    let mut result = 0.0;
    let mut f = 1.0 / base as f64;
    while i > 0 {
        result += f * (i % base) as f64;
        i /= base;
        f /= base as f64;
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_rejects_empty_axes() {
        assert!(DomainBox::new(vec![0.0], vec![0.0]).is_err());
        assert!(DomainBox::new(vec![1.0], vec![0.0]).is_err());
        assert!(DomainBox::new(vec![0.0, 0.0], vec![1.0]).is_err());
    }

    #[test]
    fn halton_points_fill_the_box() {
        let b = DomainBox::new(vec![-1.0, 0.0], vec![1.0, 2.0]).unwrap();
        let mut s = HaltonSampler::new(2, 7).unwrap();
        let pts: Vec<Vec<f64>> = (0..256).map(|_| s.next_point(&b)).collect();
        assert!(pts.iter().all(|p| b.contains(p)));
        // crude equidistribution check on the first axis
        let left = pts.iter().filter(|p| p[0] < 0.0).count();
        assert!((96..=160).contains(&left), "left count {left}");
    }

    #[test]
    fn same_seed_same_stream() {
        let mut a = HaltonSampler::new(3, 42).unwrap();
        let mut b = HaltonSampler::new(3, 42).unwrap();
        for _ in 0..10 {
            assert_eq!(a.next_unit(), b.next_unit());
        }
    }
}
