//! Seeded sample points for pointwise checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 20_200_101;

/// Axis-aligned box with per-coordinate bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SampleBox {
    pub fn uniform(dim: usize, lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "empty box");
        SampleBox {
            lo: vec![lo; dim],
            hi: vec![hi; dim],
        }
    }

    /// The default `[-2, 2]^dim`.
    pub fn standard(dim: usize) -> Self {
        SampleBox::uniform(dim, -2.0, 2.0)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    /// `n` uniform points; identical for identical `(box, n, seed)`.
    pub fn points(&self, n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                self.lo
                    .iter()
                    .zip(&self.hi)
                    .map(|(&a, &b)| if a == b { a } else { rng.random_range(a..b) })
                    .collect()
            })
            .collect()
    }
}

/// Tolerance scale `1 + max|x_i| + |h|` used by all residual checks.
pub fn residual_scale(x: &[f64], h: f64) -> f64 {
    1.0 + x.iter().fold(0.0f64, |a, v| a.max(v.abs())) + h.abs()
}
