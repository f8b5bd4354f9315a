//! Seeded Gaussian noise with independent substreams.
//!
//! Each `(seed, replicate, component)` triple selects a ChaCha8 stream: the
//! seed is the key and `(replicate, component)` the 64-bit stream id, so
//! replicates never share variates regardless of scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

/// Component ids used to carve streams out of one seed.
pub mod component {
    pub const PARTICLES: u32 = 1;
    pub const WISHART: u32 = 2;
    pub const POLYS: u32 = 3;
    pub const GLUED_NEGATIVE: u32 = 4;
    pub const GLUED_POSITIVE: u32 = 5;
    pub const ZERO_BLOCK_NEGATIVE: u32 = 6;
    pub const ZERO_BLOCK_POSITIVE: u32 = 7;
    pub const PINNED: u32 = 8;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RngSpec {
    pub seed: u64,
    pub replicate: u32,
    pub component: u32,
    /// Replace every variate by 0. Test hook for the deterministic part of
    /// the schemes.
    pub zero_noise: bool,
}

impl RngSpec {
    pub fn new(seed: u64, replicate: u32, component: u32) -> Self {
        RngSpec { seed, replicate, component, zero_noise: false }
    }

    pub fn zero_noise(mut self) -> Self {
        self.zero_noise = true;
        self
    }

    pub fn with_replicate(mut self, replicate: u32) -> Self {
        self.replicate = replicate;
        self
    }

    pub fn with_component(mut self, component: u32) -> Self {
        self.component = component;
        self
    }

    pub fn stream_id(&self) -> u64 {
        ((self.replicate as u64) << 32) | self.component as u64
    }
}

/// Source of standard normal variates for one path.
#[derive(Debug, Clone)]
pub enum NoiseSource {
    Gaussian(Box<ChaCha8Rng>),
    Zero,
}

impl NoiseSource {
    pub fn new(spec: &RngSpec) -> Self {
        if spec.zero_noise {
            return NoiseSource::Zero;
        }
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&spec.seed.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(spec.stream_id());
        NoiseSource::Gaussian(Box::new(rng))
    }

    pub fn next(&mut self) -> f64 {
        match self {
            NoiseSource::Gaussian(rng) => rng.sample(StandardNormal),
            NoiseSource::Zero => 0.0,
        }
    }

    pub fn fill(&mut self, out: &mut [f64]) {
        match self {
            NoiseSource::Gaussian(rng) => {
                for v in out {
                    *v = rng.sample(StandardNormal);
                }
            }
            NoiseSource::Zero => out.fill(0.0),
        }
    }
}

/// Infinite iterator over the variates of one stream.
pub struct GaussianStream(NoiseSource);

impl Iterator for GaussianStream {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        Some(self.0.next())
    }
}

pub fn gaussian_stream(spec: &RngSpec) -> GaussianStream {
    GaussianStream(NoiseSource::new(spec))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_stream_is_identical() {
        let spec = RngSpec::new(42, 3, component::PARTICLES);
        let a: Vec<f64> = gaussian_stream(&spec).take(1000).collect();
        let b: Vec<f64> = gaussian_stream(&spec).take(1000).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn streams_differ_by_replicate_and_component() {
        let base = RngSpec::new(42, 0, component::PARTICLES);
        let a: Vec<f64> = gaussian_stream(&base).take(8).collect();
        let b: Vec<f64> = gaussian_stream(&base.with_replicate(1)).take(8).collect();
        let c: Vec<f64> = gaussian_stream(&base.with_component(component::WISHART)).take(8).collect();
        assert_ne!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn moments_and_cross_correlation() {
        const N: usize = 100_000;
        let a: Vec<f64> = gaussian_stream(&RngSpec::new(7, 0, 1)).take(N).collect();
        let b: Vec<f64> = gaussian_stream(&RngSpec::new(7, 1, 1)).take(N).collect();
        let mean = a.iter().sum::<f64>() / N as f64;
        let var = a.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (N - 1) as f64;
        // standard errors: 1/sqrt(N) = 0.0032 for the mean, sqrt(2/N) = 0.0045 for the variance
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
        let mb = b.iter().sum::<f64>() / N as f64;
        let vb = b.iter().map(|v| (v - mb).powi(2)).sum::<f64>() / (N - 1) as f64;
        let cov = a.iter().zip(&b).map(|(x, y)| (x - mean) * (y - mb)).sum::<f64>() / (N - 1) as f64;
        let rho = cov / (var * vb).sqrt();
        assert!(rho.abs() < 0.02, "rho {rho}");
    }

    #[test]
    fn zero_hook() {
        let spec = RngSpec::new(1, 0, 1).zero_noise();
        assert!(gaussian_stream(&spec).take(100).all(|v| v == 0.0));
    }
}
