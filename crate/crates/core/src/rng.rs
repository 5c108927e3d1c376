//! Seeded random streams.
//!
//! Every agent owns its own substream derived from the run seed and the agent
//! id, so adding or removing agents never reshuffles anyone else's noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// A reproducible random stream (ChaCha8, portable across platforms).
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::substream(seed, 0)
    }

    /// Independent substream `stream` of the run seeded with `seed`.
    pub fn substream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RngStream { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Uniform draw in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.rng.random::<f64>()
    }

    /// Uniform rotation angle in `[-π, π]`.
    pub fn rotation(&mut self) -> f64 {
        self.uniform(-std::f64::consts::PI, std::f64::consts::PI)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        if p >= 1.0 {
            return true;
        }
        if p <= 0.0 {
            return false;
        }
        self.rng.random::<f64>() < p
    }
}

/// Wiener increment `ΔW ~ N(0, dt)`.
pub fn wiener_increment(rng: &mut RngStream, dt: f64) -> f64 {
    debug_assert!(dt >= 0.0);
    if dt == 0.0 {
        return 0.0;
    }
    dt.sqrt() * rng.normal()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_dt_gives_zero_increment() {
        let mut rng = RngStream::new(7);
        for _ in 0..100 {
            assert_eq!(wiener_increment(&mut rng, 0.0), 0.0);
        }
    }

    #[test]
    fn same_seed_same_sequence() {
        let mut a = RngStream::new(42);
        let mut b = RngStream::new(42);
        for _ in 0..1000 {
            assert_eq!(
                wiener_increment(&mut a, 0.01).to_bits(),
                wiener_increment(&mut b, 0.01).to_bits()
            );
        }
    }

    #[test]
    fn substreams_differ() {
        let mut a = RngStream::substream(42, 0);
        let mut b = RngStream::substream(42, 1);
        let va: Vec<f64> = (0..8).map(|_| a.normal()).collect();
        let vb: Vec<f64> = (0..8).map(|_| b.normal()).collect();
        assert_ne!(va, vb);
    }

    #[test]
    fn increment_variance_matches_dt() {
        // For n normal draws with variance s2, the sample variance has
        // standard deviation s2 * sqrt(2 / (n - 1)).
        let n = 100_000;
        let dt = 0.01;
        let mut rng = RngStream::new(2024);
        let draws: Vec<f64> = (0..n).map(|_| wiener_increment(&mut rng, dt)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let sigma = dt * (2.0 / (n - 1) as f64).sqrt();
        assert!((var - dt).abs() < 3.0 * sigma, "var {var} vs {dt} ± {}", 3.0 * sigma);
    }

    #[test]
    fn rotation_range() {
        let mut rng = RngStream::new(3);
        for _ in 0..10_000 {
            let a = rng.rotation();
            assert!((-std::f64::consts::PI..=std::f64::consts::PI).contains(&a));
        }
    }
}
