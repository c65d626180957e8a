//! Seeded, reproducible random streams.
//!
//! A [`RngStream`] names a ChaCha8 generator by `(seed, stream)`; ChaCha is
//! counter based, so distinct stream ids give independent sequences without
//! any jump-ahead bookkeeping.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type StreamRng = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngStream { seed, stream }
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> StreamRng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(self.stream);
        r
    }

    /// The `index`-th child stream. Children of distinct parents never share a key.
    pub fn substream(&self, index: u64) -> RngStream {
        RngStream { seed: mix2(self.seed, self.stream), stream: index }
    }
}

/// SplitMix64 finaliser.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn mix2(a: u64, b: u64) -> u64 {
    mix64(mix64(a) ^ b.rotate_left(17) ^ 0xD6E8_FEB8_6659_FD93)
}

/// Generator owned by a single tree node, addressed by its key.
pub(crate) fn keyed_rng(key: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(key)
}

/// Exact Poisson(`lambda`) variate.
pub fn poisson_draw<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> Result<u64> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::invalid(format!("poisson rate must be finite and >= 0, got {lambda}")));
    }
    if lambda == 0.0 {
        return Ok(0);
    }
    let d = Poisson::new(lambda).map_err(|e| Error::invalid(e.to_string()))?;
    Ok(d.sample(rng) as u64)
}

/// Reusable Poisson sampler that also accepts a zero rate.
#[derive(Clone, Debug)]
pub(crate) struct PoissonSampler(Option<Poisson<f64>>);

impl PoissonSampler {
    pub fn new(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::invalid(format!("poisson rate must be finite and >= 0, got {lambda}")));
        }
        if lambda == 0.0 {
            return Ok(PoissonSampler(None));
        }
        Poisson::new(lambda)
            .map(|d| PoissonSampler(Some(d)))
            .map_err(|e| Error::invalid(e.to_string()))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match &self.0 {
            None => 0,
            Some(d) => d.sample(rng) as u64,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_stream_same_numbers() {
        let a: Vec<u64> = (0..8).map(|_| 0).scan(RngStream::new(7, 3).rng(), |r, _| Some(r.random())).collect();
        let b: Vec<u64> = (0..8).map(|_| 0).scan(RngStream::new(7, 3).rng(), |r, _| Some(r.random())).collect();
        let c: Vec<u64> = (0..8).map(|_| 0).scan(RngStream::new(7, 4).rng(), |r, _| Some(r.random())).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn substreams_differ() {
        let s = RngStream::new(1, 0);
        assert_ne!(s.substream(0), s.substream(1));
        assert_ne!(s.substream(0), RngStream::new(1, 1).substream(0));
    }

    #[test]
    fn poisson_zero_and_invalid() {
        let mut r = RngStream::new(0, 0).rng();
        for _ in 0..100 {
            assert_eq!(poisson_draw(0.0, &mut r).unwrap(), 0);
        }
        assert!(poisson_draw(-1.0, &mut r).is_err());
        assert!(poisson_draw(f64::NAN, &mut r).is_err());
        assert!(poisson_draw(f64::INFINITY, &mut r).is_err());
    }

    #[test]
    fn poisson_mean_and_zero_mass() {
        let mut r = RngStream::new(11, 0).rng();
        let n = 1_000_000;
        let mut sum = 0.0;
        let mut zeros = 0usize;
        for _ in 0..n {
            let x = poisson_draw(2.0, &mut r).unwrap();
            sum += x as f64;
            zeros += (x == 0) as usize;
        }
        let mean = sum / n as f64;
        let se = (2.0 / n as f64).sqrt();
        assert!((mean - 2.0).abs() < 3.0 * se, "mean {mean}");
        let p0 = (-2.0f64).exp();
        let f0 = zeros as f64 / n as f64;
        let se0 = (p0 * (1.0 - p0) / n as f64).sqrt();
        assert!((f0 - p0).abs() < 3.0 * se0, "p0 {f0}");
    }
}
