use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::OffspringKernel;
use crate::error::{Error, Result};
use crate::local::{sample_tkt, TktOptions, TktStatus};
use crate::process::ForbiddenDegree;
use crate::rng::RngStream;

/// Perron root of a nonnegative square matrix by power iteration, stopped
/// when the Collatz–Wielandt bounds meet.
pub fn spectral_radius(m: &[Vec<f64>]) -> Result<f64> {
    let n = m.len();
    if n == 0 || m.iter().flatten().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    if m.iter().flatten().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::NumericFailure("mean matrix must be finite and nonnegative".into()));
    }
    // a positive shift keeps the iteration aperiodic without moving the eigenvectors
    let shift = 1.0;
    let mut v = vec![1.0 / n as f64; n];
    let mut last = f64::NAN;
    for _ in 0..200_000 {
        let w: Vec<f64> = (0..n).map(|i| shift * v[i] + m[i].iter().zip(&v).map(|(a, b)| a * b).sum::<f64>()).collect();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            if v[i] > 0.0 {
                let r = w[i] / v[i];
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
        let norm: f64 = w.iter().sum();
        let lambda = norm / v.iter().sum::<f64>();
        if hi - lo <= 1e-12 * hi || (lambda - last).abs() <= 1e-14 * lambda {
            return Ok(lambda - shift);
        }
        last = lambda;
        v = w.into_iter().map(|x| x / norm).collect();
    }
    Err(Error::NumericFailure("power iteration did not settle".into()))
}

/// Spectral radius of the discretised mean operator of the kernel.
pub fn estimate_spectral_radius(kernel: &OffspringKernel) -> Result<f64> {
    spectral_radius(&kernel.mean_matrix())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthEstimate {
    /// Fitted per-generation growth factor.
    pub rho: f64,
    /// Mean component size of each generation over usable replicas.
    pub mean_sizes: Vec<f64>,
    pub replicas_used: u64,
}

/// Growth factor of `T^k_t` from Monte Carlo generation sizes: the slope of
/// `log E|Z_g|` against `g` for `g` in `first_gen..=generations`.
pub fn growth_rate_mc(
    t: f64,
    k: ForbiddenDegree,
    replicas: u64,
    generations: u32,
    first_gen: u32,
    stream: RngStream,
) -> Result<GrowthEstimate> {
    if first_gen + 2 > generations {
        return Err(Error::invalid("need at least three generations to fit".to_string()));
    }
    let opts = TktOptions { gen_cap: Some(generations), keep_pruned: false, ..TktOptions::default() };
    let rows: Vec<Option<Vec<usize>>> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream.substream(r).rng();
            let s = sample_tkt(t, k, &mut rng, &opts)?;
            Ok((s.status != TktStatus::Truncated).then_some(s.generations))
        })
        .collect::<Result<_>>()?;
    let g = generations as usize;
    let mut sums = vec![0.0; g + 1];
    let mut used = 0u64;
    for row in rows.iter().flatten() {
        used += 1;
        for (i, &c) in row.iter().enumerate().take(g + 1) {
            sums[i] += c as f64;
        }
    }
    if used == 0 {
        return Err(Error::NumericFailure("every replica was truncated".into()));
    }
    let mean_sizes: Vec<f64> = sums.iter().map(|s| s / used as f64).collect();
    let pts: Vec<(f64, f64)> =
        (first_gen as usize..=g).filter(|&i| mean_sizes[i] > 0.0).map(|i| (i as f64, mean_sizes[i].ln())).collect();
    if pts.len() < 3 {
        return Ok(GrowthEstimate { rho: 0.0, mean_sizes, replicas_used: used });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(GrowthEstimate { rho: (sxy / sxx).exp(), mean_sizes, replicas_used: used })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_matrices() {
        assert_eq!(spectral_radius(&[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap(), 0.0);
        let r = spectral_radius(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert!((r - 3.0).abs() < 1e-9);
        // periodic: eigenvalues +-2
        let r = spectral_radius(&[vec![0.0, 4.0], vec![1.0, 0.0]]).unwrap();
        assert!((r - 2.0).abs() < 1e-9);
        assert!(spectral_radius(&[vec![-1.0]]).is_err());
    }

    #[test]
    fn growth_of_plain_gw_tree() {
        // with no removals T^k_t is Poisson(t) Galton-Watson
        let g = growth_rate_mc(1.5, ForbiddenDegree::Unbounded, 4000, 6, 1, RngStream::new(7, 0)).unwrap();
        assert!((g.rho - 1.5).abs() < 0.08, "{g:?}");
    }
}
