use serde::{Deserialize, Serialize};

use super::kernel::OffspringKernel;
use super::spectral::estimate_spectral_radius;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Sup-norm tolerance on the fixed point.
    pub tol: f64,
    pub max_iters: usize,
    /// The iteration from above starts at `1 - epsilon`.
    pub epsilon: f64,
    /// Root offspring draws for the two-stage extinction probability.
    pub root_draws: u64,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-6, max_iters: 200_000, epsilon: 1e-3, root_draws: 20_000, seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Converged,
    /// One of the iterations did not settle, or the two limits disagree.
    Diverged,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtinctionSolution {
    /// Per-bin extinction probability of `T^{k+,y}_t`: the limit from below.
    pub q: Vec<f64>,
    /// Limit of the iteration started from above.
    pub q_above: Vec<f64>,
    /// `sup |q - phi(q)|`.
    pub residual: f64,
    pub iterations: usize,
    pub rho_hat: f64,
    /// Extinction probability of the two-stage tree `T^k_t`.
    pub q_twostage: f64,
    pub q_twostage_se: f64,
    pub status: SolveStatus,
    /// `|rho_hat - 1| < 0.05`: the sign of the survival probability is not asserted.
    pub critical_window: bool,
    /// Both iterations moved monotonically at every step.
    pub monotone: bool,
}

impl ExtinctionSolution {
    /// Survival probability of `T^k_t`.
    pub fn survival(&self) -> f64 {
        1.0 - self.q_twostage
    }
}

struct Run {
    q: Vec<f64>,
    iterations: usize,
    converged: bool,
    monotone: bool,
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Iterates `phi` from `q0` in the given direction (`+1` non-decreasing, `-1`
/// non-increasing). Stops once the geometric error bound from the observed
/// contraction falls under `tol / 2`.
fn iterate(kernel: &OffspringKernel, q0: Vec<f64>, dir: f64, tol: f64, max_iters: usize) -> Run {
    let mut q = q0;
    let mut monotone = true;
    let mut prev_delta = f64::INFINITY;
    for it in 1..=max_iters {
        let next = kernel.phi_apply(&q);
        if next.iter().zip(&q).any(|(a, b)| dir * (a - b) < -1e-12) {
            monotone = false;
        }
        let delta = sup_diff(&next, &q);
        q = next;
        let r = (delta / prev_delta).min(1.0);
        prev_delta = delta;
        let bound = if r < 1.0 { delta * r / (1.0 - r) } else { f64::INFINITY };
        if delta == 0.0 || (it > 2 && bound < tol / 2.0 && delta < tol) {
            return Run { q, iterations: it, converged: true, monotone };
        }
    }
    Run { q, iterations: max_iters, converged: false, monotone }
}

/// Largest of `1 - epsilon * 2^j` (`j` up to where it passes `1/2`) that is a
/// supersolution, `phi(s) <= s`; otherwise `1`, which always is one for the
/// clamped operator.
fn upper_start(kernel: &OffspringKernel, epsilon: f64) -> Vec<f64> {
    let nb = kernel.bins;
    let mut e = epsilon;
    while e <= 0.5 {
        let s = vec![1.0 - e; nb];
        if kernel.phi_apply(&s).iter().all(|&v| v <= 1.0 - e) {
            return s;
        }
        e *= 2.0;
    }
    vec![1.0; nb]
}

/// Minimal fixed point of the kernel's generating operator, bracketed from
/// below (starting at `phi(0)`) and from above (starting near `1 - epsilon`),
/// plus the two-stage extinction probability of the root.
pub fn solve_extinction(kernel: &OffspringKernel, opts: &SolveOptions) -> Result<ExtinctionSolution> {
    if !(opts.tol > 0.0) {
        return Err(Error::invalid(format!("tol must be > 0, got {}", opts.tol)));
    }
    if !(opts.epsilon > 0.0 && opts.epsilon < 1.0) {
        return Err(Error::invalid(format!("epsilon must be in (0,1), got {}", opts.epsilon)));
    }
    let nb = kernel.bins;
    let below = iterate(kernel, kernel.phi_apply(&vec![0.0; nb]), 1.0, opts.tol, opts.max_iters);
    let above = iterate(kernel, upper_start(kernel, opts.epsilon), -1.0, opts.tol, opts.max_iters);
    let rho_hat = estimate_spectral_radius(kernel)?;
    let agree = sup_diff(&below.q, &above.q) <= opts.tol;
    let status = if below.converged && above.converged && agree { SolveStatus::Converged } else { SolveStatus::Diverged };
    let residual = sup_diff(&below.q, &kernel.phi_apply(&below.q));
    let (q_twostage, q_twostage_se) = two_stage_extinction(kernel, &below.q, opts.root_draws, opts.seed)?;
    Ok(ExtinctionSolution {
        q: below.q,
        q_above: above.q,
        residual,
        iterations: below.iterations.max(above.iterations),
        rho_hat,
        q_twostage,
        q_twostage_se,
        status,
        critical_window: (rho_hat - 1.0).abs() < 0.05,
        monotone: below.monotone && above.monotone,
    })
}

/// `E prod_i (1 - p + p q(x_i))` over the root's kept children `x_i`; `(mean, se)`.
pub fn two_stage_extinction(kernel: &OffspringKernel, q: &[f64], draws: u64, seed: u64) -> Result<(f64, f64)> {
    if draws == 0 {
        return Ok((f64::NAN, f64::NAN));
    }
    let p = kernel.keep_probability;
    let vals: Vec<f64> = kernel
        .root_offspring_draws(draws, seed)?
        .iter()
        .map(|kids| kids.iter().map(|&x| 1.0 - p + p * q[kernel.bin_of(x)]).product())
        .collect();
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    Ok((mean, (var / n).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branching::{estimate_kernel, KernelOptions};
    use crate::process::ForbiddenDegree;

    fn kern(t: f64, k: u32, bins: usize, samples: usize) -> OffspringKernel {
        let o = KernelOptions { bins, samples_per_cell: samples, seed: 21, ..KernelOptions::default() };
        estimate_kernel(t, ForbiddenDegree::Finite(k), &o).unwrap()
    }

    #[test]
    fn k2_goes_extinct() {
        let s = solve_extinction(&kern(2.0, 2, 4, 100), &SolveOptions { root_draws: 500, ..SolveOptions::default() }).unwrap();
        assert!(s.q.iter().all(|&v| (v - 1.0).abs() < 1e-9));
        assert!((s.q_twostage - 1.0).abs() < 1e-12);
        assert_eq!(s.status, SolveStatus::Converged);
    }

    #[test]
    fn subcritical_k5_goes_extinct() {
        let s = solve_extinction(&kern(0.9, 5, 6, 200), &SolveOptions { root_draws: 2000, ..SolveOptions::default() }).unwrap();
        assert!(s.rho_hat < 0.95, "{s:?}");
        assert!(s.survival() <= 0.02);
        assert!(s.monotone);
        assert_eq!(s.status, SolveStatus::Converged);
    }

    #[test]
    fn supercritical_k5_brackets_agree() {
        let s = solve_extinction(&kern(2.0, 5, 6, 200), &SolveOptions { root_draws: 2000, ..SolveOptions::default() }).unwrap();
        assert!(s.rho_hat > 1.0);
        assert!(s.monotone, "{s:?}");
        assert_eq!(s.status, SolveStatus::Converged);
        assert!(s.residual < 1e-5);
        assert!(s.survival() > 0.05);
    }
}
