use forbidden_degree::branching::{
    estimate_kernel, estimate_spectral_radius, growth_rate_mc, solve_extinction, KernelOptions, SolveOptions,
    SolveStatus,
};
use forbidden_degree::local::estimate_survival;
use forbidden_degree::{ForbiddenDegree, RngStream};

/// Smallest root of `q = exp(t (q - 1))`.
fn gw_extinction(t: f64) -> f64 {
    let mut q = 0.0;
    for _ in 0..10_000 {
        q = (t * (q - 1.0)).exp();
    }
    q
}

#[test]
fn unbounded_survival_matches_poisson_galton_watson() {
    for (t, seed) in [(2.0, 1u64), (1.5, 2)] {
        let est = estimate_survival(t, ForbiddenDegree::Unbounded, 4000, 25, 2000, RngStream::new(seed, 0)).unwrap();
        let want = 1.0 - gw_extinction(t);
        assert!((est.a_hat - want).abs() < 4.0 * est.se + 0.01, "t={t}: {} vs {want}", est.a_hat);
    }
}

#[test]
fn subcritical_survival_vanishes() {
    let est = estimate_survival(0.5, ForbiddenDegree::Finite(5), 4000, 25, 2000, RngStream::new(3, 0)).unwrap();
    assert!(est.a_hat <= 0.01, "{}", est.a_hat);
}

#[test]
fn kernel_solution_agrees_with_direct_survival() {
    let kf = ForbiddenDegree::Finite(5);
    let opts = KernelOptions { bins: 8, samples_per_cell: 2000, m_samples: 40_000, seed: 4, ..KernelOptions::default() };
    let kern = estimate_kernel(2.0, kf, &opts).unwrap();
    let sol = solve_extinction(&kern, &SolveOptions { seed: 4, ..SolveOptions::default() }).unwrap();
    let direct = estimate_survival(2.0, kf, 4000, 30, 1000, RngStream::new(5, 0)).unwrap();
    let se = (direct.se.powi(2) + sol.q_twostage_se.powi(2)).sqrt();
    let gap = (direct.a_hat - (1.0 - sol.q_twostage)).abs();
    assert!(gap <= (3.0 * se).max(0.03), "a={} 1-q={} se={se}", direct.a_hat, 1.0 - sol.q_twostage);
    assert!(sol.rho_hat > 1.0);
    assert!(sol.q.iter().zip(&sol.q_above).all(|(a, b)| a <= &(b + 1e-6)));
}

#[test]
fn subcritical_kernel_has_certain_extinction() {
    let kf = ForbiddenDegree::Finite(5);
    let opts = KernelOptions { bins: 6, samples_per_cell: 500, m_samples: 10_000, seed: 6, ..KernelOptions::default() };
    let kern = estimate_kernel(0.5, kf, &opts).unwrap();
    let sol = solve_extinction(&kern, &SolveOptions::default()).unwrap();
    assert!(sol.rho_hat < 1.0);
    assert_eq!(sol.status, SolveStatus::Converged);
    // below criticality only the kernel's missing mass escapes extinction:
    // 1 - q <= |1 - phi(1)| / (1 - |M|) in the sup norm
    let deficit = kern.phi_apply(&vec![1.0; kern.bins]).iter().map(|m| 1.0 - m).fold(0.0, f64::max);
    let norm = kern.mean_matrix().iter().map(|r| r.iter().sum::<f64>()).fold(0.0, f64::max);
    assert!(norm < 1.0, "{norm}");
    let bound = deficit / (1.0 - norm) + 1e-6;
    assert!(sol.q.iter().all(|q| 1.0 - q <= bound), "{:?} bound {bound}", sol.q);
    assert!(sol.q_twostage > 0.97, "{}", sol.q_twostage);
}

/// The kernel spectral radius for `k = 4` stays at or below 1.05 over the
/// grid, while the growth rate of `T^4_t` from direct simulation sits just
/// above 1 at moderate `t`.
#[test]
fn k4_spectral_radius_grid() {
    let kf = ForbiddenDegree::Finite(4);
    for (i, t) in [0.5, 1.0, 2.0, 3.0, 4.0].into_iter().enumerate() {
        let opts = KernelOptions {
            bins: 16,
            samples_per_cell: 3000,
            m_samples: 60_000,
            seed: 40 + i as u64,
            ..KernelOptions::default()
        };
        let rho = estimate_spectral_radius(&estimate_kernel(t, kf, &opts).unwrap()).unwrap();
        println!("k=4 t={t} rho={rho:.4}");
        assert!(rho <= 1.05, "t={t}: rho={rho}");
    }
    let g = growth_rate_mc(3.0, kf, 20_000, 8, 2, RngStream::new(7, 0)).unwrap();
    println!("k=4 t=3 growth={:.4}", g.rho);
    assert!(g.rho > 0.95 && g.rho < 1.1, "{}", g.rho);
}

#[test]
fn survival_is_negligible_at_the_lower_bound_threshold() {
    let kf = ForbiddenDegree::Finite(5);
    let (lo, _) = forbidden_degree::analytic::supercritical_interval(5, 20.0).unwrap().unwrap();
    let opts = KernelOptions { bins: 8, samples_per_cell: 2000, m_samples: 40_000, seed: 8, ..KernelOptions::default() };
    let sol = solve_extinction(&estimate_kernel(lo, kf, &opts).unwrap(), &SolveOptions::default()).unwrap();
    assert!(1.0 - sol.q_twostage <= 0.02, "t={lo}: 1-q={}", 1.0 - sol.q_twostage);
}

#[test]
fn percolated_survival_increases_to_the_plain_one() {
    let kf = ForbiddenDegree::Finite(5);
    let survival = |eps: f64| {
        let opts = KernelOptions {
            bins: 8,
            samples_per_cell: 2000,
            m_samples: 40_000,
            seed: 9,
            keep_probability: 1.0 - 2.0 * eps,
            ..KernelOptions::default()
        };
        1.0 - solve_extinction(&estimate_kernel(2.0, kf, &opts).unwrap(), &SolveOptions::default()).unwrap().q_twostage
    };
    let plain = survival(0.0);
    let gaps: Vec<f64> = [0.1, 0.05, 0.02].iter().map(|&e| plain - survival(e)).collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    assert!(gaps.iter().all(|&g| g > -0.01), "{gaps:?}");
    assert!(gaps[2] < 0.08, "{gaps:?}");
}
