use statrs::distribution::{Discrete, DiscreteCDF, Poisson};

use forbidden_degree::analytic::{compute_degree_profile, compute_pi, supercritical_interval, threshold_lhs, threshold_max};

#[test]
fn pi_is_a_poisson_cdf() {
    for &t in &[0.1, 0.5, 1.0, 2.0, 3.7, 8.0] {
        for k in 2u32..9 {
            let want = Poisson::new(t).unwrap().cdf((k - 2) as u64);
            let got = compute_pi(t, k).unwrap();
            assert!((got - want).abs() < 1e-12, "t={t} k={k}: {got} vs {want}");
        }
    }
}

#[test]
fn lhs_matches_the_truncated_exponential_series() {
    for &t in &[0.3, 1.0, 2.0, 5.0] {
        for k in 3u32..8 {
            let p = Poisson::new(t).unwrap();
            let want: f64 = (0..=(k - 3) as u64).map(|i| t * p.pmf(i)).sum();
            assert!((threshold_lhs(t, k).unwrap() - want).abs() < 1e-12);
        }
    }
    assert!((threshold_lhs(2.0, 5).unwrap() - 10.0 * (-2.0f64).exp()).abs() < 1e-12);
}

#[test]
fn k4_maximum_is_at_the_golden_ratio() {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let (t_star, v) = threshold_max(4, 10.0).unwrap();
    assert!((t_star - phi).abs() < 1e-6, "{t_star}");
    assert!((v - phi.powi(3) * (-phi).exp()).abs() < 1e-12, "{v}");
    assert!(v < 1.0);
    assert!(supercritical_interval(4, 20.0).unwrap().is_none());
    assert!(supercritical_interval(3, 20.0).unwrap().is_none());
}

#[test]
fn k5_interval_endpoints_solve_the_threshold_equation() {
    let (lo, hi) = supercritical_interval(5, 20.0).unwrap().unwrap();
    assert!(lo < 2.0 && 2.0 < hi);
    for x in [lo, hi] {
        assert!((threshold_lhs(x, 5).unwrap() - 1.0).abs() < 1e-9, "{x}");
    }
    assert!(threshold_lhs(0.5 * (lo + hi), 5).unwrap() > 1.0);
    assert!(threshold_lhs(lo * 0.9, 5).unwrap() < 1.0);
}

#[test]
fn degree_profile_identities() {
    for &t in &[0.5, 1.0, 2.0, 4.0] {
        for k in 3u32..8 {
            let d = compute_degree_profile(t, k).unwrap();
            let total: f64 = d.p.iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            let mean: f64 = d.p.iter().enumerate().map(|(i, p)| i as f64 * p).sum();
            assert!((mean - t * d.pi * d.pi).abs() < 1e-12, "t={t} k={k}");
            let lhs = threshold_lhs(t, k).unwrap();
            assert!((d.q_t - t * d.pi * d.pi * (lhs - 1.0)).abs() < 1e-12);
            assert_eq!(d.q_t > 0.0, lhs > 1.0);
        }
    }
}

#[test]
fn invalid_arguments_are_rejected() {
    assert!(compute_pi(-0.1, 5).is_err());
    assert!(compute_pi(f64::NAN, 5).is_err());
    assert!(compute_pi(1.0, 1).is_err());
    assert!(threshold_lhs(f64::INFINITY, 5).is_err());
}
