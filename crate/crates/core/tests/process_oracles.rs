use forbidden_degree::graph::sample_event_stream;
use forbidden_degree::process::{components, run_stream, simulate_discrete, z_statistic};
use forbidden_degree::{ForbiddenDegree, RngStream};

/// With no forbidden degree, `n` discrete steps and the continuous process at
/// `t = 2` add about the same number of edges, so their giants agree.
#[test]
fn discrete_and_continuous_clocks_agree() {
    let (n, reps) = (1000usize, 200u64);
    let (mut edges, mut cont, mut disc) = (0.0, 0.0, 0.0);
    for r in 0..reps {
        let g = sample_event_stream(n, 2.0, &mut RngStream::new(3, r).rng()).unwrap().accumulate(2.0);
        edges += g.edge_count() as f64;
        cont += components(&g).c_max() as f64 / n as f64;
        let d = simulate_discrete(n, ForbiddenDegree::Unbounded, n, &mut RngStream::new(4, r).rng()).unwrap();
        disc += components(&d.graph).c_max() as f64 / n as f64;
    }
    let r = reps as f64;
    assert!((edges / r - n as f64).abs() < 0.05 * n as f64, "{}", edges / r);
    assert!((cont / r - disc / r).abs() <= 0.02, "{} vs {}", cont / r, disc / r);
}

#[test]
fn k3_components_are_paths_and_cycles() {
    for seed in 0..20 {
        let stream = sample_event_stream(500, 3.0, &mut RngStream::new(seed, 0).rng()).unwrap();
        let g = run_stream(&stream, ForbiddenDegree::Finite(3), 3.0).unwrap().graph;
        assert!(g.max_degree() <= 2);
        assert!(z_statistic(&components(&g)).unwrap().dominates_c_max_squared());
    }
}
