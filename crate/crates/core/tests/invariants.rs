use std::collections::BTreeMap;

use proptest::prelude::*;

use forbidden_degree::analytic::t_k_transform;
use forbidden_degree::graph::sample_event_stream;
use forbidden_degree::oracle::{component_sizes_by_closure, lower_bound_preimage_conditions, replay_phi};
use forbidden_degree::process::{components, phi_transform, run_stream, sandwich_from_stream};
use forbidden_degree::{ForbiddenDegree, LabeledMultigraph, RngStream};

fn mult(g: &LabeledMultigraph) -> BTreeMap<(u32, u32), u32> {
    g.multiplicities().into_iter().map(|(e, m)| (e, m as u32)).collect()
}

fn config() -> ProptestConfig {
    ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn sandwich_holds_edgewise(n in 2usize..80, k in 2u32..8, t in 0.0f64..4.0, seed in any::<u64>()) {
        let kf = ForbiddenDegree::Finite(k);
        let stream = sample_event_stream(n, t, &mut RngStream::new(seed, 0).rng()).unwrap();
        let s = sandwich_from_stream(&stream, kf, t);
        prop_assert_eq!(s.inclusion_violations(), 0);
        prop_assert!(s.g_k.max_degree() < k as usize);
        prop_assert!(s.g_lower.max_degree() < k as usize);
        prop_assert!(s.g_inf.check_labels().is_ok());
        prop_assert!(!s.g_inf.has_loop());
    }

    #[test]
    fn lower_bound_is_a_preimage(n in 2usize..30, k in 2u32..6, t in 0.0f64..3.0, seed in any::<u64>()) {
        let kf = ForbiddenDegree::Finite(k);
        let s = sample_event_stream(n, t, &mut RngStream::new(seed, 1).rng()).unwrap().accumulate(t);
        let g = t_k_transform(&s, kf);
        prop_assert!(lower_bound_preimage_conditions(n, &mult(&g), &mult(&s), k));
        if s.max_degree() >= k as usize {
            prop_assert!(!lower_bound_preimage_conditions(n, &mult(&s), &mult(&s), k));
        }
    }

    #[test]
    fn phi_matches_process_and_replay(n in 2usize..40, k in 2u32..7, t in 0.0f64..3.0, seed in any::<u64>()) {
        let kf = ForbiddenDegree::Finite(k);
        let stream = sample_event_stream(n, t, &mut RngStream::new(seed, 2).rng()).unwrap();
        let g_inf = stream.accumulate(t);
        let phi = phi_transform(&g_inf, kf).unwrap();
        let g_k = run_stream(&stream, kf, t).unwrap().graph;
        prop_assert_eq!(phi.label_keys(), g_k.label_keys());
        let kept: Vec<u64> = {
            let idx = replay_phi(&g_inf, k as usize);
            let mut v: Vec<u64> = idx.iter().map(|&i| g_inf.edges()[i].label.unwrap().to_bits()).collect();
            v.sort_unstable();
            v
        };
        prop_assert_eq!(phi.label_keys(), kept);
    }

    #[test]
    fn components_match_closure(n in 2usize..40, t in 0.0f64..3.0, seed in any::<u64>()) {
        let g = sample_event_stream(n, t, &mut RngStream::new(seed, 3).rng()).unwrap().accumulate(t);
        let mut sizes = components(&g).sizes;
        sizes.sort_unstable();
        prop_assert_eq!(sizes, component_sizes_by_closure(&g));
    }

    #[test]
    fn unbounded_process_keeps_everything(n in 2usize..40, t in 0.0f64..3.0, seed in any::<u64>()) {
        let stream = sample_event_stream(n, t, &mut RngStream::new(seed, 4).rng()).unwrap();
        let g = run_stream(&stream, ForbiddenDegree::Unbounded, t).unwrap().graph;
        prop_assert_eq!(g.label_keys(), stream.accumulate(t).label_keys());
    }
}

#[test]
fn label_keys_are_sorted_bit_patterns() {
    let g = sample_event_stream(50, 2.0, &mut RngStream::new(5, 0).rng()).unwrap().accumulate(2.0);
    let keys = g.label_keys();
    assert!(keys.windows(2).all(|w| w[0] < w[1]), "labels must be distinct");
}
