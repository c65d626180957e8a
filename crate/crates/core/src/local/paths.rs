use serde::{Deserialize, Serialize};

use crate::graph::LabeledMultigraph;

/// Outcome of a capped search for propagation paths.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathSearch {
    /// Length of the longest propagation path, strictly below the cap.
    Longest(usize),
    /// A path of length `l_max` exists.
    ReachedCap,
}

impl PathSearch {
    pub fn at_least(self, l: usize) -> bool {
        match self {
            PathSearch::ReachedCap => true,
            PathSearch::Longest(m) => m >= l,
        }
    }
}

/// Longest propagation path from `v`: a self-avoiding spine `v = v_0, ..., v_l`
/// with side edges `s_1, ..., s_{l-1}`, `s_i` at `v_i`, `s_i` different from
/// every spine edge other than `e_i`, and strictly decreasing labels.
///
/// For a fixed spine step only the largest admissible side label matters, so
/// the search branches over spines only.
pub fn find_propagation_paths(g: &LabeledMultigraph, v: u32, l_max: usize) -> PathSearch {
    if l_max == 0 {
        return PathSearch::ReachedCap;
    }
    let mut visited = vec![false; g.n()];
    visited[v as usize] = true;
    let mut best = 0;
    if dfs(g, v, 0, f64::INFINITY, &mut visited, l_max, &mut best) {
        PathSearch::ReachedCap
    } else {
        PathSearch::Longest(best)
    }
}

fn label(g: &LabeledMultigraph, e: u32) -> f64 {
    g.edges()[e as usize].label.unwrap_or(f64::NAN)
}

fn dfs(
    g: &LabeledMultigraph,
    at: u32,
    len: usize,
    prev_side: f64,
    visited: &mut [bool],
    l_max: usize,
    best: &mut usize,
) -> bool {
    *best = (*best).max(len);
    if len == l_max {
        return true;
    }
    for &e in g.incident(at) {
        let w = g.edges()[e as usize].other(at);
        if visited[w as usize] {
            continue;
        }
        let side = if len == 0 {
            f64::INFINITY
        } else {
            let mut s = f64::NEG_INFINITY;
            for &f in g.incident(at) {
                let l = label(g, f);
                if f != e && l < prev_side && l > s {
                    s = l;
                }
            }
            if s == f64::NEG_INFINITY {
                continue;
            }
            s
        };
        visited[w as usize] = true;
        let hit = dfs(g, w, len + 1, side, visited, l_max, best);
        visited[w as usize] = false;
        if hit {
            return true;
        }
    }
    false
}

/// `E|H_l| = t (t + t^2)^{l-1}`: mean number of spine/side-edge tuples of
/// length `l` from the root of `T^inf_t`, labels ignored.
pub fn expected_propagation_count(t: f64, l: u32) -> f64 {
    assert!(l >= 1, "paths have length >= 1");
    t * (t + t * t).powi(l as i32 - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        let g = LabeledMultigraph::new(3);
        assert_eq!(find_propagation_paths(&g, 0, 5), PathSearch::Longest(0));
        let star = LabeledMultigraph::from_labeled_edges(4, &[(0, 1, 0.1), (0, 2, 0.2), (0, 3, 0.3)]).unwrap();
        assert_eq!(find_propagation_paths(&star, 0, 5), PathSearch::Longest(1));
        assert_eq!(find_propagation_paths(&star, 0, 1), PathSearch::ReachedCap);
    }

    #[test]
    fn side_edge_may_be_the_incoming_spine_edge() {
        // path 0 - 1 - 2: the only side edge at 1 other than e_2 is e_1
        let g = LabeledMultigraph::from_labeled_edges(3, &[(0, 1, 0.4), (1, 2, 0.2)]).unwrap();
        assert_eq!(find_propagation_paths(&g, 0, 5), PathSearch::Longest(2));
    }

    #[test]
    fn labels_must_decrease() {
        // 0-1-2-3 with side edges forced to be e_1 then e_2; e_2 must be below e_1
        let up = LabeledMultigraph::from_labeled_edges(4, &[(0, 1, 0.1), (1, 2, 0.2), (2, 3, 0.3)]).unwrap();
        assert_eq!(find_propagation_paths(&up, 0, 5), PathSearch::Longest(2));
        let down = LabeledMultigraph::from_labeled_edges(4, &[(0, 1, 0.3), (1, 2, 0.2), (2, 3, 0.1)]).unwrap();
        assert_eq!(find_propagation_paths(&down, 0, 5), PathSearch::Longest(3));
    }

    #[test]
    fn counts() {
        assert_eq!(expected_propagation_count(2.5, 1), 2.5);
        assert_eq!(expected_propagation_count(1.0, 3), 4.0);
    }
}
