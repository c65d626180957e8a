//! Brute-force reference implementations used by the test suites and by
//! `fdgraph verify`. They share no code with the algorithms they check and
//! favour obviousness over speed.

use std::collections::BTreeMap;

use crate::graph::LabeledMultigraph;

/// Vertices reachable from `v`, by repeated relaxation over the edge list.
pub fn component_of(g: &LabeledMultigraph, v: u32) -> Vec<u32> {
    let mut reach = vec![false; g.n()];
    reach[v as usize] = true;
    let mut changed = true;
    while changed {
        changed = false;
        for e in g.edges() {
            let (a, b) = (e.u as usize, e.v as usize);
            if reach[a] != reach[b] {
                reach[a] = true;
                reach[b] = true;
                changed = true;
            }
        }
    }
    (0..g.n() as u32).filter(|&w| reach[w as usize]).collect()
}

/// Sorted component sizes from the transitive closure of the adjacency matrix.
pub fn component_sizes_by_closure(g: &LabeledMultigraph) -> Vec<usize> {
    let n = g.n();
    let mut m = vec![vec![false; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = true;
    }
    for e in g.edges() {
        m[e.u as usize][e.v as usize] = true;
        m[e.v as usize][e.u as usize] = true;
    }
    for via in 0..n {
        for i in 0..n {
            if m[i][via] {
                for j in 0..n {
                    if m[via][j] {
                        m[i][j] = true;
                    }
                }
            }
        }
    }
    let mut label = vec![usize::MAX; n];
    let mut sizes = Vec::new();
    for i in 0..n {
        if label[i] == usize::MAX {
            let members: Vec<usize> = (0..n).filter(|&j| m[i][j]).collect();
            for &j in &members {
                label[j] = sizes.len();
            }
            sizes.push(members.len());
        }
    }
    sizes.sort_unstable();
    sizes
}

/// `Phi(g)` by literal replay: add edges in label order, and whenever a vertex
/// reaches degree `k` delete every live edge touching it. Returns the indices
/// of surviving edge records of `g`, sorted.
pub fn replay_phi(g: &LabeledMultigraph, k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..g.edge_count()).collect();
    order.sort_by(|&a, &b| g.edges()[a].label.unwrap().partial_cmp(&g.edges()[b].label.unwrap()).unwrap());
    let mut live = vec![false; g.edge_count()];
    for &i in &order {
        live[i] = true;
        let e = g.edges()[i];
        let degree = |w: u32, live: &[bool]| {
            g.edges().iter().enumerate().filter(|&(j, f)| live[j] && (f.u == w || f.v == w)).count()
        };
        let sat: Vec<u32> = [e.u, e.v].into_iter().filter(|&w| degree(w, &live) >= k).collect();
        for w in sat {
            for (j, f) in g.edges().iter().enumerate() {
                if f.u == w || f.v == w {
                    live[j] = false;
                }
            }
        }
    }
    (0..g.edge_count()).filter(|&i| live[i]).collect()
}

fn all_spines(g: &LabeledMultigraph, v: u32, max_len: usize) -> Vec<(Vec<u32>, Vec<u32>)> {
    // (vertices, edges)
    let mut out = Vec::new();
    let mut stack = vec![(vec![v], Vec::<u32>::new())];
    while let Some((vs, es)) = stack.pop() {
        if es.len() < max_len {
            let last = *vs.last().unwrap();
            for &e in g.incident(last) {
                let w = g.edges()[e as usize].other(last);
                if !vs.contains(&w) {
                    let mut vs2 = vs.clone();
                    vs2.push(w);
                    let mut es2 = es.clone();
                    es2.push(e);
                    stack.push((vs2, es2));
                }
            }
        }
        out.push((vs, es));
    }
    out
}

/// Every choice of side edges for a spine that satisfies the adjacency and
/// distinctness conditions; calls `f` on each tuple.
fn for_each_side_tuple(g: &LabeledMultigraph, vs: &[u32], es: &[u32], f: &mut dyn FnMut(&[u32])) {
    let l = es.len();
    if l == 0 {
        f(&[]);
        return;
    }
    let choices: Vec<Vec<u32>> = (1..l).map(|i| g.incident(vs[i]).to_vec()).collect();
    let mut idx = vec![0usize; l - 1];
    if choices.iter().any(Vec::is_empty) {
        return;
    }
    loop {
        let side: Vec<u32> = idx.iter().zip(&choices).map(|(&j, c)| c[j]).collect();
        // side[i-1] is the side edge at v_i; it may not equal e_{i'} for i' != i
        let ok = (1..l).all(|i| (1..=l).all(|ip| ip == i || side[i - 1] != es[ip - 1]));
        if ok {
            f(&side);
        }
        let mut p = 0;
        loop {
            if p == idx.len() {
                return;
            }
            idx[p] += 1;
            if idx[p] < choices[p].len() {
                break;
            }
            idx[p] = 0;
            p += 1;
        }
    }
}

/// Longest propagation path from `v` (capped at `l_cap`) by enumerating every
/// spine and every side-edge tuple.
pub fn longest_propagation_path(g: &LabeledMultigraph, v: u32, l_cap: usize) -> usize {
    let mut best = 0;
    for (vs, es) in all_spines(g, v, l_cap) {
        if es.len() <= best {
            continue;
        }
        let mut found = false;
        for_each_side_tuple(g, &vs, &es, &mut |side| {
            let labels: Vec<f64> = side.iter().map(|&e| g.edges()[e as usize].label.unwrap()).collect();
            if labels.windows(2).all(|w| w[0] > w[1]) {
                found = true;
            }
        });
        if found {
            best = es.len();
        }
    }
    best
}

/// Number of spine/side-edge tuples of length exactly `l` from `v`, labels ignored.
pub fn count_possible_paths(g: &LabeledMultigraph, v: u32, l: usize) -> u64 {
    let mut count = 0;
    for (vs, es) in all_spines(g, v, l) {
        if es.len() == l {
            for_each_side_tuple(g, &vs, &es, &mut |_| count += 1);
        }
    }
    count
}

/// Canonical key of an unlabeled multigraph: sorted multiset of vertex pairs.
pub fn multigraph_key(g: &LabeledMultigraph) -> Vec<(u32, u32)> {
    let mut k: Vec<(u32, u32)> = g.edges().iter().map(|e| (e.u.min(e.v), e.u.max(e.v))).collect();
    k.sort_unstable();
    k
}

/// Exact law of the configuration model: enumerate all perfect matchings of
/// the half-edges and tally the resulting multigraphs.
pub fn configuration_law(c: &[u32]) -> BTreeMap<Vec<(u32, u32)>, f64> {
    let half: Vec<u32> = c.iter().enumerate().flat_map(|(v, &d)| std::iter::repeat_n(v as u32, d as usize)).collect();
    let mut tally: BTreeMap<Vec<(u32, u32)>, u64> = BTreeMap::new();
    let mut total = 0u64;
    fn rec(rest: &mut Vec<u32>, acc: &mut Vec<(u32, u32)>, tally: &mut BTreeMap<Vec<(u32, u32)>, u64>, total: &mut u64) {
        if rest.is_empty() {
            let mut key = acc.clone();
            key.sort_unstable();
            *tally.entry(key).or_insert(0) += 1;
            *total += 1;
            return;
        }
        let a = rest.remove(0);
        for i in 0..rest.len() {
            let b = rest.remove(i);
            acc.push((a.min(b), a.max(b)));
            rec(rest, acc, tally, total);
            acc.pop();
            rest.insert(i, b);
        }
        rest.insert(0, a);
    }
    let mut rest = half;
    rec(&mut rest, &mut Vec::new(), &mut tally, &mut total);
    tally.into_iter().map(|(k, v)| (k, v as f64 / total as f64)).collect()
}

/// `prod_i (i!)^{m_i}` where `m_i` counts vertex pairs of multiplicity `i`.
pub fn multiplicity_weight(key: &[(u32, u32)]) -> f64 {
    let mut w = 1.0;
    let mut i = 0;
    while i < key.len() {
        let mut j = i;
        while j < key.len() && key[j] == key[i] {
            j += 1;
        }
        w *= (1..=(j - i)).map(|x| x as f64).product::<f64>();
        i = j;
    }
    w
}

/// The three conditions characterising `T_k(s) = g` for multigraphs given as
/// multiplicity maps over vertex pairs.
pub fn lower_bound_preimage_conditions(
    n: usize,
    g: &BTreeMap<(u32, u32), u32>,
    s: &BTreeMap<(u32, u32), u32>,
    k: u32,
) -> bool {
    let mut c = vec![0u32; n];
    for (&(a, b), &m) in g {
        c[a as usize] += m;
        c[b as usize] += m;
    }
    let mut r: BTreeMap<(u32, u32), i64> = BTreeMap::new();
    for (&e, &m) in s {
        *r.entry(e).or_insert(0) += m as i64;
    }
    for (&e, &m) in g {
        *r.entry(e).or_insert(0) -= m as i64;
    }
    if r.values().any(|&x| x < 0) {
        return false;
    }
    let mut rdeg = vec![0i64; n];
    for (&(a, b), &m) in &r {
        rdeg[a as usize] += m;
        rdeg[b as usize] += m;
    }
    let in_b = |v: u32| c[v as usize] > 0;
    let cond2 = (0..n as u32).filter(|&v| in_b(v)).all(|v| rdeg[v as usize] < k as i64 - c[v as usize] as i64);
    let cond3 = r
        .iter()
        .filter(|(_, &m)| m > 0)
        .all(|(&(a, b), _)| [a, b].iter().any(|&w| !in_b(w) && rdeg[w as usize] >= k as i64));
    cond2 && cond3
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_law_of_two_one_one() {
        let law = configuration_law(&[2, 1, 1]);
        assert_eq!(law.len(), 2);
        assert!((law[&vec![(0, 0), (1, 2)]] - 1.0 / 3.0).abs() < 1e-12);
        assert!((law[&vec![(0, 1), (0, 2)]] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn weights() {
        assert_eq!(multiplicity_weight(&[(0, 1), (0, 1), (0, 1), (2, 3), (2, 3)]), 12.0);
        assert_eq!(multiplicity_weight(&[]), 1.0);
    }

    #[test]
    fn replay_small() {
        let g = LabeledMultigraph::from_labeled_edges(3, &[(0, 1, 0.3), (1, 2, 0.5)]).unwrap();
        assert!(replay_phi(&g, 2).is_empty());
        assert_eq!(replay_phi(&g, 3), vec![0, 1]);
    }
}
