use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{redraw_ties, LabeledMultigraph};
use crate::rng::{keyed_rng, mix2, PoissonSampler};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub parent: Option<u32>,
    /// Label of the edge to the parent (unused for the root).
    pub label: f64,
    /// Ordered by label.
    pub children: Vec<u32>,
    pub expanded: bool,
    pub depth: u32,
    /// Seed of this node's offspring draw; a function of the root key and the path.
    pub key: u64,
    pub in_component: bool,
    pub cert_depth: u32,
}

/// Arena of tree nodes; node `0` is the root. Offspring of a node are drawn
/// from a generator keyed by the node, so the tree is the same whatever the
/// order in which nodes are expanded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalTree {
    pub t: f64,
    pub nodes: Vec<TreeNode>,
}

impl LocalTree {
    pub fn new(t: f64, root_key: u64) -> Self {
        LocalTree {
            t,
            nodes: vec![TreeNode {
                parent: None,
                label: 0.0,
                children: Vec::new(),
                expanded: false,
                depth: 0,
                key: root_key,
                in_component: false,
                cert_depth: 0,
            }],
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> u32 {
        0
    }

    pub fn node(&self, id: u32) -> &TreeNode {
        &self.nodes[id as usize]
    }

    /// Nodes whose offspring have not been sampled.
    pub fn frontier(&self) -> Vec<u32> {
        (0..self.nodes.len() as u32).filter(|&i| !self.nodes[i as usize].expanded).collect()
    }

    /// Samples the children of `id` from its keyed generator.
    pub(crate) fn expand(&mut self, id: u32, offspring: &PoissonSampler) {
        let key = self.nodes[id as usize].key;
        let kids = draw_offspring(self.t, key, offspring);
        self.attach(id, kids);
    }

    /// Installs explicit `(label, key)` children for `id` and marks it expanded.
    pub(crate) fn attach(&mut self, id: u32, mut kids: Vec<(f64, u64)>) {
        debug_assert!(!self.nodes[id as usize].expanded);
        kids.sort_by(|a, b| a.0.total_cmp(&b.0));
        let depth = self.nodes[id as usize].depth + 1;
        let mut ids = Vec::with_capacity(kids.len());
        for (label, key) in kids {
            ids.push(self.nodes.len() as u32);
            self.nodes.push(TreeNode {
                parent: Some(id),
                label,
                children: Vec::new(),
                expanded: false,
                depth,
                key,
                in_component: false,
                cert_depth: 0,
            });
        }
        let n = &mut self.nodes[id as usize];
        n.children = ids;
        n.expanded = true;
    }

    /// Expands every node breadth-first until the tree is complete, or returns
    /// `false` once it holds more than `max_nodes` nodes.
    pub fn expand_all(&mut self, max_nodes: usize) -> Result<bool> {
        let offspring = PoissonSampler::new(self.t)?;
        let mut i = 0;
        while i < self.nodes.len() {
            if !self.nodes[i].expanded {
                self.expand(i as u32, &offspring);
            }
            if self.nodes.len() > max_nodes {
                return Ok(false);
            }
            i += 1;
        }
        Ok(true)
    }

    /// Tree as a labeled multigraph on node indices.
    pub fn to_multigraph(&self) -> LabeledMultigraph {
        let mut g = LabeledMultigraph::new(self.nodes.len());
        for (i, n) in self.nodes.iter().enumerate().skip(1) {
            g.push(n.parent.unwrap(), i as u32, Some(n.label));
        }
        g
    }

    /// Number of nodes at each depth.
    pub fn generation_sizes(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for n in &self.nodes {
            let d = n.depth as usize;
            if out.len() <= d {
                out.resize(d + 1, 0);
            }
            out[d] += 1;
        }
        out
    }

    /// Sorted keys of the nodes flagged as members of the root component.
    pub fn component_keys(&self) -> Vec<u64> {
        let mut k: Vec<u64> = self.nodes.iter().filter(|n| n.in_component).map(|n| n.key).collect();
        k.sort_unstable();
        k
    }
}

pub(crate) fn child_key(parent_key: u64, index: usize) -> u64 {
    mix2(parent_key, index as u64 + 1)
}

/// Poisson process of intensity 1 on `[0, t)`, sorted, with keys for each point.
pub(crate) fn draw_offspring(t: f64, key: u64, offspring: &PoissonSampler) -> Vec<(f64, u64)> {
    let mut rng = keyed_rng(key);
    let count = offspring.sample(&mut rng) as usize;
    let mut labels: Vec<f64> = (0..count).map(|_| rng.random::<f64>() * t).collect();
    labels.sort_by(f64::total_cmp);
    redraw_ties(&mut labels, &mut rng, |r| r.random::<f64>() * t);
    labels.into_iter().enumerate().map(|(j, l)| (l, child_key(key, j))).collect()
}

/// The first `depth` generations of `T^inf_t`.
pub fn sample_gw_levels<R: Rng + ?Sized>(t: f64, depth: u32, rng: &mut R) -> Result<LocalTree> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!("t must be finite and >= 0, got {t}")));
    }
    let offspring = PoissonSampler::new(t)?;
    let mut tree = LocalTree::new(t, rng.random());
    let mut i = 0;
    while i < tree.nodes.len() {
        if tree.nodes[i].depth < depth {
            tree.expand(i as u32, &offspring);
        }
        i += 1;
    }
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn zero_rate_gives_single_root() {
        let tr = sample_gw_levels(0.0, 5, &mut RngStream::new(1, 0).rng()).unwrap();
        assert_eq!(tr.len(), 1);
    }

    #[test]
    fn children_sorted_and_in_range() {
        let tr = sample_gw_levels(2.0, 4, &mut RngStream::new(2, 0).rng()).unwrap();
        for n in &tr.nodes {
            let labels: Vec<f64> = n.children.iter().map(|&c| tr.node(c).label).collect();
            assert!(labels.windows(2).all(|w| w[0] < w[1]));
            assert!(labels.iter().all(|&l| (0.0..2.0).contains(&l)));
            assert_eq!(n.expanded, n.depth < 4);
        }
    }

    #[test]
    fn expansion_order_does_not_matter() {
        let off = PoissonSampler::new(1.2).unwrap();
        let mut a = LocalTree::new(1.2, 99);
        let mut i = 0;
        while i < a.nodes.len() {
            if a.nodes[i].depth < 8 {
                a.expand(i as u32, &off);
            }
            i += 1;
        }
        let mut b = LocalTree::new(1.2, 99);
        // depth-first instead of breadth-first
        let mut stack = vec![0u32];
        while let Some(u) = stack.pop() {
            if b.node(u).depth < 8 {
                b.expand(u, &off);
                stack.extend(b.node(u).children.iter().copied());
            }
        }
        assert!(a.nodes.len() > 1);
        let mut ka: Vec<(u64, u64)> = a.nodes.iter().map(|n| (n.key, n.label.to_bits())).collect();
        let mut kb: Vec<(u64, u64)> = b.nodes.iter().map(|n| (n.key, n.label.to_bits())).collect();
        ka.sort_unstable();
        kb.sort_unstable();
        assert_eq!(ka, kb);
    }

    #[test]
    fn root_degree_mean() {
        let mut r = RngStream::new(3, 0).rng();
        let n = 100_000;
        let mut s = 0.0;
        for _ in 0..n {
            s += sample_gw_levels(2.0, 1, &mut r).unwrap().node(0).children.len() as f64;
        }
        let mean = s / n as f64;
        assert!((mean - 2.0).abs() < 3.0 * (2.0 / n as f64).sqrt());
    }
}
