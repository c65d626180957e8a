//! Lazy evaluation of `Phi` on `T^inf_t`.
//!
//! For a node `u` with parent-edge label `y`, let `rho(u)` be the time at
//! which that edge is removed when `Phi` runs on `u`'s subtree plus the parent
//! edge alone (`+inf` if never). At `u`, the set `S` of present child edges
//! evolves as: child `c` joins at its label `tau_c` and leaves at `rho(c)`,
//! the parent edge joins at `y`, and any arrival that finds `S` at size
//! `k - 1` empties `S` (and removes the parent edge if present). The root
//! component of `Phi(T^inf_t)` is obtained by following surviving children.
//!
//! Knowledge of `rho(c)` is either exact or a horizon `h` with
//! `rho(c) >= h` known. Evaluating `u` tracks, for each child, whether it is
//! certainly present, certainly absent, or undetermined; an arrival whose
//! saturation outcome depends on undetermined children makes `u` itself
//! undetermined from that time on. Undetermined children are refined on
//! demand by expanding their subtrees, which is what certifies the result.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tree::LocalTree;
use crate::error::{Error, Result};
use crate::process::ForbiddenDegree;
use crate::rng::PoissonSampler;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Know {
    /// `rho >= h` and the edge is present on `[tau, h)`.
    Partial(f64),
    /// Exact removal time, `+inf` for never.
    Known(f64),
}

fn better(now: Know, before: Know) -> bool {
    match (now, before) {
        (Know::Known(_), Know::Partial(_)) => true,
        (Know::Partial(a), Know::Partial(b)) => a > b,
        _ => false,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Fate {
    Known(f64),
    Uncertain(f64),
}

struct Eval {
    fate: Fate,
    final_set: Option<Vec<u32>>,
    blame: Vec<u32>,
}

/// Certification ran past the depth or size cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Truncated;

/// Result of resolving one node.
#[derive(Clone, Debug, PartialEq)]
pub enum RootOutcome {
    /// The parent edge is removed at this time.
    Removed(f64),
    /// The parent edge (if any) survives; these children remain attached at time `t`.
    Survives(Vec<u32>),
}

const ADD: u8 = 0;
const PARENT: u8 = 1;
const REMOVE: u8 = 2;
const HORIZON: u8 = 3;

const ABSENT: u8 = 0;
const PRESENT: u8 = 1;
const MAYBE: u8 = 2;

pub(crate) struct PhiTree {
    pub tree: LocalTree,
    root_parent: Option<f64>,
    know: Vec<Know>,
    kk: Option<usize>,
    offspring: PoissonSampler,
    depth_cap: u32,
    size_cap: usize,
    deepest: u32,
    events: Vec<(f64, u8, u32)>,
    mem: Vec<u8>,
}

impl PhiTree {
    pub fn new(
        t: f64,
        k: ForbiddenDegree,
        root_key: u64,
        root_parent: Option<f64>,
        depth_cap: u32,
        size_cap: usize,
    ) -> Result<Self> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::invalid(format!("t must be finite and >= 0, got {t}")));
        }
        k.validate()?;
        Ok(PhiTree {
            tree: LocalTree::new(t, root_key),
            root_parent,
            know: vec![Know::Partial(root_parent.unwrap_or(0.0))],
            kk: k.value().map(|k| k as usize),
            offspring: PoissonSampler::new(t)?,
            depth_cap,
            size_cap,
            deepest: 0,
            events: Vec::new(),
            mem: Vec::new(),
        })
    }

    fn sync_know(&mut self) {
        for i in self.know.len()..self.tree.nodes.len() {
            self.know.push(Know::Partial(self.tree.nodes[i].label));
        }
    }

    fn expand_node(&mut self, id: u32) -> std::result::Result<(), Truncated> {
        if self.tree.nodes.len() > self.size_cap {
            return Err(Truncated);
        }
        self.tree.expand(id, &self.offspring);
        self.sync_know();
        self.deepest = self.deepest.max(self.tree.nodes[id as usize].depth + 1);
        Ok(())
    }

    /// One pass of the set dynamics at `u` with current knowledge of its children.
    fn evaluate(&mut self, u: u32) -> Eval {
        let children = std::mem::take(&mut self.tree.nodes[u as usize].children);
        let out = self.evaluate_with(u, &children);
        self.tree.nodes[u as usize].children = children;
        out
    }

    fn evaluate_with(&mut self, u: u32, children: &[u32]) -> Eval {
        let Some(kk) = self.kk else {
            return Eval { fate: Fate::Known(f64::INFINITY), final_set: Some(children.to_vec()), blame: Vec::new() };
        };
        let y = if u == 0 { self.root_parent } else { Some(self.tree.nodes[u as usize].label) };
        let mut ev = std::mem::take(&mut self.events);
        ev.clear();
        for (j, &c) in children.iter().enumerate() {
            let tau = self.tree.nodes[c as usize].label;
            ev.push((tau, ADD, j as u32));
            match self.know[c as usize] {
                Know::Known(r) if r.is_finite() && r > tau => ev.push((r, REMOVE, j as u32)),
                Know::Partial(h) if h > tau => ev.push((h, HORIZON, j as u32)),
                _ => {}
            }
        }
        if let Some(y) = y {
            ev.push((y, PARENT, 0));
        }
        ev.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

        let mut mem = std::mem::take(&mut self.mem);
        mem.clear();
        mem.resize(children.len(), ABSENT);
        let (mut lo, mut hi) = (0usize, 0usize);
        let mut parent_present = false;
        let mut blame = Vec::new();
        let mut result = None;

        for &(s, kind, j) in &ev {
            let j = j as usize;
            match kind {
                HORIZON => {
                    if mem[j] == PRESENT {
                        mem[j] = MAYBE;
                        lo -= 1;
                        blame.push(children[j]);
                    }
                }
                REMOVE => {
                    match mem[j] {
                        PRESENT => {
                            lo -= 1;
                            hi -= 1;
                        }
                        MAYBE => hi -= 1,
                        _ => {}
                    }
                    mem[j] = ABSENT;
                }
                _ if lo + 1 >= kk => {
                    // the arrival certainly saturates u
                    if parent_present || kind == PARENT {
                        result = Some(Eval { fate: Fate::Known(s), final_set: None, blame: Vec::new() });
                        break;
                    }
                    mem.iter_mut().for_each(|m| *m = ABSENT);
                    lo = 0;
                    hi = 0;
                    blame.clear();
                }
                _ if hi + 1 < kk => {
                    // the arrival certainly does not saturate u
                    if kind == PARENT {
                        parent_present = true;
                        lo += 1;
                        hi += 1;
                    } else {
                        let c = children[j];
                        match self.know[c as usize] {
                            Know::Known(r) if r == s => {}
                            Know::Partial(h) if h <= s => {
                                mem[j] = MAYBE;
                                hi += 1;
                                blame.push(c);
                            }
                            _ => {
                                mem[j] = PRESENT;
                                lo += 1;
                                hi += 1;
                            }
                        }
                    }
                }
                _ => {
                    if parent_present || kind == PARENT {
                        result = Some(Eval { fate: Fate::Uncertain(s), final_set: None, blame: std::mem::take(&mut blame) });
                        break;
                    }
                    for m in mem.iter_mut() {
                        if *m == PRESENT {
                            *m = MAYBE;
                        }
                    }
                    lo = 0;
                    let c = children[j];
                    match self.know[c as usize] {
                        Know::Known(r) if r == s => {}
                        Know::Partial(h) if h <= s => {
                            mem[j] = MAYBE;
                            hi += 1;
                            blame.push(c);
                        }
                        _ => {
                            mem[j] = MAYBE;
                            hi += 1;
                        }
                    }
                }
            }
        }
        let out = result.unwrap_or_else(|| {
            let final_set = if mem.contains(&MAYBE) {
                None
            } else {
                Some(children.iter().zip(&mem).filter(|(_, &m)| m == PRESENT).map(|(&c, _)| c).collect())
            };
            Eval { fate: Fate::Known(f64::INFINITY), final_set, blame }
        });
        self.events = ev;
        self.mem = mem;
        debug_assert!(
            match out.fate {
                Fate::Known(r) if r.is_finite() => true,
                Fate::Known(_) => out.final_set.is_some() || !out.blame.is_empty(),
                Fate::Uncertain(_) => !out.blame.is_empty(),
            }
        );
        out
    }

    /// Improves the knowledge of `rho(c)` strictly.
    fn refine(&mut self, c: u32, origin_depth: u32) -> std::result::Result<(), Truncated> {
        let before = self.know[c as usize];
        if !self.tree.nodes[c as usize].expanded {
            if self.tree.nodes[c as usize].depth - origin_depth >= self.depth_cap {
                return Err(Truncated);
            }
            self.expand_node(c)?;
        }
        loop {
            let ev = self.evaluate(c);
            let now = match ev.fate {
                Fate::Known(r) => Know::Known(r),
                Fate::Uncertain(h) => Know::Partial(h),
            };
            if better(now, before) {
                self.know[c as usize] = now;
                return Ok(());
            }
            self.refine_all(&ev.blame, origin_depth)?;
        }
    }

    fn refine_all(&mut self, blame: &[u32], origin_depth: u32) -> std::result::Result<(), Truncated> {
        for &b in blame {
            if matches!(self.know[b as usize], Know::Partial(_)) {
                self.refine(b, origin_depth)?;
            }
        }
        Ok(())
    }

    /// Determines whether `u`'s parent edge survives and, if so, which
    /// children are attached to `u` at time `t`.
    pub fn resolve(&mut self, u: u32) -> std::result::Result<RootOutcome, Truncated> {
        let origin = self.tree.nodes[u as usize].depth;
        self.deepest = self.deepest.max(origin);
        if !self.tree.nodes[u as usize].expanded {
            self.expand_node(u)?;
        }
        loop {
            let ev = self.evaluate(u);
            match ev.fate {
                Fate::Known(r) if r.is_finite() => return Ok(RootOutcome::Removed(r)),
                Fate::Known(_) => {
                    if let Some(set) = ev.final_set {
                        let n = &mut self.tree.nodes[u as usize];
                        n.cert_depth = self.deepest.saturating_sub(origin);
                        return Ok(RootOutcome::Survives(set));
                    }
                }
                Fate::Uncertain(_) => {}
            }
            self.refine_all(&ev.blame, origin)?;
        }
    }

    /// Only the fate of `u`'s parent edge: its removal time or `+inf`.
    pub fn resolve_fate(&mut self, u: u32) -> std::result::Result<f64, Truncated> {
        let origin = self.tree.nodes[u as usize].depth;
        if !self.tree.nodes[u as usize].expanded {
            self.expand_node(u)?;
        }
        loop {
            let ev = self.evaluate(u);
            if let Fate::Known(r) = ev.fate {
                return Ok(r);
            }
            self.refine_all(&ev.blame, origin)?;
        }
    }
}

/// Removal time, from the child side, of an edge labelled `label` whose child
/// end is the root of a fresh `T^inf_t` drawn from `key`; `+inf` if it survives.
pub(crate) fn edge_removal_time(
    t: f64,
    k: ForbiddenDegree,
    label: f64,
    key: u64,
    depth_cap: u32,
    size_cap: usize,
) -> Result<std::result::Result<f64, Truncated>> {
    let mut pt = PhiTree::new(t, k, key, Some(label), depth_cap, size_cap)?;
    Ok(pt.resolve_fate(0))
}

/// Exact set dynamics at a vertex whose child edges `(tau, rho)` have known
/// child-side removal times. Returns `None` if the parent edge (if any) is
/// removed, otherwise the indices of child edges still present at the end.
pub(crate) fn vertex_dynamics(k: usize, parent: Option<f64>, kids: &[(f64, f64)]) -> Option<Vec<usize>> {
    let mut ev: Vec<(f64, u8, usize)> = Vec::with_capacity(2 * kids.len() + 1);
    for (j, &(tau, rho)) in kids.iter().enumerate() {
        ev.push((tau, ADD, j));
        if rho > tau && rho.is_finite() {
            ev.push((rho, REMOVE, j));
        }
    }
    if let Some(y) = parent {
        ev.push((y, PARENT, 0));
    }
    ev.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut present = vec![false; kids.len()];
    let mut size = 0usize;
    let mut parent_present = false;
    for (_, kind, j) in ev {
        match kind {
            REMOVE => {
                if present[j] {
                    present[j] = false;
                    size -= 1;
                }
            }
            _ => {
                if size + usize::from(parent_present) + 1 >= k {
                    if parent_present || kind == PARENT {
                        return None;
                    }
                    present.iter_mut().for_each(|p| *p = false);
                    size = 0;
                } else if kind == PARENT {
                    parent_present = true;
                } else if kids[j].1 > kids[j].0 {
                    present[j] = true;
                    size += 1;
                }
            }
        }
    }
    Some((0..kids.len()).filter(|&j| present[j]).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TktOptions {
    /// Maximum depth of certification below the node being resolved.
    pub depth_cap: u32,
    /// Maximum number of sampled tree nodes.
    pub size_cap: usize,
    /// Stop once a component node at this generation is reached.
    pub gen_cap: Option<u32>,
    /// Stop once the component holds this many nodes.
    pub component_cap: Option<usize>,
    /// Keep nodes outside the root component in the returned tree.
    pub keep_pruned: bool,
}

impl Default for TktOptions {
    fn default() -> Self {
        TktOptions { depth_cap: 60, size_cap: 1_000_000, gen_cap: None, component_cap: None, keep_pruned: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TktStatus {
    /// The root component is finite and fully determined.
    Certified,
    /// The generation or component cap was reached; every explored component node is certified.
    Capped,
    /// Certification needed more depth or nodes than allowed.
    Truncated,
}

#[derive(Clone, Debug)]
pub struct TktSample {
    /// Sampled part of `T^inf_t`; `in_component` marks the root component of `Phi`.
    pub tree: LocalTree,
    pub status: TktStatus,
    pub component_size: usize,
    /// Component nodes per generation.
    pub generations: Vec<usize>,
    pub max_cert_depth: u32,
}

/// Samples the root component of `Phi(T^inf_t)`, i.e. `T^k_t`.
pub fn sample_tkt<R: Rng + ?Sized>(t: f64, k: ForbiddenDegree, rng: &mut R, opts: &TktOptions) -> Result<TktSample> {
    sample_tkt_keyed(t, k, rng.random(), opts)
}

/// [`sample_tkt`] for a given root key.
pub fn sample_tkt_keyed(t: f64, k: ForbiddenDegree, root_key: u64, opts: &TktOptions) -> Result<TktSample> {
    let mut pt = PhiTree::new(t, k, root_key, None, opts.depth_cap, opts.size_cap)?;
    pt.tree.nodes[0].in_component = true;
    let mut generations = vec![1usize];
    let mut size = 1usize;
    let mut queue = VecDeque::from([0u32]);
    let mut status = TktStatus::Certified;
    'outer: while let Some(u) = queue.pop_front() {
        let g = pt.tree.nodes[u as usize].depth;
        if opts.gen_cap.is_some_and(|cap| g >= cap) {
            status = TktStatus::Capped;
            break;
        }
        if opts.component_cap.is_some_and(|cap| size >= cap) {
            status = TktStatus::Capped;
            break;
        }
        match pt.resolve(u) {
            Err(Truncated) => {
                status = TktStatus::Truncated;
                break;
            }
            Ok(RootOutcome::Removed(_)) => unreachable!("component nodes keep their parent edge"),
            Ok(RootOutcome::Survives(kids)) => {
                for c in kids {
                    pt.tree.nodes[c as usize].in_component = true;
                    let gi = g as usize + 1;
                    if generations.len() <= gi {
                        generations.push(0);
                    }
                    generations[gi] += 1;
                    size += 1;
                    queue.push_back(c);
                    if opts.component_cap.is_some_and(|cap| size >= cap) {
                        status = TktStatus::Capped;
                        break 'outer;
                    }
                }
            }
        }
    }
    let max_cert_depth = pt.tree.nodes.iter().map(|n| n.cert_depth).max().unwrap_or(0);
    let tree = if opts.keep_pruned { pt.tree } else { component_only(&pt.tree) };
    Ok(TktSample { tree, status, component_size: size, generations, max_cert_depth })
}

fn component_only(tree: &LocalTree) -> LocalTree {
    let mut map = vec![u32::MAX; tree.nodes.len()];
    let mut out = LocalTree { t: tree.t, nodes: Vec::new() };
    for (i, n) in tree.nodes.iter().enumerate() {
        if n.in_component {
            map[i] = out.nodes.len() as u32;
            let mut m = n.clone();
            m.parent = n.parent.map(|p| map[p as usize]);
            m.children.clear();
            let parent = m.parent;
            out.nodes.push(m);
            if let Some(p) = parent {
                out.nodes[p as usize].children.push(map[i]);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::phi_transform;
    use crate::rng::{PoissonSampler, RngStream};

    fn eager_component(t: f64, k: ForbiddenDegree, key: u64, max_nodes: usize) -> Option<Vec<u64>> {
        let mut tree = LocalTree::new(t, key);
        if !tree.expand_all(max_nodes).unwrap() {
            return None;
        }
        let g = phi_transform(&tree.to_multigraph(), k).unwrap();
        let comp = crate::oracle::component_of(&g, 0);
        let mut keys: Vec<u64> = comp.into_iter().map(|v| tree.nodes[v as usize].key).collect();
        keys.sort_unstable();
        Some(keys)
    }

    #[test]
    fn vertex_dynamics_matches_lazy_root() {
        let (t, kf) = (1.8, ForbiddenDegree::Finite(4));
        let off = PoissonSampler::new(t).unwrap();
        for key in 0..400u64 {
            let kids = super::super::tree::draw_offspring(t, key, &off);
            let rho: Vec<(f64, f64)> = kids
                .iter()
                .map(|&(l, c)| (l, edge_removal_time(t, kf, l, c, 60, 1_000_000).unwrap().unwrap()))
                .collect();
            for parent in [None, Some(0.7)] {
                let mut pt = PhiTree::new(t, kf, key, parent, 60, 1_000_000).unwrap();
                let want = match pt.resolve(0).unwrap() {
                    RootOutcome::Removed(_) => None,
                    RootOutcome::Survives(set) => {
                        Some(set.iter().map(|&c| pt.tree.node(c).key).collect::<Vec<_>>())
                    }
                };
                let got = vertex_dynamics(4, parent, &rho).map(|v| v.iter().map(|&j| kids[j].1).collect::<Vec<_>>());
                assert_eq!(got, want, "key {key}");
            }
        }
    }

    #[test]
    fn childless_root_is_certified() {
        let s = sample_tkt_keyed(0.0, ForbiddenDegree::Finite(3), 5, &TktOptions::default()).unwrap();
        assert_eq!(s.status, TktStatus::Certified);
        assert_eq!(s.component_size, 1);
    }

    #[test]
    fn lazy_matches_eager_small_k() {
        let mut checked = 0;
        for key in 0..3000u64 {
            for &(t, k) in &[(1.0, 2u32), (1.3, 3), (1.5, 4), (0.9, 5)] {
                let k = ForbiddenDegree::Finite(k);
                let Some(eager) = eager_component(t, k, key, 3000) else { continue };
                let lazy = sample_tkt_keyed(t, k, key, &TktOptions::default()).unwrap();
                assert_eq!(lazy.status, TktStatus::Certified);
                assert_eq!(lazy.tree.component_keys(), eager, "key {key} t {t} k {k}");
                checked += 1;
            }
        }
        assert!(checked > 7_000, "{checked}");
    }

    #[test]
    fn k2_root_keeps_only_the_later_of_two_children() {
        let opts = TktOptions::default();
        let mut seen = 0;
        for key in 0..2000u64 {
            let s = sample_tkt_keyed(1.0, ForbiddenDegree::Finite(2), key, &opts).unwrap();
            assert!(s.component_size <= 2);
            let kids = &s.tree.node(0).children;
            if kids.len() == 2 {
                let later = if s.tree.node(kids[0]).label > s.tree.node(kids[1]).label { kids[0] } else { kids[1] };
                for &c in kids {
                    assert!(c == later || !s.tree.node(c).in_component);
                }
                seen += 1;
            }
        }
        assert!(seen > 100);
    }

    #[test]
    fn caps_and_compaction() {
        let mut r = RngStream::new(4, 0).rng();
        let opts = TktOptions { component_cap: Some(50), keep_pruned: false, ..TktOptions::default() };
        let mut capped = 0;
        for _ in 0..200 {
            let s = sample_tkt(2.0, ForbiddenDegree::Finite(5), &mut r, &opts).unwrap();
            assert!(s.tree.nodes.iter().all(|n| n.in_component));
            assert_eq!(s.tree.len(), s.component_size);
            assert_eq!(s.generations.iter().sum::<usize>(), s.component_size);
            if s.status == TktStatus::Capped {
                assert_eq!(s.component_size, 50);
                capped += 1;
            }
        }
        assert!(capped > 10);
    }

    #[test]
    fn truncation_is_reported() {
        let opts = TktOptions { depth_cap: 1, ..TktOptions::default() };
        let mut r = RngStream::new(6, 0).rng();
        let truncated = (0..300)
            .filter(|_| sample_tkt(3.0, ForbiddenDegree::Finite(3), &mut r, &opts).unwrap().status == TktStatus::Truncated)
            .count();
        assert!(truncated > 0);
    }
}
