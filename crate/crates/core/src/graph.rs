//! Labeled multigraphs and the marked Poisson event stream.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::PoissonSampler;

/// One edge record. Parallel edges are separate records, each with its own label.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: u32,
    pub v: u32,
    pub label: Option<f64>,
}

impl Edge {
    pub fn other(&self, w: u32) -> u32 {
        if self.u == w {
            self.v
        } else {
            self.u
        }
    }

    pub fn is_loop(&self) -> bool {
        self.u == self.v
    }
}

/// Multigraph on vertices `0..n` with per-vertex incidence lists.
///
/// Edges created through [`LabeledMultigraph::add_edge`] never form loops.
/// Only the configuration-model sampler creates loops; a loop contributes two
/// entries to its vertex's incidence list, so `degree` counts half-edges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledMultigraph {
    n: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<u32>>,
}

impl LabeledMultigraph {
    pub fn new(n: usize) -> Self {
        LabeledMultigraph { n, edges: Vec::new(), adjacency: vec![Vec::new(); n] }
    }

    /// Builds a graph from `(u, v, label)` triples, rejecting loops,
    /// out-of-range endpoints and repeated labels.
    pub fn from_labeled_edges(n: usize, edges: &[(u32, u32, f64)]) -> Result<Self> {
        let mut g = LabeledMultigraph::new(n);
        for &(u, v, l) in edges {
            g.add_edge(u, v, Some(l))?;
        }
        g.check_labels()?;
        Ok(g)
    }

    /// Appends an edge record and returns its index.
    pub fn add_edge(&mut self, u: u32, v: u32, label: Option<f64>) -> Result<usize> {
        if u == v {
            return Err(Error::invalid(format!("loop at vertex {u}")));
        }
        if u as usize >= self.n || v as usize >= self.n {
            return Err(Error::invalid(format!("edge ({u},{v}) out of range for n={}", self.n)));
        }
        if let Some(l) = label {
            if !l.is_finite() || l < 0.0 {
                return Err(Error::invalid(format!("edge label {l} is not a finite time")));
            }
        }
        Ok(self.push(u, v, label))
    }

    pub(crate) fn push(&mut self, u: u32, v: u32, label: Option<f64>) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { u, v, label });
        self.adjacency[u as usize].push(id as u32);
        self.adjacency[v as usize].push(id as u32);
        id
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn incident(&self, v: u32) -> &[u32] {
        &self.adjacency[v as usize]
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adjacency[v as usize].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_loop(&self) -> bool {
        self.edges.iter().any(Edge::is_loop)
    }

    /// Fails unless every edge carries a label and no two labels coincide.
    pub fn check_labels(&self) -> Result<()> {
        let mut labels = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            match e.label {
                Some(l) => labels.push(l),
                None => return Err(Error::invalid("edge without a label")),
            }
        }
        labels.sort_by(f64::total_cmp);
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("two edges share a label"));
        }
        Ok(())
    }

    /// Edge indices sorted by label.
    pub(crate) fn label_order(&self) -> Result<Vec<usize>> {
        self.check_labels()?;
        let mut order: Vec<usize> = (0..self.edges.len()).collect();
        order.sort_by(|&a, &b| self.edges[a].label.unwrap().total_cmp(&self.edges[b].label.unwrap()));
        Ok(order)
    }

    /// Sorted bit patterns of the labels, used to compare edge-record sets.
    pub fn label_keys(&self) -> Vec<u64> {
        let mut k: Vec<u64> = self.edges.iter().filter_map(|e| e.label.map(f64::to_bits)).collect();
        k.sort_unstable();
        k
    }

    /// Keeps the edge records for which `keep` returns true, preserving order.
    pub fn filter_edges(&self, mut keep: impl FnMut(usize, &Edge) -> bool) -> LabeledMultigraph {
        let mut g = LabeledMultigraph::new(self.n);
        for (i, e) in self.edges.iter().enumerate() {
            if keep(i, e) {
                g.push(e.u, e.v, e.label);
            }
        }
        g
    }

    /// Edge multiplicities keyed by unordered vertex pair (loops as `(v, v)`), sorted.
    pub fn multiplicities(&self) -> Vec<((u32, u32), usize)> {
        let mut pairs: Vec<(u32, u32)> = self.edges.iter().map(|e| (e.u.min(e.v), e.u.max(e.v))).collect();
        pairs.sort_unstable();
        let mut out: Vec<((u32, u32), usize)> = Vec::new();
        for p in pairs {
            match out.last_mut() {
                Some((q, c)) if *q == p => *c += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }
}

/// One arrival of the marked Poisson process.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub u: u32,
    pub v: u32,
}

/// Time-ordered arrivals on `[0, horizon]` for a graph on `n` vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventStream {
    pub n: usize,
    pub horizon: f64,
    pub events: Vec<Event>,
}

impl EventStream {
    /// Builds a stream from explicit events, checking order and endpoints.
    pub fn from_events(n: usize, horizon: f64, events: Vec<Event>) -> Result<Self> {
        for w in events.windows(2) {
            if w[0].time >= w[1].time {
                return Err(Error::invalid("event times must be strictly increasing"));
            }
        }
        for e in &events {
            if e.u == e.v || e.u as usize >= n || e.v as usize >= n {
                return Err(Error::invalid(format!("bad event pair ({},{})", e.u, e.v)));
            }
            if e.time < 0.0 || e.time > horizon {
                return Err(Error::invalid(format!("event time {} outside [0,{horizon}]", e.time)));
            }
        }
        Ok(EventStream { n, horizon, events })
    }

    /// Number of events with time <= `s`.
    pub fn count_upto(&self, s: f64) -> usize {
        self.events.partition_point(|e| e.time <= s)
    }

    /// `G^inf` at time `s`: every arrival up to `s` as an edge record.
    pub fn accumulate(&self, s: f64) -> LabeledMultigraph {
        let mut g = LabeledMultigraph::new(self.n);
        for e in &self.events[..self.count_upto(s)] {
            g.push(e.u, e.v, Some(e.time));
        }
        g
    }
}

/// Samples the arrivals of the process on `[0, t_max]`: a Poisson number of
/// uniform times at total rate `(n-1)/2`, each marked by a uniform pair.
pub fn sample_event_stream<R: Rng + ?Sized>(n: usize, t_max: f64, rng: &mut R) -> Result<EventStream> {
    if n < 2 {
        return Err(Error::invalid(format!("need n >= 2, got {n}")));
    }
    if !(t_max >= 0.0) || !t_max.is_finite() {
        return Err(Error::invalid(format!("horizon must be finite and >= 0, got {t_max}")));
    }
    if n > u32::MAX as usize {
        return Err(Error::invalid("n exceeds the vertex id range"));
    }
    let rate = t_max * (n - 1) as f64 / 2.0;
    let count = PoissonSampler::new(rate)?.sample(rng) as usize;
    let mut times: Vec<f64> = (0..count).map(|_| rng.random::<f64>() * t_max).collect();
    times.sort_by(f64::total_cmp);
    redraw_ties(&mut times, rng, |r| r.random::<f64>() * t_max);
    let events = times
        .into_iter()
        .map(|time| {
            let (u, v) = uniform_pair(n, rng);
            Event { time, u, v }
        })
        .collect();
    Ok(EventStream { n, horizon: t_max, events })
}

/// Uniform unordered pair of distinct vertices, returned with `u < v`.
pub(crate) fn uniform_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (u32, u32) {
    let a = rng.random_range(0..n as u32);
    let mut b = rng.random_range(0..n as u32 - 1);
    if b >= a {
        b += 1;
    }
    (a.min(b), a.max(b))
}

/// Replaces one member of each exact tie by a fresh draw until `xs` (sorted)
/// is strictly increasing.
pub(crate) fn redraw_ties<R: Rng + ?Sized>(xs: &mut [f64], rng: &mut R, mut draw: impl FnMut(&mut R) -> f64) {
    loop {
        let mut tied = false;
        for i in 1..xs.len() {
            if xs[i] == xs[i - 1] {
                xs[i] = draw(rng);
                tied = true;
            }
        }
        if !tied {
            return;
        }
        xs.sort_by(f64::total_cmp);
    }
}
