//! Exact simulation of the forbidden-degree process and component statistics.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{sample_event_stream, uniform_pair, EventStream, LabeledMultigraph};

/// The forbidden degree: a vertex reaching it loses all its edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "KRepr", into = "KRepr")]
pub enum ForbiddenDegree {
    Finite(u32),
    Unbounded,
}

impl ForbiddenDegree {
    pub fn finite(k: u32) -> Result<Self> {
        let k = ForbiddenDegree::Finite(k);
        k.validate()?;
        Ok(k)
    }

    pub fn validate(self) -> Result<()> {
        match self {
            ForbiddenDegree::Finite(k) if k < 2 => {
                Err(Error::invalid(format!("forbidden degree must be >= 2, got {k}")))
            }
            _ => Ok(()),
        }
    }

    /// Whether a vertex now at degree `d` has reached the forbidden degree.
    #[inline]
    pub fn reached(self, d: usize) -> bool {
        match self {
            ForbiddenDegree::Finite(k) => d >= k as usize,
            ForbiddenDegree::Unbounded => false,
        }
    }

    pub fn value(self) -> Option<u32> {
        match self {
            ForbiddenDegree::Finite(k) => Some(k),
            ForbiddenDegree::Unbounded => None,
        }
    }
}

impl fmt::Display for ForbiddenDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ForbiddenDegree::Finite(k) => write!(f, "{k}"),
            ForbiddenDegree::Unbounded => write!(f, "inf"),
        }
    }
}

impl FromStr for ForbiddenDegree {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(ForbiddenDegree::Unbounded),
            other => other
                .parse::<u32>()
                .map_err(|_| Error::invalid(format!("bad forbidden degree {other:?}")))
                .and_then(ForbiddenDegree::finite),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum KRepr {
    Num(u32),
    Text(String),
}

impl TryFrom<KRepr> for ForbiddenDegree {
    type Error = Error;
    fn try_from(r: KRepr) -> Result<Self> {
        match r {
            KRepr::Num(k) => ForbiddenDegree::finite(k),
            KRepr::Text(s) => s.parse(),
        }
    }
}

impl From<ForbiddenDegree> for KRepr {
    fn from(k: ForbiddenDegree) -> KRepr {
        match k {
            ForbiddenDegree::Finite(k) => KRepr::Num(k),
            ForbiddenDegree::Unbounded => KRepr::Text("inf".into()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentClass {
    Path,
    Cycle,
    Other,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentSummary {
    pub sizes: Vec<usize>,
    pub classes: Vec<ComponentClass>,
}

impl ComponentSummary {
    pub fn c_max(&self) -> usize {
        self.sizes.iter().copied().max().unwrap_or(0)
    }

    pub fn n_components(&self) -> usize {
        self.sizes.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.sizes.iter().sum()
    }
}

/// Components by breadth-first traversal. `neighbors(v, f)` must call `f` once
/// per incident edge record of `v` with the other endpoint.
fn summarize(n: usize, mut neighbors: impl FnMut(u32, &mut dyn FnMut(u32))) -> ComponentSummary {
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    let mut sizes = Vec::new();
    let mut classes = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        queue.push_back(s as u32);
        let (mut size, mut half_edges, mut max_deg) = (0usize, 0usize, 0usize);
        while let Some(v) = queue.pop_front() {
            size += 1;
            let mut deg = 0;
            neighbors(v, &mut |w| {
                deg += 1;
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    queue.push_back(w);
                }
            });
            half_edges += deg;
            max_deg = max_deg.max(deg);
        }
        let m = half_edges / 2;
        let class = if max_deg <= 2 && m + 1 == size {
            ComponentClass::Path
        } else if max_deg <= 2 && m == size {
            ComponentClass::Cycle
        } else {
            ComponentClass::Other
        };
        sizes.push(size);
        classes.push(class);
    }
    ComponentSummary { sizes, classes }
}

/// Connected components of `g` with path/cycle classification.
pub fn components(g: &LabeledMultigraph) -> ComponentSummary {
    summarize(g.n(), |v, f| {
        for &e in g.incident(v) {
            f(g.edges()[e as usize].other(v));
        }
    })
}

/// The `k = 3` statistic `Z = sum |paths|^2 + 2 sum |cycles|^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZStatistic {
    pub value: f64,
    pub c_max: usize,
}

impl ZStatistic {
    /// `Z >= C_max^2`.
    pub fn dominates_c_max_squared(&self) -> bool {
        self.value >= (self.c_max as f64).powi(2)
    }
}

pub fn z_statistic(summary: &ComponentSummary) -> Result<ZStatistic> {
    let mut z = 0.0;
    for (&s, &c) in summary.sizes.iter().zip(&summary.classes) {
        let s2 = (s as f64) * (s as f64);
        z += match c {
            ComponentClass::Path => s2,
            ComponentClass::Cycle => 2.0 * s2,
            ComponentClass::Other => {
                return Err(Error::invalid("Z is only defined when every component is a path or a cycle"))
            }
        };
    }
    Ok(ZStatistic { value: z, c_max: summary.c_max() })
}

#[derive(Clone, Copy, Debug)]
struct Rec {
    u: u32,
    v: u32,
    label: f64,
    alive: bool,
}

/// Incremental state of the dynamics.
#[derive(Clone, Debug)]
pub(crate) struct Engine {
    k: ForbiddenDegree,
    inc: Vec<Vec<u32>>,
    recs: Vec<Rec>,
    pub(crate) removal_log: Vec<(f64, u32)>,
}

impl Engine {
    pub(crate) fn new(n: usize, k: ForbiddenDegree) -> Self {
        Engine { k, inc: vec![Vec::new(); n], recs: Vec::new(), removal_log: Vec::new() }
    }

    /// Adds an edge; saturated endpoints then lose all their edges at once.
    pub(crate) fn add(&mut self, u: u32, v: u32, label: f64) {
        let id = self.recs.len() as u32;
        self.recs.push(Rec { u, v, label, alive: true });
        self.inc[u as usize].push(id);
        self.inc[v as usize].push(id);
        let sat_u = self.k.reached(self.inc[u as usize].len());
        let sat_v = self.k.reached(self.inc[v as usize].len());
        if sat_u {
            self.clear(u, label);
        }
        if sat_v {
            self.clear(v, label);
        }
        debug_assert!(self.k.value().is_none_or(|k| {
            self.inc[u as usize].len() < k as usize && self.inc[v as usize].len() < k as usize
        }));
    }

    fn clear(&mut self, w: u32, time: f64) {
        self.removal_log.push((time, w));
        for e in std::mem::take(&mut self.inc[w as usize]) {
            let r = &mut self.recs[e as usize];
            r.alive = false;
            let other = if r.u == w { r.v } else { r.u };
            let list = &mut self.inc[other as usize];
            if let Some(p) = list.iter().position(|&x| x == e) {
                list.swap_remove(p);
            }
        }
    }

    /// Removes every edge at `w` without the degree rule (log replay).
    pub(crate) fn force_clear(&mut self, w: u32, time: f64) {
        self.clear(w, time);
    }

    pub(crate) fn alive(&self, id: usize) -> bool {
        self.recs[id].alive
    }

    pub(crate) fn summary(&self) -> ComponentSummary {
        summarize(self.inc.len(), |v, f| {
            for &e in &self.inc[v as usize] {
                let r = &self.recs[e as usize];
                f(if r.u == v { r.v } else { r.u });
            }
        })
    }

    fn neighbors(&self, v: u32) -> impl Iterator<Item = u32> + '_ {
        self.inc[v as usize].iter().map(move |&e| {
            let r = &self.recs[e as usize];
            if r.u == v { r.v } else { r.u }
        })
    }

    /// Sum of the `Z` contributions of the distinct components holding `starts`.
    /// Components already carrying `epoch` in `stamp` are skipped.
    fn local_z(&self, starts: &[u32], stamp: &mut [u32], epoch: u32, queue: &mut Vec<u32>) -> Result<f64> {
        let mut z = 0.0;
        for &s in starts {
            if stamp[s as usize] == epoch {
                continue;
            }
            stamp[s as usize] = epoch;
            queue.clear();
            queue.push(s);
            let (mut half_edges, mut max_deg, mut i) = (0usize, 0usize, 0usize);
            while i < queue.len() {
                let v = queue[i];
                i += 1;
                let d = self.inc[v as usize].len();
                half_edges += d;
                max_deg = max_deg.max(d);
                for w in self.neighbors(v) {
                    if stamp[w as usize] != epoch {
                        stamp[w as usize] = epoch;
                        queue.push(w);
                    }
                }
            }
            let size = queue.len();
            let s2 = (size * size) as f64;
            z += match (max_deg <= 2, half_edges / 2 + 1 == size, half_edges / 2 == size) {
                (true, true, _) => s2,
                (true, _, true) => 2.0 * s2,
                _ => return Err(Error::invalid("Z is only defined when every component is a path or a cycle")),
            };
        }
        Ok(z)
    }

    pub(crate) fn graph(&self) -> LabeledMultigraph {
        let mut g = LabeledMultigraph::new(self.inc.len());
        for r in self.recs.iter().filter(|r| r.alive) {
            g.push(r.u, r.v, Some(r.label));
        }
        g
    }
}

/// `G^k` at time `clock`, with the saturation events that produced it.
#[derive(Clone, Debug)]
pub struct ProcessState {
    pub graph: LabeledMultigraph,
    pub clock: f64,
    pub forbidden_degree: ForbiddenDegree,
    pub removal_log: Vec<(f64, u32)>,
}

impl ProcessState {
    /// Rebuilds the graph from the stream by deleting edges exactly where the
    /// log says, without consulting degrees.
    pub fn replay_log(&self, stream: &EventStream) -> LabeledMultigraph {
        let mut eng = Engine::new(stream.n, ForbiddenDegree::Unbounded);
        let mut log = self.removal_log.iter().peekable();
        for ev in &stream.events[..stream.count_upto(self.clock)] {
            eng.add(ev.u, ev.v, ev.time);
            while let Some(&&(t, w)) = log.peek() {
                if t != ev.time {
                    break;
                }
                eng.force_clear(w, t);
                log.next();
            }
        }
        eng.graph()
    }
}

/// Runs the dynamics on `stream` up to time `upto`.
pub fn run_stream(stream: &EventStream, k: ForbiddenDegree, upto: f64) -> Result<ProcessState> {
    k.validate()?;
    let mut eng = Engine::new(stream.n, k);
    for ev in &stream.events[..stream.count_upto(upto)] {
        eng.add(ev.u, ev.v, ev.time);
    }
    Ok(ProcessState { graph: eng.graph(), clock: upto, forbidden_degree: k, removal_log: eng.removal_log })
}

/// Component summaries of the dynamics on `stream` at each observation time
/// (right-continuous: events at exactly that time are included).
pub fn observe_stream(
    stream: &EventStream,
    k: ForbiddenDegree,
    observe_at: &[f64],
) -> Result<Vec<(f64, ComponentSummary)>> {
    k.validate()?;
    if observe_at.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("observation times must be sorted"));
    }
    if let (Some(&lo), Some(&hi)) = (observe_at.first(), observe_at.last()) {
        if lo < 0.0 || hi > stream.horizon {
            return Err(Error::invalid("observation times must lie in [0, t]"));
        }
    }
    let mut eng = Engine::new(stream.n, k);
    let mut out = Vec::with_capacity(observe_at.len());
    let mut next = 0;
    for &s in observe_at {
        while next < stream.events.len() && stream.events[next].time <= s {
            let ev = stream.events[next];
            eng.add(ev.u, ev.v, ev.time);
            next += 1;
        }
        out.push((s, eng.summary()));
    }
    Ok(out)
}

/// Samples a stream on `[0, t]` and observes `G^k` at the given times.
pub fn simulate<R: Rng + ?Sized>(
    n: usize,
    k: ForbiddenDegree,
    t: f64,
    rng: &mut R,
    observe_at: &[f64],
) -> Result<Vec<(f64, ComponentSummary)>> {
    k.validate()?;
    let stream = sample_event_stream(n, t, rng)?;
    observe_stream(&stream, k, observe_at)
}

/// The jump chain: `steps` uniform pairs. Edge labels are the step indices `1..=steps`.
pub fn simulate_discrete<R: Rng + ?Sized>(n: usize, k: ForbiddenDegree, steps: usize, rng: &mut R) -> Result<ProcessState> {
    let (state, _) = simulate_discrete_observed(n, k, steps, rng, &[])?;
    Ok(state)
}

/// As [`simulate_discrete`], also summarising components after each listed step count.
pub fn simulate_discrete_observed<R: Rng + ?Sized>(
    n: usize,
    k: ForbiddenDegree,
    steps: usize,
    rng: &mut R,
    observe_steps: &[usize],
) -> Result<(ProcessState, Vec<(usize, ComponentSummary)>)> {
    if n < 2 {
        return Err(Error::invalid(format!("need n >= 2, got {n}")));
    }
    k.validate()?;
    let mut eng = Engine::new(n, k);
    let mut obs = Vec::with_capacity(observe_steps.len());
    let mut next_obs = observe_steps.iter().peekable();
    while let Some(&&0) = next_obs.peek() {
        obs.push((0, eng.summary()));
        next_obs.next();
    }
    for step in 1..=steps {
        let (u, v) = uniform_pair(n, rng);
        eng.add(u, v, step as f64);
        while let Some(&&s) = next_obs.peek() {
            if s != step {
                break;
            }
            obs.push((step, eng.summary()));
            next_obs.next();
        }
    }
    let state = ProcessState {
        graph: eng.graph(),
        clock: steps as f64,
        forbidden_degree: k,
        removal_log: std::mem::take(&mut eng.removal_log),
    };
    Ok((state, obs))
}

/// `Z_l / n` for `l = 0..=steps` along the `k = 3` jump chain, updated
/// locally after each step instead of recomputing every component.
pub fn z_trajectory<R: Rng + ?Sized>(n: usize, steps: usize, rng: &mut R) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::invalid(format!("need n >= 2, got {n}")));
    }
    let mut eng = Engine::new(n, ForbiddenDegree::Finite(3));
    let mut stamp = vec![0u32; n];
    let mut queue = Vec::new();
    let mut epoch = 0u32;
    let mut z = n as f64;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(1.0);
    for step in 1..=steps {
        let (u, v) = uniform_pair(n, rng);
        let mut touched = vec![u, v];
        touched.extend(eng.neighbors(u));
        touched.extend(eng.neighbors(v));
        epoch += 1;
        z -= eng.local_z(&[u, v], &mut stamp, epoch, &mut queue)?;
        eng.add(u, v, step as f64);
        epoch += 1;
        z += eng.local_z(&touched, &mut stamp, epoch, &mut queue)?;
        out.push(z / n as f64);
    }
    Ok(out)
}

/// `Phi(g)`: the edges of `g` added in label order under the degree-`k` rule.
/// The result keeps the surviving edge records of `g` in their original order.
pub fn phi_transform(g: &LabeledMultigraph, k: ForbiddenDegree) -> Result<LabeledMultigraph> {
    k.validate()?;
    if g.has_loop() {
        return Err(Error::invalid("phi_transform needs a loopless graph"));
    }
    let order = g.label_order()?;
    let mut eng = Engine::new(g.n(), k);
    for &i in &order {
        let e = g.edges()[i];
        eng.add(e.u, e.v, e.label.unwrap());
    }
    let mut rank = vec![0usize; order.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    Ok(g.filter_edges(|i, _| eng.alive(rank[i])))
}

/// `(g^k, G^k, G^inf)` at time `t`, all built from one event stream.
#[derive(Clone, Debug)]
pub struct Sandwich {
    pub g_lower: LabeledMultigraph,
    pub g_k: LabeledMultigraph,
    pub g_inf: LabeledMultigraph,
}

impl Sandwich {
    /// Edge records of `g_lower` missing from `g_k` plus those of `g_k` missing from `g_inf`.
    pub fn inclusion_violations(&self) -> usize {
        missing(&self.g_lower.label_keys(), &self.g_k.label_keys())
            + missing(&self.g_k.label_keys(), &self.g_inf.label_keys())
    }
}

fn missing(sub: &[u64], sup: &[u64]) -> usize {
    sub.iter().filter(|x| sup.binary_search(x).is_err()).count()
}

pub fn coupled_sandwich<R: Rng + ?Sized>(n: usize, k: ForbiddenDegree, t: f64, rng: &mut R) -> Result<Sandwich> {
    k.validate()?;
    let stream = sample_event_stream(n, t, rng)?;
    Ok(sandwich_from_stream(&stream, k, t))
}

pub fn sandwich_from_stream(stream: &EventStream, k: ForbiddenDegree, t: f64) -> Sandwich {
    let g_inf = stream.accumulate(t);
    let g_k = run_stream(stream, k, t).expect("validated forbidden degree").graph;
    let g_lower = crate::analytic::t_k_transform(&g_inf, k);
    Sandwich { g_lower, g_k, g_inf }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Event;
    use crate::rng::RngStream;

    fn ev(time: f64, u: u32, v: u32) -> Event {
        Event { time, u, v }
    }

    #[test]
    fn parses_forbidden_degree() {
        assert_eq!("5".parse::<ForbiddenDegree>().unwrap(), ForbiddenDegree::Finite(5));
        assert_eq!("inf".parse::<ForbiddenDegree>().unwrap(), ForbiddenDegree::Unbounded);
        assert!("1".parse::<ForbiddenDegree>().is_err());
        assert!(ForbiddenDegree::finite(0).is_err());
        let j = serde_json::to_string(&ForbiddenDegree::Unbounded).unwrap();
        assert_eq!(serde_json::from_str::<ForbiddenDegree>(&j).unwrap(), ForbiddenDegree::Unbounded);
        assert_eq!(serde_json::from_str::<ForbiddenDegree>("4").unwrap(), ForbiddenDegree::Finite(4));
    }

    #[test]
    fn saturation_clears_vertex() {
        let s = EventStream::from_events(3, 1.0, vec![ev(0.1, 0, 1), ev(0.2, 0, 1), ev(0.3, 0, 2)]).unwrap();
        let st = run_stream(&s, ForbiddenDegree::Finite(3), 0.3).unwrap();
        assert_eq!(st.graph.edge_count(), 0);
        assert_eq!(st.removal_log, vec![(0.3, 0)]);
    }

    #[test]
    fn triangle_survives_k4() {
        let s = EventStream::from_events(3, 0.4, vec![ev(0.1, 0, 1), ev(0.2, 1, 2), ev(0.3, 0, 2)]).unwrap();
        let obs = observe_stream(&s, ForbiddenDegree::Finite(4), &[0.4]).unwrap();
        assert_eq!(obs[0].1.sizes, vec![3]);
        assert_eq!(obs[0].1.classes, vec![ComponentClass::Cycle]);
    }

    #[test]
    fn observation_is_right_continuous() {
        let s = EventStream::from_events(3, 1.0, vec![ev(0.5, 0, 1)]).unwrap();
        let obs = observe_stream(&s, ForbiddenDegree::Finite(3), &[0.4, 0.5]).unwrap();
        assert_eq!(obs[0].1.c_max(), 1);
        assert_eq!(obs[1].1.c_max(), 2);
    }

    #[test]
    fn k2_components_have_at_most_two_vertices() {
        let mut r = RngStream::new(5, 0).rng();
        let obs = simulate(5, ForbiddenDegree::Finite(2), 10.0, &mut r, &[1.0, 2.0, 5.0, 10.0]).unwrap();
        for (_, s) in obs {
            assert!(s.c_max() <= 2);
        }
    }

    #[test]
    fn rejects_k_below_two() {
        let mut r = RngStream::new(5, 0).rng();
        assert!(simulate(5, ForbiddenDegree::Finite(1), 1.0, &mut r, &[]).is_err());
    }

    #[test]
    fn discrete_small_cases() {
        let mut r = RngStream::new(1, 0).rng();
        let st = simulate_discrete(10, ForbiddenDegree::Finite(3), 0, &mut r).unwrap();
        assert_eq!(st.graph.edge_count(), 0);
        let st = simulate_discrete(2, ForbiddenDegree::Finite(3), 3, &mut r).unwrap();
        assert_eq!(st.graph.edge_count(), 0);
        assert_eq!(st.removal_log.len(), 2);
    }

    #[test]
    fn phi_small_cases() {
        let g = LabeledMultigraph::new(4);
        assert_eq!(phi_transform(&g, ForbiddenDegree::Finite(3)).unwrap().edge_count(), 0);
        let g = LabeledMultigraph::from_labeled_edges(3, &[(0, 1, 0.3), (1, 2, 0.5)]).unwrap();
        assert_eq!(phi_transform(&g, ForbiddenDegree::Finite(2)).unwrap().edge_count(), 0);
        let mut g = LabeledMultigraph::new(3);
        g.add_edge(0, 1, Some(0.1)).unwrap();
        g.add_edge(1, 2, Some(0.1)).unwrap();
        assert!(phi_transform(&g, ForbiddenDegree::Finite(3)).is_err());
    }

    #[test]
    fn removal_log_replays() {
        let mut r = RngStream::new(2, 0).rng();
        let stream = sample_event_stream(40, 4.0, &mut r).unwrap();
        let st = run_stream(&stream, ForbiddenDegree::Finite(3), 4.0).unwrap();
        assert!(!st.removal_log.is_empty());
        assert_eq!(st.replay_log(&stream).label_keys(), st.graph.label_keys());
    }

    #[test]
    fn z_examples() {
        let iso = ComponentSummary { sizes: vec![1; 7], classes: vec![ComponentClass::Path; 7] };
        assert_eq!(z_statistic(&iso).unwrap().value, 7.0);
        let s = ComponentSummary {
            sizes: vec![3, 1, 1],
            classes: vec![ComponentClass::Path; 3],
        };
        assert_eq!(z_statistic(&s).unwrap().value, 11.0);
        let s = ComponentSummary {
            sizes: vec![4, 2],
            classes: vec![ComponentClass::Cycle, ComponentClass::Path],
        };
        let z = z_statistic(&s).unwrap();
        assert_eq!(z.value, 36.0);
        assert!(z.dominates_c_max_squared());
        let bad = ComponentSummary { sizes: vec![4], classes: vec![ComponentClass::Other] };
        assert!(z_statistic(&bad).is_err());
    }

    #[test]
    fn z_trajectory_matches_recount() {
        for seed in 0..20 {
            let n = 30;
            let steps = 150;
            let all: Vec<usize> = (0..=steps).collect();
            let (_, obs) =
                simulate_discrete_observed(n, ForbiddenDegree::Finite(3), steps, &mut RngStream::new(seed, 0).rng(), &all)
                    .unwrap();
            let traj = z_trajectory(n, steps, &mut RngStream::new(seed, 0).rng()).unwrap();
            assert_eq!(traj.len(), steps + 1);
            for (l, summary) in obs {
                let z = z_statistic(&summary).unwrap().value / n as f64;
                assert_eq!(traj[l], z, "seed {seed} step {l}");
            }
        }
    }

    #[test]
    fn double_edge_is_a_cycle() {
        let g = LabeledMultigraph::from_labeled_edges(2, &[(0, 1, 0.1), (0, 1, 0.2)]).unwrap();
        let s = components(&g);
        assert_eq!(s.classes, vec![ComponentClass::Cycle]);
        assert_eq!(z_statistic(&s).unwrap().value, 8.0);
    }

    #[test]
    fn component_examples() {
        let s = components(&LabeledMultigraph::new(4));
        assert_eq!(s.sizes, vec![1; 4]);
        let g = LabeledMultigraph::from_labeled_edges(5, &[(0, 1, 0.1), (1, 2, 0.2), (2, 0, 0.3)]).unwrap();
        let s = components(&g);
        let mut sizes = s.sizes.clone();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 1, 3]);
        assert_eq!(s.classes[0], ComponentClass::Cycle);
    }

    #[test]
    fn sandwich_small_cases() {
        let s = EventStream::from_events(2, 1.0, vec![ev(0.1, 0, 1), ev(0.2, 0, 1)]).unwrap();
        let sw = sandwich_from_stream(&s, ForbiddenDegree::Finite(3), 1.0);
        assert_eq!((sw.g_inf.edge_count(), sw.g_k.edge_count(), sw.g_lower.edge_count()), (2, 2, 2));
        let mut r = RngStream::new(8, 0).rng();
        let sw = coupled_sandwich(60, ForbiddenDegree::Unbounded, 2.0, &mut r).unwrap();
        assert_eq!(sw.g_lower, sw.g_inf);
        assert_eq!(sw.g_k, sw.g_inf);
    }
}
