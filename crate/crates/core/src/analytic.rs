//! Closed forms for the lower-bound graph `g^k` and configuration-model samplers.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::LabeledMultigraph;
use crate::process::ForbiddenDegree;

/// Compensated (Kahan–Neumaier) running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    c: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.c
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// `ln(i!)` for `i = 0..=m`.
fn ln_factorials(m: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(m + 1);
    let mut acc = KahanSum::default();
    out.push(0.0);
    for j in 1..=m {
        acc.add((j as f64).ln());
        out.push(acc.value());
    }
    out
}

/// Poisson(t) probabilities `P(C = c)` for `c = 0..=m`, evaluated in log space.
pub fn poisson_pmf_table(t: f64, m: usize) -> Vec<f64> {
    let lf = ln_factorials(m);
    (0..=m)
        .map(|c| {
            if c == 0 {
                (-t).exp()
            } else if t == 0.0 {
                0.0
            } else {
                (-t + c as f64 * t.ln() - lf[c]).exp()
            }
        })
        .collect()
}

fn check_t(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!("t must be finite and >= 0, got {t}")));
    }
    Ok(())
}

/// `P(Poisson(t) <= m)` by compensated summation.
fn poisson_cdf(t: f64, m: usize) -> f64 {
    poisson_pmf_table(t, m).into_iter().collect::<KahanSum>().value()
}

/// `pi_k(t) = e^{-t} sum_{i=0}^{k-2} t^i / i!`.
pub fn compute_pi(t: f64, k: u32) -> Result<f64> {
    check_t(t)?;
    if k < 2 {
        return Err(Error::invalid(format!("k must be >= 2, got {k}")));
    }
    Ok(poisson_cdf(t, (k - 2) as usize))
}

/// Limiting degree law of `g^k_{n,t}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeProfile {
    pub t: f64,
    pub k: u32,
    pub pi: f64,
    pub p: Vec<f64>,
    pub q_t: f64,
}

pub fn compute_degree_profile(t: f64, k: u32) -> Result<DegreeProfile> {
    let pi = compute_pi(t, k)?;
    Ok(profile_with_pi(t, k, pi))
}

/// Degree law for an externally supplied thinning parameter.
pub fn profile_with_pi(t: f64, k: u32, pi: f64) -> DegreeProfile {
    let kk = k as usize;
    let pmf = poisson_pmf_table(t, kk - 1);
    let choose = binomials(kk - 1);
    let mut p = vec![0.0; kk];
    for (i, pi_i) in p.iter_mut().enumerate().skip(1) {
        *pi_i = (i..kk)
            .map(|c| pmf[c] * choose[c][i] * pi.powi(i as i32) * (1.0 - pi).powi((c - i) as i32))
            .collect::<KahanSum>()
            .value();
    }
    let below: KahanSum = pmf.iter().copied().collect();
    let tail = poisson_upper_tail(t, kk, below.value());
    let mut p0 = KahanSum::default();
    p0.add(tail);
    for (c, &w) in pmf.iter().enumerate() {
        p0.add(w * (1.0 - pi).powi(c as i32));
    }
    p[0] = p0.value();
    let q_t = p.iter().enumerate().map(|(i, &x)| (i as f64) * (i as f64 - 2.0) * x).collect::<KahanSum>().value();
    DegreeProfile { t, k, pi, p, q_t }
}

/// `P(Poisson(t) >= m)`, summing the tail directly when it is small.
fn poisson_upper_tail(t: f64, m: usize, cdf_below: f64) -> f64 {
    if cdf_below < 0.5 {
        return (1.0 - cdf_below).max(0.0);
    }
    let mut acc = KahanSum::default();
    let lf_m = ln_factorials(m)[m];
    let mut term = if t == 0.0 { 0.0 } else { (-t + m as f64 * t.ln() - lf_m).exp() };
    let mut c = m;
    while term > 0.0 && term > 1e-18 * acc.value().max(f64::MIN_POSITIVE) {
        acc.add(term);
        c += 1;
        term *= t / c as f64;
    }
    acc.value()
}

fn binomials(m: usize) -> Vec<Vec<f64>> {
    let mut c = vec![vec![0.0; m + 1]; m + 1];
    for a in 0..=m {
        c[a][0] = 1.0;
        for b in 1..=a {
            c[a][b] = c[a - 1][b - 1] + if b < a { c[a - 1][b] } else { 0.0 };
        }
    }
    c
}

/// `t e^{-t} sum_{i=0}^{k-3} t^i / i!`; the lower-bound graph is supercritical iff this exceeds 1.
pub fn threshold_lhs(t: f64, k: u32) -> Result<f64> {
    check_t(t)?;
    if k < 3 {
        return Err(Error::invalid(format!("threshold needs k >= 3, got {k}")));
    }
    Ok(t * poisson_cdf(t, (k - 3) as usize))
}

/// Maximal sub-interval of `[0, t_max]` around the maximiser where `threshold_lhs > 1`.
pub fn supercritical_interval(k: u32, t_max: f64) -> Result<Option<(f64, f64)>> {
    let f = |t: f64| threshold_lhs(t, k).expect("validated");
    threshold_lhs(0.0, k)?;
    check_t(t_max)?;
    let (t_star, f_star) = threshold_max(k, t_max)?;
    if f_star <= 1.0 {
        return Ok(None);
    }
    let lo = bisect(|t| f(t) > 1.0, 0.0, t_star);
    let hi = if f(t_max) > 1.0 { t_max } else { bisect(|t| f(t) <= 1.0, t_star, t_max) };
    Ok(Some((lo, hi)))
}

/// First point where `pred` turns true on `[a, b]`, assuming `!pred(a)` and `pred(b)`.
fn bisect(pred: impl Fn(f64) -> bool, mut a: f64, mut b: f64) -> f64 {
    while b - a > 1e-12 * b.abs().max(1.0) {
        let m = 0.5 * (a + b);
        if pred(m) {
            b = m;
        } else {
            a = m;
        }
    }
    0.5 * (a + b)
}

/// Location and value of the maximum of `threshold_lhs(., k)` on `[0, t_max]`:
/// a grid scan followed by golden-section refinement.
pub fn threshold_max(k: u32, t_max: f64) -> Result<(f64, f64)> {
    threshold_lhs(0.0, k)?;
    check_t(t_max)?;
    let f = |t: f64| threshold_lhs(t, k).expect("validated");
    let steps = 20_000;
    let h = t_max / steps as f64;
    let mut best = 0;
    let mut best_v = f(0.0);
    for i in 1..=steps {
        let v = f(i as f64 * h);
        if v > best_v {
            best_v = v;
            best = i;
        }
    }
    let mut a = (best as f64 - 1.0).max(0.0) * h;
    let mut b = ((best + 1) as f64 * h).min(t_max);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let t = 0.5 * (a + b);
    Ok((t, f(t)))
}

/// Erase every edge incident to a vertex of degree `>= k`.
pub fn t_k_transform(g_inf: &LabeledMultigraph, k: ForbiddenDegree) -> LabeledMultigraph {
    let deg = g_inf.degrees();
    g_inf.filter_edges(|_, e| !k.reached(deg[e.u as usize]) && !k.reached(deg[e.v as usize]))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeSequence {
    pub c: Vec<u32>,
}

impl DegreeSequence {
    pub fn new(c: Vec<u32>) -> Self {
        DegreeSequence { c }
    }

    pub fn of_graph(g: &LabeledMultigraph) -> Self {
        DegreeSequence { c: g.degrees().into_iter().map(|d| d as u32).collect() }
    }

    /// `d(i) = #{v : c_v = i}`.
    pub fn histogram(&self) -> Vec<usize> {
        let m = self.c.iter().copied().max().unwrap_or(0) as usize;
        let mut d = vec![0; m + 1];
        for &x in &self.c {
            d[x as usize] += 1;
        }
        d
    }

    pub fn total(&self) -> u64 {
        self.c.iter().map(|&x| x as u64).sum()
    }
}

/// Uniform pairing of the half-edges. Loops and multi-edges are kept; edges carry no labels.
pub fn sample_configuration_model<R: Rng + ?Sized>(seq: &DegreeSequence, rng: &mut R) -> Result<LabeledMultigraph> {
    if seq.total() % 2 == 1 {
        return Err(Error::invalid("degree sum is odd"));
    }
    let mut half: Vec<u32> = Vec::with_capacity(seq.total() as usize);
    for (v, &c) in seq.c.iter().enumerate() {
        half.extend(std::iter::repeat_n(v as u32, c as usize));
    }
    half.shuffle(rng);
    let mut g = LabeledMultigraph::new(seq.c.len());
    for pair in half.chunks_exact(2) {
        g.push(pair[0], pair[1], None);
    }
    Ok(g)
}

#[derive(Clone, Debug)]
pub struct LooplessSample {
    pub graph: LabeledMultigraph,
    pub attempts: u64,
}

/// Configuration model conditioned on having no loop, by rejection.
pub fn sample_loopless_configuration<R: Rng + ?Sized>(
    seq: &DegreeSequence,
    rng: &mut R,
    max_attempts: u64,
) -> Result<LooplessSample> {
    for attempts in 1..=max_attempts {
        let g = sample_configuration_model(seq, rng)?;
        if !g.has_loop() {
            return Ok(LooplessSample { graph: g, attempts });
        }
    }
    Err(Error::RetryExhausted { attempts: max_attempts })
}
