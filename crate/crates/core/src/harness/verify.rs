//! The acceptance battery: ten checks, each reported with the measured
//! value, the band it must fall in, and a verdict.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::run::{cmax_paths, giant_rows, per_replica, root_comparison, z_paths};
use crate::analytic::{
    compute_pi, profile_with_pi, sample_configuration_model, sample_loopless_configuration, supercritical_interval,
    t_k_transform, threshold_lhs, threshold_max, DegreeSequence,
};
use crate::branching::{
    estimate_kernel, estimate_spectral_radius, solve_extinction, KernelOptions, OffspringKernel, SolveOptions,
};
use crate::error::Result;
use crate::graph::{sample_event_stream, LabeledMultigraph};
use crate::local::{estimate_survival, find_propagation_paths, sample_gw_levels, total_variation, PathSearch};
use crate::oracle::{configuration_law, longest_propagation_path, multigraph_key, multiplicity_weight, replay_phi};
use crate::process::{phi_transform, ForbiddenDegree};
use crate::rng::RngStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Fast,
    Full,
}

/// Problem sizes for each criterion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scale {
    pub c1_n: usize,
    pub c1_replicas: u64,
    pub c3_n: usize,
    pub c3_replicas: u64,
    pub c4_runs: u64,
    pub c5_n: usize,
    pub c5_replicas: u64,
    pub c6_n: usize,
    pub c6_samples: u64,
    pub c7_trees: u64,
    pub c8_n: usize,
    pub c8_replicas: u64,
    pub c8_survival_replicas: u64,
    pub c8_bins: usize,
    pub c8_samples: usize,
    pub c8_m_samples: usize,
    pub c8_root_draws: u64,
    pub c9_bins: usize,
    pub c9_samples: usize,
    pub c9_m_samples: usize,
    pub c9_link_samples: usize,
    pub c10_instances: u64,
    pub c10_samples: u64,
}

impl Scale {
    /// The sizes the criteria are stated at.
    pub fn full() -> Self {
        Scale {
            c1_n: 10_000,
            c1_replicas: 100,
            c3_n: 100_000,
            c3_replicas: 50,
            c4_runs: 1000,
            c5_n: 100_000,
            c5_replicas: 20,
            c6_n: 10_000,
            c6_samples: 100_000,
            c7_trees: 100_000,
            c8_n: 100_000,
            c8_replicas: 20,
            c8_survival_replicas: 4000,
            c8_bins: 16,
            c8_samples: 4000,
            c8_m_samples: 100_000,
            c8_root_draws: 40_000,
            c9_bins: 10,
            c9_samples: 12_000,
            c9_m_samples: 150_000,
            c9_link_samples: 40_000,
            c10_instances: 10_000,
            c10_samples: 100_000,
        }
    }

    pub fn fast() -> Self {
        Scale {
            c1_n: 2000,
            c1_replicas: 20,
            c3_n: 20_000,
            c3_replicas: 10,
            c4_runs: 200,
            c5_n: 20_000,
            c5_replicas: 5,
            c6_n: 10_000,
            c6_samples: 50_000,
            c7_trees: 20_000,
            c8_n: 20_000,
            c8_replicas: 5,
            c8_survival_replicas: 2000,
            c8_bins: 8,
            c8_samples: 1000,
            c8_m_samples: 20_000,
            c8_root_draws: 20_000,
            c9_bins: 6,
            c9_samples: 12_000,
            c9_m_samples: 100_000,
            c9_link_samples: 20_000,
            c10_instances: 2000,
            c10_samples: 20_000,
        }
    }

    pub fn for_suite(suite: Suite) -> Self {
        match suite {
            Suite::Fast => Scale::fast(),
            Suite::Full => Scale::full(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub suite: Suite,
    pub seed: u64,
    /// Added to `pi_k(t)` wherever the battery consumes the degree profile;
    /// nonzero only to check that the battery notices.
    pub pi_offset: f64,
    /// Criteria to run; all when empty.
    pub only: Vec<u8>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { suite: Suite::Fast, seed: 1, pi_offset: 0.0, only: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub measured: f64,
    pub band: String,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:>2} {:<22} measured={:.6} band: {} | {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.band,
            self.detail
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub seed: u64,
    pub pi_offset: f64,
    pub results: Vec<CriterionResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

pub const CRITERIA: [(u8, &str); 10] = [
    (1, "no-giant-k3"),
    (2, "threshold-analytics"),
    (3, "giant-k5"),
    (4, "sandwich"),
    (5, "degree-law"),
    (6, "local-limit"),
    (7, "propagation-tail"),
    (8, "equivalence"),
    (9, "kernel-identities"),
    (10, "oracle-equivalences"),
];

/// Runs the selected criteria in order; a criterion that errors is a failure.
pub fn verify(opts: &VerifyOptions) -> VerifyReport {
    let scale = Scale::for_suite(opts.suite);
    let results = CRITERIA
        .iter()
        .filter(|(id, _)| opts.only.is_empty() || opts.only.contains(id))
        .map(|&(id, _)| run_criterion(id, &scale, opts.seed, opts.pi_offset))
        .collect();
    VerifyReport { suite: opts.suite, seed: opts.seed, pi_offset: opts.pi_offset, results }
}

struct Outcome {
    measured: f64,
    band: String,
    pass: bool,
    detail: String,
}

pub fn run_criterion(id: u8, scale: &Scale, seed: u64, pi_offset: f64) -> CriterionResult {
    let start = std::time::Instant::now();
    let name = CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1).unwrap_or("unknown");
    let seed = seed.wrapping_mul(1000).wrapping_add(id as u64);
    let out = match id {
        1 => no_giant(scale, seed),
        2 => threshold(pi_offset),
        3 => giant(scale, seed),
        4 => sandwich(scale, seed),
        5 => degree_law(scale, seed, pi_offset),
        6 => local_limit(scale, seed),
        7 => propagation(scale, seed),
        8 => equivalence(scale, seed),
        9 => kernel_identities(scale, seed),
        10 => oracles(scale, seed),
        _ => Err(crate::error::Error::invalid(format!("no criterion {id}"))),
    };
    let out = out.unwrap_or_else(|e| Outcome { measured: f64::NAN, band: String::new(), pass: false, detail: format!("error: {e}") });
    CriterionResult {
        id,
        name: name.to_string(),
        measured: out.measured,
        band: out.band,
        pass: out.pass,
        detail: out.detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn se(v: &[f64]) -> f64 {
    let m = mean(v);
    let n = v.len() as f64;
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
}

fn no_giant(s: &Scale, seed: u64) -> Result<Outcome> {
    let times = [0.5, 1.0, 2.0, 4.0, 8.0];
    let k3 = ForbiddenDegree::Finite(3);
    let cm = cmax_paths(s.c1_n, k3, &times, s.c1_replicas, seed)?;
    let means: Vec<f64> = (0..times.len()).map(|j| mean(&cm.iter().map(|r| r[j]).collect::<Vec<_>>())).collect();
    let worst = means.iter().copied().fold(0.0, f64::max);
    let (_, zmean) = z_paths(s.c1_n, 5 * s.c1_n, s.c1_replicas, seed)?;
    let zpeak = zmean.iter().copied().fold(0.0, f64::max);
    Ok(Outcome {
        measured: worst,
        band: "max_t mean C_max/n <= 0.02; max_l mean Z_l/n <= 40".into(),
        pass: worst <= 0.02 && zpeak <= 40.0,
        detail: format!("n={} replicas={} C_max/n by t {:?}; peak mean Z/n {:.3}", s.c1_n, s.c1_replicas, means, zpeak),
    })
}

/// `P(Poisson(t) <= m)` by the plain term recurrence.
fn naive_cdf(t: f64, m: i64) -> f64 {
    let mut term = (-t).exp();
    let mut acc = 0.0;
    for i in 0..=m {
        acc += term;
        term *= t / (i + 1) as f64;
    }
    acc
}

fn threshold(pi_offset: f64) -> Result<Outcome> {
    let lhs = threshold_lhs(2.0, 5)?;
    let e1 = (lhs - 10.0 * (-2.0f64).exp()).abs();
    let (_, sup4) = threshold_max(4, 50.0)?;
    let e2 = (sup4 - 0.84003).abs();
    let interval = supercritical_interval(5, 50.0)?;
    let contains2 = interval.is_some_and(|(a, b)| a < 2.0 && 2.0 < b);
    let none4 = supercritical_interval(4, 50.0)?.is_none();
    // identities of the degree law, against sums computed from scratch
    let mut worst = 0.0f64;
    let mut sign_ok = true;
    for ti in 1..=50 {
        let t = ti as f64 / 10.0;
        for k in 3..=8u32 {
            let pi_ref = naive_cdf(t, k as i64 - 2);
            let pi = compute_pi(t, k)? + pi_offset;
            let p = profile_with_pi(t, k, pi);
            let lhs = threshold_lhs(t, k)?;
            let lhs_ref = t * naive_cdf(t, k as i64 - 3);
            let mean_ref = t * pi_ref * pi_ref;
            let q_ref = t * pi_ref * pi_ref * (lhs_ref - 1.0);
            let mut truncated_mean = 0.0;
            let mut term = (-t).exp();
            for c in 0..k {
                truncated_mean += c as f64 * term;
                term *= t / (c + 1) as f64;
            }
            let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
            worst = worst
                .max((p.p.iter().sum::<f64>() - 1.0).abs())
                .max(rel(p.p.iter().enumerate().map(|(i, x)| i as f64 * x).sum::<f64>(), mean_ref))
                .max(rel(p.q_t, q_ref))
                .max(rel(lhs, lhs_ref))
                .max(rel(truncated_mean, t * pi));
            sign_ok &= (lhs > 1.0) == (p.q_t > 0.0) || (lhs - 1.0).abs() < 1e-12;
        }
    }
    let pass = e1 <= 1e-9 && e2 <= 1e-4 && sup4 < 1.0 && contains2 && none4 && worst <= 1e-9 && sign_ok;
    Ok(Outcome {
        measured: e1.max(worst),
        band: "|lhs(2,5)-10e^-2| <= 1e-9; |sup lhs(.,4)-0.84003| <= 1e-4; interval(5) contains 2; identities <= 1e-9".into(),
        pass,
        detail: format!(
            "lhs(2,5)={lhs:.12} sup4={sup4:.6} interval5={interval:?} k4 none={none4} identity err {worst:.2e} sign ok={sign_ok}"
        ),
    })
}

fn giant(s: &Scale, seed: u64) -> Result<Outcome> {
    let rows = giant_rows(s.c3_n, ForbiddenDegree::Finite(5), 2.0, s.c3_replicas, seed)?;
    let c: Vec<f64> = rows.iter().map(|r| r.c_max).collect();
    let l: Vec<f64> = rows.iter().map(|r| r.lower_c_max).collect();
    let (m, e, ml) = (mean(&c), se(&c), mean(&l));
    Ok(Outcome {
        measured: m,
        band: "mean C_max/n >= 0.05 with SE <= 0.01; lower-bound mean C_max/n >= 0.02".into(),
        pass: m >= 0.05 && e <= 0.01 && ml >= 0.02,
        detail: format!("n={} replicas={} C_max/n={m:.5}±{e:.5} lower={ml:.5}", s.c3_n, s.c3_replicas),
    })
}

fn sandwich(s: &Scale, seed: u64) -> Result<Outcome> {
    let rows = giant_rows(500, ForbiddenDegree::Finite(5), 2.0, s.c4_runs, seed)?;
    let v: usize = rows.iter().map(|r| r.violations).sum();
    Ok(Outcome {
        measured: v as f64,
        band: "zero inclusion violations".into(),
        pass: v == 0,
        detail: format!("{} coupled runs at n=500", s.c4_runs),
    })
}

fn degree_law(s: &Scale, seed: u64, pi_offset: f64) -> Result<Outcome> {
    let (t, k) = (2.0, 5u32);
    let kf = ForbiddenDegree::Finite(k);
    let n = s.c5_n;
    let base = RngStream::new(seed, 0);
    let hists = per_replica(s.c5_replicas, |r| {
        let g = sample_event_stream(n, t, &mut base.substream(r).rng())?.accumulate(t);
        let lower = t_k_transform(&g, kf);
        let mut h = vec![0.0; k as usize + 1];
        for d in lower.degrees() {
            h[d.min(k as usize)] += 1.0 / n as f64;
        }
        Ok(h)
    })?;
    let p = profile_with_pi(t, k, compute_pi(t, k)? + pi_offset);
    let mut worst = 0.0f64;
    let mut avg = vec![0.0; k as usize + 1];
    for (i, a) in avg.iter_mut().enumerate() {
        *a = mean(&hists.iter().map(|h| h[i]).collect::<Vec<_>>());
        let target = p.p.get(i).copied().unwrap_or(0.0);
        worst = worst.max((*a - target).abs());
    }
    Ok(Outcome {
        measured: worst,
        band: "max_i |d_n(i)/n - p_i| <= 0.01".into(),
        pass: worst <= 0.01,
        detail: format!("n={n} replicas={} empirical {:?} vs p {:?}", s.c5_replicas, round(&avg), round(&p.p)),
    })
}

fn round(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| (x * 1e5).round() / 1e5).collect()
}

fn local_limit(s: &Scale, seed: u64) -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut detail = Vec::new();
    for (k, t) in [(5u32, 2.0), (4, 1.0)] {
        let graphs = s.c6_samples.div_ceil(s.c6_n as u64);
        let cmp = root_comparison(s.c6_n, ForbiddenDegree::Finite(k), t, graphs, s.c6_samples, seed + k as u64)?;
        let tv = total_variation(&cmp.graph, &cmp.tree);
        worst = worst.max(tv);
        detail.push(format!("(k={k},t={t}) tv={tv:.5} tree truncated={}", cmp.tree_truncated));
    }
    Ok(Outcome {
        measured: worst,
        band: "root-statistic TV <= 0.02".into(),
        pass: worst <= 0.02,
        detail: format!("n={} samples/side={}: {}", s.c6_n, s.c6_samples, detail.join("; ")),
    })
}

fn propagation(s: &Scale, seed: u64) -> Result<Outcome> {
    let l_max = 6usize;
    let mut worst = f64::NEG_INFINITY;
    let mut detail = Vec::new();
    for (ti, t) in [0.5, 1.0, 2.0].into_iter().enumerate() {
        let base = RngStream::new(seed, ti as u64);
        let lens = per_replica(s.c7_trees, |r| {
            let tree = sample_gw_levels(t, l_max as u32, &mut base.substream(r).rng())?;
            Ok(match find_propagation_paths(&tree.to_multigraph(), 0, l_max) {
                PathSearch::ReachedCap => l_max,
                PathSearch::Longest(m) => m,
            })
        })?;
        let n = lens.len() as f64;
        let mut ps = Vec::new();
        for l in 2..=l_max {
            let p = lens.iter().filter(|&&m| m >= l).count() as f64 / n;
            let fact: f64 = (1..l).map(|i| i as f64).product();
            let bound = t * (t + t * t).powi(l as i32 - 1) / fact;
            let err = (p * (1.0 - p) / n).sqrt();
            worst = worst.max(p - bound - 3.0 * err);
            ps.push(format!("{p:.5}"));
        }
        detail.push(format!("t={t}: P(len>=2..6)=[{}]", ps.join(",")));
    }
    Ok(Outcome {
        measured: worst,
        band: "P(len >= l) - t(t+t^2)^(l-1)/(l-1)! - 3 SE <= 0".into(),
        pass: worst <= 0.0,
        detail: format!("{} trees per t; {}", s.c7_trees, detail.join("; ")),
    })
}

fn kernel(t: f64, bins: usize, samples: usize, m_samples: usize, seed: u64, keep: f64) -> Result<OffspringKernel> {
    let opts = KernelOptions { bins, samples_per_cell: samples, m_samples, seed, keep_probability: keep, ..KernelOptions::default() };
    estimate_kernel(t, ForbiddenDegree::Finite(5), &opts)
}

fn equivalence(s: &Scale, seed: u64) -> Result<Outcome> {
    let k5 = ForbiddenDegree::Finite(5);
    let c_sup = mean(&cmax_paths(s.c8_n, k5, &[2.0], s.c8_replicas, seed)?.concat());
    let a_sup = estimate_survival(2.0, k5, s.c8_survival_replicas, 30, 1000, RngStream::new(seed, 1))?;
    let kern = kernel(2.0, s.c8_bins, s.c8_samples, s.c8_m_samples, seed, 1.0)?;
    let sol = solve_extinction(&kern, &SolveOptions { root_draws: s.c8_root_draws, seed, ..SolveOptions::default() })?;
    let gap_graph = (c_sup - a_sup.a_hat).abs();
    let gap_kernel = (a_sup.a_hat - sol.survival()).abs();
    let tol_kernel = 0.02f64.max(3.0 * (a_sup.se.powi(2) + sol.q_twostage_se.powi(2)).sqrt());
    let c_sub = mean(&cmax_paths(s.c8_n, k5, &[0.5], s.c8_replicas, seed + 1)?.concat());
    let a_sub = estimate_survival(0.5, k5, s.c8_survival_replicas, 30, 1000, RngStream::new(seed, 2))?;
    let pass = gap_graph <= 0.03 && gap_kernel <= tol_kernel && c_sub <= 0.01 && a_sub.a_hat <= 0.01;
    Ok(Outcome {
        measured: gap_graph,
        band: format!(
            "|C_max/n - a| <= 0.03; |a - (1-q)| <= {tol_kernel:.4}; subcritical C_max/n <= 0.01 and a <= 0.01"
        ),
        pass,
        detail: format!(
            "t=2: C_max/n={c_sup:.5} a={:.5}±{:.5} 1-q={:.5}±{:.5} rho={:.4} status={:?}; t=0.5: C_max/n={c_sub:.5} a={:.5}",
            a_sup.a_hat,
            a_sup.se,
            sol.survival(),
            sol.q_twostage_se,
            sol.rho_hat,
            sol.status,
            a_sub.a_hat
        ),
    })
}

fn kernel_identities(s: &Scale, seed: u64) -> Result<Outcome> {
    let t = 2.0;
    let kern = kernel(t, s.c9_bins, s.c9_samples, s.c9_m_samples, seed, 1.0)?;
    let b = kern.bins;
    let phi_dev = kern.phi_apply_raw(&vec![1.0; b]).iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    // link: direct root density against m * f_0
    let direct = kern.estimate_h1_direct(s.c9_link_samples, seed ^ 0x5a5a)?;
    let mut link_z = 0.0f64;
    for (y, &(h1, h1_se)) in direct.iter().enumerate() {
        let (lp, lp_se) = kern.link_product(0, y, 0);
        link_z = link_z.max((h1 - lp).abs() / (h1_se * h1_se + lp_se * lp_se).sqrt());
    }
    // symmetry of m(x) f_1(x; {z})
    let mut sym_z = 0.0f64;
    let mut pairs = 0;
    for x in 0..b {
        for z in x + 1..b {
            let (a, sa) = kern.link_product(1, x, kern.tuple_index(&[z as u16]).expect("tuple"));
            let (c, sc) = kern.link_product(1, z, kern.tuple_index(&[x as u16]).expect("tuple"));
            let d = (sa * sa + sc * sc).sqrt();
            if d > 0.0 {
                sym_z = sym_z.max((a - c).abs() / d);
            } else if a != c {
                sym_z = f64::INFINITY;
            }
            pairs += 1;
        }
    }
    let rho = estimate_spectral_radius(&kern)?;
    let mut perc = 0.0f64;
    let mut perc_detail = Vec::new();
    for eps in [0.05, 0.1] {
        let pk = kernel(t, s.c9_bins, s.c9_samples, s.c9_m_samples, seed, 1.0 - 2.0 * eps)?;
        let r = estimate_spectral_radius(&pk)?;
        perc = perc.max((r - (1.0 - 2.0 * eps) * rho).abs());
        perc_detail.push(format!("eps={eps}: {r:.4} vs {:.4}", (1.0 - 2.0 * eps) * rho));
    }
    let pass = phi_dev <= 0.02 && link_z <= 3.0 && sym_z <= 3.0 && perc <= 0.05;
    Ok(Outcome {
        measured: phi_dev,
        band: "|phi(1)-1| <= 0.02; link and symmetry within 3 SE; |rho_eps - (1-2eps) rho| <= 0.05".into(),
        pass,
        detail: format!(
            "bins={b} samples={} link max z={link_z:.3} symmetry max z={sym_z:.3} over {pairs} pairs rho={rho:.4} {}",
            s.c9_samples,
            perc_detail.join(", ")
        ),
    })
}

fn random_labeled<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> LabeledMultigraph {
    let mut g = LabeledMultigraph::new(n);
    for _ in 0..m {
        let u = rng.random_range(0..n as u32);
        let mut v = rng.random_range(0..n as u32 - 1);
        if v >= u {
            v += 1;
        }
        g.push(u, v, Some(rng.random::<f64>()));
    }
    g
}

/// Pooled Pearson statistic of observed keys against exact laws, one law per
/// group; cells expected below 5 are merged within their group.
fn pooled_chi_square<K: Ord + Clone>(groups: &BTreeMap<K, (BTreeMap<Vec<(u32, u32)>, u64>, BTreeMap<Vec<(u32, u32)>, f64>)>) -> (f64, f64) {
    let (mut stat, mut dof) = (0.0, 0.0);
    for (obs, law) in groups.values() {
        let total: u64 = obs.values().sum();
        let unexpected: u64 = obs.iter().filter(|(k, _)| !law.contains_key(*k)).map(|(_, c)| c).sum();
        if unexpected > 0 {
            return (f64::INFINITY, 1.0);
        }
        let mut cells: Vec<(f64, f64)> = Vec::new();
        let (mut rest_o, mut rest_e) = (0.0, 0.0);
        for (key, &p) in law {
            let e = p * total as f64;
            let o = obs.get(key).copied().unwrap_or(0) as f64;
            if e >= 5.0 {
                cells.push((o, e));
            } else {
                rest_o += o;
                rest_e += e;
            }
        }
        if rest_e > 0.0 {
            cells.push((rest_o, rest_e));
        }
        if cells.len() >= 2 {
            stat += cells.iter().map(|(o, e)| (o - e).powi(2) / e).sum::<f64>();
            dof += (cells.len() - 1) as f64;
        }
    }
    (stat, dof)
}

fn chi_p(stat: f64, dof: f64) -> f64 {
    if dof == 0.0 {
        return 1.0;
    }
    if !stat.is_finite() {
        return 0.0;
    }
    1.0 - ChiSquared::new(dof).expect("dof > 0").cdf(stat)
}

fn loopless_law(c: &[u32]) -> BTreeMap<Vec<(u32, u32)>, f64> {
    let mut law: BTreeMap<_, _> = configuration_law(c).into_iter().filter(|(k, _)| k.iter().all(|(a, b)| a != b)).collect();
    let z: f64 = law.values().sum();
    law.values_mut().for_each(|v| *v /= z);
    law
}

fn oracles(s: &Scale, seed: u64) -> Result<Outcome> {
    let base = RngStream::new(seed, 0);
    // Phi against literal replay
    let phi_bad = per_replica(s.c10_instances, |r| {
        let mut rng = base.substream(r).rng();
        let n = rng.random_range(2..=8);
        let m = rng.random_range(0..=16);
        let k = rng.random_range(2..=5u32);
        let g = random_labeled(n, m, &mut rng);
        let fast = phi_transform(&g, ForbiddenDegree::Finite(k))?;
        let mut a: Vec<u64> = fast.edges().iter().map(|e| e.label.unwrap().to_bits()).collect();
        let mut b: Vec<u64> = replay_phi(&g, k as usize).iter().map(|&i| g.edges()[i].label.unwrap().to_bits()).collect();
        a.sort_unstable();
        b.sort_unstable();
        Ok((a != b) as usize)
    })?
    .iter()
    .sum::<usize>();
    // propagation paths against enumeration
    let paths = RngStream::new(seed, 1);
    let l_cap = 5;
    let path_bad = per_replica(s.c10_instances, |r| {
        let mut rng = paths.substream(r).rng();
        let n = rng.random_range(2..=12);
        let m = rng.random_range(0..=14);
        let g = random_labeled(n, m, &mut rng);
        let v = rng.random_range(0..n as u32);
        let want = longest_propagation_path(&g, v, l_cap);
        let got = find_propagation_paths(&g, v, l_cap);
        let ok = match got {
            PathSearch::ReachedCap => want >= l_cap,
            PathSearch::Longest(x) => x == want,
        };
        Ok((!ok) as usize)
    })?
    .iter()
    .sum::<usize>();
    // configuration samplers against pairing enumeration
    let seqs: [&[u32]; 4] = [&[2, 1, 1], &[2, 2, 1, 1], &[3, 1, 1, 1], &[2, 2, 2]];
    // one omnibus statistic per family, so each family is a single test at its level
    let (mut s_stat, mut s_dof) = (0.0, 0.0);
    for (i, c) in seqs.iter().enumerate() {
        let seq = DegreeSequence::new(c.to_vec());
        for loopless in [false, true] {
            let stream = RngStream::new(seed, 10 + 2 * i as u64 + loopless as u64);
            let keys = per_replica(s.c10_samples, |r| {
                let mut rng = stream.substream(r).rng();
                let g = if loopless {
                    sample_loopless_configuration(&seq, &mut rng, 10_000)?.graph
                } else {
                    sample_configuration_model(&seq, &mut rng)?
                };
                Ok(multigraph_key(&g))
            })?;
            let law = if loopless { loopless_law(c) } else { configuration_law(c) };
            let mut obs = BTreeMap::new();
            for k in keys {
                *obs.entry(k).or_insert(0u64) += 1;
            }
            let mut groups = BTreeMap::new();
            groups.insert(0u8, (obs, law));
            let (st, dof) = pooled_chi_square(&groups);
            s_stat += st;
            s_dof += dof;
        }
    }
    let min_p = chi_p(s_stat, s_dof);
    // lower-bound graph given its degrees is the loopless configuration model,
    // whose law is proportional to 1 / prod (i!)^{m_i}
    let mut weight_err = 0.0f64;
    let (mut l_stat, mut l_dof) = (0.0, 0.0);
    let k3 = ForbiddenDegree::Finite(3);
    for n in 4..=6usize {
        let stream = RngStream::new(seed, 100 + n as u64);
        let pairs = per_replica(s.c10_samples, |r| {
            let mut rng = stream.substream(r).rng();
            let g = t_k_transform(&sample_event_stream(n, 1.0, &mut rng)?.accumulate(1.0), k3);
            let seq = DegreeSequence::of_graph(&g);
            let other = sample_loopless_configuration(&seq, &mut rng, 10_000)?.graph;
            Ok((seq.c, multigraph_key(&g), multigraph_key(&other)))
        })?;
        type Groups = BTreeMap<Vec<u32>, (BTreeMap<Vec<(u32, u32)>, u64>, BTreeMap<Vec<(u32, u32)>, f64>)>;
        let mut sim: Groups = BTreeMap::new();
        let mut cfg: Groups = BTreeMap::new();
        let mut laws: BTreeMap<Vec<u32>, BTreeMap<Vec<(u32, u32)>, f64>> = BTreeMap::new();
        for (c, a, b) in &pairs {
            let law = laws.entry(c.clone()).or_insert_with(|| loopless_law(c)).clone();
            *sim.entry(c.clone()).or_insert_with(|| (BTreeMap::new(), law.clone())).0.entry(a.clone()).or_insert(0) += 1;
            *cfg.entry(c.clone()).or_insert_with(|| (BTreeMap::new(), law)).0.entry(b.clone()).or_insert(0) += 1;
        }
        for law in laws.values() {
            let z: f64 = law.keys().map(|k| 1.0 / multiplicity_weight(k)).sum();
            for (k, p) in law {
                weight_err = weight_err.max((p - 1.0 / multiplicity_weight(k) / z).abs());
            }
        }
        for groups in [&sim, &cfg] {
            let (st, dof) = pooled_chi_square(groups);
            l_stat += st;
            l_dof += dof;
        }
    }
    let paired_p = chi_p(l_stat, l_dof);
    let pass = phi_bad == 0 && path_bad == 0 && min_p > 0.01 && paired_p > 0.01 && weight_err <= 1e-12;
    Ok(Outcome {
        measured: (phi_bad + path_bad) as f64,
        band: "0 mismatches; sampler chi-square p > 0.01; weight identity exact; paired law p > 0.01".into(),
        pass,
        detail: format!(
            "{} instances each: phi mismatches {phi_bad}, path mismatches {path_bad}; sampler p {min_p:.4} (chi2={s_stat:.1}, dof={s_dof}); weight err {weight_err:.1e}; paired p {paired_p:.4} (chi2={l_stat:.1}, dof={l_dof})",
            s.c10_instances
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn naive_cdf_matches() {
        assert!((naive_cdf(2.0, 0) - (-2.0f64).exp()).abs() < 1e-15);
        assert!((naive_cdf(1.0, 1) - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn analytic_criterion_and_its_mutation() {
        let ok = run_criterion(2, &Scale::fast(), 0, 0.0);
        assert!(ok.pass, "{ok}");
        let bad = run_criterion(2, &Scale::fast(), 0, 1e-3);
        assert!(!bad.pass, "{bad}");
    }

    #[test]
    fn unknown_criterion_fails() {
        assert!(!run_criterion(11, &Scale::fast(), 0, 0.0).pass);
    }

    #[test]
    fn chi_square_detects_a_wrong_law() {
        let law: BTreeMap<Vec<(u32, u32)>, f64> = [(vec![(0, 1)], 0.5), (vec![(0, 2)], 0.5)].into_iter().collect();
        let obs: BTreeMap<Vec<(u32, u32)>, u64> = [(vec![(0, 1)], 700), (vec![(0, 2)], 300)].into_iter().collect();
        let mut g = BTreeMap::new();
        g.insert(0, (obs, law.clone()));
        let (st, dof) = pooled_chi_square(&g);
        assert!(chi_p(st, dof) < 1e-6);
        let fair: BTreeMap<Vec<(u32, u32)>, u64> = [(vec![(0, 1)], 505), (vec![(0, 2)], 495)].into_iter().collect();
        g.insert(0, (fair, law));
        let (st, dof) = pooled_chi_square(&g);
        assert!(chi_p(st, dof) > 0.5);
    }
}
