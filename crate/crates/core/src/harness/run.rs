use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{Experiment, ExperimentConfig};
use super::record::RunRecord;
use crate::analytic::{compute_degree_profile, supercritical_interval, threshold_lhs, threshold_max};
use crate::branching::{estimate_kernel, solve_extinction, KernelOptions, OffspringKernel, SolveOptions, SolveStatus};
use crate::error::{Error, Result};
use crate::graph::sample_event_stream;
use crate::local::{estimate_survival, graph_root_counts, root_categories, total_variation, tree_root_counts, LABEL_BINS};
use crate::process::{components, coupled_sandwich, run_stream, simulate, z_trajectory, ForbiddenDegree};
use crate::rng::RngStream;

// stream ids under the run seed
const S_GRAPH: u64 = 0;
const S_Z: u64 = 1;
const S_TREE: u64 = 2;
const S_SURVIVAL: u64 = 3;
const S_ROOTS: u64 = 4;

/// Maps `f` over replica indices in parallel, tagging errors with the replica.
pub(crate) fn per_replica<T: Send>(replicas: u64, f: impl Fn(u64) -> Result<T> + Sync) -> Result<Vec<T>> {
    (0..replicas)
        .into_par_iter()
        .map(|r| f(r).map_err(|e| Error::Replica { replica: r, source: Box::new(e) }))
        .collect()
}

/// Runs `f` on a pool of `workers` threads, or on the global pool.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::invalid(format!("worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// `C_max / n` of `G^k` at each of `times`, one row per replica.
pub(crate) fn cmax_paths(n: usize, k: ForbiddenDegree, times: &[f64], replicas: u64, seed: u64) -> Result<Vec<Vec<f64>>> {
    let t_max = times.last().copied().unwrap_or(0.0);
    let base = RngStream::new(seed, S_GRAPH);
    per_replica(replicas, |r| {
        let obs = simulate(n, k, t_max, &mut base.substream(r).rng(), times)?;
        Ok(obs.iter().map(|(_, s)| s.c_max() as f64 / n as f64).collect())
    })
}

/// Per replica the largest `Z_l / n` for `l <= steps`, and the mean trajectory.
pub(crate) fn z_paths(n: usize, steps: usize, replicas: u64, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    let base = RngStream::new(seed, S_Z);
    let trajs = per_replica(replicas, |r| z_trajectory(n, steps, &mut base.substream(r).rng()))?;
    let mut mean = vec![0.0; steps + 1];
    for tr in &trajs {
        for (m, z) in mean.iter_mut().zip(tr) {
            *m += z / replicas as f64;
        }
    }
    Ok((trajs.iter().map(|tr| tr.iter().copied().fold(0.0, f64::max)).collect(), mean))
}

pub(crate) struct GiantRow {
    pub c_max: f64,
    pub lower_c_max: f64,
    pub violations: usize,
}

/// `C_max / n` of `G^k` and of the lower-bound graph from one stream per replica.
pub(crate) fn giant_rows(n: usize, k: ForbiddenDegree, t: f64, replicas: u64, seed: u64) -> Result<Vec<GiantRow>> {
    let base = RngStream::new(seed, S_GRAPH);
    per_replica(replicas, |r| {
        let s = coupled_sandwich(n, k, t, &mut base.substream(r).rng())?;
        Ok(GiantRow {
            c_max: components(&s.g_k).c_max() as f64 / n as f64,
            lower_c_max: components(&s.g_lower).c_max() as f64 / n as f64,
            violations: s.inclusion_violations(),
        })
    })
}

pub(crate) struct RootComparison {
    pub graph: Vec<u64>,
    pub tree: Vec<u64>,
    pub tree_truncated: u64,
}

/// Root statistic over every vertex of `graphs` copies of `G^k_{n,t}` against
/// `tree_samples` roots of `T^k_t`.
pub(crate) fn root_comparison(
    n: usize,
    k: ForbiddenDegree,
    t: f64,
    graphs: u64,
    tree_samples: u64,
    seed: u64,
) -> Result<RootComparison> {
    let base = RngStream::new(seed, S_GRAPH);
    let roots = RngStream::new(seed, S_ROOTS);
    let per = per_replica(graphs, |r| {
        let stream = sample_event_stream(n, t, &mut base.substream(r).rng())?;
        let g = run_stream(&stream, k, t)?.graph;
        graph_root_counts(&g, t, k, &mut roots.substream(r).rng())
    })?;
    let mut graph = vec![0u64; root_categories(k)?];
    for c in per {
        for (a, b) in graph.iter_mut().zip(c) {
            *a += b;
        }
    }
    let (tree, tree_truncated) = tree_root_counts(t, k, tree_samples, RngStream::new(seed, S_TREE))?;
    Ok(RootComparison { graph, tree, tree_truncated })
}

pub(crate) fn kernel_options(c: &ExperimentConfig) -> KernelOptions {
    KernelOptions {
        bins: c.caps.bins,
        samples_per_cell: c.caps.samples_per_cell,
        m_samples: c.caps.m_samples,
        seed: c.seed,
        keep_probability: c.caps.keep_probability,
        depth_cap: c.caps.d_max,
        ..KernelOptions::default()
    }
}

/// Loads the configured kernel dump if it matches, otherwise builds the
/// kernel (and dumps it when a path is configured).
fn kernel_for(c: &ExperimentConfig, t: f64) -> Result<OffspringKernel> {
    let k = c.k.value().expect("validated");
    let opts = kernel_options(c);
    if let Some(path) = &c.kernel {
        if path.exists() {
            return OffspringKernel::load_json(path, Some((t, k, &opts)));
        }
    }
    let kern = estimate_kernel(t, c.k, &opts)?;
    if let Some(path) = &c.kernel {
        kern.save_json(path)?;
    }
    Ok(kern)
}

fn single_t(c: &ExperimentConfig) -> Result<f64> {
    match c.times().as_slice() {
        [t] => Ok(*t),
        _ => Err(Error::invalid(format!("{} takes a single t", c.experiment.name()))),
    }
}

fn cols(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn tcol(prefix: &str, t: f64) -> String {
    format!("{prefix}@t={t}")
}

/// Runs one experiment and times it. Writing the output is left to the caller.
pub fn run(c: &ExperimentConfig) -> Result<RunRecord> {
    c.validate()?;
    let start = Instant::now();
    let mut rec = with_workers(c.workers, || dispatch(c))??;
    rec.wall_time_s = start.elapsed().as_secs_f64();
    Ok(rec)
}

/// [`run`], then the atomic write to `c.out` if set.
pub fn run_and_write(c: &ExperimentConfig) -> Result<RunRecord> {
    let rec = run(c)?;
    if let Some(path) = &c.out {
        rec.write(path, c.format)?;
    }
    Ok(rec)
}

fn dispatch(c: &ExperimentConfig) -> Result<RunRecord> {
    let times = c.times();
    let mut scalars = BTreeMap::new();
    let (columns, rows, summarised): (Vec<String>, Vec<Vec<f64>>, Vec<String>) = match c.experiment {
        Experiment::NoGiantK3 => {
            let cm = cmax_paths(c.n, c.k, &times, c.replicas, c.seed)?;
            let steps = c.caps.steps_per_n * c.n;
            let (zmax, zmean) = z_paths(c.n, steps, c.replicas, c.seed)?;
            let (arg, peak) =
                zmean.iter().enumerate().fold((0, f64::NEG_INFINITY), |b, (i, &z)| if z > b.1 { (i, z) } else { b });
            if c.replicas > 0 {
                scalars.insert("max_mean_z_over_n".into(), peak);
                scalars.insert("argmax_step".into(), arg as f64);
            }
            scalars.insert("steps".into(), steps as f64);
            let mut columns = vec!["replica".to_string()];
            columns.extend(times.iter().map(|&t| tcol("c_max_over_n", t)));
            columns.push("z_max_over_n".into());
            let rows = cm
                .into_iter()
                .zip(zmax)
                .enumerate()
                .map(|(r, (row, z))| {
                    let mut v = vec![r as f64];
                    v.extend(row);
                    v.push(z);
                    v
                })
                .collect();
            let summarised = columns[1..].to_vec();
            (columns, rows, summarised)
        }
        Experiment::ThresholdScan => {
            let k = c.k.value().expect("validated");
            let rows = times
                .iter()
                .map(|&t| {
                    let p = compute_degree_profile(t, k)?;
                    let lhs = threshold_lhs(t, k)?;
                    Ok(vec![t, p.pi, lhs, p.q_t, if lhs > 1.0 { 1.0 } else { 0.0 }])
                })
                .collect::<Result<Vec<_>>>()?;
            let t_max = times.last().copied().unwrap_or(0.0).max(10.0);
            let (t_star, sup) = threshold_max(k, t_max)?;
            scalars.insert("sup_lhs".into(), sup);
            scalars.insert("t_star".into(), t_star);
            if let Some((lo, hi)) = supercritical_interval(k, t_max)? {
                scalars.insert("interval_lo".into(), lo);
                scalars.insert("interval_hi".into(), hi);
            }
            (cols(&["t", "pi", "threshold_lhs", "q_t", "supercritical"]), rows, Vec::new())
        }
        Experiment::GiantK5 => {
            let t = single_t(c)?;
            let rows = giant_rows(c.n, c.k, t, c.replicas, c.seed)?
                .into_iter()
                .enumerate()
                .map(|(r, g)| vec![r as f64, g.c_max, g.lower_c_max, g.violations as f64])
                .collect();
            let columns = cols(&["replica", "c_max_over_n", "lower_c_max_over_n", "sandwich_violations"]);
            let summarised = columns[1..].to_vec();
            (columns, rows, summarised)
        }
        Experiment::LocalLimitTv => {
            let t = single_t(c)?;
            let cmp = root_comparison(c.n, c.k, t, c.replicas, c.caps.tree_samples, c.seed)?;
            scalars.insert("tv".into(), total_variation(&cmp.graph, &cmp.tree));
            scalars.insert("tree_truncated".into(), cmp.tree_truncated as f64);
            let (gn, tn) = (cmp.graph.iter().sum::<u64>() as f64, cmp.tree.iter().sum::<u64>() as f64);
            let rows = (0..cmp.graph.len())
                .map(|i| {
                    let (deg, bin) = if i == 0 { (0, 0) } else { (1 + (i - 1) / LABEL_BINS, (i - 1) % LABEL_BINS) };
                    let freq = |x: u64, n: f64| if n > 0.0 { x as f64 / n } else { 0.0 };
                    vec![i as f64, deg as f64, bin as f64, freq(cmp.graph[i], gn), freq(cmp.tree[i], tn)]
                })
                .collect();
            (cols(&["category", "degree", "label_bin", "graph_freq", "tree_freq"]), rows, Vec::new())
        }
        Experiment::Equivalence | Experiment::Simulate => {
            let cm = cmax_paths(c.n, c.k, &times, c.replicas, c.seed)?;
            let mut columns = vec!["replica".to_string()];
            if c.experiment == Experiment::Equivalence {
                let t = single_t(c)?;
                columns.extend(cols(&["c_max", "c_max_over_n"]));
                let s = estimate_survival(
                    t,
                    c.k,
                    c.caps.survival_replicas,
                    c.caps.gen_cap,
                    c.caps.comp_cap,
                    RngStream::new(c.seed, S_SURVIVAL),
                )?;
                scalars.insert("a_hat".into(), s.a_hat);
                scalars.insert("a_hat_se".into(), s.se);
                scalars.insert("a_hat_truncated".into(), s.truncated as f64);
                let rows = cm
                    .into_iter()
                    .enumerate()
                    .map(|(r, row)| vec![r as f64, (row[0] * c.n as f64).round(), row[0]])
                    .collect();
                (columns, rows, vec!["c_max_over_n".to_string()])
            } else {
                columns.extend(times.iter().map(|&t| tcol("c_max_over_n", t)));
                let rows = cm
                    .into_iter()
                    .enumerate()
                    .map(|(r, row)| {
                        let mut v = vec![r as f64];
                        v.extend(row);
                        v
                    })
                    .collect();
                let summarised = columns[1..].to_vec();
                (columns, rows, summarised)
            }
        }
        Experiment::Survival => {
            let rows = times
                .iter()
                .map(|&t| {
                    let s = estimate_survival(
                        t,
                        c.k,
                        c.replicas,
                        c.caps.gen_cap,
                        c.caps.comp_cap,
                        RngStream::new(c.seed, S_SURVIVAL),
                    )?;
                    Ok(vec![t, s.a_hat, s.se, s.truncated as f64])
                })
                .collect::<Result<Vec<_>>>()?;
            (cols(&["t", "a_hat", "se", "truncated"]), rows, Vec::new())
        }
        Experiment::KernelBuild | Experiment::Extinction => {
            let t = single_t(c)?;
            let kern = kernel_for(c, t)?;
            let h = kern.h();
            let mids: Vec<f64> = (0..kern.bins).map(|b| (b as f64 + 0.5) * h).collect();
            scalars.insert("truncated".into(), kern.truncated as f64);
            if c.experiment == Experiment::KernelBuild {
                let phi1 = kern.phi_apply_raw(&vec![1.0; kern.bins]);
                scalars.insert("rho_hat".into(), crate::branching::estimate_spectral_radius(&kern)?);
                scalars.insert("phi_one_max_dev".into(), phi1.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max));
                let rows = (0..kern.bins)
                    .map(|b| vec![b as f64, mids[b], kern.m_hat[b], kern.m_se[b], kern.g(0, b, 0), phi1[b]])
                    .collect();
                (cols(&["bin", "y", "m_hat", "m_se", "g0", "phi_one"]), rows, Vec::new())
            } else {
                let opts = SolveOptions { root_draws: c.caps.root_draws, seed: c.seed, ..SolveOptions::default() };
                let s = solve_extinction(&kern, &opts)?;
                scalars.insert("rho_hat".into(), s.rho_hat);
                scalars.insert("q_twostage".into(), s.q_twostage);
                scalars.insert("q_twostage_se".into(), s.q_twostage_se);
                scalars.insert("survival".into(), s.survival());
                scalars.insert("converged".into(), if s.status == SolveStatus::Converged { 1.0 } else { 0.0 });
                scalars.insert("critical_window".into(), if s.critical_window { 1.0 } else { 0.0 });
                scalars.insert("monotone".into(), if s.monotone { 1.0 } else { 0.0 });
                scalars.insert("residual".into(), s.residual);
                scalars.insert("iterations".into(), s.iterations as f64);
                let rows = (0..kern.bins).map(|b| vec![b as f64, mids[b], s.q[b], s.q_above[b]]).collect();
                (cols(&["bin", "y", "q", "q_above"]), rows, Vec::new())
            }
        }
    };
    let names: Vec<&str> = summarised.iter().map(|s| s.as_str()).collect();
    Ok(RunRecord::new(c.hash(), c.experiment, c.seed, columns, rows, &names, scalars))
}
