use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::local::{edge_removal_time, vertex_dynamics};
use crate::process::ForbiddenDegree;
use crate::rng::{keyed_rng, mix2, PoissonSampler, StreamRng};

const TAG_EXTRA: u64 = 0x45_58_54;
const TAG_FORCED: u64 = 0x46_4F_52;
const TAG_CELL: u64 = 0x43_45_4C;
const TAG_MASS: u64 = 0x4D_41_53;
const TAG_ROOT: u64 = 0x52_4F_4F;
const TAG_LINK: u64 = 0x4C_49_4E;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelOptions {
    pub bins: usize,
    pub samples_per_cell: usize,
    /// Draws per y-bin for the survival factor `m`.
    pub m_samples: usize,
    /// Pre-computed `(label, removal time)` pairs for the Poisson extras.
    pub extras_pool: usize,
    /// Pre-computed pairs per x-bin for the forced child edges.
    pub forced_pool: usize,
    pub seed: u64,
    /// Bond percolation on the child edges; `1` for the plain process.
    pub keep_probability: f64,
    pub depth_cap: u32,
    pub size_cap: usize,
}

impl Default for KernelOptions {
    fn default() -> Self {
        KernelOptions {
            bins: 32,
            samples_per_cell: 1000,
            m_samples: 20_000,
            extras_pool: 1 << 18,
            forced_pool: 8192,
            seed: 0,
            keep_probability: 1.0,
            depth_cap: 60,
            size_cap: 200_000,
        }
    }
}

/// Discretised offspring law of the one-stage process `T^{k+,y}_t`.
///
/// Types live in `[0,t]`, cut into `bins` equal cells. For a child-label set
/// of size `i`, cells are indexed by the sorted multiset of bins its labels
/// fall in. `f_hat[i][y * ntuples(i) + idx]` estimates the cell average of
/// `P(E^{y,X}_t)`, the density of "parent edge kept and the kept child labels
/// are exactly `X`"; the offspring density given the parent edge is kept is
/// `f / m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffspringKernel {
    pub t: f64,
    pub k: u32,
    pub bins: usize,
    pub samples_per_cell: usize,
    pub seed: u64,
    pub keep_probability: f64,
    pub m_hat: Vec<f64>,
    pub m_se: Vec<f64>,
    pub f_hat: Vec<Vec<f64>>,
    pub f_se: Vec<Vec<f64>>,
    /// Child-edge removal times whose certification hit a cap (treated as `+inf`).
    pub truncated: u64,
    /// Cells whose estimate lies more than 3 SE under the floor `exp(-(i+1)t)`.
    pub floor_violations: usize,
}

/// Sorted multisets of size `i` over `0..bins`, in lexicographic order.
pub fn bin_tuples(bins: usize, i: usize) -> Vec<Vec<u16>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(i);
    fn rec(bins: usize, i: usize, start: usize, cur: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
        if cur.len() == i {
            out.push(cur.clone());
            return;
        }
        for b in start..bins {
            cur.push(b as u16);
            rec(bins, i, b, cur, out);
            cur.pop();
        }
    }
    rec(bins, i, 0, &mut cur, &mut out);
    out
}

/// `h^i / prod(mult!)`: the Lebesgue measure of the cell divided by the
/// number of orderings that collapse onto it, over `i!`.
pub fn tuple_weight(h: f64, tuple: &[u16]) -> f64 {
    let mut w = h.powi(tuple.len() as i32);
    let mut run = 1;
    for j in 1..=tuple.len() {
        if j < tuple.len() && tuple[j] == tuple[j - 1] {
            run += 1;
        } else {
            for r in 2..=run {
                w /= r as f64;
            }
            run = 1;
        }
    }
    w
}

fn max_offspring(k: u32) -> usize {
    k as usize - 2
}

fn removal(t: f64, kf: ForbiddenDegree, label: f64, key: u64, opts: &KernelOptions, truncated: &mut u64) -> Result<f64> {
    Ok(match edge_removal_time(t, kf, label, key, opts.depth_cap, opts.size_cap)? {
        Ok(r) => r,
        Err(_) => {
            *truncated += 1;
            f64::INFINITY
        }
    })
}

/// Labels and child-side removal times of a fresh Poisson set of child edges.
fn fresh_children(
    t: f64,
    kf: ForbiddenDegree,
    key: u64,
    off: &PoissonSampler,
    opts: &KernelOptions,
    truncated: &mut u64,
) -> Result<Vec<(f64, f64)>> {
    let mut rng = keyed_rng(key);
    let count = off.sample(&mut rng) as usize;
    let mut out = Vec::with_capacity(count);
    for j in 0..count {
        let l = rng.random::<f64>() * t;
        out.push((l, removal(t, kf, l, mix2(key, j as u64 + 1), opts, truncated)?));
    }
    Ok(out)
}

/// I.i.d. `(label, removal time)` pairs with the label uniform on `[lo, lo + width)`.
fn pool(
    t: f64,
    kf: ForbiddenDegree,
    tag: u64,
    lo: f64,
    width: f64,
    len: usize,
    opts: &KernelOptions,
) -> Result<(Vec<(f64, f64)>, u64)> {
    let parts: Vec<(Vec<(f64, f64)>, u64)> = (0..len.div_ceil(1024))
        .into_par_iter()
        .map(|chunk| {
            let mut trunc = 0;
            let v = (chunk * 1024..((chunk + 1) * 1024).min(len))
                .map(|j| {
                    let mut rng = keyed_rng(mix2(tag, j as u64));
                    let x = lo + rng.random::<f64>() * width;
                    Ok((x, removal(t, kf, x, rng.random(), opts, &mut trunc)?))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((v, trunc))
        })
        .collect::<Result<_>>()?;
    let trunc = parts.iter().map(|p| p.1).sum();
    Ok((parts.into_iter().flat_map(|p| p.0).collect(), trunc))
}

/// Appends `count` distinct entries of `pool` chosen uniformly.
fn pick(pool: &[(f64, f64)], count: usize, rng: &mut StreamRng, used: &mut Vec<usize>, out: &mut Vec<(f64, f64)>) {
    used.clear();
    while used.len() < count {
        let j = rng.random_range(0..pool.len());
        if !used.contains(&j) {
            used.push(j);
            out.push(pool[j]);
        }
    }
}

/// Weight of a sample for cell `X` given the kept child set `z` (indices
/// into the child list, forced children first).
fn cell_weight(z: Option<&[usize]>, forced: usize, p: f64) -> f64 {
    let Some(z) = z else { return 0.0 };
    let hits = z.iter().filter(|&&j| j < forced).count();
    if hits < forced {
        return 0.0;
    }
    if p == 1.0 {
        return if z.len() == forced { 1.0 } else { 0.0 };
    }
    p.powi(forced as i32) * (1.0 - p).powi((z.len() - forced) as i32)
}

fn mean_se(sum: f64, sumsq: f64, n: f64) -> (f64, f64) {
    let mean = sum / n;
    let var = if n > 1.0 { ((sumsq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    (mean, (var / n).sqrt())
}

/// Monte Carlo estimate of the offspring kernel.
///
/// A child edge enters the set dynamics at its parent only through its label
/// and its child-side removal time, and these pairs are i.i.d. across child
/// edges. They are therefore computed once into pools: one for the Poisson
/// extras (label uniform on `[0,t]`) and one per x-bin for the forced edges.
/// Each sample of a cell then draws the parent label uniformly in its y-bin,
/// one forced pair per label in the tuple, and a Poisson(t) number of extras,
/// all as distinct pool entries.
pub fn estimate_kernel(t: f64, k: ForbiddenDegree, opts: &KernelOptions) -> Result<OffspringKernel> {
    let kk = match k {
        ForbiddenDegree::Finite(k) if k >= 2 => k,
        _ => return Err(Error::invalid(format!("kernel needs a finite forbidden degree >= 2, got {k}"))),
    };
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!("kernel needs a finite t > 0, got {t}")));
    }
    if opts.bins < 4 || opts.bins > u16::MAX as usize {
        return Err(Error::invalid(format!("bins must be in 4..=65535, got {}", opts.bins)));
    }
    if opts.samples_per_cell < 100 {
        return Err(Error::invalid(format!("samples_per_cell must be >= 100, got {}", opts.samples_per_cell)));
    }
    let imax = max_offspring(kk);
    if opts.m_samples < 2 || opts.extras_pool < 64 * (t.ceil() as usize + 1) || opts.forced_pool < 2 * imax.max(1) {
        return Err(Error::invalid("m_samples, extras_pool or forced_pool too small".to_string()));
    }
    let p = opts.keep_probability;
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::invalid(format!("keep_probability must be in (0,1], got {p}")));
    }
    let (nb, ns) = (opts.bins, opts.samples_per_cell);
    let h = t / nb as f64;
    let off = PoissonSampler::new(t)?;

    let (extras, mut truncated) = pool(t, k, mix2(opts.seed, TAG_EXTRA), 0.0, t, opts.extras_pool, opts)?;
    let mut forced = Vec::with_capacity(nb);
    if imax > 0 {
        for c in 0..nb {
            let (v, tr) = pool(t, k, mix2(mix2(opts.seed, TAG_FORCED), c as u64), c as f64 * h, h, opts.forced_pool, opts)?;
            truncated += tr;
            forced.push(v);
        }
    }
    // cap the extras so a pick always terminates
    let max_extras = extras.len() / 2;

    let masses: Vec<(f64, f64)> = (0..nb)
        .into_par_iter()
        .map(|b| {
            let mut rng = keyed_rng(mix2(mix2(opts.seed, TAG_MASS), b as u64));
            let (mut used, mut kids) = (Vec::new(), Vec::new());
            let mut hits = 0.0;
            for _ in 0..opts.m_samples {
                let y = (b as f64 + rng.random::<f64>()) * h;
                kids.clear();
                let n_ex = (off.sample(&mut rng) as usize).min(max_extras);
                pick(&extras, n_ex, &mut rng, &mut used, &mut kids);
                if vertex_dynamics(kk as usize, Some(y), &kids).is_some() {
                    hits += 1.0;
                }
            }
            mean_se(hits, hits, opts.m_samples as f64)
        })
        .collect();

    let mut f_hat = Vec::with_capacity(imax + 1);
    let mut f_se = Vec::with_capacity(imax + 1);
    let mut floor_violations = 0;
    for i in 0..=imax {
        let tuples = bin_tuples(nb, i);
        let nt = tuples.len();
        let floor = (-((i + 1) as f64) * t).exp();
        let cells: Vec<(f64, f64)> = (0..nb * nt)
            .into_par_iter()
            .map(|cell| {
                let (b, idx) = (cell / nt, cell % nt);
                let tuple = &tuples[idx];
                let key = mix2(mix2(mix2(mix2(opts.seed, TAG_CELL), i as u64), b as u64), idx as u64);
                let mut rng = keyed_rng(key);
                let (mut used, mut kids) = (Vec::new(), Vec::new());
                let (mut sum, mut sumsq) = (0.0, 0.0);
                for _ in 0..ns {
                    let y = (b as f64 + rng.random::<f64>()) * h;
                    kids.clear();
                    let mut j = 0;
                    while j < i {
                        let c = tuple[j] as usize;
                        let run = tuple[j..].iter().take_while(|&&d| d as usize == c).count();
                        pick(&forced[c], run, &mut rng, &mut used, &mut kids);
                        j += run;
                    }
                    let n_ex = (off.sample(&mut rng) as usize).min(max_extras);
                    pick(&extras, n_ex, &mut rng, &mut used, &mut kids);
                    let z = vertex_dynamics(kk as usize, Some(y), &kids);
                    let w = cell_weight(z.as_deref(), i, p);
                    sum += w;
                    sumsq += w * w;
                }
                mean_se(sum, sumsq, ns as f64)
            })
            .collect();
        if p == 1.0 {
            floor_violations += cells.iter().filter(|(m, s)| *m < floor - 3.0 * s).count();
        }
        f_hat.push(cells.iter().map(|c| c.0).collect());
        f_se.push(cells.iter().map(|c| c.1).collect());
    }
    if imax == 0 {
        // with no room for children, "parent kept" and "parent kept, no child kept" coincide
        f_hat[0] = masses.iter().map(|m| m.0).collect();
        f_se[0] = masses.iter().map(|m| m.1).collect();
    }
    Ok(OffspringKernel {
        t,
        k: kk,
        bins: nb,
        samples_per_cell: ns,
        seed: opts.seed,
        keep_probability: p,
        m_hat: masses.iter().map(|m| m.0).collect(),
        m_se: masses.iter().map(|m| m.1).collect(),
        f_hat,
        f_se,
        truncated,
        floor_violations,
    })
}

impl OffspringKernel {
    pub fn h(&self) -> f64 {
        self.t / self.bins as f64
    }

    /// Largest offspring count of a non-root vertex.
    pub fn max_offspring(&self) -> usize {
        max_offspring(self.k)
    }

    pub fn ntuples(&self, i: usize) -> usize {
        self.f_hat[i].len() / self.bins
    }

    pub fn tuples(&self, i: usize) -> Vec<Vec<u16>> {
        bin_tuples(self.bins, i)
    }

    /// Position of a sorted multiset of bins in [`Self::tuples`].
    pub fn tuple_index(&self, tuple: &[u16]) -> Option<usize> {
        bin_tuples(self.bins, tuple.len()).iter().position(|t| t == tuple)
    }

    pub fn bin_of(&self, x: f64) -> usize {
        ((x / self.h()) as usize).min(self.bins - 1)
    }

    pub fn f(&self, i: usize, y: usize, idx: usize) -> f64 {
        self.f_hat[i][y * self.ntuples(i) + idx]
    }

    pub fn f_err(&self, i: usize, y: usize, idx: usize) -> f64 {
        self.f_se[i][y * self.ntuples(i) + idx]
    }

    /// Offspring density given that the parent edge is kept.
    pub fn g(&self, i: usize, y: usize, idx: usize) -> f64 {
        if self.m_hat[y] > 0.0 {
            self.f(i, y, idx) / self.m_hat[y]
        } else {
            0.0
        }
    }

    /// `m(y-bin) * f_i(y-bin; tuple)` and its standard error. This is the
    /// link form of the root density `h_{i+1}`.
    pub fn link_product(&self, i: usize, y: usize, idx: usize) -> (f64, f64) {
        let (m, f) = (self.m_hat[y], self.f(i, y, idx));
        let (sm, sf) = (self.m_se[y], self.f_err(i, y, idx));
        (m * f, (f * f * sm * sm + m * m * sf * sf).sqrt())
    }

    /// The generating operator on per-bin functions, without clamping.
    pub fn phi_apply_raw(&self, f: &[f64]) -> Vec<f64> {
        let h = self.h();
        (0..self.bins)
            .map(|y| {
                let mut acc = 0.0;
                for i in 0..=self.max_offspring() {
                    for (idx, tuple) in bin_tuples(self.bins, i).iter().enumerate() {
                        let prod: f64 = tuple.iter().map(|&c| f[c as usize]).product();
                        acc += tuple_weight(h, tuple) * self.g(i, y, idx) * prod;
                    }
                }
                acc
            })
            .collect()
    }

    /// The generating operator, clamped into `[0,1]`.
    pub fn phi_apply(&self, f: &[f64]) -> Vec<f64> {
        self.phi_apply_raw(f).into_iter().map(|v| v.clamp(0.0, 1.0)).collect()
    }

    /// Expected number of children in each bin: `M[y][z]`.
    pub fn mean_matrix(&self) -> Vec<Vec<f64>> {
        let h = self.h();
        let mut m = vec![vec![0.0; self.bins]; self.bins];
        for i in 1..=self.max_offspring() {
            let tuples = bin_tuples(self.bins, i);
            for (y, row) in m.iter_mut().enumerate() {
                for (idx, tuple) in tuples.iter().enumerate() {
                    let w = tuple_weight(h, tuple) * self.g(i, y, idx);
                    for &z in tuple {
                        row[z as usize] += w;
                    }
                }
            }
        }
        m
    }

    /// Kept child labels of a root with no parent edge (the first stage of
    /// `T^k_t`), one draw per replica.
    pub fn root_offspring_draws(&self, draws: u64, seed: u64) -> Result<Vec<Vec<f64>>> {
        let kf = ForbiddenDegree::Finite(self.k);
        let off = PoissonSampler::new(self.t)?;
        let opts = KernelOptions {
            bins: self.bins,
            samples_per_cell: self.samples_per_cell,
            seed,
            keep_probability: self.keep_probability,
            ..KernelOptions::default()
        };
        (0..draws)
            .into_par_iter()
            .map(|r| {
                let mut trunc = 0;
                let ex = fresh_children(self.t, kf, mix2(mix2(seed, TAG_ROOT), r), &off, &opts, &mut trunc)?;
                let z = vertex_dynamics(self.k as usize, None, &ex).expect("no parent edge to remove");
                Ok(z.into_iter().map(|j| ex[j].0).collect())
            })
            .collect()
    }

    /// Direct estimate of the root density `h_1(x)` per x-bin, from trees
    /// with no parent edge and one forced child edge; `(mean, se)`.
    pub fn estimate_h1_direct(&self, samples: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
        let kf = ForbiddenDegree::Finite(self.k);
        let off = PoissonSampler::new(self.t)?;
        let opts = KernelOptions { bins: self.bins, samples_per_cell: samples, seed, ..KernelOptions::default() };
        let h = self.h();
        (0..self.bins)
            .into_par_iter()
            .map(|c| {
                let mut trunc = 0;
                let (mut sum, mut sq) = (0.0, 0.0);
                for s in 0..samples {
                    let key = mix2(mix2(mix2(seed, TAG_LINK), c as u64), s as u64);
                    let mut rng = keyed_rng(key);
                    let x = (c as f64 + rng.random::<f64>()) * h;
                    let ck: u64 = rng.random();
                    let mut kids = vec![(x, removal(self.t, kf, x, ck, &opts, &mut trunc)?)];
                    kids.extend(fresh_children(self.t, kf, mix2(key, 1), &off, &opts, &mut trunc)?);
                    let z = vertex_dynamics(self.k as usize, None, &kids);
                    let w = cell_weight(z.as_deref(), 1, 1.0);
                    sum += w;
                    sq += w * w;
                }
                Ok(mean_se(sum, sq, samples as f64))
            })
            .collect()
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let body = serde_json::to_vec(self).map_err(|e| Error::NumericFailure(e.to_string()))?;
        crate::harness::write_atomic(path, &body)
    }

    /// Loads a dumped kernel; if `expect` is given, its key `(t, k, bins,
    /// samples, seed)` must match.
    pub fn load_json(path: &Path, expect: Option<(f64, u32, &KernelOptions)>) -> Result<Self> {
        let body = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let kern: OffspringKernel = serde_json::from_slice(&body)
            .map_err(|e| Error::Config(format!("{}: not a kernel dump: {e}", path.display())))?;
        if let Some((t, k, o)) = expect {
            let same = kern.t == t
                && kern.k == k
                && kern.bins == o.bins
                && kern.samples_per_cell == o.samples_per_cell
                && kern.seed == o.seed
                && kern.keep_probability == o.keep_probability;
            if !same {
                return Err(Error::Config(format!("{}: kernel was built with different parameters", path.display())));
            }
        }
        Ok(kern)
    }
}
