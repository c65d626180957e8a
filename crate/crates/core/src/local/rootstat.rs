//! A coarse statistic of the neighbourhood of a root, computable both in a
//! finite graph and in `T^k_t`: the root degree together with the bin of one
//! uniformly chosen incident label.

use rand::Rng;
use rayon::prelude::*;

use super::lazy::TktOptions;
use super::survival::root_offspring;
use crate::error::{Error, Result};
use crate::graph::LabeledMultigraph;
use crate::process::ForbiddenDegree;
use crate::rng::RngStream;

/// Label bins per positive degree.
pub const LABEL_BINS: usize = 10;

fn finite_k(k: ForbiddenDegree) -> Result<usize> {
    k.validate()?;
    k.value().map(|k| k as usize).ok_or_else(|| Error::invalid("the root statistic needs a finite k"))
}

/// Number of categories: one for an isolated root, `LABEL_BINS` for each
/// degree in `1..k`.
pub fn root_categories(k: ForbiddenDegree) -> Result<usize> {
    Ok(1 + (finite_k(k)? - 1) * LABEL_BINS)
}

pub fn root_category(degree: usize, label: Option<f64>, t: f64, k: ForbiddenDegree) -> Result<usize> {
    let kk = finite_k(k)?;
    if degree >= kk {
        return Err(Error::invalid(format!("degree {degree} is not below k = {kk}")));
    }
    if degree == 0 {
        return Ok(0);
    }
    let l = label.ok_or_else(|| Error::invalid("a positive degree needs a label"))?;
    let bin = ((l / t * LABEL_BINS as f64) as usize).min(LABEL_BINS - 1);
    Ok(1 + (degree - 1) * LABEL_BINS + bin)
}

/// Category counts over every vertex of `g`, a graph of the process at time `t`.
pub fn graph_root_counts<R: Rng + ?Sized>(
    g: &LabeledMultigraph,
    t: f64,
    k: ForbiddenDegree,
    rng: &mut R,
) -> Result<Vec<u64>> {
    let mut counts = vec![0u64; root_categories(k)?];
    for v in 0..g.n() as u32 {
        let inc = g.incident(v);
        let label = if inc.is_empty() { None } else { g.edges()[inc[rng.random_range(0..inc.len())] as usize].label };
        counts[root_category(inc.len(), label, t, k)?] += 1;
    }
    Ok(counts)
}

/// Category counts of the root of `T^k_t` over `samples` draws, and the
/// number of draws dropped because certification was truncated.
pub fn tree_root_counts(t: f64, k: ForbiddenDegree, samples: u64, stream: RngStream) -> Result<(Vec<u64>, u64)> {
    let opts = TktOptions { keep_pruned: false, ..TktOptions::default() };
    let cats: Vec<Option<usize>> = (0..samples)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream.substream(r).rng();
            let key = rng.random();
            match root_offspring(t, k, key, &opts)? {
                None => Ok(None),
                Some(kids) => {
                    let label = (!kids.is_empty()).then(|| kids[rng.random_range(0..kids.len())]);
                    root_category(kids.len(), label, t, k).map(Some)
                }
            }
        })
        .collect::<Result<_>>()?;
    let mut counts = vec![0u64; root_categories(k)?];
    let mut truncated = 0;
    for c in cats {
        match c {
            Some(c) => counts[c] += 1,
            None => truncated += 1,
        }
    }
    Ok((counts, truncated))
}

/// Total-variation distance between the empirical laws of two count vectors.
pub fn total_variation(a: &[u64], b: &[u64]) -> f64 {
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    if na == 0.0 || nb == 0.0 {
        return if na == nb { 0.0 } else { 1.0 };
    }
    let n = a.len().max(b.len());
    let get = |v: &[u64], i: usize| v.get(i).copied().unwrap_or(0) as f64;
    0.5 * (0..n).map(|i| (get(a, i) / na - get(b, i) / nb).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn categories() {
        let k5 = ForbiddenDegree::Finite(5);
        assert_eq!(root_categories(k5).unwrap(), 41);
        assert_eq!(root_category(0, None, 2.0, k5).unwrap(), 0);
        assert_eq!(root_category(1, Some(0.0), 2.0, k5).unwrap(), 1);
        assert_eq!(root_category(4, Some(1.999), 2.0, k5).unwrap(), 40);
        assert!(root_category(5, Some(1.0), 2.0, k5).is_err());
        assert!(root_categories(ForbiddenDegree::Unbounded).is_err());
    }

    #[test]
    fn tv_examples() {
        assert_eq!(total_variation(&[1, 1], &[2, 2]), 0.0);
        assert_eq!(total_variation(&[1, 0], &[0, 3]), 1.0);
        assert!((total_variation(&[3, 1], &[1, 1]) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn k2_root_is_isolated_or_single() {
        let (c, tr) = tree_root_counts(1.0, ForbiddenDegree::Finite(2), 500, RngStream::new(4, 0)).unwrap();
        assert_eq!(tr, 0);
        assert_eq!(c.len(), 11);
        assert_eq!(c.iter().sum::<u64>(), 500);
    }
}
