use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lazy::{sample_tkt_keyed, PhiTree, RootOutcome, TktOptions, TktStatus};
use crate::error::Result;
use crate::process::ForbiddenDegree;
use crate::rng::RngStream;
use rand::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivalEstimate {
    /// Surviving fraction among the non-truncated replicas.
    pub a_hat: f64,
    pub replicas: u64,
    pub gen_cap: u32,
    pub size_cap: usize,
    /// 95% normal-approximation half-width.
    pub ci_halfwidth: f64,
    pub se: f64,
    pub truncated: u64,
}

/// Monte Carlo estimate of `P(|T^k_t| = inf)`. A replica counts as surviving
/// once its root component reaches generation `gen_cap` or `size_cap` nodes.
/// Replica `r` uses `stream.substream(r)`.
pub fn estimate_survival(
    t: f64,
    k: ForbiddenDegree,
    replicas: u64,
    gen_cap: u32,
    size_cap: usize,
    stream: RngStream,
) -> Result<SurvivalEstimate> {
    let opts = TktOptions {
        gen_cap: Some(gen_cap),
        component_cap: Some(size_cap),
        keep_pruned: false,
        ..TktOptions::default()
    };
    let statuses: Vec<TktStatus> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let key = stream.substream(r).rng().random();
            sample_tkt_keyed(t, k, key, &opts).map(|s| s.status)
        })
        .collect::<Result<_>>()?;
    let truncated = statuses.iter().filter(|&&s| s == TktStatus::Truncated).count() as u64;
    let survived = statuses.iter().filter(|&&s| s == TktStatus::Capped).count() as f64;
    let used = (replicas - truncated) as f64;
    let a_hat = if used > 0.0 { survived / used } else { 0.0 };
    let se = if used > 0.0 { (a_hat * (1.0 - a_hat) / used).sqrt() } else { 0.0 };
    Ok(SurvivalEstimate {
        a_hat,
        replicas,
        gen_cap,
        size_cap,
        ci_halfwidth: 1.96 * se,
        se,
        truncated,
    })
}

/// Labels of the root's children that stay attached in `T^k_t`, or `None`
/// if certification was truncated.
pub fn root_offspring(t: f64, k: ForbiddenDegree, root_key: u64, opts: &TktOptions) -> Result<Option<Vec<f64>>> {
    let mut pt = PhiTree::new(t, k, root_key, None, opts.depth_cap, opts.size_cap)?;
    Ok(match pt.resolve(0) {
        Ok(RootOutcome::Survives(kids)) => Some(kids.iter().map(|&c| pt.tree.node(c).label).collect()),
        Ok(RootOutcome::Removed(_)) => unreachable!("the root has no parent edge"),
        Err(_) => None,
    })
}
