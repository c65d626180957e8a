use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::process::ForbiddenDegree;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    NoGiantK3,
    ThresholdScan,
    GiantK5,
    LocalLimitTv,
    Equivalence,
    KernelBuild,
    Extinction,
    Simulate,
    Survival,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::NoGiantK3,
        Experiment::ThresholdScan,
        Experiment::GiantK5,
        Experiment::LocalLimitTv,
        Experiment::Equivalence,
        Experiment::KernelBuild,
        Experiment::Extinction,
        Experiment::Simulate,
        Experiment::Survival,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::NoGiantK3 => "no-giant-k3",
            Experiment::ThresholdScan => "threshold-scan",
            Experiment::GiantK5 => "giant-k5",
            Experiment::LocalLimitTv => "local-limit-tv",
            Experiment::Equivalence => "equivalence",
            Experiment::KernelBuild => "kernel-build",
            Experiment::Extinction => "extinction",
            Experiment::Simulate => "simulate",
            Experiment::Survival => "survival",
        }
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Config(format!("unknown format {s:?}"))),
        }
    }
}

/// Truncation and discretisation parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Caps {
    /// Certification depth `D_max` below a node being resolved.
    pub d_max: u32,
    /// Sampled nodes allowed per certification.
    pub size_cap: usize,
    /// Survival proxy: generation cap `G`.
    pub gen_cap: u32,
    /// Survival proxy: component-size cap `M`.
    pub comp_cap: usize,
    /// Replicas for the survival estimate inside other experiments.
    pub survival_replicas: u64,
    pub bins: usize,
    pub samples_per_cell: usize,
    pub m_samples: usize,
    pub root_draws: u64,
    pub keep_probability: f64,
    /// Root samples drawn from `T^k_t` in the local-limit comparison.
    pub tree_samples: u64,
    /// Jump-chain length of the `Z` trajectory, as a multiple of `n`.
    pub steps_per_n: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            d_max: 60,
            size_cap: 1_000_000,
            gen_cap: 30,
            comp_cap: 1000,
            survival_replicas: 4000,
            bins: 32,
            samples_per_cell: 1000,
            m_samples: 20_000,
            root_draws: 20_000,
            keep_probability: 1.0,
            tree_samples: 100_000,
            steps_per_n: 5,
        }
    }
}

/// One experiment. Together with the crate version it determines the output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n: usize,
    pub k: ForbiddenDegree,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub replicas: u64,
    #[serde(default)]
    pub seed: u64,
    /// Kernel dump: loaded when present and matching, written otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub caps: Caps,
}

impl ExperimentConfig {
    /// The reference setting of each experiment.
    pub fn preset(experiment: Experiment) -> Self {
        let base = ExperimentConfig {
            experiment,
            n: 10_000,
            k: ForbiddenDegree::Finite(5),
            t: Some(2.0),
            t_grid: None,
            replicas: 50,
            seed: 0,
            kernel: None,
            out: None,
            workers: None,
            format: Format::Csv,
            caps: Caps::default(),
        };
        match experiment {
            Experiment::NoGiantK3 => ExperimentConfig {
                k: ForbiddenDegree::Finite(3),
                t: None,
                t_grid: Some(vec![0.5, 1.0, 2.0, 4.0, 8.0]),
                replicas: 100,
                ..base
            },
            Experiment::ThresholdScan => {
                ExperimentConfig { t: None, t_grid: Some(grid(0.0, 8.0, 81)), replicas: 0, ..base }
            }
            Experiment::GiantK5 | Experiment::Equivalence => ExperimentConfig { n: 100_000, ..base },
            Experiment::LocalLimitTv => ExperimentConfig { replicas: 10, ..base },
            Experiment::KernelBuild | Experiment::Extinction => ExperimentConfig { replicas: 0, ..base },
            Experiment::Simulate => ExperimentConfig { replicas: 10, ..base },
            Experiment::Survival => ExperimentConfig { replicas: 4000, ..base },
        }
    }

    /// The grid if one is set, otherwise the single time `t`.
    pub fn times(&self) -> Vec<f64> {
        self.t_grid.clone().or_else(|| self.t.map(|t| vec![t])).unwrap_or_default()
    }

    pub fn validate(&self) -> Result<()> {
        self.k.validate()?;
        let times = self.times();
        if times.is_empty() {
            return Err(Error::invalid("need t or t_grid"));
        }
        if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::invalid("times must be finite and >= 0"));
        }
        if times.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid("t_grid must be sorted"));
        }
        if self.workers == Some(0) {
            return Err(Error::invalid("workers must be >= 1"));
        }
        let uses_graph = matches!(
            self.experiment,
            Experiment::NoGiantK3
                | Experiment::GiantK5
                | Experiment::LocalLimitTv
                | Experiment::Equivalence
                | Experiment::Simulate
        );
        if uses_graph && self.n < 2 {
            return Err(Error::invalid(format!("need n >= 2, got {}", self.n)));
        }
        let finite_k = !matches!(self.experiment, Experiment::Simulate | Experiment::Survival);
        if finite_k && self.k.value().is_none() {
            return Err(Error::invalid(format!("{} needs a finite k", self.experiment.name())));
        }
        if self.experiment == Experiment::NoGiantK3 && self.k != ForbiddenDegree::Finite(3) {
            return Err(Error::invalid("no-giant-k3 tracks Z, which needs k = 3"));
        }
        if self.experiment == Experiment::ThresholdScan && self.k.value().is_some_and(|k| k < 3) {
            return Err(Error::invalid("threshold-scan needs k >= 3"));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a `.json` file as JSON and anything else as TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let body = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let parsed = if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&body)
        } else {
            Self::from_toml(&body)
        };
        parsed.map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// SHA-256 of the crate version and the canonical JSON of the config,
    /// leaving out settings that cannot change the results.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = None;
        c.workers = None;
        c.format = Format::Csv;
        let body = serde_json::to_string(&c).expect("config serialises");
        let mut h = Sha256::new();
        h.update(env!("CARGO_PKG_VERSION").as_bytes());
        h.update([0]);
        h.update(body.as_bytes());
        let mut out = String::with_capacity(64);
        for b in h.finalize().iter() {
            write!(out, "{b:02x}").unwrap();
        }
        out
    }
}

/// `steps` evenly spaced points from `a` to `b` inclusive.
pub fn grid(a: f64, b: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..steps).map(|i| a + (b - a) * i as f64 / (steps - 1) as f64).collect(),
    }
}

/// Parses `a:b:steps`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::invalid(format!("expected a:b:steps, got {s:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let steps: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if steps == 0 || !(a <= b) {
        return Err(bad());
    }
    Ok(grid(a, b, steps))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_round_trip_both_formats() {
        for e in Experiment::ALL {
            let mut c = ExperimentConfig::preset(e);
            c.out = Some("x/out.csv".into());
            c.caps.keep_probability = 0.9;
            c.validate().unwrap();
            assert_eq!(ExperimentConfig::from_toml(&c.to_toml().unwrap()).unwrap(), c);
            assert_eq!(ExperimentConfig::from_json(&c.to_json().unwrap()).unwrap(), c);
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
    }

    #[test]
    fn hash_ignores_output_settings() {
        let a = ExperimentConfig::preset(Experiment::GiantK5);
        let mut b = a.clone();
        b.out = Some("elsewhere.json".into());
        b.workers = Some(3);
        b.format = Format::Json;
        assert_eq!(a.hash(), b.hash());
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn minimal_toml() {
        let c = ExperimentConfig::from_toml("experiment = \"simulate\"\nn = 100\nk = \"inf\"\nt = 1.5\n").unwrap();
        assert_eq!(c.k, ForbiddenDegree::Unbounded);
        assert_eq!(c.caps, Caps::default());
        assert!(ExperimentConfig::from_toml("experiment = \"simulate\"\nn = 1\nk = 3\nbogus = 1\n").is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("2:2:1").unwrap(), vec![2.0]);
        assert!(parse_grid("1:0:3").is_err());
        assert!(parse_grid("0:1").is_err());
    }
}
