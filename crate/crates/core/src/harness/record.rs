use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{Experiment, Format};
use super::write_atomic;
use crate::error::{Error, Result};

pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnSummary {
    pub column: String,
    pub count: usize,
    pub mean: Option<f64>,
    pub se: Option<f64>,
    pub q05: Option<f64>,
    pub q50: Option<f64>,
    pub q95: Option<f64>,
}

impl ColumnSummary {
    pub fn of(column: &str, values: &[f64]) -> Self {
        let n = values.len();
        let mean = (n > 0).then(|| values.iter().sum::<f64>() / n as f64);
        let se = mean.filter(|_| n > 1).map(|m| {
            let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        });
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let q = |p: f64| (n > 0).then(|| quantile(&sorted, p));
        ColumnSummary { column: column.to_string(), count: n, mean, se, q05: q(0.05), q50: q(0.5), q95: q(0.95) }
    }
}

/// Linear interpolation between order statistics.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = p * (sorted.len() - 1) as f64;
    let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// The output of one run: a table of rows (one per replica for replicated
/// experiments), per-column summaries, and experiment-level scalars.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema: u32,
    pub config_hash: String,
    pub experiment: Experiment,
    pub seed: u64,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub summary: Vec<ColumnSummary>,
    pub scalars: BTreeMap<String, f64>,
    pub wall_time_s: f64,
}

impl RunRecord {
    pub fn new(
        config_hash: String,
        experiment: Experiment,
        seed: u64,
        columns: Vec<String>,
        rows: Vec<Vec<f64>>,
        summarised: &[&str],
        mut scalars: BTreeMap<String, f64>,
    ) -> Self {
        scalars.retain(|_, v| v.is_finite());
        let summary = summarise(&columns, &rows, summarised);
        RunRecord { schema: SCHEMA, config_hash, experiment, seed, columns, rows, summary, scalars, wall_time_s: 0.0 }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn summary_of(&self, name: &str) -> Option<&ColumnSummary> {
        self.summary.iter().find(|s| s.column == name)
    }

    /// Whether the stored summaries are exactly what the rows give.
    pub fn summary_is_consistent(&self) -> bool {
        let names: Vec<&str> = self.summary.iter().map(|s| s.column.as_str()).collect();
        summarise(&self.columns, &self.rows, &names) == self.summary
    }

    /// CSV with `#` comment lines: a header block, the table, then the summaries.
    /// Wall time is left out so that equal configs give equal files.
    pub fn to_csv(&self) -> Result<String> {
        let mut out = format!(
            "# schema={}\n# config_hash={}\n# experiment={}\n# seed={}\n",
            self.schema,
            self.config_hash,
            self.experiment.name(),
            self.seed
        );
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| Error::Config(format!("csv: {e}"));
        w.write_record(&self.columns).map_err(fail)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| fmt_f64(*v))).map_err(fail)?;
        }
        let body = w.into_inner().map_err(|e| Error::Config(format!("csv: {e}")))?;
        out.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
        for s in &self.summary {
            let o = |v: Option<f64>| v.map(fmt_f64).unwrap_or_else(|| "NA".into());
            out.push_str(&format!(
                "# summary column={} count={} mean={} se={} q05={} q50={} q95={}\n",
                s.column,
                s.count,
                o(s.mean),
                o(s.se),
                o(s.q05),
                o(s.q50),
                o(s.q95)
            ));
        }
        for (k, v) in &self.scalars {
            out.push_str(&format!("# scalar {k}={}\n", fmt_f64(*v)));
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// Writes atomically, refusing to replace an output of a different config.
    pub fn write(&self, path: &Path, format: Format) -> Result<()> {
        if let Some(old) = existing_hash(path)? {
            if old != self.config_hash {
                return Err(Error::Config(format!(
                    "{} holds output of config {old}, not {}; refusing to overwrite",
                    path.display(),
                    self.config_hash
                )));
            }
        }
        let mut body = self.render(format)?;
        if !body.ends_with('\n') {
            body.push('\n');
        }
        write_atomic(path, body.as_bytes())
    }

    /// One line for the terminal.
    pub fn headline(&self) -> String {
        let mut parts = vec![format!("{} rows={}", self.experiment.name(), self.rows.len())];
        for s in &self.summary {
            if let (Some(m), Some(se)) = (s.mean, s.se) {
                parts.push(format!("{}={:.6}±{:.6}", s.column, m, se));
            } else if let Some(m) = s.mean {
                parts.push(format!("{}={:.6}", s.column, m));
            }
        }
        for (k, v) in &self.scalars {
            parts.push(format!("{k}={v:.6}"));
        }
        parts.push(format!("hash={}", &self.config_hash[..12.min(self.config_hash.len())]));
        parts.join(" ")
    }
}

fn summarise(columns: &[String], rows: &[Vec<f64>], names: &[&str]) -> Vec<ColumnSummary> {
    names
        .iter()
        .filter_map(|name| {
            let j = columns.iter().position(|c| c == name)?;
            let vals: Vec<f64> = rows.iter().map(|r| r[j]).filter(|v| !v.is_nan()).collect();
            Some(ColumnSummary::of(name, &vals))
        })
        .collect()
}

/// Shortest representation that reads back to the same value.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NA".into()
    } else {
        format!("{v}")
    }
}

/// The config hash recorded in an existing output file, if there is one.
pub fn existing_hash(path: &Path) -> Result<Option<String>> {
    let body = match std::fs::read_to_string(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(Error::io(path, e)),
    };
    if let Some(h) = body.lines().find_map(|l| l.strip_prefix("# config_hash=")) {
        return Ok(Some(h.trim().to_string()));
    }
    if let Ok(v) = serde_json::from_str::<serde_json::Value>(&body) {
        if let Some(h) = v.get("config_hash").and_then(|h| h.as_str()) {
            return Ok(Some(h.to_string()));
        }
    }
    Err(Error::Config(format!("{} exists and is not a run record; refusing to overwrite", path.display())))
}
