use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use forbidden_degree::harness::{
    parse_grid, run_and_write, verify, with_workers, write_atomic, Experiment, ExperimentConfig, Format, Suite,
    VerifyOptions,
};
use forbidden_degree::{Error, ForbiddenDegree};

#[derive(Parser)]
#[command(name = "fdgraph", version, about = "Random multigraph process with a forbidden degree")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Largest component of G^k_{n,t} over replicas and times.
    Simulate(Common),
    /// Threshold analytics of the lower-bound graph over a t grid.
    Threshold(Common),
    /// Root statistic of G^k_{n,t} against the local limit.
    LocalLimit(Common),
    /// Survival probability of T^k_t.
    Survival(Common),
    /// Build (and optionally dump) the discretised offspring kernel.
    Kernel(Common),
    /// Extinction fixed point and spectral radius from the kernel.
    Extinction(Common),
    /// Largest component against the survival probability.
    Equivalence(Common),
    /// Any experiment from a preset or a config file.
    Run {
        /// Experiment preset, e.g. no-giant-k3 or giant-k5.
        #[arg(long)]
        preset: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Print a preset config as TOML.
    Config {
        preset: String,
        #[arg(long, default_value = "toml")]
        syntax: String,
    },
    /// Run the acceptance battery.
    Verify {
        #[arg(long, default_value = "fast", value_parser = ["fast", "full"])]
        suite: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Comma-separated criterion ids.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
        /// Perturb pi_k(t) by this much (mutation check).
        #[arg(long, default_value_t = 0.0)]
        tamper_pi: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
        format: String,
    },
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML or JSON config; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// Forbidden degree, or `inf`.
    #[arg(long)]
    k: Option<String>,
    #[arg(long, conflicts_with = "t_grid")]
    t: Option<f64>,
    /// `a:b:steps`.
    #[arg(long)]
    t_grid: Option<String>,
    #[arg(long)]
    replicas: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
    /// Kernel dump to reuse or write.
    #[arg(long)]
    kernel: Option<PathBuf>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    samples_per_cell: Option<usize>,
    #[arg(long)]
    gen_cap: Option<u32>,
    #[arg(long)]
    comp_cap: Option<usize>,
    #[arg(long)]
    d_max: Option<u32>,
}

impl Common {
    fn build(&self, experiment: Option<Experiment>) -> Result<ExperimentConfig, Error> {
        let mut c = match (&self.config, experiment) {
            (Some(path), e) => {
                let c = ExperimentConfig::load(path)?;
                if let Some(e) = e {
                    if c.experiment != e {
                        return Err(Error::Config(format!(
                            "{} describes {}, not {}",
                            path.display(),
                            c.experiment.name(),
                            e.name()
                        )));
                    }
                }
                c
            }
            (None, Some(e)) => ExperimentConfig::preset(e),
            (None, None) => return Err(Error::Config("need --preset or --config".into())),
        };
        if let Some(n) = self.n {
            c.n = n;
        }
        if let Some(k) = &self.k {
            c.k = k.parse::<ForbiddenDegree>()?;
        }
        if let Some(t) = self.t {
            c.t = Some(t);
            c.t_grid = None;
        }
        if let Some(g) = &self.t_grid {
            c.t_grid = Some(parse_grid(g)?);
            c.t = None;
        }
        if let Some(r) = self.replicas {
            c.replicas = r;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if self.out.is_some() {
            c.out = self.out.clone();
        }
        if self.workers.is_some() {
            c.workers = self.workers;
        }
        if let Some(f) = &self.format {
            c.format = f.parse::<Format>()?;
        }
        if self.kernel.is_some() {
            c.kernel = self.kernel.clone();
        }
        if let Some(b) = self.bins {
            c.caps.bins = b;
        }
        if let Some(s) = self.samples_per_cell {
            c.caps.samples_per_cell = s;
        }
        if let Some(g) = self.gen_cap {
            c.caps.gen_cap = g;
        }
        if let Some(m) = self.comp_cap {
            c.caps.comp_cap = m;
        }
        if let Some(d) = self.d_max {
            c.caps.d_max = d;
        }
        c.validate()?;
        Ok(c)
    }
}

fn experiment(c: &ExperimentConfig) -> Result<(), Error> {
    let rec = run_and_write(c)?;
    if c.out.is_none() {
        print!("{}", rec.render(c.format)?);
    }
    eprintln!("{} wall={:.2}s", rec.headline(), rec.wall_time_s);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Simulate(a) => a.build(Some(Experiment::Simulate)).and_then(|c| experiment(&c)),
        Cmd::Threshold(a) => a.build(Some(Experiment::ThresholdScan)).and_then(|c| experiment(&c)),
        Cmd::LocalLimit(a) => a.build(Some(Experiment::LocalLimitTv)).and_then(|c| experiment(&c)),
        Cmd::Survival(a) => a.build(Some(Experiment::Survival)).and_then(|c| experiment(&c)),
        Cmd::Kernel(a) => a.build(Some(Experiment::KernelBuild)).and_then(|c| experiment(&c)),
        Cmd::Extinction(a) => a.build(Some(Experiment::Extinction)).and_then(|c| experiment(&c)),
        Cmd::Equivalence(a) => a.build(Some(Experiment::Equivalence)).and_then(|c| experiment(&c)),
        Cmd::Run { preset, common } => preset
            .map(|p| p.parse::<Experiment>())
            .transpose()
            .and_then(|e| common.build(e))
            .and_then(|c| experiment(&c)),
        Cmd::Config { preset, syntax } => preset.parse::<Experiment>().and_then(|e| {
            let c = ExperimentConfig::preset(e);
            let body = if syntax == "json" { c.to_json()? } else { c.to_toml()? };
            println!("{body}");
            Ok(())
        }),
        Cmd::Verify { suite, seed, only, tamper_pi, out, workers, format } => {
            let opts = VerifyOptions {
                suite: if suite == "full" { Suite::Full } else { Suite::Fast },
                seed,
                pi_offset: tamper_pi,
                only,
            };
            let report = match with_workers(workers, || verify(&opts)) {
                Ok(r) => r,
                Err(e) => return fail(e),
            };
            for r in &report.results {
                println!("{r}");
            }
            println!("seed={} suite={suite} verdict={}", report.seed, if report.passed() { "PASS" } else { "FAIL" });
            if let Some(path) = out {
                let body = if format == "json" { report.to_json() } else { report_csv(&report) };
                if let Err(e) = write_atomic(&path, body.as_bytes()) {
                    return fail(e);
                }
            }
            return if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}

fn report_csv(report: &forbidden_degree::harness::VerifyReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "name", "measured", "band", "pass", "seconds", "detail"]).unwrap();
    for r in &report.results {
        w.write_record([
            r.id.to_string(),
            r.name.clone(),
            r.measured.to_string(),
            r.band.clone(),
            r.pass.to_string(),
            format!("{:.3}", r.seconds),
            r.detail.clone(),
        ])
        .unwrap();
    }
    let body = String::from_utf8(w.into_inner().unwrap()).unwrap();
    format!("# schema=1\n# suite={:?}\n# seed={}\n# pi_offset={}\n{body}", report.suite, report.seed, report.pi_offset)
}

fn fail(e: Error) -> ExitCode {
    eprintln!("fdgraph: {e}");
    match e {
        Error::InvalidArgument(_) | Error::Config(_) => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}
