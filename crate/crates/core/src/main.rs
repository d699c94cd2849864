use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use polyrep_core::labcli::{self, ExperimentConfig, Report};
use polyrep_core::{Error, Result};

/// Short-interval averages of weighted polynomial representation counts.
#[derive(Parser)]
#[command(name = "polyrep", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sieve a von Mangoldt table and write it as a cache file.
    Sieve {
        #[arg(long)]
        limit: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact interval sums against the main term over the N grid.
    Avg(Common),
    /// Three-way circle decomposition at a single N.
    Decomp {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: u64,
    },
    /// Major-arc L² error against N^{2/k-1}.
    L2(Common),
    /// F(τ) against its bound shape.
    Tolev(Common),
    /// Kernel integral against e^{-n/N} n^{μ-1}/Γ(μ).
    Kernel(Common),
    /// Render SVG charts from a report CSV.
    Plot {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `output.out_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `output.threads`; POLYREP_THREADS overrides both.
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides `output.sieve_cache`.
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Overrides `experiment.n_grid`, comma separated.
    #[arg(long, value_delimiter = ',')]
    n_grid: Option<Vec<u64>>,
    /// Also write a JSON copy of the report.
    #[arg(long)]
    json: bool,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        if let Some(o) = &self.out {
            cfg.output.out_dir = o.clone();
        }
        if let Some(t) = self.threads {
            cfg.output.threads = t;
        }
        if let Some(c) = &self.cache {
            cfg.output.sieve_cache = Some(c.clone());
        }
        if let Some(g) = &self.n_grid {
            cfg.experiment.n_grid = g.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run_experiment(
    common: &Common,
    f: impl FnOnce(&ExperimentConfig) -> Result<Report> + Send,
) -> Result<Report> {
    let cfg = common.load()?;
    let threads = labcli::thread_count(cfg.output.threads)?;
    let report = labcli::with_pool(threads, || f(&cfg))??;
    let path = report.save(&cfg.output.out_dir, common.json)?;
    println!("wrote {}", path.display());
    for (k, v) in &report.summary {
        println!("{k}: {v}");
    }
    Ok(report)
}

fn check_decomposition(report: &Report) -> Result<()> {
    let get = |c: &str| report.column(c).map(|v| v[0]).unwrap_or(f64::NAN);
    let tol = get("quad_tol").max(1e-6 * get("full_circle").abs());
    let residual = get("residual_decomp");
    if residual.is_nan() || residual > tol {
        return Err(Error::Tolerance {
            what: "decomposition residual".into(),
            estimate: residual,
            tol,
        });
    }
    Ok(())
}

fn plot(report: &Path, out: &Path) -> Result<()> {
    let r = Report::read_csv(report)?;
    for p in labcli::emit_plots(&r, out)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Sieve { limit, out } => {
            let t = labcli::sieve_to_file(limit, &out)?;
            println!("wrote {} (limit {}, psi = {:.6})", out.display(), t.limit(), t.chebyshev_psi(t.limit())?);
        }
        Cmd::Avg(c) => {
            run_experiment(&c, labcli::run_average)?;
        }
        Cmd::Decomp { common, n } => {
            let r = run_experiment(&common, |cfg| labcli::run_decomposition(cfg, n))?;
            check_decomposition(&r)?;
        }
        Cmd::L2(c) => {
            run_experiment(&c, labcli::run_l2_scaling)?;
        }
        Cmd::Tolev(c) => {
            run_experiment(&c, labcli::run_tolev_scaling)?;
        }
        Cmd::Kernel(c) => {
            run_experiment(&c, labcli::run_kernel_check)?;
        }
        Cmd::Plot { report, out } => plot(&report, &out)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
