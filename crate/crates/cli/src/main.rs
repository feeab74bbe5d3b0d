use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use curvecauchy::curve::{trace_boundary, BoundaryCache, TraceOptions};
use curvecauchy::pipeline::{
    convergence_csv, integrate_at, run_convergence, run_recover, unix_now, write_outputs, RunOptions,
};
use curvecauchy::poly::PolyJson;
use curvecauchy::scenario::{reference_scenario, reference_scenarios, validate, Scenario, Validated};
use curvecauchy::tube::{EpsSchedule, GridSize};
use curvecauchy::{Hefer, Poly};

#[derive(Parser)]
#[command(
    name = "curvecauchy",
    version,
    about = "Tube-integral recovery of function values on plane curve domains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the Hefer decomposition of a polynomial given as JSON.
    Hefer { poly: PathBuf },
    /// Trace the boundary branches of a scenario's curve.
    TraceBoundary(Common),
    /// Validate a scenario and print S(w).
    Intersect(Common),
    /// Per-ε tube integrals without the recovery step.
    Integrate(Common),
    /// Full recovery; writes report.json, summary.csv and manifest.json.
    Recover(Common),
    /// ε / grid convergence study as CSV.
    Convergence(Common),
    /// Run the recovery and print only the constant audit.
    AuditConstant(Common),
    /// List the built-in reference scenarios, or write them to a directory.
    References {
        #[arg(long)]
        write: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario file, or the name of a built-in reference scenario.
    #[arg(long)]
    scenario: String,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated, strictly decreasing ε values.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    eps: Option<Vec<f64>>,
    /// Fixed grid `N_t x N_θ x N_φ`, e.g. 64x16x64.
    #[arg(long)]
    grid: Option<GridSize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    kappa: Option<f64>,
    /// Orientation sign of the tube parametrisation (+1 or -1).
    #[arg(long, allow_hyphen_values = true)]
    orientation: Option<f64>,
    /// Directory for cached boundary traces.
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Multiply f by ζ0^{-ℓ-1} so its homogeneity becomes -1, and undo it after.
    #[arg(long)]
    reduce_homogeneity: bool,
}

impl Common {
    fn scenario(&self) -> Result<Scenario> {
        let path = Path::new(&self.scenario);
        let mut s = if path.exists() {
            Scenario::load(path).with_context(|| format!("loading {}", path.display()))?
        } else if let Some(s) = reference_scenario(&self.scenario) {
            s
        } else {
            bail!("no scenario file or built-in reference named {:?}", self.scenario);
        };
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        if self.reduce_homogeneity {
            s.reduce_homogeneity = true;
        }
        Ok(s)
    }

    fn cache(&self) -> Option<BoundaryCache> {
        self.cache.as_ref().map(BoundaryCache::new)
    }

    fn run_options(&self) -> Result<RunOptions> {
        let eps = match &self.eps {
            None => None,
            Some(v) => Some(EpsSchedule::new(v.clone()).map_err(|e| anyhow::anyhow!(UsageError(e)))?),
        };
        if let Some(o) = self.orientation {
            if o != 1.0 && o != -1.0 {
                bail!(UsageError(format!("orientation must be 1 or -1, got {o}")));
            }
        }
        Ok(RunOptions {
            grid: self.grid,
            eps,
            kappa: self.kappa,
            orientation: self.orientation,
            cache: self.cache(),
            ..RunOptions::default()
        })
    }

    fn validated(&self) -> Result<Validated> {
        let s = self.scenario()?;
        let cache = self.cache();
        let (rep, v) = validate(&s, cache.as_ref());
        match v {
            Some(v) => Ok(v),
            None => {
                eprintln!("{}", serde_json::to_string_pretty(&rep)?);
                let names: Vec<String> = rep
                    .failures()
                    .iter()
                    .map(|c| format!("{}: {}", c.name, c.detail))
                    .collect();
                Err(anyhow::anyhow!(ValidationError(names.join("; "))))
            }
        }
    }
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug)]
struct ValidationError(String);

impl std::fmt::Display for ValidationError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "scenario rejected: {}", self.0)
    }
}

impl std::error::Error for ValidationError {}

fn emit(out: Option<&Path>, file: &str, text: &str) -> Result<()> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(file);
            std::fs::write(&path, text)?;
            eprintln!("wrote {}", path.display());
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Hefer { poly } => {
            let text = std::fs::read_to_string(&poly).with_context(|| format!("reading {}", poly.display()))?;
            let j: PolyJson = serde_json::from_str(&text)?;
            let p = Poly::try_from(&j)?;
            println!("{}", serde_json::to_string_pretty(&Hefer::decompose(&p))?);
        }
        Command::TraceBoundary(c) => {
            let v = c.validated()?;
            let opts = c.run_options()?;
            let eps = opts.eps.as_ref().unwrap_or(&v.scenario.eps_schedule).values()[0];
            let n_t = c
                .grid
                .map_or_else(|| v.scenario.grid_policy.grid_for(eps).n_t, |g| g.n_t);
            let branches = match c.cache() {
                Some(cache) => cache.load_or_trace(&v.curve, &v.domain, n_t, &TraceOptions::default())?,
                None => trace_boundary(&v.curve, &v.domain, n_t, &TraceOptions::default())?,
            };
            emit(
                c.out.as_deref(),
                "boundary.json",
                &serde_json::to_string_pretty(&branches)?,
            )?;
        }
        Command::Intersect(c) => {
            let v = c.validated()?;
            let body = serde_json::json!({
                "validation": v.report,
                "intersections": v.intersections,
                "p": v.intersections.p(),
            });
            emit(
                c.out.as_deref(),
                "intersections.json",
                &serde_json::to_string_pretty(&body)?,
            )?;
        }
        Command::Integrate(c) => {
            let v = c.validated()?;
            let opts = c.run_options()?;
            let schedule = opts.eps.clone().unwrap_or_else(|| v.scenario.eps_schedule.clone());
            let mut records = Vec::new();
            for &eps in schedule.values() {
                let size = opts.grid.unwrap_or_else(|| v.scenario.grid_policy.grid_for(eps));
                let r = integrate_at(&v, eps, size, &opts)?;
                records.push(serde_json::json!({
                    "eps": eps,
                    "grid": size,
                    "g": r.g_all(),
                    "per_center": r.values,
                    "diagnostics": r.diagnostics,
                }));
            }
            emit(
                c.out.as_deref(),
                "integrals.json",
                &serde_json::to_string_pretty(&records)?,
            )?;
        }
        Command::Recover(c) => {
            let started = unix_now();
            let v = c.validated()?;
            let opts = c.run_options()?;
            let (report, timings) = run_recover(&v, &opts)?;
            match &c.out {
                Some(dir) => {
                    let m = write_outputs(&v, &report, &timings, &opts, started, dir)?;
                    for p in m.outputs {
                        eprintln!("wrote {p}");
                    }
                }
                None => println!("{}", report.to_json()),
            }
            for (i, ((r, t), e)) in report
                .recovered
                .iter()
                .zip(&report.truth)
                .zip(&report.rel_errors)
                .enumerate()
            {
                eprintln!("f(w^({i})): recovered {r:.6e}, truth {t:.6e}, rel. error {e:.3e}");
            }
            eprintln!("constant audit: {:?}", report.audit.verdict);
        }
        Command::Convergence(c) => {
            let v = c.validated()?;
            let opts = c.run_options()?;
            let eps: Vec<f64> = match &c.eps {
                Some(e) => e.clone(),
                None => v.scenario.eps_schedule.values().to_vec(),
            };
            if eps.is_empty() {
                bail!(UsageError("the ε list is empty".into()));
            }
            let rows = run_convergence(&v, &eps, &opts)?;
            emit(c.out.as_deref(), "convergence.csv", convergence_csv(&rows).trim_end())?;
        }
        Command::AuditConstant(c) => {
            let v = c.validated()?;
            let opts = c.run_options()?;
            let (report, _) = run_recover(&v, &opts)?;
            emit(
                c.out.as_deref(),
                "audit.json",
                &serde_json::to_string_pretty(&report.audit)?,
            )?;
        }
        Command::References { write } => match write {
            Some(dir) => {
                std::fs::create_dir_all(&dir)?;
                for s in reference_scenarios() {
                    let path = dir.join(format!("{}.json", s.name));
                    std::fs::write(&path, s.to_pretty_json() + "\n")?;
                    eprintln!("wrote {}", path.display());
                }
            }
            None => {
                for s in reference_scenarios() {
                    println!("{}", s.name);
                }
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else if e.downcast_ref::<ValidationError>().is_some() {
                ExitCode::from(3)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
