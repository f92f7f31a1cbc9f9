use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use derham_ns::cases::{convergence_study, write_convergence_csv, Simulation, SimulationConfig};

#[derive(Parser)]
#[command(name = "derham-ns", version, about = "Incompressible Navier-Stokes on spline de Rham sequences")]
struct Cli {
    /// Worker threads for convergence studies (default: all cores).
    #[arg(long, global = true, env = "DERHAM_NS_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write diagnostics and snapshots.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a mesh/degree sweep and tabulate errors and fitted orders.
    Converge {
        config: PathBuf,
        /// Total cells per direction, e.g. 8,16,32.
        #[arg(long, value_delimiter = ',', required = true)]
        meshes: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        degrees: Vec<usize>,
        #[command(flatten)]
        overrides: Overrides,
    },
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    dt: Option<f64>,
    /// Spline degree.
    #[arg(long)]
    p: Option<usize>,
    /// Cells per patch in each direction.
    #[arg(long)]
    nc: Option<usize>,
    /// Patches in each direction.
    #[arg(long)]
    np: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    /// Picard tolerance; the CG tolerance is kept two orders below it.
    #[arg(long)]
    tol: Option<f64>,
    /// Output directory.
    #[arg(long, env = "DERHAM_NS_OUT")]
    out: Option<PathBuf>,
}

impl Overrides {
    fn apply(&self, cfg: &mut SimulationConfig) {
        if let Some(dt) = self.dt {
            cfg.stepper.dt = dt;
        }
        if let Some(p) = self.p {
            cfg.grid.degree = p;
        }
        if let Some(nc) = self.nc {
            cfg.grid.cells_per_patch = [nc; 2];
        }
        if let Some(np) = self.np {
            cfg.grid.n_patches = [np; 2];
        }
        if self.alpha.is_some() {
            cfg.physics.alpha = self.alpha;
        }
        if self.nu.is_some() {
            cfg.physics.nu = self.nu;
        }
        if let Some(tol) = self.tol {
            cfg.stepper.picard_tol = tol;
            cfg.stepper.cg_tol = cfg.stepper.cg_tol.min(1e-2 * tol);
        }
        if let Some(out) = &self.out {
            cfg.output.dir = out.clone();
        }
    }
}

fn load(path: &Path, overrides: &Overrides) -> derham_ns::Result<SimulationConfig> {
    let mut cfg = SimulationConfig::load(path)?;
    overrides.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: Cli) -> derham_ns::Result<ExitCode> {
    match cli.command {
        Command::Run { config, overrides } => {
            let cfg = load(&config, &overrides)?;
            let dir = cfg.output.dir.clone();
            let sim = Simulation::new(cfg)?;
            let outcome = sim.run(Some(&dir))?;
            println!("{}", outcome.summary_line());
            Ok(if outcome.failure.is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Converge {
            config,
            meshes,
            degrees,
            overrides,
        } => {
            let cfg = load(&config, &overrides)?;
            let rows = convergence_study(&cfg, &meshes, &degrees)?;
            let path = cfg.output.dir.join("convergence.csv");
            write_convergence_csv(&path, &rows)?;
            println!("{:>6} {:>6} {:>12} {:>12} {:>7}", "degree", "cells", "h", "error", "order");
            for r in &rows {
                let err = r.error.map_or("failed".to_string(), |e| format!("{e:.4e}"));
                let order = r.order.map_or("-".to_string(), |o| format!("{o:.3}"));
                println!("{:>6} {:>6} {:>12.4e} {:>12} {:>7}", r.degree, r.cells, r.h, err, order);
            }
            println!("wrote {}", path.display());
            Ok(if rows.iter().any(|r| r.error.is_none()) {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
