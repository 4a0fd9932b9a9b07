use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use feast_dpg::feast::{build_filter, filter_diagnostics};
use feast_dpg_cli::{run_study, solve_once, Domain, StudyConfig, StudyError};

#[derive(Parser)]
#[command(name = "feast-dpg", version, about = "Filtered subspace eigensolver with DPG resolvents")]
struct Cli {
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Square,
    Lshape,
    Fiber,
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON study configuration.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Bundled configuration.
    #[arg(long)]
    preset: Option<Preset>,
    /// Mesh file; switches the domain to `external_mesh`.
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Overrides the FEAST seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl ConfigArgs {
    fn load(&self) -> Result<StudyConfig, StudyError> {
        let mut config = match (&self.config, self.preset) {
            (Some(path), _) => StudyConfig::from_file(path)?,
            (None, Some(Preset::Square)) => StudyConfig::square(),
            (None, Some(Preset::Lshape)) => StudyConfig::lshape(),
            (None, Some(Preset::Fiber)) => StudyConfig::fiber(),
            (None, None) => return Err(StudyError::Config("pass --config or --preset".into())),
        };
        if let Some(mesh) = &self.mesh {
            config.domain = Domain::ExternalMesh;
            config.mesh = Some(mesh.clone());
        }
        if let Some(seed) = self.seed {
            config.feast.seed = seed;
        }
        config.resolve()
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a convergence study and write the CSV and metadata.
    Study {
        #[command(flatten)]
        config: ConfigArgs,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run FEAST once and print the Ritz values.
    Solve {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value_t = 0)]
        level: usize,
        /// Degree (defaults to the first configured degree).
        #[arg(long)]
        p: Option<usize>,
    },
    /// Print the filter nodes, weights, W, kappa_hat and sample values.
    FilterInfo {
        #[command(flatten)]
        config: ConfigArgs,
        /// Relative separation of the outer set.
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
    },
}

fn run(command: Command) -> Result<(), StudyError> {
    match command {
        Command::Study { config, out } => {
            let config = config.load()?;
            let report = run_study(&config)?;
            print!("{}", report.csv());
            for path in report.write(&out)? {
                eprintln!("wrote {}", path.display());
            }
        }
        Command::Solve { config, level, p } => {
            let config = config.load()?;
            let p = p.unwrap_or_else(|| config.p.to_vec()[0]);
            let r = solve_once(&config, level, p)?;
            println!("p = {p}, level {level}, h = {:e}, trial dofs {}, condensed dofs {}", r.h, r.n_trial, r.n_condensed);
            for (k, v) in r.values.iter().enumerate() {
                let err = r.errors.get(k).copied().flatten().map(|e| format!("  error {e:.3e}")).unwrap_or_default();
                println!("lambda_{} = {v:.15e}{err}", k + 1);
            }
            if let Some(h) = r.hausdorff {
                println!("hausdorff distance {h:.3e}");
            }
            if let Some(d) = r.d_h {
                println!("d_h {d:.3e}");
            }
            println!("iterations {}, final relative change {:.3e}", r.iterations, r.final_change);
            let times: Vec<String> = r.factor_seconds.iter().map(|t| format!("{t:.3}")).collect();
            println!("node factorization seconds [{}], total {:.3}", times.join(", "), r.seconds);
        }
        Command::FilterInfo { config, delta } => {
            let c = config.load()?.contour.expect("resolved");
            let filter = build_filter(c.y, c.gamma, c.n, c.phi_sign).map_err(|e| StudyError::Config(e.to_string()))?;
            let diag = filter_diagnostics(&filter, c.y, c.gamma, delta).map_err(|e| StudyError::Config(e.to_string()))?;
            println!("y = {}, gamma = {}, N = {}, phi = {}", c.y, c.gamma, c.n, filter.phi);
            for (k, (z, w)) in filter.nodes.iter().zip(&filter.weights).enumerate() {
                println!("z_{k} = {:.10} {:+.10}i   w_{k} = {:.10} {:+.10}i", z.re, z.im, w.re, w.im);
            }
            println!("W = {:.15e}", diag.w);
            println!("kappa_hat(delta = {delta}) = {:.15e}", diag.kappa_hat);
            for t in [0.0, 0.5, 1.0, 1.5, 2.0, 3.0] {
                for x in [c.y - t * c.gamma, c.y + t * c.gamma] {
                    let r = filter.eval(x);
                    println!("r_N({x:.6}) = {:.15e} {:+.3e}i", r.re, r.im);
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
