use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qlight::harness::{self, io, recipes, CompareTolerances, PropagatorChoice, RunConfig, RunOptions};
use qlight::light::build_initial_state;
use qlight::phase_space::{report_from, wigner, WignerOptions};
use qlight::{Error, Result};

#[derive(Parser)]
#[command(name = "qlight", version, about = "Nonclassical light from strongly driven 1D emitters")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Run configuration file.
    #[arg(long, conflicts_with = "recipe")]
    config: Option<PathBuf>,
    /// Bundled recipe name (see `qlight recipes list`).
    #[arg(long)]
    recipe: Option<String>,
}

impl Source {
    fn load(&self) -> Result<RunConfig> {
        match (&self.config, &self.recipe) {
            (Some(p), _) => RunConfig::load(p),
            (None, Some(r)) => recipes::load(r),
            (None, None) => Err(Error::Config("give --config PATH or --recipe NAME".into())),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and write outputs plus manifest.json.
    Run {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        out: PathBuf,
        /// Override the propagator: grid, flow or both.
        #[arg(long)]
        propagator: Option<PropagatorChoice>,
        /// Cache electron traces here.
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Compare two run directories (or manifests).
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 0.99)]
        min_fidelity: f64,
        #[arg(long, default_value_t = 1e-3)]
        max_l2: f64,
        /// Write the report here as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Eigenstates of the configured model.
    Eigensolve {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 4)]
        states: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Wigner function of a run's light state or of a configuration's input state.
    Wigner {
        /// A run directory or a light_state.csv.
        #[arg(long)]
        state: Option<PathBuf>,
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        out: PathBuf,
    },
    /// Bundled figure recipes.
    Recipes {
        #[command(subcommand)]
        action: RecipeAction,
    },
}

#[derive(Subcommand)]
enum RecipeAction {
    List,
    Show { name: String },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot set thread count: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode> {
    match command {
        Command::Run {
            source,
            out,
            propagator,
            cache,
        } => {
            let cfg = source.load()?;
            let opts = RunOptions {
                propagator,
                cache_dir: cache,
            };
            let output = harness::run_with(&cfg, &out, &opts)?;
            for (k, v) in &output.manifest.metrics {
                println!("{k:>28} {v:.6e}");
            }
            println!("manifest: {}", out.join(harness::run::MANIFEST).display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare {
            a,
            b,
            min_fidelity,
            max_l2,
            out,
        } => {
            let tol = CompareTolerances {
                min_fidelity,
                max_l2,
                ..CompareTolerances::default()
            };
            let report = harness::compare(&a, &b, &tol)?;
            println!("fidelity {:.8}", report.fidelity);
            if let Some(d) = report.l2_distance {
                println!("L2 distance {d:.3e}");
            }
            for (k, d) in &report.metric_deltas {
                println!("{k:>28} {d:+.3e}");
            }
            for f in &report.failures {
                println!("FAIL {f}");
            }
            if let Some(path) = out {
                io::write_json(&path, &report)?;
            }
            Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::from(3) })
        }
        Command::Eigensolve { source, states, out } => {
            let cfg = source.load()?;
            let r = cfg.resolve()?;
            std::fs::create_dir_all(&out)?;
            let (eig, model) = harness::run::solve(&r, states.max(1))?;
            io::write_eigenstates(&out.join("eigenstates.csv"), &eig)?;
            let v = qlight::model::build_potential(&model, &r.x_grid)?;
            io::write_potential(&out.join("potential.csv"), &r.x_grid.points(), &v)?;
            for (i, s) in eig.iter().enumerate() {
                println!("{i:>3} {:+.8} a.u.", s.energy.unwrap_or(f64::NAN));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Wigner { state, source, out } => {
            let light = match state {
                Some(p) => {
                    let csv = if p.is_dir() { p.join(harness::run::LIGHT_STATE) } else { p };
                    io::read_light_state(&csv)?
                }
                None => {
                    let cfg = source.load()?;
                    let r = cfg.resolve()?;
                    build_initial_state(&cfg.light.initial, &r.q_grid)?
                }
            };
            std::fs::create_dir_all(&out)?;
            let w = wigner(&light, &WignerOptions::default())?;
            w.write_bundle(&out, "wigner")?;
            let report = report_from(&light, &w, None)?;
            io::write_json(&out.join("metrics.json"), &report)?;
            println!("negativity volume {:.6e}", report.negativity_volume);
            println!("min rotated variance {:.6}", report.min_rotated_variance);
            println!("mean photons {:.6}", report.mean_photons);
            Ok(ExitCode::SUCCESS)
        }
        Command::Recipes { action } => {
            match action {
                RecipeAction::List => {
                    for name in recipes::names() {
                        let cfg = recipes::load(name)?;
                        println!("{name:<6} {}", cfg.description);
                    }
                }
                RecipeAction::Show { name } => {
                    recipes::load(&name)?;
                    print!("{}", recipes::source(&name).unwrap_or_default());
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
