use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use randcrit::config::{EnsembleName, GridArg, ModelConfig, ModelName, RegionArg};
use randcrit::{run, CliError, CommandKind, ExperimentConfig, RunOptions};

#[derive(Parser)]
#[command(name = "randcrit", version, about = "Random polynomial zeros, attractor points and flux vacua")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Seed for Monte Carlo commands.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (all cores by default).
    #[arg(long, env = "RANDCRIT_THREADS")]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "randcrit-out")]
    out: PathBuf,
    /// JSON config file (or a previous run's summary.json); flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct EnsembleArgs {
    #[arg(long, value_enum)]
    ensemble: Option<EnsembleName>,
    /// Polynomial degree.
    #[arg(short = 'N', long = "degree")]
    degree: Option<usize>,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, value_enum)]
    model: Option<ModelName>,
    /// Cubic coupling (cubic model only).
    #[arg(long)]
    kappa: Option<f64>,
    /// Rectangle x0:x1:y0:y1 in the upper half plane.
    #[arg(long, allow_hyphen_values = true)]
    region: Option<RegionArg>,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic zero density on a grid.
    Density {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        ensemble: EnsembleArgs,
        /// Square grid lo:hi:n.
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<GridArg>,
    },
    /// Monte Carlo histogram of sampled zeros.
    ZerosMc {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<GridArg>,
        #[arg(long)]
        samples: Option<u64>,
    },
    /// Expected number of real zeros, by quadrature and Monte Carlo.
    RealZeros {
        #[command(flatten)]
        common: Common,
        #[arg(short = 'N', long = "degree")]
        degree: Option<usize>,
        /// Monte Carlo samples; 0 skips sampling.
        #[arg(long)]
        samples: Option<u64>,
    },
    /// Lattice enumeration of attractor points.
    Attractors {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        zmax: Option<f64>,
        /// Charge box half-width.
        #[arg(long = "box")]
        box_size: Option<i64>,
        /// Flow starting grid per side.
        #[arg(long)]
        start_grid: Option<usize>,
        /// Disable the closed-form prefilter and flow every charge.
        #[arg(long)]
        no_screen: bool,
    },
    /// Lattice enumeration of flux vacua.
    FluxVacua {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        lmax: Option<f64>,
        /// Flux box half-width.
        #[arg(long = "box")]
        box_size: Option<i64>,
        /// Histogram bins for the |W|² statistics.
        #[arg(long)]
        bins: Option<usize>,
    },
    /// Continuum Monte Carlo volume of the flux constraint set.
    FluxContinuum {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        lmax: Option<f64>,
        #[arg(long)]
        samples: Option<u64>,
        /// Half-width of the sampling box.
        #[arg(long)]
        box_radius: Option<f64>,
    },
    /// Verify earlier runs and tabulate their count reports.
    Report {
        #[command(flatten)]
        common: Common,
        /// Run directories.
        #[arg(long = "input", required = false)]
        inputs: Vec<PathBuf>,
    },
}

fn model_config(m: &ModelArgs) -> Option<ModelConfig> {
    match (m.model, m.kappa) {
        (None, None) => None,
        (kind, kappa) => Some(ModelConfig {
            kind: kind.unwrap_or(if kappa.is_some() { ModelName::Cubic } else { ModelName::Rigid }),
            kappa,
            eta: "standard".into(),
        }),
    }
}

fn flags(cmd: Command) -> (Common, ExperimentConfig) {
    let with = |kind, common: &Common| {
        let mut c = ExperimentConfig::empty(kind);
        c.seed = common.seed;
        c
    };
    match cmd {
        Command::Density { common, ensemble, grid } => {
            let mut c = with(CommandKind::Density, &common);
            (c.ensemble, c.degree, c.grid) = (ensemble.ensemble, ensemble.degree, grid);
            (common, c)
        }
        Command::ZerosMc {
            common,
            ensemble,
            grid,
            samples,
        } => {
            let mut c = with(CommandKind::ZerosMc, &common);
            (c.ensemble, c.degree, c.grid, c.n_samples) = (ensemble.ensemble, ensemble.degree, grid, samples);
            (common, c)
        }
        Command::RealZeros { common, degree, samples } => {
            let mut c = with(CommandKind::RealZeros, &common);
            (c.degree, c.n_samples) = (degree, samples);
            (common, c)
        }
        Command::Attractors {
            common,
            model,
            zmax,
            box_size,
            start_grid,
            no_screen,
        } => {
            let mut c = with(CommandKind::Attractors, &common);
            (c.model, c.region, c.zmax, c.box_size, c.start_grid) =
                (model_config(&model), model.region, zmax, box_size, start_grid);
            c.analytic_screen = no_screen.then_some(false);
            (common, c)
        }
        Command::FluxVacua {
            common,
            model,
            lmax,
            box_size,
            bins,
        } => {
            let mut c = with(CommandKind::FluxVacua, &common);
            (c.model, c.region, c.lmax, c.box_size, c.bins) = (model_config(&model), model.region, lmax, box_size, bins);
            (common, c)
        }
        Command::FluxContinuum {
            common,
            model,
            lmax,
            samples,
            box_radius,
        } => {
            let mut c = with(CommandKind::FluxContinuum, &common);
            (c.model, c.region, c.lmax, c.n_samples, c.box_radius) =
                (model_config(&model), model.region, lmax, samples, box_radius);
            (common, c)
        }
        Command::Report { common, inputs } => {
            let mut c = with(CommandKind::Report, &common);
            c.inputs = inputs;
            (common, c)
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (common, over) = flags(cli.command);
    let config = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
            ExperimentConfig::from_json(&text)?.overlay(over)?
        }
        None => over,
    };
    let opts = RunOptions {
        out: common.out,
        threads: common.threads,
    };
    let outcome = run(&config, &opts)?;
    for p in &outcome.artifacts {
        println!("{}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
