//! `mcflab`: shapes, functionals, flows, singularity reports and the
//! acceptance suite from the command line.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use mcflab::acceptance::Suite;

use crate::commands::Verdict;
use crate::config::{ExperimentConfig, FieldChoice, HorizonChoice, Method};

#[derive(Parser)]
#[command(name = "mcflab", version, about = "Gaussian area, entropy and mean curvature flow experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Input {
    /// Named shape from the catalog (see `mcflab presets`).
    #[arg(long, conflicts_with = "mesh")]
    preset: Option<String>,
    /// Mesh manifest (JSON) written by `mcflab shape`.
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// TOML experiment config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Which shape of a multi-shape preset to use.
    #[arg(long)]
    shape_index: Option<usize>,
    /// Seed for the optimizer's random restarts.
    #[arg(long)]
    seed: Option<u64>,
    /// Skip SVG plots.
    #[arg(long)]
    no_plot: bool,
}

#[derive(Args, Clone, Default)]
struct Evolution {
    /// Ambient field: zero (mean curvature flow) or renorm (x/2).
    #[arg(long, value_enum)]
    field: Option<FieldChoice>,
    /// Horizon: a time, or `auto` for level-set runs.
    #[arg(short = 'T', long = "horizon")]
    horizon: Option<HorizonChoice>,
    /// Level-set sample interval.
    #[arg(long)]
    sample_interval: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// List the shape presets.
    Presets,
    /// Write the meshes of a preset.
    Shape {
        #[command(flatten)]
        input: Input,
    },
    /// Entropy and Gaussian area.
    Entropy {
        #[command(flatten)]
        input: Input,
        /// Number of local ascents.
        #[arg(long)]
        restarts: Option<usize>,
    },
    /// Self-shrinker residual H + x^perp/2.
    Residual {
        #[command(flatten)]
        input: Input,
    },
    /// Parametric (X-)mean curvature flow.
    Flow {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        evolution: Evolution,
        /// Second preset flowed alongside for the avoidance-distance series.
        #[arg(long)]
        against: Option<String>,
    },
    /// Level-set weak flow with singularity analysis.
    Levelset {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        evolution: Evolution,
        /// Grid spacing.
        #[arg(long)]
        grid_h: Option<f64>,
        /// Optimizer restarts for the initial entropy.
        #[arg(long)]
        restarts: Option<usize>,
    },
    /// Singularity detection, tangent-flow classification and the density-entropy chain.
    Singularity {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        evolution: Evolution,
        #[arg(long, value_enum)]
        method: Option<Method>,
        #[arg(long)]
        grid_h: Option<f64>,
        #[arg(long)]
        restarts: Option<usize>,
    },
    /// Run the acceptance suite and write a pass/fail report.
    Reproduce {
        #[arg(long, default_value = "quick", value_parser = ["quick", "full"])]
        suite: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn base_config(input: &Input) -> Result<ExperimentConfig> {
    let mut cfg = match &input.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(p) = &input.preset {
        cfg.preset = Some(p.clone());
        cfg.mesh = None;
    }
    if let Some(m) = &input.mesh {
        cfg.mesh = Some(m.clone());
        cfg.preset = None;
    }
    if let Some(o) = &input.out {
        cfg.out = o.clone();
    }
    if let Some(i) = input.shape_index {
        cfg.shape_index = i;
    }
    if let Some(s) = input.seed {
        cfg.seed = s;
    }
    cfg.opt.seed = cfg.seed;
    if input.no_plot {
        cfg.plot = false;
    }
    Ok(cfg)
}

fn apply_evolution(cfg: &mut ExperimentConfig, e: &Evolution) {
    if let Some(f) = e.field {
        cfg.field = f;
    }
    if let Some(h) = e.horizon {
        cfg.horizon = Some(h);
    }
    if let Some(i) = e.sample_interval {
        cfg.sample_interval = Some(i);
    }
}

fn apply_grid(cfg: &mut ExperimentConfig, h: Option<f64>, restarts: Option<usize>) {
    if let Some(h) = h {
        cfg.grid.h = h;
    }
    if let Some(r) = restarts {
        cfg.opt.restarts = r;
    }
}

fn dispatch(cli: Cli) -> Result<Verdict> {
    match cli.command {
        Command::Presets => commands::presets(),
        Command::Shape { input } => commands::shape(&base_config(&input)?),
        Command::Entropy { input, restarts } => {
            let mut cfg = base_config(&input)?;
            apply_grid(&mut cfg, None, restarts);
            commands::entropy_cmd(&cfg)
        }
        Command::Residual { input } => commands::residual(&base_config(&input)?),
        Command::Flow { input, evolution, against } => {
            let mut cfg = base_config(&input)?;
            apply_evolution(&mut cfg, &evolution);
            if against.is_some() {
                cfg.against = against;
            }
            commands::flow_cmd(&cfg)
        }
        Command::Levelset { input, evolution, grid_h, restarts } => {
            let mut cfg = base_config(&input)?;
            apply_evolution(&mut cfg, &evolution);
            apply_grid(&mut cfg, grid_h, restarts);
            commands::levelset_cmd(&cfg, "levelset")
        }
        Command::Singularity { input, evolution, method, grid_h, restarts } => {
            let mut cfg = base_config(&input)?;
            apply_evolution(&mut cfg, &evolution);
            apply_grid(&mut cfg, grid_h, restarts);
            if let Some(m) = method {
                cfg.method = m;
            }
            commands::singularity_cmd(&cfg)
        }
        Command::Reproduce { suite, out } => {
            let mut cfg = ExperimentConfig::default();
            if let Some(o) = out {
                cfg.out = o;
            }
            commands::reproduce(&cfg, suite.parse::<Suite>()?)
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(Verdict::Ok) => ExitCode::SUCCESS,
        Ok(Verdict::Failed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
