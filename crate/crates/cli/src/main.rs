use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use assurance_cli::{execute, out_dir, write_artifacts, CliError, Command, RunConfig};
use assurance_core::{presets, Objective, OppositionSpec, SeedModel};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "assurance", version, about = "Threshold design for social assurance contracts")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Calibration preset (baseline, whistleblowing_05, ..., param_sweep).
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Single threshold for `solve` and `scalar-cutoff`.
    #[arg(long = "T", global = true)]
    t: Option<u32>,
    /// First threshold of the sweep (default 2).
    #[arg(long, global = true)]
    t_min: Option<u32>,
    /// Last threshold of the sweep (default N-1).
    #[arg(long, global = true)]
    t_max: Option<u32>,
    /// Output directory (default `out`).
    #[arg(long, global = true, env = "ASSURANCE_OUT_DIR")]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Also write SVG charts.
    #[arg(long, global = true)]
    svg: bool,
    /// Skip CSV output.
    #[arg(long, global = true)]
    no_csv: bool,
    /// Seed for the simulation check.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Conditional,
    ExAnte,
    Durable,
}

#[derive(Subcommand)]
enum Cmd {
    /// Equilibria and design quantities at one threshold.
    Solve,
    /// Design objective over the threshold range.
    Design {
        #[arg(long, value_enum)]
        objective: Option<ObjectiveArg>,
    },
    /// Ex ante objective: conditional objective weighted by the seeding probability.
    ExAnte {
        /// Mean of the Poisson seed model.
        #[arg(long)]
        seed_mu: Option<f64>,
    },
    /// Durable objective with an opposition-implied floor.
    Durable {
        #[arg(long)]
        omega: Option<f64>,
        #[arg(long)]
        c_bar: Option<f64>,
    },
    /// Posterior shifts of an outside observer and the Overton objective.
    Overton {
        #[arg(long)]
        prior_a: Option<f64>,
        #[arg(long)]
        prior_b: Option<f64>,
    },
    /// Survey, petition and assurance-contract comparison over a parameter grid.
    Compare,
    /// Finite-N benchmark with signal-dependent cutoffs.
    FiniteN {
        /// Durability floor M_O.
        #[arg(long)]
        floor: Option<u32>,
        /// Also emit the reduced-form comparison curve.
        #[arg(long)]
        reduced: bool,
        /// Simulate P(M >= T) at the argmax with this many draws.
        #[arg(long)]
        simulate: Option<usize>,
    },
    /// Scalar cutoff of the reduced form at matched prevalence.
    ScalarCutoff,
    /// Reproduce a named exhibit (or `all`).
    Replicate { figure: String },
    /// Check every preset against the constants table.
    SelfAudit,
}

fn build(cli: Cli) -> Result<(Command, RunConfig), CliError> {
    let c = cli.common;
    let mut cfg = match &c.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if c.preset.is_some() {
        cfg.preset = c.preset;
    }
    cfg.t = c.t.or(cfg.t);
    if c.t_min.is_some() || c.t_max.is_some() {
        let [lo, hi] = cfg.t_range.unwrap_or([2, u32::MAX]);
        let hi = c.t_max.unwrap_or(hi);
        if hi == u32::MAX {
            return Err(CliError::config("--t-min needs --t-max unless the config sets T_range"));
        }
        cfg.t_range = Some([c.t_min.unwrap_or(lo), hi]);
    }
    cfg.out_dir = c.out.or(cfg.out_dir);
    cfg.threads = c.threads.or(cfg.threads);
    cfg.emit.svg |= c.svg;
    if c.no_csv {
        cfg.emit.csv = false;
    }
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    let cmd = match cli.command {
        Cmd::Solve => Command::Solve,
        Cmd::Design { objective } => {
            if let Some(o) = objective {
                cfg.objective = Some(match o {
                    ObjectiveArg::Conditional => Objective::Conditional,
                    ObjectiveArg::ExAnte => Objective::ExAnte {
                        seed: cfg.seed_model.clone().unwrap_or_default(),
                    },
                    ObjectiveArg::Durable => Objective::Durable {
                        opposition: cfg.opposition.clone().unwrap_or_else(presets::durable_60),
                    },
                });
            }
            Command::Design
        }
        Cmd::ExAnte { seed_mu } => {
            if let Some(mu) = seed_mu {
                cfg.seed_model = Some(SeedModel::Poisson { mu });
            }
            Command::ExAnte
        }
        Cmd::Durable { omega, c_bar } => {
            if omega.is_some() || c_bar.is_some() {
                let base = cfg.opposition.clone().unwrap_or_else(presets::durable_60);
                cfg.opposition = Some(OppositionSpec {
                    omega: omega.unwrap_or(base.omega),
                    c_bar: c_bar.unwrap_or(base.c_bar),
                    ..base
                });
            }
            Command::Durable
        }
        Cmd::Overton { prior_a, prior_b } => {
            if prior_a.is_some() || prior_b.is_some() {
                let base = cfg.prior.unwrap_or_else(presets::overton_prior);
                cfg.prior = Some(assurance_core::BetaPrior {
                    a: prior_a.unwrap_or(base.a),
                    b: prior_b.unwrap_or(base.b),
                });
            }
            Command::Overton
        }
        Cmd::Compare => Command::Compare,
        Cmd::FiniteN {
            floor,
            reduced,
            simulate,
        } => {
            cfg.floor = floor.or(cfg.floor);
            cfg.reduced |= reduced;
            cfg.simulate = simulate.unwrap_or(cfg.simulate);
            Command::FiniteN
        }
        Cmd::ScalarCutoff => Command::ScalarCutoff,
        Cmd::Replicate { figure } => {
            cfg.figure = Some(figure);
            Command::Replicate
        }
        Cmd::SelfAudit => Command::SelfAudit,
    };
    Ok((cmd, cfg))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (cmd, cfg) = build(cli)?;
    let outcome = execute(cmd, &cfg)?;
    let dir = out_dir(&cfg);
    write_artifacts(&dir, &outcome.artifacts)?;
    let mut summary = outcome.summary;
    if !outcome.artifacts.is_empty() {
        summary["out_dir"] = serde_json::json!(dir);
    }
    // a closed pipe (e.g. `| head`) is not an error of the run
    let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.report());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
