use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use saw_lattice::cli::{self, Command, PlotKind, RunConfig};
use saw_lattice::error::Error;

#[derive(Parser)]
#[command(name = "sawlat", version, about = "Acoustic lattice traps: scales, stability, dynamics and feasibility")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Energy and length scales of a trap
    Scales(Common),
    /// Classical stability diagram over (q, k_BT/E_S)
    Stability(Common),
    /// Single classical trajectory with its secular approximation
    Trajectory(Common),
    /// Gaussian master-equation dynamics of a trapped carrier
    Qme(Common),
    /// Tunneling, on-site repulsion and exchange
    Hubbard(Common),
    /// Requirement chain, heating budget and spin coherence
    Feasibility(Common),
    /// The exemplary GaN setup table
    CaseStudy(Common),
    /// Render a dataset as SVG
    Plot {
        dataset: PathBuf,
        #[arg(long)]
        kind: String,
        #[arg(long, short)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; command defaults are used when absent
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override a config field, e.g. --set inputs.q=0.3
    #[arg(long = "set", value_name = "PATH=VALUE")]
    overrides: Vec<String>,
    /// Output directory
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    no_plot: bool,
    /// Print the effective configuration and exit
    #[arg(long)]
    dump_config: bool,
}

fn configure(command: Command, c: &Common) -> Result<RunConfig, Error> {
    let mut cfg = match &c.config {
        Some(p) => {
            let cfg = RunConfig::from_json(&std::fs::read_to_string(p)?)?;
            if cfg.command != command {
                return Err(Error::Config {
                    path: "command".into(),
                    reason: format!("file is for `{}`", cfg.command.name()),
                });
            }
            cfg
        }
        None => RunConfig::new(command),
    };
    cfg = cfg.apply_overrides(&c.overrides)?;
    if let Some(o) = &c.out {
        cfg.output.dir = o.clone();
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if c.no_plot {
        cfg.output.plot = false;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (command, common) = match &cli.command {
        Sub::Scales(c) => (Command::Scales, c),
        Sub::Stability(c) => (Command::Stability, c),
        Sub::Trajectory(c) => (Command::Trajectory, c),
        Sub::Qme(c) => (Command::Qme, c),
        Sub::Hubbard(c) => (Command::Hubbard, c),
        Sub::Feasibility(c) => (Command::Feasibility, c),
        Sub::CaseStudy(c) => (Command::CaseStudy, c),
        Sub::Plot { dataset, kind, out } => {
            let r = kind.parse::<PlotKind>().and_then(|k| cli::emit_plot(dataset, k, out));
            return finish(r.map(|_| vec![out.clone()]));
        }
    };
    let result = configure(command, common).and_then(|cfg| {
        if common.dump_config {
            println!("{}", cfg.to_json());
            return Ok(Vec::new());
        }
        cli::run(&cfg).map(|r| r.files)
    });
    finish(result)
}

fn finish(result: Result<Vec<PathBuf>, Error>) -> ExitCode {
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
