//! Command-line interface: scheme reports, stability regions, embedding
//! optimization, transport runs, and convergence studies.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use slabtrt::config::RunConfig;
use slabtrt::driver::{self, CliError, StabilityArgs};

#[derive(Parser)]
#[command(name = "slabtrt", version, about = "1D slab thermal radiation transport with adaptive IMEX time integration")]
struct Cli {
    /// Worker threads for transport sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the scheme property table (principal errors and embedding
    /// quality ratios).
    Schemes {
        /// Also write the table (with implicit/explicit sub-measures) as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Sample a joint stability region and write it as CSV.
    Stability(StabilityCli),
    /// Optimize an embedded weight vector for a built-in scheme.
    Embed {
        #[arg(long)]
        scheme: String,
        /// Random multi-start count.
        #[arg(long, default_value_t = 32)]
        seeds: usize,
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
    },
    /// Integrate a transport problem (adaptive or fixed step).
    Run(ConfigCli),
    /// Fixed-dt convergence study against a semi-implicit reference.
    Converge(ConfigCli),
}

#[derive(Args)]
struct StabilityCli {
    #[arg(long)]
    scheme: String,
    /// Implicit sector half-angle, degrees.
    #[arg(long, default_value_t = 90.0)]
    alpha: f64,
    #[arg(long, default_value_t = -6.0)]
    xmin: f64,
    #[arg(long, default_value_t = 1.0)]
    xmax: f64,
    #[arg(long, default_value_t = -4.0)]
    ymin: f64,
    #[arg(long, default_value_t = 4.0)]
    ymax: f64,
    /// Grid points per axis.
    #[arg(long, default_value_t = 81)]
    n: usize,
    /// Analyze the embedded weights instead of the primary ones.
    #[arg(long)]
    embedded: bool,
    /// Also sample ray fans inside the implicit sector.
    #[arg(long)]
    dense: bool,
    #[arg(long, default_value = "region.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct ConfigCli {
    /// Flat key-value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Repeatable key=value override.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

impl ConfigCli {
    fn load(&self, threads: usize) -> Result<RunConfig, CliError> {
        let text = match &self.config {
            Some(path) => std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?,
            None => String::new(),
        };
        let mut cfg = RunConfig::parse(&text, &self.sets).map_err(CliError::Config)?;
        if threads > 1 {
            cfg.threads = threads;
        }
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout();
    let result = match &cli.command {
        Command::Schemes { csv } => driver::cmd_schemes(csv.as_deref(), &mut stdout),
        Command::Stability(args) => driver::cmd_stability(&StabilityArgs {
            scheme: args.scheme.clone(),
            alpha_deg: args.alpha,
            re_min: args.xmin,
            re_max: args.xmax,
            im_min: args.ymin,
            im_max: args.ymax,
            n: args.n,
            embedded: args.embedded,
            dense: args.dense,
            out: args.out.clone(),
        })
        .map(|region| {
            let stable = region.stable.iter().filter(|s| **s).count();
            println!("{} of {} grid points stable", stable, region.stable.len());
        }),
        Command::Embed { scheme, seeds, rng_seed } => {
            driver::cmd_embed(scheme, *seeds, *rng_seed, &mut stdout)
        }
        Command::Run(cfg_cli) => cfg_cli
            .load(cli.threads)
            .and_then(|cfg| driver::cmd_run(&cfg, &mut stdout))
            .map(|_| ()),
        Command::Converge(cfg_cli) => cfg_cli
            .load(cli.threads)
            .and_then(|cfg| driver::cmd_converge(&cfg, &mut stdout))
            .map(|_| ()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
