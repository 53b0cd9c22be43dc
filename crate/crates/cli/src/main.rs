//! `polyharm` command-line driver.

mod commands;
mod config;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Context, Failure};
use config::RunConfig;
use output::{config_hash, OutDir};

#[derive(Parser)]
#[command(name = "polyharm", version, about = "Separately (α,β)-harmonic functions on the polydisc")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    /// JSON run configuration; defaults apply to missing fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the default configuration and exit.
    #[arg(long)]
    dump_defaults: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Kernel, Poisson integral or expansion at query points.
    Eval,
    /// Run every invariant suite and print a JSON report.
    Verify,
    /// Plot-ready curves: level sets, norm convergence or a limit sweep.
    Scan,
    /// Homogeneous expansion coefficients of the boundary data.
    Expand,
    /// Extension of the boundary data on concentric tori.
    Dirichlet,
    /// Maximal function of a measure on a grid of centres.
    Maximal,
    /// Restricted non-tangential limits at a grid of vertices.
    Fatou,
}

fn run(cli: &Cli, command: Command) -> Result<(), Failure> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p).map_err(Failure::Config)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    let params = cfg.validate()?;
    // the output location does not affect results
    let hash = config_hash(&RunConfig { out: PathBuf::new(), ..cfg.clone() }.to_json());
    log::info!("config sha256 {hash}");
    let out = OutDir::create(&cfg.out, hash)?;
    let workers = cli.workers.max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Failure::Config(e.to_string()))?;
    let mut ctx = Context { cfg, params, workers, out };
    pool.install(|| match command {
        Command::Eval => commands::eval(&mut ctx),
        Command::Verify => commands::verify(&mut ctx),
        Command::Scan => commands::scan(&mut ctx),
        Command::Expand => commands::expand(&mut ctx),
        Command::Dirichlet => commands::dirichlet(&mut ctx),
        Command::Maximal => commands::maximal(&mut ctx),
        Command::Fatou => commands::fatou(&mut ctx),
    })?;
    for p in &ctx.out.written {
        log::info!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.dump_defaults {
        let _ = writeln!(std::io::stdout(), "{}", RunConfig::default().to_json());
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        eprintln!("no subcommand given; see --help");
        return ExitCode::from(2);
    };
    match run(&cli, command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
