use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lightcone::report::{self, Overrides, EXIT_USAGE};

#[derive(Parser, Debug)]
#[command(name = "lightcone", version, about = "Integral identities and weighted Bergman-type operators on the Lorentz cone")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// RNG seed; identical seeds give identical data files.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo samples per integral.
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "lightcone-out")]
    out: PathBuf,
    /// Cone dimension parameter (1, 2 or 3).
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = "LIGHTCONE_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Check every closed-form identity against the numerical oracle.
    Audit,
    /// Apply the necessary and sufficient boundedness conditions.
    Classify,
    /// Build the Schur-test witness for each parameter set.
    Witness,
    /// Fit the norm-scaling slopes of the test family.
    Scaling,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: threads: {e}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    }
    let overrides = Overrides { seed: cli.seed, budget: cli.budget, n: cli.n };
    let resolved = match report::load_config(cli.config.as_deref()).and_then(|c| report::resolve(c, &overrides)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    let run = match cli.command {
        Command::Audit => report::cmd_audit(&resolved, &cli.out),
        Command::Classify => report::cmd_classify(&resolved, &cli.out),
        Command::Witness => report::cmd_witness(&resolved, &cli.out),
        Command::Scaling => report::cmd_scaling(&resolved, &cli.out),
    };
    match run {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE as u8)
        }
    }
}
