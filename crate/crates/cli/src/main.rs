use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use phasewig_cli::checks::{SuiteConfig, DEFAULT_GRID, DEFAULT_SEED};
use phasewig_cli::runner::{self, Outcome};
use phasewig_cli::scenario::OUTPUT_DIR_ENV;
use phasewig_cli::summary::SCHEMA;

/// Phase-space Wigner functions, covariant operators and spectra.
#[derive(Parser)]
#[command(name = "phasewig", version)]
struct Cli {
    /// Run data-parallel loops on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a scenario file.
    Run { scenario: PathBuf },
    /// Run the full invariant suite.
    Verify {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Samples per axis on the [-12, 12]² verification grid.
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        /// Replace the canonical connection with A_q = p, A_p = q.
        #[arg(long)]
        broken_connection: bool,
        /// Output directory (overridden by the environment variable).
        #[arg(long, default_value = "phasewig-verify")]
        out: PathBuf,
    },
    /// Print the JSON schema of summary.json.
    PrintSchema,
}

fn report(outcome: &Outcome) -> ExitCode {
    let s = &outcome.summary;
    for c in &s.checks {
        let crit = c.criterion.map(|k| format!("[{k:>2}] ")).unwrap_or_else(|| "     ".into());
        println!(
            "{} {crit}{}: {:e} (threshold {:e})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.threshold
        );
    }
    if let Some(m) = &s.message {
        eprintln!("phasewig: {m}");
    }
    if let Some(d) = &outcome.out_dir {
        println!("{}: {:?} -> {}", s.task, s.status, d.join("summary.json").display());
    }
    ExitCode::from(s.exit_code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.sequential {
        phasewig_core::par::set_mode(phasewig_core::par::ExecMode::Sequential);
    }
    match cli.command {
        Command::Run { scenario } => report(&runner::run_scenario(&scenario)),
        Command::Verify { seed, grid, broken_connection, out } => {
            let dir = std::env::var_os(OUTPUT_DIR_ENV).filter(|d| !d.is_empty()).map(PathBuf::from).unwrap_or(out);
            let cfg = SuiteConfig { seed, grid_n: grid, broken_connection };
            report(&runner::run_verify(&cfg, &dir))
        }
        Command::PrintSchema => {
            print!("{SCHEMA}");
            ExitCode::SUCCESS
        }
    }
}
