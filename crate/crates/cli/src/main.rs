use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use layeredbvp::EnergyNorm;

mod commands;
mod config;
mod exit;

use commands::Overrides;
use config::{AutoTag, RegimeChoice};

#[derive(Parser, Debug)]
#[command(name = "layeredbvp", version, about = "Singularly perturbed two-parameter BVPs: solve, expand, verify, scan")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (must exist).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for scans (default: number of processors).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[arg(long, global = true, value_enum)]
    regime: Option<RegimeArg>,

    /// Floor-rule factor in the choice of M.
    #[arg(long, global = true)]
    delta: Option<f64>,

    /// Cap on M.
    #[arg(long, global = true)]
    mmax: Option<usize>,

    /// Polynomial degree of the solve (or of the reference solve for verify/scan).
    #[arg(long, global = true)]
    degree: Option<usize>,

    #[arg(long = "energy-norm", global = true, value_enum)]
    energy_norm: Option<NormArg>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Reference solve: solution.csv and solution.json.
    Solve,
    /// Asymptotic decomposition: decomposition.json and terms.csv.
    Expand,
    /// Bound checks: summary.json and one CSV per check.
    Verify,
    /// Parameter sweep: scan.csv.
    Scan,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum RegimeArg {
    Auto,
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    #[value(name = "3")]
    Three,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum NormArg {
    Default,
    Paper,
}

fn run(cli: Cli) -> Result<u8, exit::Failure> {
    let Some(config) = cli.config else {
        return Err(exit::Failure::config("--config is required"));
    };
    let overrides = Overrides {
        out: cli.out,
        jobs: cli.jobs,
        regime: cli.regime.map(|r| match r {
            RegimeArg::Auto => RegimeChoice::Named(AutoTag::Auto),
            RegimeArg::One => RegimeChoice::Engine(1),
            RegimeArg::Two => RegimeChoice::Engine(2),
            RegimeArg::Three => RegimeChoice::Engine(3),
        }),
        delta: cli.delta,
        m_max: cli.mmax,
        degree: cli.degree,
        energy_norm: cli.energy_norm.map(|n| match n {
            NormArg::Default => EnergyNorm::Default,
            NormArg::Paper => EnergyNorm::Paper,
        }),
    };
    if cli.jobs == Some(0) {
        return Err(exit::Failure::config("--jobs must be positive"));
    }
    let ctx = commands::load(&config, overrides)?;
    match cli.command {
        Command::Solve => commands::cmd_solve(&ctx),
        Command::Expand => commands::cmd_expand(&ctx),
        Command::Verify => commands::cmd_verify(&ctx),
        Command::Scan => commands::cmd_scan(&ctx),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LAYEREDBVP_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::INVALID_CONFIG } else { exit::OK });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
