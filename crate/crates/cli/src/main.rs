use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qbm_cli::config::{parse_mode, RegimeChoice};
use qbm_cli::{run, CliError, Command, RunConfig};

#[derive(Parser)]
#[command(name = "qbm", version, about = "Non-Markovian quantum Brownian motion studies")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Run configuration (key = value lines); defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads; all cores when omitted.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the `mode` key.
    #[arg(long, global = true, value_enum)]
    mode: Option<Mode>,
    /// Overrides the `regime` key.
    #[arg(long, global = true, value_enum)]
    regime: Option<RegimeArg>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write coeffs.csv: Δ, γ, N and Γ on the time grid.
    Coeffs,
    /// Write fringe.csv, fringe_ranking.csv and fringe.gp.
    Fringe,
    /// Write zeno_map.csv, zeno_roots.csv and zeno_map.gp.
    Zeno,
    /// Run the oracle certification suites and write certify.json.
    Certify,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Nonmarkovian,
    Markovian,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    Off,
    Res,
}

fn configure(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(mode) = cli.mode {
        let name = match mode {
            Mode::Nonmarkovian => "nonmarkovian",
            Mode::Markovian => "markovian",
        };
        cfg.mode = parse_mode("--mode", name)?;
    }
    if let Some(regime) = cli.regime {
        let name = match regime {
            RegimeArg::Off => "off",
            RegimeArg::Res => "res",
        };
        cfg.regime = RegimeChoice::parse("--regime", name)?;
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let command = match cli.command {
        Cmd::Coeffs => Command::Coeffs,
        Cmd::Fringe => Command::Fringe,
        Cmd::Zeno => Command::Zeno,
        Cmd::Certify => Command::Certify,
    };
    let outcome = configure(&cli).and_then(|cfg| run(command, &cfg, &cli.out));
    match outcome {
        Ok(status) => ExitCode::from(status.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
