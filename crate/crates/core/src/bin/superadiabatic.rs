use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use superadiabatic::scenario::{
    cmd_invariant, cmd_iterate, cmd_populations, cmd_region, cmd_table1, Outcome, ProtocolKind, ScenarioConfig,
    ScenarioError, OUTPUT_DIR_ENV,
};

/// Superadiabatic iterations and counterdiabatic shortcuts for two-level systems.
#[derive(Parser, Debug)]
#[command(version)]
struct Cli {
    /// JSON scenario configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    protocol: Option<Protocol>,
    /// Chirp of the linear sweep, rad/μs²
    #[arg(long, global = true, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Constant Rabi frequency, rad/μs
    #[arg(long, global = true)]
    omega0: Option<f64>,
    /// Protocol duration, μs
    #[arg(long, global = true)]
    tf: Option<f64>,
    /// Highest iteration order
    #[arg(long, global = true)]
    jmax: Option<usize>,
    /// Number of time samples (odd, at least 1001)
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Output directory; falls back to the config file, then to the
    /// SUPERADIABATIC_OUT environment variable, then to the current directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Protocol {
    LandauZener,
    Invariant,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Maxima of the X and Y components of each modified Hamiltonian
    Table1,
    /// Population of the first bare state under each modified Hamiltonian
    Populations,
    /// Feasible chirp band over a Rabi-frequency scan
    Region,
    /// Invariant-based inverse-engineered pulse
    Invariant,
    /// Full frame data and boundary-condition checks
    Iterate,
}

fn build_config(cli: &Cli) -> Result<ScenarioConfig, ScenarioError> {
    let mut cfg = match &cli.config {
        Some(p) => ScenarioConfig::load(p)?,
        None => ScenarioConfig::default(),
    };
    if let Some(p) = cli.protocol {
        cfg.protocol = match p {
            Protocol::LandauZener => ProtocolKind::LandauZener,
            Protocol::Invariant => ProtocolKind::Invariant,
        };
    }
    if let Some(v) = cli.alpha {
        cfg.chirp = v;
    }
    if let Some(v) = cli.omega0 {
        cfg.rabi = v;
    }
    if let Some(v) = cli.tf {
        cfg.duration = v;
    }
    if let Some(v) = cli.jmax {
        cfg.j_max = v;
    }
    if let Some(v) = cli.samples {
        cfg.samples = v;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = Some(out.clone());
    } else if cfg.output_dir.is_none() {
        cfg.output_dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<Outcome, ScenarioError> {
    let cfg = build_config(cli)?;
    log::info!("running {:?} with {:?}", cli.command, cfg);
    match cli.command {
        Command::Table1 => cmd_table1(&cfg),
        Command::Populations => cmd_populations(&cfg),
        Command::Region => cmd_region(&cfg),
        Command::Invariant => cmd_invariant(&cfg),
        Command::Iterate => cmd_iterate(&cfg),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
