use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use inflation_cli::experiments;
use inflation_cli::{CliError, ExperimentConfig, ExperimentRecord, Overrides};
use inflation_core::calibration::Calibration;

#[derive(Parser)]
#[command(name = "inflation", version, about = "Norm-inflation experiments for forced transport and 2D Euler")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration file; missing sections take their defaults
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Points per side
    #[arg(long, global = true)]
    resolution: Option<usize>,
    /// Side length of the periodic box
    #[arg(long, global = true)]
    period: Option<f64>,
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Only print the PASS/FAIL lines
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Scan the corner response of truncated indicators over N
    Assumption1Scan,
    /// Forced transport inflation along a decreasing eps ladder
    LinearInflation,
    /// Perturbed Euler run against the unforced control
    EulerInflation,
    /// Gradient growth of the advected component in the 2 1/2-D cellular flow
    ExpGrowth,
    /// Pressure Hessian and velocity gradient L^p growth for the C^1 datum
    C1Inflation,
    /// Commutator size against the flow-map distance to the identity
    CommutatorScan,
    /// Re-run the calibration sweep and write calibration.toml
    Calibrate,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Assumption1Scan => "assumption1-scan",
            Command::LinearInflation => "linear-inflation",
            Command::EulerInflation => "euler-inflation",
            Command::ExpGrowth => "exp-growth",
            Command::C1Inflation => "c1-inflation",
            Command::CommutatorScan => "commutator-scan",
            Command::Calibrate => "calibrate",
        }
    }
}

fn execute(cli: &Cli) -> Result<ExperimentRecord, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let name = cli.command.name();
    cfg.apply(name, Overrides { resolution: cli.resolution, period: cli.period, dt: cli.dt });
    cfg.validate()?;
    let hash = cfg.hash();
    let cal = Calibration::frozen();
    let rec = match cli.command {
        Command::Assumption1Scan => experiments::assumption1_scan(&cfg.assumption1, &hash)?,
        Command::LinearInflation => experiments::linear_inflation(&cfg.linear_inflation, &hash, &cal)?,
        Command::EulerInflation => experiments::euler_inflation(&cfg.euler_inflation, &hash)?,
        Command::ExpGrowth => experiments::exp_growth(&cfg.exp_growth, &hash)?,
        Command::C1Inflation => experiments::c1_inflation(&cfg.c1_inflation, &hash, &cal)?,
        Command::CommutatorScan => experiments::commutator_scan(&cfg.commutator_scan, cfg.seed, &hash, &cal)?,
        Command::Calibrate => {
            let (rec, fresh) = experiments::calibrate(&cfg, &hash, &cal)?;
            std::fs::create_dir_all(&cli.out).map_err(|e| CliError::Io(cli.out.display().to_string(), e))?;
            let path = cli.out.join("calibration.toml");
            let text = fresh.to_toml().map_err(|e| CliError::Core { context: "calibration".into(), source: e })?;
            std::fs::write(&path, text).map_err(|e| CliError::Io(path.display().to_string(), e))?;
            rec
        }
    };
    rec.write(&cli.out)?;
    Ok(rec)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(rec) => {
            if !cli.quiet {
                print!("{}", rec.summary());
            }
            for c in rec.checks.iter().filter(|_| cli.quiet) {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if rec.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
