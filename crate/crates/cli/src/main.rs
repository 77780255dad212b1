//! `bellwigner` — scans, solves, simulations, and enumerations from the
//! command line. Angles cross this boundary in degrees; everything inside
//! is radians.

mod checks;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use bellwigner_core::extended::{enumerate_simplex, EnumerationMode};
use bellwigner_core::inequality::scan_grid;
use bellwigner_core::quantum::{AngleConfig, Convention, Correlation};
use bellwigner_core::simulation::{simulate_counts, Assignment, TrialConfig};
use bellwigner_core::Error as CoreError;

#[derive(Parser)]
#[command(
    name = "bellwigner",
    version,
    about = "Three-setting Bell/Wigner inequality margins, triple-probability feasibility, \
             counting simulations, and detection-model enumeration",
    after_help = "Angles are given in degrees. Grids cover [0°, 180°) in θ2 and θ3 with θ1 = 0; \
                  all closed forms are 180°-periodic in each angle difference. Exit codes: \
                  0 success, 1 usage error, 2 numerical inconsistency or failed check, 3 I/O failure."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the (θ2, θ3) grid: Bell/Wigner margins, feasibility intervals,
    /// CSV and PGM output
    Scan(ScanArgs),
    /// Reconstruct the triple joint distribution at one angle pair
    Solve(SolveArgs),
    /// Simulate the counting experiment and report every estimator reading
    Simulate(SimulateArgs),
    /// Enumerate (or sample) discretized detection-model distributions
    Enumerate(EnumerateArgs),
    /// Run the library's property suites
    Check(CheckArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ConventionArg {
    Photon,
    Electron,
}

#[derive(Clone, Copy, ValueEnum)]
enum CorrelationArg {
    Negative,
    Positive,
}

impl From<ConventionArg> for Convention {
    fn from(value: ConventionArg) -> Convention {
        match value {
            ConventionArg::Photon => Convention::Photon,
            ConventionArg::Electron => Convention::Electron,
        }
    }
}

impl From<CorrelationArg> for Correlation {
    fn from(value: CorrelationArg) -> Correlation {
        match value {
            CorrelationArg::Negative => Correlation::Negative,
            CorrelationArg::Positive => Correlation::Positive,
        }
    }
}

/// `equal`, `random`, or `weighted:w12,w13,w23`.
#[derive(Clone, Copy, Debug)]
struct AssignmentArg(Assignment);

impl FromStr for AssignmentArg {
    type Err = String;

    fn from_str(s: &str) -> Result<AssignmentArg, String> {
        match s {
            "equal" => Ok(AssignmentArg(Assignment::EqualSplit)),
            "random" => Ok(AssignmentArg(Assignment::RandomUniform)),
            _ => {
                let spec = s
                    .strip_prefix("weighted:")
                    .ok_or("expected equal, random, or weighted:w12,w13,w23")?;
                let parts: Vec<&str> = spec.split(',').collect();
                if parts.len() != 3 {
                    return Err("weighted assignment needs three comma-separated weights".into());
                }
                let mut weights = [0.0f64; 3];
                for (slot, part) in weights.iter_mut().zip(parts) {
                    *slot = part.parse().map_err(|_| format!("bad weight '{part}'"))?;
                }
                Ok(AssignmentArg(Assignment::Weighted(weights)))
            }
        }
    }
}

/// `full` or `sample:<count>`.
#[derive(Clone, Copy, Debug)]
enum ModeArg {
    Full,
    Sample(u64),
}

impl FromStr for ModeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<ModeArg, String> {
        if s == "full" {
            return Ok(ModeArg::Full);
        }
        let count = s
            .strip_prefix("sample:")
            .ok_or("expected full or sample:<count>")?;
        Ok(ModeArg::Sample(
            count
                .parse()
                .map_err(|_| format!("bad sample count '{count}'"))?,
        ))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PgmChannel {
    Bell,
    Wigner1,
    Wigner2,
    UnionCheck,
}

#[derive(Args)]
struct ScanArgs {
    /// Grid step in degrees
    #[arg(long)]
    step_deg: f64,
    #[arg(long, value_enum, default_value = "photon")]
    convention: ConventionArg,
    #[arg(long, value_enum, default_value = "negative")]
    correlation: CorrelationArg,
    /// Worker threads; the output is identical for any count
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Scan CSV path
    #[arg(long)]
    out: Option<PathBuf>,
    /// Heatmap PGM path
    #[arg(long)]
    pgm: Option<PathBuf>,
    /// Which margin the PGM renders
    #[arg(long, value_enum, default_value = "bell")]
    pgm_channel: PgmChannel,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    theta2_deg: f64,
    #[arg(long)]
    theta3_deg: f64,
    #[arg(long, value_enum, default_value = "photon")]
    convention: ConventionArg,
    #[arg(long, value_enum, default_value = "negative")]
    correlation: CorrelationArg,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    theta2_deg: f64,
    #[arg(long)]
    theta3_deg: f64,
    /// Number of trials
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "equal")]
    assignment: AssignmentArg,
    #[arg(long, value_enum, default_value = "photon")]
    convention: ConventionArg,
    #[arg(long, value_enum, default_value = "negative")]
    correlation: CorrelationArg,
    /// Count-table CSV path
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EnumerateArgs {
    /// Probabilities take values k/denominator
    #[arg(long)]
    denominator: u32,
    #[arg(long, default_value = "full")]
    mode: ModeArg,
    /// Seed for sample mode
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; the output is identical for any count
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Histogram CSV path
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    All,
    Quantum,
    Inequality,
    Feasibility,
    Simulation,
    Extended,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, value_enum, default_value = "all")]
    suite: Suite,
}

#[derive(Debug, thiserror::Error)]
enum AppError {
    #[error("{0}")]
    Core(#[from] CoreError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("{0} check(s) failed")]
    ChecksFailed(usize),
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Usage(_) => 1,
            AppError::Io { .. } => 3,
            AppError::ChecksFailed(_) => 2,
            AppError::Core(core) => match core {
                CoreError::InconsistentMarginals { .. }
                | CoreError::NotNormalized { .. }
                | CoreError::ExpectationOutOfRange(_)
                | CoreError::NegativeEntry { .. } => 2,
                _ => 1,
            },
        }
    }
}

fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> AppError + '_ {
    move |source| AppError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests arrive as "errors" but succeed.
            if err.use_stderr() {
                eprint!("{err}");
                return ExitCode::from(1);
            }
            print!("{err}");
            return ExitCode::SUCCESS;
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Scan(args) => run_scan(args),
        Command::Solve(args) => run_solve(args),
        Command::Simulate(args) => run_simulate(args),
        Command::Enumerate(args) => run_enumerate(args),
        Command::Check(args) => run_check(args),
    }
}

fn run_scan(args: ScanArgs) -> Result<(), AppError> {
    if args.out.is_none() && args.pgm.is_none() {
        return Err(AppError::Usage(
            "scan needs at least one of --out or --pgm".into(),
        ));
    }
    let map = scan_grid(
        args.step_deg.to_radians(),
        args.convention.into(),
        args.correlation.into(),
        args.threads,
    )?;
    if let Some(path) = &args.out {
        output::write_scan_csv(&map, path).map_err(io_err(path))?;
    }
    if let Some(path) = &args.pgm {
        output::write_pgm(&map, args.pgm_channel, path).map_err(io_err(path))?;
    }
    Ok(())
}

fn run_solve(args: SolveArgs) -> Result<(), AppError> {
    let config = AngleConfig::from_degrees(
        0.0,
        args.theta2_deg,
        args.theta3_deg,
        args.convention.into(),
        args.correlation.into(),
    );
    let report = output::solve_report(&config)?;
    print!("{report}");
    Ok(())
}

fn run_simulate(args: SimulateArgs) -> Result<(), AppError> {
    let config = AngleConfig::from_degrees(
        0.0,
        args.theta2_deg,
        args.theta3_deg,
        args.convention.into(),
        args.correlation.into(),
    );
    let tc = TrialConfig::new(config, args.n, args.assignment.0, args.seed)?;
    let table = simulate_counts(&tc)?;
    if let Some(path) = &args.out {
        let mut file = std::fs::File::create(path).map_err(io_err(path))?;
        table.write_csv(&mut file).map_err(io_err(path))?;
    }
    print!("{}", output::simulate_report(&tc, &table)?);
    Ok(())
}

fn run_enumerate(args: EnumerateArgs) -> Result<(), AppError> {
    let mode = match args.mode {
        ModeArg::Full => EnumerationMode::Full,
        ModeArg::Sample(count) => EnumerationMode::Sample {
            count,
            seed: args.seed,
        },
    };
    let summary = enumerate_simplex(args.denominator, mode, args.threads)?;
    println!("tuples,min_margin_numerator,denominator");
    println!(
        "{},{},{}",
        summary.tuples, summary.min_margin_num, summary.denominator
    );
    if let Some(path) = &args.out {
        let mut file = std::fs::File::create(path).map_err(io_err(path))?;
        summary
            .histogram
            .write_csv(&mut file)
            .map_err(io_err(path))?;
    }
    Ok(())
}

fn run_check(args: CheckArgs) -> Result<(), AppError> {
    let failures = checks::run(args.suite);
    if failures > 0 {
        return Err(AppError::ChecksFailed(failures));
    }
    Ok(())
}
