//! `depol` — simulate controllable polarization-decoherence channels and
//! reconstruct them with quantum process tomography.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// println! that treats a closed stdout (e.g. piping into `head`) as a
/// normal end of output instead of a panic.
macro_rules! outln {
    ($($arg:tt)*) => {
        crate::emit_line(format_args!($($arg)*))
    };
}

pub(crate) fn emit_line(args: std::fmt::Arguments<'_>) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if out.write_fmt(args).and_then(|_| out.write_all(b"\n")).is_err() {
        std::process::exit(0);
    }
}

mod commands;
mod config;
mod io;

/// Failures mapped to the exit-code contract: 2 usage, 3 I/O,
/// 4 reconstruction failure, 5 malformed input data.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Reconstruction(depol::Error),
    Malformed(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Reconstruction(_) => 4,
            CliError::Malformed(_) => 5,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "{m}"),
            CliError::Reconstruction(e) => write!(f, "reconstruction failed: {e}"),
            CliError::Malformed(m) => write!(f, "{m}"),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "depol",
    version,
    about = "Controllable polarization-decoherence channels: theory, sweeps, simulated tomography"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// Channel layout: scheme_I or scheme_II.
    #[arg(long)]
    pub scheme: Option<String>,
    /// Angle in degrees, or magic1 (atan 1/√2 ≈ 35.264°) / magic2
    /// (atan √2 ≈ 54.736°).
    #[arg(long)]
    pub angle: Option<String>,
    /// Sweep grid start:stop:step in degrees (default 0:90:2.5).
    #[arg(long)]
    pub sweep: Option<String>,
    /// Input states separated by `;`: labels h,v,p,m,r,l, mub_a/mub_b/mub_c,
    /// or s1,s2,s3 Stokes triples. A plain comma list of labels also works.
    #[arg(long)]
    pub inputs: Option<String>,
    /// Expected events per basis per projector setting (default 25000).
    #[arg(long)]
    pub exposure: Option<f64>,
    /// RNG seed; required for the stochastic modes.
    #[arg(long)]
    pub seed: Option<u64>,
    /// theory, unital3 or full4 (default theory).
    #[arg(long)]
    pub mode: Option<String>,
    /// Output file path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// json or csv; defaults to the --out extension, else json.
    #[arg(long)]
    pub format: Option<String>,
    /// JSON config file mirroring these flags; explicit flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Ellipsoid grid as LATxLON (default 24x48).
    #[arg(long)]
    pub grid: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the theoretical process matrix, spectrum and ellipsoid radii at
    /// one angle.
    Channel(CommonArgs),
    /// Tabulate eigenvalues and radii over an angle grid (theory or
    /// simulated reconstruction per angle).
    Sweep(CommonArgs),
    /// Simulate counts at one angle and reconstruct the process matrix.
    Tomography(CommonArgs),
    /// Export the image of the Poincaré sphere surface for plotting.
    Ellipsoid(CommonArgs),
    /// Compare two serialized χ matrices (fidelity, spectra, entry gap).
    Compare {
        /// First χ file (JSON or CSV).
        path_a: PathBuf,
        /// Second χ file (JSON or CSV).
        path_b: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Channel(args) => commands::cmd_channel(&config::Experiment::resolve(&args)?),
        Command::Sweep(args) => commands::cmd_sweep(&config::Experiment::resolve(&args)?),
        Command::Tomography(args) => commands::cmd_tomography(&config::Experiment::resolve(&args)?),
        Command::Ellipsoid(args) => commands::cmd_ellipsoid(&config::Experiment::resolve(&args)?),
        Command::Compare { path_a, path_b } => commands::cmd_compare(&path_a, &path_b),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.code())
        }
    }
}
