use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use rdd_core::experiments::{
    aggregate, fit_loglog_slope, logspace, read_csv, run_fig1_sweep, run_fig2_sweep, run_hahn_sweep, write_csv,
    write_csv_to, Fig1Axis, Fig1Config, Fig1Protocol, Fig2Axis, Fig2Config, HahnConfig, Precision, SweepRecord,
    DEFAULT_FLOOR,
};
use rdd_core::Error;

#[derive(Parser)]
#[command(name = "rdd", version, about = "Deterministic and randomized dynamical decoupling sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fig1AxisArg {
    J,
    Tau,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fig2AxisArg {
    T,
    J,
}

#[derive(Clone, Copy, ValueEnum)]
enum PrecisionArg {
    Double,
    Extended,
}

impl From<PrecisionArg> for Precision {
    fn from(p: PrecisionArg) -> Self {
        match p {
            PrecisionArg::Double => Precision::Double,
            PrecisionArg::Extended => Precision::Extended,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Heisenberg chain with a general 1-local bath: XY4/XY8/CDD, deterministic or randomized.
    Fig1 {
        #[arg(long, value_enum)]
        axis: Fig1AxisArg,
        #[arg(long, value_delimiter = ',', default_value = "xy4,xy8,cdd2,cdd3,cdd4,rand-xy4")]
        protocols: Vec<String>,
        /// `lo,hi,n` (log-spaced); defaults depend on the axis.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long, default_value_t = 20)]
        states: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV path (`-` for stdout).
        #[arg(long)]
        out: PathBuf,
        /// Pulse interval when sweeping J.
        #[arg(long, default_value_t = 1e-3)]
        tau: f64,
        /// Coupling when sweeping tau.
        #[arg(long, default_value_t = 1e-3)]
        j: f64,
        #[arg(long, value_enum, default_value = "extended")]
        precision: PrecisionArg,
        #[arg(long, default_value_t = 4)]
        sys_qubits: usize,
        #[arg(long, default_value_t = 4)]
        bath_qubits: usize,
        /// Draw a new bath for every trial.
        #[arg(long)]
        resample_bath: bool,
        /// Evaluate one randomly drawn branch per trial instead of the exact mixture.
        #[arg(long)]
        sample_branch: bool,
        /// Also couple an identity-channel bath operator through J.
        #[arg(long)]
        identity_coupled: bool,
    },
    /// One qubit with pure-dephasing coupling to two bath qubits: UDD, deterministic and randomized.
    Fig2 {
        #[arg(long, value_enum)]
        axis: Fig2AxisArg,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        orders: Vec<u32>,
        #[arg(long)]
        grid: Option<String>,
        #[arg(long, default_value_t = 20)]
        states: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Coupling when sweeping T.
        #[arg(long, default_value_t = 1.0)]
        j: f64,
        /// Total time when sweeping J.
        #[arg(long, default_value_t = 0.1)]
        t: f64,
        #[arg(long)]
        resample_bath: bool,
        #[arg(long)]
        sample_branch: bool,
    },
    /// Deterministic and randomized Hahn echo versus pulse interval.
    Hahn {
        #[arg(long)]
        grid: Option<String>,
        #[arg(long, default_value_t = 0.1)]
        j: f64,
        #[arg(long, default_value_t = 20)]
        states: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "extended")]
        precision: PrecisionArg,
        #[arg(long, default_value_t = 4)]
        sys_qubits: usize,
        #[arg(long, default_value_t = 4)]
        bath_qubits: usize,
        #[arg(long)]
        sample_branch: bool,
    },
    /// Fits log-log slopes of the trial-averaged error for every curve in a CSV.
    Slopes {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_FLOOR)]
        floor: f64,
    },
}

fn parse_grid(text: Option<&str>, default: Vec<f64>) -> Result<Vec<f64>, Error> {
    let Some(text) = text else {
        return Ok(default);
    };
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let bad = || Error::InvalidArgument(format!("grid must be lo,hi,n, got {text:?}"));
    let [lo, hi, n] = parts.as_slice() else {
        return Err(bad());
    };
    let lo: f64 = lo.parse().map_err(|_| bad())?;
    let hi: f64 = hi.parse().map_err(|_| bad())?;
    let n: usize = n.parse().map_err(|_| bad())?;
    logspace(lo, hi, n)
}

fn emit(records: &[SweepRecord], out: &PathBuf) -> Result<(), Error> {
    if out.as_os_str() == "-" {
        write_csv_to(records, std::io::stdout().lock())
    } else {
        write_csv(records, out)?;
        eprintln!("wrote {} records to {}", records.len(), out.display());
        Ok(())
    }
}

fn slopes(input: &PathBuf, floor: f64) -> Result<(), Error> {
    let records = read_csv(input)?;
    println!(
        "{:<12} {:<12} {:<8} {:>9} {:>9} {:>7}",
        "curve", "error", "x", "slope", "r2", "points"
    );
    for curve in aggregate(&records) {
        let head = format!(
            "{:<12} {:<12} {:<8}",
            curve.key.label(),
            curve.key.error_kind.as_str(),
            curve.axis.as_str()
        );
        match fit_loglog_slope(&curve.mean_points(), floor) {
            Ok(fit) => println!(
                "{head} {:>9.4} {:>9.5} {:>7}",
                fit.slope, fit.r_squared, fit.points_used
            ),
            Err(Error::TooFewPoints { found, .. }) => {
                println!("{head} {:>9} {:>9} {:>7}", "n/a", "n/a", found)
            }
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Fig1 {
            axis,
            protocols,
            grid,
            states,
            seed,
            out,
            tau,
            j,
            precision,
            sys_qubits,
            bath_qubits,
            resample_bath,
            sample_branch,
            identity_coupled,
        } => {
            let axis = match axis {
                Fig1AxisArg::J => Fig1Axis::J,
                Fig1AxisArg::Tau => Fig1Axis::Tau,
            };
            let protocols = protocols
                .iter()
                .map(|p| p.parse::<Fig1Protocol>())
                .collect::<Result<Vec<_>, _>>()?;
            let grid = parse_grid(grid.as_deref(), Fig1Config::default_grid(axis))?;
            let mut cfg = Fig1Config::new(axis, protocols, grid, states, seed);
            cfg.fixed_tau = tau;
            cfg.fixed_j = j;
            cfg.precision = precision.into();
            cfg.n_sys = sys_qubits;
            cfg.n_bath = bath_qubits;
            cfg.resample_bath = resample_bath;
            cfg.sample_branch = sample_branch;
            cfg.identity_coupled = identity_coupled;
            emit(&run_fig1_sweep(&cfg)?, &out)
        }
        Command::Fig2 {
            axis,
            orders,
            grid,
            states,
            seed,
            out,
            j,
            t,
            resample_bath,
            sample_branch,
        } => {
            let axis = match axis {
                Fig2AxisArg::T => Fig2Axis::T,
                Fig2AxisArg::J => Fig2Axis::J,
            };
            let grid = parse_grid(grid.as_deref(), Fig2Config::default_grid(axis))?;
            let mut cfg = Fig2Config::new(axis, orders, grid, states, seed);
            cfg.fixed_j = j;
            cfg.fixed_t = t;
            cfg.resample_bath = resample_bath;
            cfg.sample_branch = sample_branch;
            emit(&run_fig2_sweep(&cfg)?, &out)
        }
        Command::Hahn {
            grid,
            j,
            states,
            seed,
            out,
            precision,
            sys_qubits,
            bath_qubits,
            sample_branch,
        } => {
            let grid = parse_grid(grid.as_deref(), HahnConfig::default_grid())?;
            let mut cfg = HahnConfig::new(grid, j, states, seed);
            cfg.precision = precision.into();
            cfg.n_sys = sys_qubits;
            cfg.n_bath = bath_qubits;
            cfg.sample_branch = sample_branch;
            emit(&run_hahn_sweep(&cfg)?, &out)
        }
        Command::Slopes { input, floor } => slopes(&input, floor),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
