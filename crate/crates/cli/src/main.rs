//! `bsap`: spectra, single-point preparations, and coupling-grid sweeps.

use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use bsap::adiabatic::{Schedule, SteppingMode};
use bsap::experiment::{
    run_point, run_spectrum, run_sweep, write_records, ExperimentConfig, LevelSpec, Method,
    ResultBundle, RunRecord,
};
use bsap::{Error, Parity};

const EXIT_INVALID: u8 = 2;
const EXIT_RESOURCE: u8 = 3;
const EXIT_IO: u8 = 1;

#[derive(Parser)]
#[command(
    name = "bsap",
    version,
    about = "Branched-subspace adiabatic preparation on the XYZ ring"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral flow of H(s) at one coupling point.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        point: Point,
        /// Number of s values covering [0, 1].
        #[arg(long, default_value_t = 101)]
        s_points: usize,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
    },
    /// Full pipeline at one coupling point.
    Prepare {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        point: Point,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
    },
    /// B-SAP over the coupling grid.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Conventional adiabatic preparation over the coupling grid.
    ApBaseline {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "L")]
    num_sites: Option<usize>,
    /// Grid points per ratio axis.
    #[arg(long)]
    grid: Option<usize>,
    /// Trotter steps.
    #[arg(long)]
    steps: Option<usize>,
    /// Step duration in units of 1/Jz.
    #[arg(long)]
    dt: Option<f64>,
    /// Parity sector, +1 or -1.
    #[arg(long, allow_hyphen_values = true)]
    parity: Option<i8>,
    #[arg(long)]
    level_n: Option<usize>,
    #[arg(long)]
    level_rank: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// Also write a JSON bundle with the configuration and records.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Record wall-clock time per cell.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct Point {
    /// Jx / Jz
    #[arg(long, default_value_t = 0.5)]
    jx_ratio: f64,
    /// Jy / Jx
    #[arg(long, default_value_t = 0.5)]
    jy_ratio: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Trotter,
    Exact,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Bsap,
    ApBaseline,
}

#[derive(Debug)]
enum Failure {
    Lib(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn build_config(common: &Common, method: Option<Method>) -> Result<ExperimentConfig, Failure> {
    let mut config = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::new(common.num_sites.unwrap_or(10)),
    };
    if let Some(l) = common.num_sites {
        config.num_sites = l;
    }
    if let Some(m) = method {
        config.method = m;
    }
    if let Some(g) = common.grid {
        config.grid_points = g;
    }
    let mut sched = config
        .schedule
        .unwrap_or_else(|| Schedule::for_ring(config.num_sites));
    if let Some(n) = common.steps {
        sched.num_steps = n;
    }
    if let Some(dt) = common.dt {
        sched.step_duration = dt;
    }
    if let Some(mode) = common.mode {
        sched.mode = match mode {
            ModeArg::Trotter => SteppingMode::Trotter,
            ModeArg::Exact => SteppingMode::Exact,
        };
    }
    if config.schedule.is_some()
        || common.steps.is_some()
        || common.dt.is_some()
        || common.mode.is_some()
    {
        config.schedule = Some(sched);
    }
    if common.parity.is_some() || common.level_n.is_some() || common.level_rank.is_some() {
        let base = config
            .levels
            .first()
            .copied()
            .unwrap_or(LevelSpec::new(0, Parity::Plus, 0));
        let parity = match common.parity {
            Some(p) => Parity::try_from(p).map_err(Error::InvalidConfig)?,
            None => base.parity,
        };
        config.levels = vec![LevelSpec::new(
            common.level_n.unwrap_or(base.n),
            parity,
            common.level_rank.unwrap_or(base.level_rank),
        )];
    }
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(out) = &common.out {
        config.output = Some(out.clone());
    }
    if let Some(w) = common.workers {
        config.workers = Some(w);
    }
    config.timing |= common.timing;
    config.validate()?;
    Ok(config)
}

fn method_of(arg: Option<MethodArg>) -> Option<Method> {
    arg.map(|m| match m {
        MethodArg::Bsap => Method::Bsap,
        MethodArg::ApBaseline => Method::ApBaseline,
    })
}

fn emit_records(
    config: &ExperimentConfig,
    records: &[RunRecord],
    json: Option<&Path>,
) -> Result<(), Failure> {
    match &config.output {
        Some(path) => write_records(records, File::create(path)?)?,
        None => write_records(records, io::stdout().lock())?,
    }
    if let Some(path) = json {
        let bundle = ResultBundle { config, records };
        let text = serde_json::to_string_pretty(&bundle).map_err(|e| Failure::Io(e.to_string()))?;
        std::fs::write(path, text + "\n")?;
    }
    Ok(())
}

/// Appends records to `path`, writing the header only into a new or empty file.
fn append_records(path: &Path, records: &[RunRecord]) -> Result<(), Failure> {
    let fresh = std::fs::metadata(path)
        .map(|m| m.len() == 0)
        .unwrap_or(true);
    let mut buf = Vec::new();
    write_records(records, &mut buf)?;
    let body = if fresh {
        &buf[..]
    } else {
        let header_end = buf
            .iter()
            .position(|&b| b == b'\n')
            .map_or(buf.len(), |k| k + 1);
        &buf[header_end..]
    };
    OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)?
        .write_all(body)?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Spectrum {
            common,
            point,
            s_points,
            method,
        } => {
            let config = build_config(&common, method_of(method))?;
            let flow = run_spectrum(&config, point.jx_ratio, point.jy_ratio, s_points)?;
            match &config.output {
                Some(path) => flow.write_csv(File::create(path)?)?,
                None => flow.write_csv(io::stdout().lock())?,
            }
            for c in &flow.crossings {
                eprintln!(
                    "crossing: s = {:.4}, levels {}-{}, gap {:.3e}",
                    c.s,
                    c.lower,
                    c.lower + 1,
                    c.gap
                );
            }
            if let Some(path) = &common.json {
                let text = serde_json::to_string_pretty(&flow.crossings)
                    .map_err(|e| Failure::Io(e.to_string()))?;
                std::fs::write(path, text + "\n")?;
            }
        }
        Command::Prepare {
            common,
            point,
            method,
        } => {
            let config = build_config(&common, method_of(method))?;
            let records = run_point(&config, point.jx_ratio, point.jy_ratio)?;
            write_records(&records, io::stdout().lock())?;
            if let Some(path) = &config.output {
                append_records(path, &records)?;
            }
            if let Some(path) = &common.json {
                let bundle = ResultBundle {
                    config: &config,
                    records: &records,
                };
                let text = serde_json::to_string_pretty(&bundle)
                    .map_err(|e| Failure::Io(e.to_string()))?;
                std::fs::write(path, text + "\n")?;
            }
        }
        Command::Sweep { common } => {
            let config = build_config(&common, Some(Method::Bsap))?;
            let records = run_sweep(&config)?;
            emit_records(&config, &records, common.json.as_deref())?;
        }
        Command::ApBaseline { common } => {
            let config = build_config(&common, Some(Method::ApBaseline))?;
            let records = run_sweep(&config)?;
            emit_records(&config, &records, common.json.as_deref())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(e @ Error::TooLarge { .. })) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_RESOURCE)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INVALID)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_IO)
        }
    }
}
