use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use murel::Result;

mod commands;
mod output;

use output::Format;

#[derive(Parser, Debug)]
#[command(
    name = "murel",
    version,
    about = "Error measures and uncertainty relations for approximate position and momentum observables"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Working grid as `x0,dx,N` (N a power of two); default is ±32 with N = 2048.
    #[arg(long, global = true, env = "MUREL_GRID", value_parser = parse_grid)]
    pub grid: Option<(f64, f64, usize)>,
    #[arg(long, global = true, env = "MUREL_HBAR", default_value_t = 1.0)]
    pub hbar: f64,
    #[arg(long, global = true, env = "MUREL_EPS", default_value_t = 0.05)]
    pub eps: f64,
    #[arg(long, global = true, env = "MUREL_EPS2")]
    pub eps2: Option<f64>,
    /// Probe window width; default two grid steps on the probed axis.
    #[arg(long, global = true, env = "MUREL_DELTA")]
    pub delta: Option<f64>,
    /// Exponent α (accepts `inf` where a sup-distance makes sense).
    #[arg(long, global = true, value_parser = parse_exponent)]
    pub alpha: Option<f64>,
    #[arg(long, global = true, value_parser = parse_exponent)]
    pub beta: Option<f64>,
    #[arg(long, global = true, env = "MUREL_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Width at which estimators report "infinite"; default 40% of the axis range.
    #[arg(long, global = true, env = "MUREL_CUTOFF")]
    pub cutoff: Option<f64>,
    /// Output file; written atomically. Standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, env = "MUREL_FORMAT", value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Spread functionals of one measure file (CSV `x,w`).
    Measure { file: PathBuf },
    /// Wasserstein distance between two measure files.
    Wasserstein {
        a: PathBuf,
        b: PathBuf,
        /// Also solve the transportation LP and report its optimal coupling.
        #[arg(long)]
        exact: bool,
    },
    /// Build a state and emit its position and momentum distributions.
    State {
        /// State description: inline JSON or a path to a JSON file.
        #[arg(long)]
        state: String,
        /// Also write the wave function (pure states only) as CSV `x,re,im`.
        #[arg(long)]
        save_wave: Option<PathBuf>,
    },
    /// Ground-state energy g_αβ of |Q|^α + |P|^β and the constant c_αβ.
    Groundstate {
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Grid points of the default ground-state grid (ignored with --grid).
        #[arg(long, default_value_t = 2048)]
        points: usize,
    },
    /// Evaluate an error or unsharpness functional of an observable.
    Metric {
        kind: MetricKind,
        /// Observable description: inline JSON or a path to a JSON file.
        #[arg(long)]
        observable: String,
        /// Axis of the sharp reference; defaults to the observable's axis.
        #[arg(long, value_enum)]
        axis: Option<AxisArg>,
        /// Ensemble size for distance and noise estimates.
        #[arg(long, default_value_t = 20)]
        ensemble: usize,
        /// Include per-probe widths in error-bar output.
        #[arg(long)]
        trace: bool,
    },
    /// Check one uncertainty relation or the full suite.
    Verify {
        #[arg(long, value_enum, conflicts_with = "relation")]
        suite: Option<SuiteArg>,
        #[arg(long, value_enum)]
        relation: Option<Relation>,
        /// State for preparation and overall-width checks (JSON or path).
        #[arg(long)]
        state: Option<String>,
        /// Generating state τ for covariant checks (JSON or path); default vacuum Gaussian.
        #[arg(long)]
        tau: Option<String>,
    },
    /// Divergence demonstrations.
    Demo { kind: DemoKind },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricKind {
    Distance,
    ErrorBar,
    Resolution,
    Noise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    Position,
    Momentum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Relation {
    Preparation,
    OverallWidth,
    Covariant,
    Metric,
    Noise,
    Connections,
    Pushforward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DemoKind {
    SharpMarginal,
}

fn parse_grid(s: &str) -> std::result::Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected x0,dx,N, got {s:?}"));
    }
    let x0 = parts[0].parse::<f64>().map_err(|e| format!("x0: {e}"))?;
    let dx = parts[1].parse::<f64>().map_err(|e| format!("dx: {e}"))?;
    let n = parts[2].parse::<usize>().map_err(|e| format!("N: {e}"))?;
    Ok((x0, dx, n))
}

fn parse_exponent(s: &str) -> std::result::Result<f64, String> {
    match s.trim() {
        "inf" | "infinity" => Ok(f64::INFINITY),
        t => t.parse::<f64>().map_err(|e| e.to_string()),
    }
}

fn run(cli: Cli) -> Result<()> {
    let c = &cli.common;
    let out = match cli.command {
        Command::Measure { file } => commands::measure(c, &file)?,
        Command::Wasserstein { a, b, exact } => commands::wasserstein_cmd(c, &a, &b, exact)?,
        Command::State { state, save_wave } => commands::state(c, &state, save_wave.as_deref())?,
        Command::Groundstate { tol, points } => commands::groundstate(c, tol, points)?,
        Command::Metric { kind, observable, axis, ensemble, trace } => {
            commands::metric(c, kind, &observable, axis, ensemble, trace)?
        }
        Command::Verify { suite, relation, state, tau } => {
            commands::verify(c, suite.is_some(), relation, state.as_deref(), tau.as_deref())?
        }
        Command::Demo { kind } => commands::demo(c, kind)?,
    };
    let bytes = out.render(c.format)?;
    match &c.out {
        Some(path) => output::write_atomic(path, &bytes),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.class());
            ExitCode::FAILURE
        }
    }
}
