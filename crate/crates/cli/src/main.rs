mod commands;
mod error;
mod io;
mod manifest;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "stpoisson", version, about = "Space-time Poisson intensity estimation", args_override_self = true)]
struct Cli {
    /// JSON object of flag values for the subcommand; explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, env = "STPOISSON_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Partition a border region into zones.
    Discretize(DiscretizeArgs),
    /// Bin an event file into a count sample.
    Aggregate(AggregateArgs),
    /// Generate a synthetic scenario.
    Simulate(SimulateArgs),
    /// Fit a model to a sample.
    Calibrate(CalibrateArgs),
    /// Choose penalty weights by cross-validation and refit.
    Cv(CvArgs),
    /// Sum intensities over zones (and types) per interval.
    Report(ReportArgs),
    /// Transfer a zone attribute to another discretization by area.
    Reallocate(ReallocateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Rect,
    Hex,
    Voronoi,
    Custom,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    EdgeOnly,
    EdgeOrVertex,
}

impl From<Rule> for stpoisson::space::NeighborRule {
    fn from(r: Rule) -> Self {
        match r {
            Rule::EdgeOnly => stpoisson::space::NeighborRule::EdgeOnly,
            Rule::EdgeOrVertex => stpoisson::space::NeighborRule::EdgeOrVertex,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct DiscretizeArgs {
    /// Border polygon(s) as a JSON feature collection.
    #[arg(long)]
    pub border: PathBuf,
    #[arg(long, value_enum)]
    pub method: Method,
    /// Grid columns (rect).
    #[arg(long)]
    pub nx: Option<usize>,
    /// Grid rows (rect).
    #[arg(long)]
    pub ny: Option<usize>,
    /// Hexagons across the shorter side of the bounding box (hex).
    #[arg(long)]
    pub scale: Option<u32>,
    /// CSV of `x,y` sites (voronoi).
    #[arg(long)]
    pub sites: Option<PathBuf>,
    /// Subregion features with numeric properties (custom).
    #[arg(long)]
    pub subregions: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "edge-only")]
    pub neighbor_rule: Rule,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the zones as a feature collection.
    #[arg(long)]
    pub geojson: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct AggregateArgs {
    /// CSV with header `ts,lat,lon,type[,day_class]`.
    #[arg(long)]
    pub events: PathBuf,
    /// Discretization written by `discretize`.
    #[arg(long)]
    pub zones: PathBuf,
    /// Time discretization config (JSON).
    #[arg(long)]
    pub time: PathBuf,
    /// Number of event types; defaults to the largest type plus one.
    #[arg(long)]
    pub types: Option<usize>,
    /// Start of the horizon; defaults to the period anchor before the first event.
    #[arg(long)]
    pub start: Option<String>,
    /// End of the horizon (exclusive); defaults to the end of the last period with events.
    #[arg(long)]
    pub end: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Ex1,
    Ex2,
    Ex3,
    Ex4,
    City,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub scenario: Scenario,
    /// Observations per cell (ordinary days for ex4).
    #[arg(long, default_value_t = 10)]
    pub observations: u32,
    /// Observations of each holiday (ex4).
    #[arg(long, default_value_t = 1)]
    pub holiday_observations: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Weeks of events (city).
    #[arg(long, default_value_t = 8)]
    pub weeks: u32,
    /// Mean events per day (city).
    #[arg(long, default_value_t = 40)]
    pub per_day: u32,
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// Structure of the no-covariate penalty.
#[derive(Debug, Args, Serialize)]
pub struct PenaltyArgs {
    /// Discretization supplying the neighbour pairs.
    #[arg(long)]
    pub zones: Option<PathBuf>,
    /// Recompute neighbours under this rule instead of using the stored ones.
    #[arg(long, value_enum)]
    pub neighbor_rule: Option<Rule>,
    /// Time config whose `groups` define the time penalty, repeated per day class.
    #[arg(long)]
    pub time: Option<PathBuf>,
    /// Group intervals by `t mod P` instead.
    #[arg(long, conflicts_with = "time")]
    pub group_period: Option<usize>,
    #[arg(long, default_value_t = stpoisson::noreg::DEFAULT_EPSILON)]
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantArg {
    FeasibleDirection,
    Boundary,
}

#[derive(Debug, Args, Serialize)]
pub struct OptArgs {
    #[arg(long, default_value_t = 1000)]
    pub max_iters: usize,
    #[arg(long, value_enum, default_value = "feasible-direction")]
    pub variant: VariantArg,
    #[arg(long, default_value_t = 0.5)]
    pub sigma: f64,
    #[arg(long, default_value_t = 2.0)]
    pub delta_bar: f64,
    /// Relative objective decrease over `stall-window` iterations below which to stop; 0 disables.
    #[arg(long, default_value_t = 1e-9)]
    pub stall_tol: f64,
    #[arg(long, default_value_t = 10)]
    pub stall_window: usize,
    /// Upper intensity bound; enables gap stopping.
    #[arg(long)]
    pub lambda_max: Option<f64>,
    #[arg(long, default_value_t = 1e-4)]
    pub gap_eps: f64,
    #[arg(long, default_value_t = 100)]
    pub max_cuts: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelArg {
    Noreg,
    Cov,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Blocks,
    Joint,
}

#[derive(Debug, Args, Serialize)]
pub struct CalibrateArgs {
    /// Sample written by `aggregate` or `simulate`.
    #[arg(long)]
    pub sample: PathBuf,
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[command(flatten)]
    pub penalty: PenaltyArgs,
    /// Weight of both penalties.
    #[arg(long, default_value_t = 0.0)]
    pub weight: f64,
    /// Time-group weight, overriding `weight`.
    #[arg(long)]
    pub time_weight: Option<f64>,
    /// Neighbour weight, overriding `weight`.
    #[arg(long)]
    pub space_weight: Option<f64>,
    /// Start from this constant instead of the empirical rates.
    #[arg(long)]
    pub init_constant: Option<f64>,
    /// CSV `zone_id,x1,...,xK` (cov).
    #[arg(long)]
    pub covariates: Option<PathBuf>,
    /// Coefficient restricted to [0, 1] (cov).
    #[arg(long, default_value_t = 0)]
    pub box_coefficient: usize,
    /// Leave every coefficient unbounded above (cov).
    #[arg(long)]
    pub no_box: bool,
    #[arg(long, value_enum, default_value = "blocks")]
    pub mode: ModeArg,
    #[command(flatten)]
    pub opt: OptArgs,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct CvArgs {
    #[arg(long)]
    pub sample: PathBuf,
    #[command(flatten)]
    pub penalty: PenaltyArgs,
    /// Candidate weights.
    #[arg(long, num_args = 1.., required_unless_present = "weights_file")]
    pub weights_list: Vec<f64>,
    /// File of whitespace-separated candidate weights.
    #[arg(long, conflicts_with = "weights_list")]
    pub weights_file: Option<PathBuf>,
    /// Separate neighbour weights; the grid becomes their product with the time weights.
    #[arg(long, num_args = 1..)]
    pub space_weights_list: Option<Vec<f64>>,
    /// Share of the observations used for training; folds = round(1/p).
    #[arg(long, conflicts_with = "folds")]
    pub cv_proportion: Option<f64>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub opt: OptArgs,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum GroupBy {
    #[value(name = "t")]
    #[serde(rename = "t")]
    T,
    #[value(name = "c,t")]
    #[serde(rename = "c,t")]
    CT,
}

#[derive(Debug, Args, Serialize)]
pub struct ReportArgs {
    /// CSV `c,i,t,lambda`.
    #[arg(long)]
    pub intensities: PathBuf,
    #[arg(long, value_enum, default_value = "t")]
    pub group_by: GroupBy,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ReallocateArgs {
    /// Source discretization.
    #[arg(long)]
    pub from: PathBuf,
    /// Target discretization.
    #[arg(long)]
    pub to: PathBuf,
    #[arg(long)]
    pub attribute: String,
    /// CSV `zone_id,value` overriding the source attribute.
    #[arg(long)]
    pub values: Option<PathBuf>,
    /// Target discretization with the attribute set.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write `zone_id,<attribute>` rows.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

const SUBCOMMANDS: [&str; 7] = ["discretize", "aggregate", "simulate", "calibrate", "cv", "report", "reallocate"];

/// Splices the flags of a `--config` file in right after the subcommand name,
/// so that flags given on the command line override them.
fn expand_config(mut argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let mut path = None;
    let mut k = 1;
    while k < argv.len() {
        let a = argv[k].to_string_lossy().into_owned();
        if a == "--config" {
            if k + 1 >= argv.len() {
                return Err(CliError::Input("--config needs a file".into()));
            }
            path = Some(PathBuf::from(argv.remove(k + 1)));
            argv.remove(k);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
            argv.remove(k);
        } else {
            k += 1;
        }
    }
    let Some(path) = path else { return Ok(argv) };
    let doc: serde_json::Value = io::read_json(&path)?;
    let obj = doc.as_object().ok_or_else(|| CliError::Input(format!("{}: expected a JSON object", path.display())))?;
    let mut extra = Vec::new();
    for (key, v) in obj {
        let flag = OsString::from(format!("--{}", key.replace('_', "-")));
        let scalar = |v: &serde_json::Value| -> Result<OsString, CliError> {
            match v {
                serde_json::Value::String(s) => Ok(s.into()),
                serde_json::Value::Number(n) => Ok(n.to_string().into()),
                _ => Err(CliError::Input(format!("{}: unsupported value for {key}", path.display()))),
            }
        };
        match v {
            serde_json::Value::Null | serde_json::Value::Bool(false) => {}
            serde_json::Value::Bool(true) => extra.push(flag),
            serde_json::Value::Array(items) => {
                extra.push(flag);
                for item in items {
                    extra.push(scalar(item)?);
                }
            }
            other => {
                extra.push(flag);
                extra.push(scalar(other)?);
            }
        }
    }
    let at = argv
        .iter()
        .position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()))
        .ok_or_else(|| CliError::Input("--config needs a subcommand".into()))?;
    argv.splice(at + 1..at + 1, extra);
    Ok(argv)
}

fn run() -> Result<(), CliError> {
    let argv = expand_config(std::env::args_os().collect())?;
    let cli = Cli::parse_from(argv);
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Input("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(CliError::input)?;
    }
    match &cli.cmd {
        Cmd::Discretize(a) => commands::discretize(a),
        Cmd::Aggregate(a) => commands::aggregate(a),
        Cmd::Simulate(a) => commands::simulate(a),
        Cmd::Calibrate(a) => commands::calibrate(a),
        Cmd::Cv(a) => commands::cv(a),
        Cmd::Report(a) => commands::report(a),
        Cmd::Reallocate(a) => commands::reallocate(a),
    }
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
