//! `nh3pt`: command-line front end for the ammonia powertrain models.
//!
//! Exit codes: 0 success, 1 infeasible or failed run, 2 configuration or
//! usage error. Failures print a JSON object on standard error.

mod figures;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nh3_powertrain::config::RunConfig;
use nh3_powertrain::explore::{build_map, curve_by, sizing_sweep, Grid};
use nh3_powertrain::recovery::Measure;
use nh3_powertrain::system::{evaluate, Topology};
use nh3_powertrain::{Error, Stage};
use serde::Serialize;

use output::{Output, OUTPUT_DIR_ENV};

#[derive(Parser, Debug)]
#[command(name = "nh3pt", version, about = "Efficiency of ammonia-fuelled power systems with residual heat recovery")]
struct Cli {
    /// Run configuration (TOML); the shipped calibration when omitted.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Output directory for files. Defaults to $NH3PT_OUTPUT_DIR, then `out`.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    /// Only print warnings and errors.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Select {
    /// Overrides the configuration's topology.
    #[arg(long, value_parser = parse_topology)]
    topology: Option<Topology>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate one operating point and print it as JSON.
    Point {
        #[command(flatten)]
        select: Select,
        /// Overrides the configuration's recovery measure.
        #[arg(long, value_parser = parse_measure)]
        measure: Option<Measure>,
        /// Generator output, kW.
        #[arg(long, default_value_t = 0.0)]
        wgen: f64,
        /// Fuel-cell output, kW.
        #[arg(long, default_value_t = 0.0)]
        wfc: f64,
    },
    /// Efficiency map over the setpoint grid.
    Map {
        #[command(flatten)]
        select: Select,
        /// Overrides the configuration's recovery measure.
        #[arg(long, value_parser = parse_measure)]
        measure: Option<Measure>,
        /// Generator axis: `a,b,c` or `lo:step:hi`, kW. Defaults to the envelope.
        #[arg(long)]
        gen: Option<String>,
        /// Fuel-cell axis, same forms as `--gen`.
        #[arg(long)]
        fc: Option<String>,
    },
    /// Optimal power-split curves.
    Curve {
        #[command(flatten)]
        select: Select,
        /// Measures to write; all four when omitted.
        #[arg(long, value_parser = parse_measure, num_args = 1..)]
        measure: Vec<Measure>,
    },
    /// Engine-sizing sweep at fixed total rated power.
    Sweep {
        /// Total rated power, kW.
        #[arg(long)]
        total: Option<f64>,
        /// Comma-separated r_ICE values.
        #[arg(long, value_delimiter = ',')]
        r: Option<Vec<f64>>,
    },
    /// Figure data under the configuration: fig6, fig8, fig9, fig10, fig11, fig14, fig15 or all.
    Fig { id: String },
    /// Print the resolved configuration as TOML.
    Config {
        #[command(flatten)]
        select: Select,
    },
}

fn parse_topology(s: &str) -> Result<Topology, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_measure(s: &str) -> Result<Measure, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Serialize)]
pub struct CliError {
    #[serde(skip)]
    code: u8,
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    stage: Option<Stage>,
    message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> CliError {
        CliError {
            code: 2,
            kind: "config",
            stage: None,
            message: message.into(),
        }
    }

    pub fn io(e: impl std::fmt::Display) -> CliError {
        CliError {
            code: 1,
            kind: "io",
            stage: None,
            message: e.to_string(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        let (code, kind, stage) = match &e {
            Error::Infeasible { stage, .. } => (1, "infeasible", Some(*stage)),
            Error::Config(_) => (2, "config", None),
            Error::InvalidArgument(_) => (2, "argument", None),
            Error::Numerical(_) => (1, "numerical", None),
            Error::Calibration(_) => (1, "calibration", None),
            Error::TemperatureRange { .. } | Error::UnsupportedSpecies(_) => (1, "property", None),
        };
        CliError {
            code,
            kind,
            stage,
            message: e.to_string(),
        }
    }
}

fn load(cli: &Cli, topology: Option<Topology>) -> Result<RunConfig, CliError> {
    Ok(match &cli.config {
        Some(path) => RunConfig::load(path, topology)?,
        None => RunConfig::shipped(topology.unwrap_or(Topology::Composite))?,
    })
}

fn output_dir(cli: &Cli) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// `a,b,c` or `lo:step:hi` (inclusive of `hi` when it lands on the ladder).
fn parse_axis(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::config(format!("bad axis {spec:?}; expected `a,b,c` or `lo:step:hi`"));
    let nums = |parts: &[&str]| parts.iter().map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<Vec<_>, _>>();
    if spec.contains(':') {
        let v = nums(&spec.split(':').collect::<Vec<_>>())?;
        let [lo, step, hi] = v[..] else { return Err(bad()) };
        if !(step > 0.0 && hi >= lo) {
            return Err(bad());
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        Ok((0..=n).map(|k| lo + k as f64 * step).collect())
    } else {
        nums(&spec.split(',').collect::<Vec<_>>())
    }
}

fn print_paths(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let dir = output_dir(cli);
    match &cli.command {
        Command::Point { select, measure, wgen, wfc } => {
            let mut cfg = load(cli, select.topology)?;
            if let Some(m) = measure {
                cfg.system.measure = *m;
            }
            let r = evaluate(&cfg.system, *wgen, *wfc)?;
            let mut v = serde_json::to_value(&r).map_err(CliError::io)?;
            if let Some(obj) = v.as_object_mut() {
                obj.insert("config_fingerprint".into(), cfg.fingerprint()?.into());
            }
            println!("{}", serde_json::to_string_pretty(&v).map_err(CliError::io)?);
        }
        Command::Map { select, measure, gen, fc } => {
            let mut cfg = load(cli, select.topology)?;
            if let Some(m) = measure {
                cfg.system.measure = *m;
            }
            let mut grid = Grid::envelope(&cfg.system, cfg.explore.step_kw)?;
            if let Some(g) = gen {
                grid.w_gen_kw = parse_axis(g)?;
            }
            if let Some(f) = fc {
                grid.w_fc_kw = parse_axis(f)?;
            }
            let map = build_map(&cfg.system, &grid)?;
            let mut out = Output::new(&dir, cfg.fingerprint()?)?;
            let stem = format!("map_{}", cfg.system.measure);
            figures::write_map(&map, &mut out, &format!("{stem}.csv"))?;
            print_paths(&out.finish("map", &stem)?);
        }
        Command::Curve { select, measure } => {
            let mut cfg = load(cli, select.topology)?;
            let measures = if measure.is_empty() { Measure::ALL.to_vec() } else { measure.clone() };
            let grid = Grid::envelope(&cfg.system, cfg.explore.step_kw)?;
            let mut out = Output::new(&dir, cfg.fingerprint()?)?;
            for m in measures {
                cfg.system.measure = m;
                let curve = curve_by(&build_map(&cfg.system, &grid)?, cfg.explore.split_rule);
                figures::write_curve(&curve, &mut out, &format!("curve_{m}.csv"))?;
            }
            print_paths(&out.finish("curve", "curve")?);
        }
        Command::Sweep { total, r } => {
            let mut cfg = load(cli, Some(Topology::Composite))?;
            if let Some(t) = total {
                cfg.explore.sweep_total_kw = *t;
            }
            if let Some(r) = r {
                cfg.explore.sweep_r_values = r.clone();
            }
            cfg.explore.validate()?;
            let rows = sizing_sweep(&cfg.system, &cfg.explore.sweep_r_values, cfg.explore.sweep_total_kw, &cfg.explore)?;
            for w in rows.iter().flat_map(|r| &r.warnings) {
                log::warn!("{w}");
            }
            let mut out = Output::new(&dir, cfg.fingerprint()?)?;
            figures::write_sweep(&rows, &mut out, "sweep.csv")?;
            print_paths(&out.finish("sweep", "sweep")?);
        }
        Command::Fig { id } => {
            let ids: Vec<&str> = if id == "all" { figures::FIGURES.to_vec() } else { vec![id.as_str()] };
            for id in ids {
                if !figures::FIGURES.contains(&id) {
                    return Err(CliError::config(format!(
                        "unknown figure {id:?}; expected one of {} or all",
                        figures::FIGURES.join(", ")
                    )));
                }
                let cfg = load(cli, figures::figure_topology(id))?;
                let mut out = Output::new(&dir, cfg.fingerprint()?)?;
                figures::run(id, &cfg, &mut out)?;
                print_paths(&out.finish("fig", id)?);
            }
        }
        Command::Config { select } => {
            print!("{}", load(cli, select.topology)?.to_toml_string()?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .format_target(false)
        .init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let body = serde_json::json!({ "error": &e });
            eprintln!("{body}");
            ExitCode::from(e.code)
        }
    }
}
