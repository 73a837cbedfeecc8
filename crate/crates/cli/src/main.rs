//! `assist`: headless runs, log summaries and the live session server.

use anyhow::{bail, Context, Result};
use assist_session::ServeOptions;
use clap::{Args, Parser, Subcommand, ValueEnum};
use darboux_assist::sim::{make_route, route_start, run_closed_loop, DriverConfig, RouteKind};
use darboux_assist::telemetry::{read_log, summarize, write_log, LogSource, RunHeader, SCHEMA_VERSION};
use darboux_assist::AssistConfig;
use serde_json::json;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "assist", version, about = "Geometric assistive shared control simulator")]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Headless closed-loop run with the scripted driver (the default).
    Run(RunArgs),
    /// Summarize a recorded log.
    Summarize {
        log: PathBuf,
        /// Route to measure against; defaults to the one in the log header.
        #[arg(long)]
        route: Option<RouteArg>,
        #[arg(long)]
        scale: Option<f64>,
    },
    /// Serve the interactive websocket session.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "figure8")]
        route: RouteArg,
        /// Directory for session recordings.
        #[arg(long, default_value = ".")]
        log_dir: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    #[arg(long, default_value = "figure8")]
    route: RouteArg,
    /// Route size (m); the route's default when omitted.
    #[arg(long)]
    scale: Option<f64>,
    /// Maximum speed v_m (m/s).
    #[arg(long)]
    vmax: Option<f64>,
    /// Blending gain n.
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, default_value = "on")]
    controller: Switch,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Simulated duration (s).
    #[arg(long, default_value_t = 120.0)]
    duration: f64,
    #[arg(long, default_value_t = darboux_assist::sim::DEFAULT_DT)]
    dt: f64,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the full log here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override any config key, e.g. `--set sigma=0.3`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteArg {
    Figure8,
    Spiral,
}

impl From<RouteArg> for RouteKind {
    fn from(r: RouteArg) -> Self {
        match r {
            RouteArg::Figure8 => RouteKind::FigureEight,
            RouteArg::Spiral => RouteKind::Spiral,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Switch {
    On,
    Off,
}

/// Defaults, then the config file, then `ASSIST_*` variables, then
/// `--set` overrides.
fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<AssistConfig> {
    let mut cfg = match path {
        Some(p) => AssistConfig::from_file(p).with_context(|| format!("reading config {}", p.display()))?,
        None => AssistConfig::default(),
    };
    cfg.apply_env(std::env::vars()).context("applying ASSIST_ environment overrides")?;
    for o in overrides {
        cfg.apply_override(o).with_context(|| format!("applying --set {o}"))?;
    }
    Ok(cfg)
}

fn run(args: RunArgs) -> Result<()> {
    let mut cfg = load_config(args.config.as_deref(), &args.overrides)?;
    if let Some(v) = args.vmax {
        cfg.set("v_m", &v.to_string())?;
    }
    if let Some(n) = args.n {
        cfg.controller.n = n;
    }
    cfg.validate()?;

    let kind: RouteKind = args.route.into();
    let scale = args.scale.unwrap_or(kind.default_scale());
    let route = make_route(kind, scale)?;
    let driver = DriverConfig {
        seed: args.seed,
        ..DriverConfig::default()
    };
    let controller_on = args.controller == Switch::On;
    let records = run_closed_loop(&cfg, &route, driver, args.duration, args.dt, controller_on)?;

    if let Some(path) = &args.out {
        let header = RunHeader {
            schema_version: SCHEMA_VERSION,
            source: LogSource::Headless,
            config: cfg,
            controller_on,
            route: kind,
            route_scale: scale,
            driver: Some(driver),
            seed: args.seed,
            dt: args.dt,
            initial_pose: route_start(&route),
            resume: None,
        };
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_log(&header, &records, BufWriter::new(file))?;
        log::info!("wrote {} records to {}", records.len(), path.display());
    }

    let summary = summarize(&records, &route, cfg.controller.v_m)?;
    let out = json!({
        "route": kind,
        "route_scale": scale,
        "controller_on": controller_on,
        "n": cfg.controller.n,
        "v_m": cfg.controller.v_m,
        "seed": args.seed,
        "duration": args.duration,
        "dt": args.dt,
        "records": summary.records,
        "metrics": summary.metrics,
        "violations": summary.violations,
    });
    println!("{out}");
    Ok(())
}

fn summarize_log(path: &Path, route: Option<RouteArg>, scale: Option<f64>) -> Result<()> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let (header, records) = read_log(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))?;
    let kind = route.map(RouteKind::from).unwrap_or(header.route);
    let scale = match (scale, route) {
        (Some(s), _) => s,
        (None, Some(_)) => kind.default_scale(),
        (None, None) => header.route_scale,
    };
    if kind == RouteKind::Custom {
        bail!("log uses a custom route; pass --route to measure against a reference route");
    }
    let r = make_route(kind, scale)?;
    let summary = summarize(&records, &r, header.config.controller.v_m)?;
    let out = json!({
        "log": path,
        "route": kind,
        "route_scale": scale,
        "controller_on": header.controller_on,
        "n": header.config.controller.n,
        "records": summary.records,
        "metrics": summary.metrics,
        "violations": summary.violations,
    });
    println!("{out}");
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        None => run(cli.run),
        Some(Command::Run(args)) => run(args),
        Some(Command::Summarize { log, route, scale }) => summarize_log(&log, route, scale),
        Some(Command::Serve {
            bind,
            config,
            route,
            log_dir,
            overrides,
        }) => {
            let cfg = load_config(config.as_deref(), &overrides)?;
            cfg.validate()?;
            let opts = ServeOptions {
                config: cfg,
                route: route.into(),
                log_dir,
                ..ServeOptions::default()
            };
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(assist_session::serve(&bind, opts))?;
            Ok(())
        }
    }
}
