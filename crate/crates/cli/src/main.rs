//! `odmts`: batch front end for demand estimation, network design, scenario
//! evaluation and cost/budget arithmetic.
//!
//! Exit codes: 0 success, 2 input error, 3 solver stopped before proving
//! optimality, 4 service-level failure (stranded passengers).

mod config;

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use odmts::design::{benders_solve, read_design, write_design, write_trace, DesignStatus};
use odmts::dispatch::write_dispatch_log;
use odmts::model::io::{read_locations, read_matrix, read_trips, write_trips};
use odmts::model::{Location, Mode, NetworkModel, TravelMatrix, Trip};
use odmts::od::{estimate_od, read_apc, read_transactions, write_diagnostics};
use odmts::pipeline::{evaluate_scenario, NetworkInputs, Workflow};
use odmts::scenario::{budget_report, system_cost, CostModel, HourlyCost};
use odmts::sim::{write_occupancy, write_passengers, write_road_usage};

use config::{pick, PipelineConfig};

#[derive(Parser)]
#[command(name = "odmts", version, about = "On-demand multimodal transit design and evaluation")]
struct Cli {
    /// Pipeline configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate trips from fare transactions and passenger counts.
    Estimate(EstimateArgs),
    /// Design the network (bus arcs and trip paths).
    Design(DesignArgs),
    /// Evaluate a design under a scenario by simulation.
    Evaluate(EvaluateArgs),
    /// Hourly vehicle costs and the system cost of a fleet.
    Cost(CostArgs),
    /// Scenario budgets and the largest affordable shuttle fleet.
    Budget(BudgetArgs),
}

#[derive(Args)]
struct NetworkArgs {
    #[arg(long)]
    locations: Option<PathBuf>,
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(long)]
    trips: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    transactions: Option<PathBuf>,
    #[arg(long)]
    apc: Option<PathBuf>,
    #[arg(long)]
    locations: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DesignArgs {
    #[command(flatten)]
    network: NetworkArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    network: NetworkArgs,
    /// Baseline design; solved from the trips when absent.
    #[arg(long)]
    design: Option<PathBuf>,
    #[arg(long, default_value = "baseline")]
    scenario: String,
    /// Keep the baseline design and adapt only the shuttle fleet (default).
    #[arg(long, conflicts_with = "redesign")]
    fixed_design: bool,
    /// Redesign the network for the scenario.
    #[arg(long)]
    redesign: bool,
    /// Baseline budget over the horizon; caps the fleet to the scenario budget.
    #[arg(long)]
    baseline_budget: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CostArgs {
    #[arg(long, default_value_t = 0)]
    buses: u32,
    #[arg(long, default_value_t = 0)]
    shuttles: usize,
    #[arg(long)]
    hours: Option<f64>,
    #[arg(long)]
    cleaning: bool,
}

#[derive(Args)]
struct BudgetArgs {
    /// Baseline bus and shuttle budget over the horizon, in dollars.
    #[arg(long)]
    baseline: f64,
    /// Buses the scenario keeps running.
    #[arg(long)]
    buses: u32,
    /// Scenario names; every configured scenario when omitted.
    #[arg(long)]
    scenario: Vec<String>,
    #[arg(long)]
    hours: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, PartialEq)]
enum Outcome {
    Done,
    NotConverged,
    ServiceFailure,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let threads = cli.threads;
    let result = odmts::par::with_threads(threads, move || run(cli));
    match result.map_err(anyhow::Error::from).and_then(|r| r) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::NotConverged) => ExitCode::from(3),
        Ok(Outcome::ServiceFailure) => ExitCode::from(4),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    let cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    match cli.command {
        Command::Estimate(a) => estimate(&cfg, a),
        Command::Design(a) => design(&cfg, a),
        Command::Evaluate(a) => evaluate(&cfg, a),
        Command::Cost(a) => cost(&cfg, a),
        Command::Budget(a) => budget(&cfg, a),
    }
}

fn out_dir(flag: &Option<PathBuf>, cfg: &PipelineConfig) -> Result<PathBuf> {
    let dir = flag.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    Ok(dir)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(dir.join(name), text)?;
    Ok(())
}

fn estimate(cfg: &PipelineConfig, a: EstimateArgs) -> Result<Outcome> {
    let transactions = read_transactions(&pick(&a.transactions, &cfg.inputs.transactions, "transactions")?)?;
    let apc = read_apc(&pick(&a.apc, &cfg.inputs.apc, "apc")?)?;
    let locations = read_locations(&pick(&a.locations, &cfg.inputs.locations, "locations")?)?;
    let mut od = cfg.od_config();
    if let Some(seed) = a.seed {
        od.seed = seed;
    }
    let est = estimate_od(&transactions, &apc, &locations, &od)?;
    let dir = out_dir(&a.out, cfg)?;
    write_trips(create(&dir, "trips.csv")?, &est.trips)?;
    write_diagnostics(create(&dir, "diagnostics.json")?, &est.diagnostics)?;
    log::info!("{} journeys in {} trips", est.diagnostics.journeys, est.trips.len());
    Ok(Outcome::Done)
}

struct Loaded {
    inputs: NetworkInputs,
    trips: Vec<Trip>,
    network: NetworkModel,
}

fn load_network(cfg: &PipelineConfig, a: &NetworkArgs) -> Result<Loaded> {
    let locations = read_locations(&pick(&a.locations, &cfg.inputs.locations, "locations")?)?;
    let trips = read_trips(&pick(&a.trips, &cfg.inputs.trips, "trips")?)?;
    let matrix = match a.matrix.clone().or_else(|| cfg.inputs.matrix.clone()) {
        Some(p) => read_matrix(&p, &locations)?,
        None => coordinate_matrix(&locations),
    };
    let inputs = NetworkInputs {
        locations,
        matrix,
        hub_policy: cfg.network.hub_policy(),
        bus_frequencies: cfg.network.bus_frequencies.clone(),
        rail_frequencies: cfg.network.rail_frequencies.clone(),
    };
    let network = inputs.build(&trips, true)?;
    Ok(Loaded { inputs, trips, network })
}

fn coordinate_matrix(locations: &[Location]) -> TravelMatrix {
    log::info!("no travel matrix given; using coordinates");
    odmts::synth::travel_matrix(locations)
}

fn design(cfg: &PipelineConfig, a: DesignArgs) -> Result<Outcome> {
    let l = load_network(cfg, &a.network)?;
    let sol = benders_solve(&l.network, &l.trips, &cfg.design, &cfg.solver.benders())?;
    let dir = out_dir(&a.out, cfg)?;
    write_design(&dir.join("design.json"), &sol, &l.network, &cfg.design)?;
    write_trace(create(&dir, "benders_trace.csv")?, &sol.trace)?;
    Ok(match sol.status {
        DesignStatus::Optimal => Outcome::Done,
        DesignStatus::IterationLimit => {
            log::warn!("iteration limit reached; wrote the incumbent design");
            Outcome::NotConverged
        }
    })
}

fn evaluate(cfg: &PipelineConfig, a: EvaluateArgs) -> Result<Outcome> {
    let l = load_network(cfg, &a.network)?;
    let scenario = cfg.scenario(&a.scenario)?;
    let mut eval_cfg = cfg.evaluation_config();
    if a.baseline_budget.is_some() {
        eval_cfg.baseline_budget = a.baseline_budget;
    }
    let base = match a.design.clone().or_else(|| cfg.inputs.design.clone()) {
        Some(p) => read_design(&p, &l.network)?,
        None => benders_solve(&l.network, &l.trips, &cfg.design, &eval_cfg.benders)?,
    };
    let workflow = if a.redesign { Workflow::Redesign } else { Workflow::FixedDesign };
    let ev = evaluate_scenario(&l.inputs, &l.network, &l.trips, &base, &cfg.design, &scenario, workflow, &eval_cfg)?;

    let dir = out_dir(&a.out, cfg)?;
    write_json(&dir, "report.json", &ev.report)?;
    write_design(&dir.join("design.json"), &ev.design, &ev.network, &cfg.design)?;
    write_passengers(create(&dir, "passengers.csv")?, &ev.output.passengers)?;
    write_occupancy(create(&dir, "occupancy.csv")?, &ev.output.occupancy)?;
    write_road_usage(create(&dir, "roadusage.geojson")?, &ev.output.road_usage, &ev.network)?;
    write_dispatch_log(create(&dir, "dispatch_log.csv")?, &ev.output.dispatch_log)?;

    let sim = &ev.report.simulation;
    if sim.stranded > 0 {
        log::error!("{} passengers stranded", sim.stranded);
        return Ok(Outcome::ServiceFailure);
    }
    if base.status != DesignStatus::Optimal || ev.design.status != DesignStatus::Optimal {
        return Ok(Outcome::NotConverged);
    }
    Ok(Outcome::Done)
}

#[derive(Serialize)]
struct CostOutput {
    cleaning: bool,
    horizon_h: f64,
    bus: HourlyCost,
    bus_per_hour: f64,
    shuttle: HourlyCost,
    shuttle_per_hour: f64,
    buses: u32,
    shuttles: usize,
    system_cost: f64,
}

fn cost(cfg: &PipelineConfig, a: CostArgs) -> Result<Outcome> {
    let model: &CostModel = &cfg.cost;
    let horizon_h = a.hours.unwrap_or_else(|| cfg.design.horizon_h());
    let bus = model.hourly(Mode::Bus, a.cleaning)?;
    let shuttle = model.hourly(Mode::Shuttle, a.cleaning)?;
    let out = CostOutput {
        cleaning: a.cleaning,
        horizon_h,
        bus_per_hour: bus.total(),
        bus,
        shuttle_per_hour: shuttle.total(),
        shuttle,
        buses: a.buses,
        shuttles: a.shuttles,
        system_cost: system_cost(a.buses, a.shuttles, horizon_h, model, a.cleaning)?,
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(Outcome::Done)
}

fn budget(cfg: &PipelineConfig, a: BudgetArgs) -> Result<Outcome> {
    let horizon_h = a.hours.unwrap_or_else(|| cfg.design.horizon_h());
    let scenarios = if a.scenario.is_empty() {
        if cfg.scenarios.is_empty() {
            anyhow::bail!("no scenarios configured; pass --scenario");
        }
        cfg.scenarios.clone()
    } else {
        a.scenario.iter().map(|n| cfg.scenario(n)).collect::<Result<_>>()?
    };
    let reports = scenarios
        .iter()
        .map(|s| budget_report(s, a.baseline, a.buses, horizon_h, &cfg.cost))
        .collect::<odmts::Result<Vec<_>>>()?;
    let dir = out_dir(&a.out, cfg)?;
    write_json(&dir, "budget_report.json", &reports)?;
    Ok(Outcome::Done)
}
