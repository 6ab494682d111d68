//! End-to-end evaluation of a design under a scenario: demand sampling,
//! optional redesign, ridesharing, fleet autoscaling, budget fitting and
//! simulation.

use serde::Serialize;

use crate::design::{benders_solve, BendersOptions, DesignSolution};
use crate::model::{build_network, DesignParameters, HubPolicy, Location, Mode, NetworkModel, TravelMatrix, Trip};
use crate::par::Execution;
use crate::rideshare::{plan_shuttles, RideshareConfig};
use crate::scenario::{budget_report, sample_demand, vehicle_hourly_cost, BudgetReport, CostModel, Scenario};
use crate::sim::{autoscale_fleet, simulate, SimConfig, SimulationOutput, SimulationReport};
use crate::Result;

/// Everything needed to rebuild the design network, e.g. without buses.
#[derive(Debug, Clone)]
pub struct NetworkInputs {
    pub locations: Vec<Location>,
    pub matrix: TravelMatrix,
    pub hub_policy: HubPolicy,
    pub bus_frequencies: Vec<u32>,
    pub rail_frequencies: Vec<u32>,
}

impl NetworkInputs {
    pub fn build(&self, trips: &[Trip], with_buses: bool) -> Result<NetworkModel> {
        let bus: &[u32] = if with_buses { &self.bus_frequencies } else { &[] };
        build_network(
            self.locations.clone(),
            &self.hub_policy,
            trips,
            bus,
            &self.rail_frequencies,
            self.matrix.clone(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Workflow {
    /// Keep the baseline design; only the shuttle fleet adapts.
    FixedDesign,
    /// Redesign for the scenario with cleaning-inclusive costs.
    Redesign,
}

#[derive(Debug, Clone)]
pub struct EvaluationConfig {
    pub bus_seats: u32,
    pub rail_seats: u32,
    pub max_escalations: usize,
    pub cost: CostModel,
    /// Baseline budget over the horizon; the fleet is capped to fit the
    /// scenario budget when set.
    pub baseline_budget: Option<f64>,
    pub benders: BendersOptions,
    pub rideshare: RideshareConfig,
    pub sim: SimConfig,
    pub execution: Execution,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        EvaluationConfig {
            bus_seats: 50,
            rail_seats: 500,
            max_escalations: 10,
            cost: CostModel::default(),
            baseline_budget: None,
            benders: BendersOptions::default(),
            rideshare: RideshareConfig::default(),
            sim: SimConfig::default(),
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FleetSummary {
    /// Vehicles of the minimum chain cover of the planned shuttle routes.
    pub planned: usize,
    pub autoscaled: usize,
    pub escalations: usize,
    pub healthy: bool,
    pub used: usize,
    pub budget_limited: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostSummary {
    pub excluding_cleaning: f64,
    pub including_cleaning: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvaluationReport {
    pub scenario: Scenario,
    pub workflow: Workflow,
    pub passengers: u32,
    pub fleet: FleetSummary,
    pub budget: Option<BudgetReport>,
    pub cost: CostSummary,
    pub simulation: SimulationReport,
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub report: EvaluationReport,
    pub trips: Vec<Trip>,
    pub network: NetworkModel,
    pub design: DesignSolution,
    pub output: SimulationOutput,
}

/// Group used to keep the bus/rail mix when sampling: whether the trip's
/// path under `design` rides rail.
pub fn rail_group<'a>(design: &'a DesignSolution, network: &'a NetworkModel) -> impl Fn(&Trip) -> bool + 'a {
    move |t: &Trip| {
        design
            .path(&t.id)
            .is_some_and(|p| p.arcs.iter().any(|&a| network.arc(a).mode == Mode::Rail))
    }
}

fn sim_config(scenario: &Scenario, cfg: &EvaluationConfig) -> Result<SimConfig> {
    Ok(SimConfig {
        shuttle_capacity: scenario.shuttle_capacity,
        bus_capacity: scenario.seats(cfg.bus_seats, scenario.bus_capacity_pct),
        rail_capacity: scenario.seats(cfg.rail_seats, scenario.rail_capacity_pct),
        seed: scenario.seed,
        bus_cost_per_hour: vehicle_hourly_cost(Mode::Bus, &cfg.cost, false)?,
        shuttle_cost_per_hour: vehicle_hourly_cost(Mode::Shuttle, &cfg.cost, false)?,
        ..cfg.sim.clone()
    })
}

/// Evaluates `base_design` (solved on `base_trips` over `base_network`)
/// under `scenario`.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_scenario(
    inputs: &NetworkInputs,
    base_network: &NetworkModel,
    base_trips: &[Trip],
    base_design: &DesignSolution,
    params: &DesignParameters,
    scenario: &Scenario,
    workflow: Workflow,
    cfg: &EvaluationConfig,
) -> Result<Evaluation> {
    scenario.validate()?;
    let trips = if scenario.ridership_fraction >= 1.0 {
        base_trips.to_vec()
    } else {
        sample_demand(base_trips, scenario.ridership_fraction, scenario.seed, rail_group(base_design, base_network))?
    };
    let sim_cfg = sim_config(scenario, cfg)?;
    let (network, design) = if !scenario.bus_enabled {
        let network = inputs.build(base_trips, false)?;
        let design = benders_solve(&network, &trips, params, &cfg.benders)?;
        (network, design)
    } else {
        (base_network.clone(), base_design.clone())
    };
    let (network, design) = match workflow {
        Workflow::FixedDesign => (network, design),
        Workflow::Redesign => {
            let probe = run_fleet(&network, &design, &trips, params, scenario, cfg, &sim_cfg)?;
            let miles = probe.output.report.shuttle_miles;
            let shuttle_total = probe.fleet.used as f64
                * vehicle_hourly_cost(Mode::Shuttle, &cfg.cost, scenario.cleaning)?
                * params.horizon_h();
            let mut redesign = params.clone();
            if scenario.cleaning {
                redesign.bus_cost_per_hour += cfg.cost.bus.cleaning_per_hour;
            }
            if miles > 0.0 {
                redesign.shuttle_cost_per_mile_estimate = shuttle_total / miles;
            }
            let design = benders_solve(&network, &trips, &redesign, &cfg.benders)?;
            (network, design)
        }
    };
    let run = run_fleet(&network, &design, &trips, params, scenario, cfg, &sim_cfg)?;
    let buses = run.output.report.buses;
    let cost_at = |cleaning: bool| -> Result<f64> {
        crate::scenario::system_cost(buses, run.fleet.used, params.horizon_h(), &cfg.cost, cleaning)
    };
    let cost = CostSummary {
        excluding_cleaning: cost_at(false)?,
        including_cleaning: cost_at(true)?,
    };
    let report = EvaluationReport {
        scenario: scenario.clone(),
        workflow,
        passengers: trips.iter().map(|t| t.passengers).sum(),
        fleet: run.fleet,
        budget: run.budget,
        cost,
        simulation: run.output.report.clone(),
    };
    Ok(Evaluation { report, trips, network, design, output: run.output })
}

struct FleetRun {
    fleet: FleetSummary,
    budget: Option<BudgetReport>,
    output: SimulationOutput,
}

fn run_fleet(
    network: &NetworkModel,
    design: &DesignSolution,
    trips: &[Trip],
    params: &DesignParameters,
    scenario: &Scenario,
    cfg: &EvaluationConfig,
    sim_cfg: &SimConfig,
) -> Result<FleetRun> {
    let rideshare = RideshareConfig { capacity: scenario.shuttle_capacity, ..cfg.rideshare.clone() };
    let plan = plan_shuttles(design, trips, network, params, &rideshare, cfg.execution)?;
    let auto = autoscale_fleet(network, design, trips, params, plan.fleet.size, cfg.max_escalations, sim_cfg)?;
    let mut fleet = FleetSummary {
        planned: plan.fleet.size,
        autoscaled: auto.fleet,
        escalations: auto.escalations,
        healthy: auto.healthy,
        used: auto.fleet,
        budget_limited: false,
    };
    let mut output = auto.output;
    let budget = match cfg.baseline_budget {
        Some(base) => {
            let b = budget_report(scenario, base, output.report.buses, params.horizon_h(), &cfg.cost)?;
            if b.max_shuttles == 0 {
                return Err(crate::Error::InvalidInput(format!(
                    "scenario {}: the budget leaves no room for shuttles",
                    scenario.name
                )));
            }
            if b.max_shuttles < fleet.used {
                fleet.used = b.max_shuttles;
                fleet.budget_limited = true;
                output = simulate(network, design, trips, params, fleet.used, sim_cfg)?;
            }
            Some(b)
        }
        None => None,
    };
    Ok(FleetRun { fleet, budget, output })
}
