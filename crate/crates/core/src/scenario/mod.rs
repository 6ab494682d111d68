//! Pandemic scenarios, demand sampling and the bus/shuttle cost and budget
//! model.

mod cost;

use std::collections::BTreeMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use cost::{
    fit_fleet_to_budget, scenario_budget, system_cost, vehicle_hourly_cost, BusCost, CostModel, HourlyCost,
    ShuttleCost,
};

use crate::model::Trip;
use crate::{Error, Result};

/// Demand level, vehicle capacities and funding of one evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Scenario {
    pub name: String,
    pub ridership_fraction: f64,
    pub shuttle_capacity: u32,
    /// Bus seats as a percentage of the baseline.
    pub bus_capacity_pct: f64,
    pub rail_capacity_pct: f64,
    pub bus_enabled: bool,
    pub cleaning: bool,
    pub fare_share: f64,
    pub opex_share: f64,
    pub seed: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario::baseline()
    }
}

impl Scenario {
    pub fn baseline() -> Self {
        Scenario {
            name: "baseline".into(),
            ridership_fraction: 1.0,
            shuttle_capacity: 4,
            bus_capacity_pct: 100.0,
            rail_capacity_pct: 100.0,
            bus_enabled: true,
            cleaning: false,
            fare_share: 0.33,
            opex_share: 0.92,
            seed: 0,
        }
    }

    pub fn early_pandemic() -> Self {
        Scenario {
            name: "early-pandemic".into(),
            ridership_fraction: 0.45,
            shuttle_capacity: 1,
            bus_capacity_pct: 50.0,
            rail_capacity_pct: 50.0,
            cleaning: true,
            ..Scenario::baseline()
        }
    }

    pub fn late_pandemic() -> Self {
        Scenario {
            name: "late-pandemic".into(),
            ridership_fraction: 0.24,
            ..Scenario::early_pandemic()
        }
    }

    pub fn strict_late_pandemic() -> Self {
        Scenario {
            name: "strict-late-pandemic".into(),
            bus_capacity_pct: 0.0,
            rail_capacity_pct: 25.0,
            bus_enabled: false,
            ..Scenario::late_pandemic()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(format!("scenario {}: {m}", self.name)));
        if !(self.ridership_fraction > 0.0 && self.ridership_fraction <= 1.0) {
            return bad("ridership fraction must lie in (0, 1]".into());
        }
        if self.shuttle_capacity == 0 {
            return bad("shuttle capacity must be positive".into());
        }
        if self.bus_capacity_pct < 0.0 || self.rail_capacity_pct < 0.0 {
            return bad("capacities must be nonnegative".into());
        }
        if !(0.0..=1.0).contains(&self.fare_share) || !(0.0..=1.0).contains(&self.opex_share) {
            return bad("fare and operating shares must lie in [0, 1]".into());
        }
        Ok(())
    }

    /// Seats per vehicle given the baseline seats.
    pub fn seats(&self, baseline: u32, pct: f64) -> u32 {
        (f64::from(baseline) * pct / 100.0 + 1e-9).floor() as u32
    }

    pub fn budget(&self, baseline: f64) -> Result<f64> {
        scenario_budget(baseline, self.ridership_fraction, self.fare_share, self.opex_share)
    }
}

#[derive(Debug, Deserialize)]
struct ScenarioFile {
    #[serde(default)]
    scenario: Vec<Scenario>,
}

/// Reads `[[scenario]]` tables from a TOML file.
pub fn read_scenarios(path: &Path) -> Result<Vec<Scenario>> {
    let text = std::fs::read_to_string(path)?;
    let file: ScenarioFile = toml::from_str(&text)?;
    for s in &file.scenario {
        s.validate()?;
    }
    Ok(file.scenario)
}

/// Samples `round(fraction * passengers)` individual passengers without
/// replacement, keeping the share of each group (as labelled by `group`)
/// up to rounding, and regroups them into trips. Trips keep their ids;
/// trips with no sampled passenger are dropped.
pub fn sample_demand<G: Ord + Clone>(
    trips: &[Trip],
    fraction: f64,
    seed: u64,
    group: impl Fn(&Trip) -> G,
) -> Result<Vec<Trip>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidInput(format!("sampling fraction must lie in (0, 1], got {fraction}")));
    }
    let mut units: BTreeMap<G, Vec<usize>> = BTreeMap::new();
    let mut total = 0usize;
    for (i, t) in trips.iter().enumerate() {
        let slot = units.entry(group(t)).or_default();
        slot.extend(std::iter::repeat(i).take(t.passengers as usize));
        total += t.passengers as usize;
    }
    let target = (fraction * total as f64).round() as usize;
    let quota: Vec<f64> = units.values().map(|u| u.len() as f64 * fraction).collect();
    let mut take: Vec<usize> = quota.iter().map(|q| q.floor() as usize).collect();
    let mut order: Vec<usize> = (0..quota.len()).collect();
    order.sort_by(|&a, &b| (quota[b] - quota[b].floor()).total_cmp(&(quota[a] - quota[a].floor())).then(a.cmp(&b)));
    let mut left = target.saturating_sub(take.iter().sum());
    for &g in &order {
        if left == 0 {
            break;
        }
        if take[g] < units.values().nth(g).map_or(0, |u| u.len()) {
            take[g] += 1;
            left -= 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut count = vec![0u32; trips.len()];
    for (g, members) in units.values().enumerate() {
        for k in rand::seq::index::sample(&mut rng, members.len(), take[g]) {
            count[members[k]] += 1;
        }
    }
    Ok(trips
        .iter()
        .zip(count)
        .filter(|(_, c)| *c > 0)
        .map(|(t, c)| Trip { passengers: c, ..t.clone() })
        .collect())
}

/// Budget check of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetReport {
    pub scenario: String,
    pub baseline_budget: f64,
    pub budget: f64,
    pub buses: u32,
    pub bus_cost: f64,
    pub shuttle_cost_per_hour: f64,
    pub horizon_h: f64,
    pub max_shuttles: usize,
}

pub fn budget_report(
    scenario: &Scenario,
    baseline_budget: f64,
    buses: u32,
    horizon_h: f64,
    model: &CostModel,
) -> Result<BudgetReport> {
    scenario.validate()?;
    let budget = scenario.budget(baseline_budget)?;
    let bus_cost = system_cost(buses, 0, horizon_h, model, scenario.cleaning)?;
    let shuttle = vehicle_hourly_cost(crate::model::Mode::Shuttle, model, scenario.cleaning)?;
    let max_shuttles = fit_fleet_to_budget(budget, bus_cost, shuttle, horizon_h)?;
    Ok(BudgetReport {
        scenario: scenario.name.clone(),
        baseline_budget,
        budget,
        buses,
        bus_cost,
        shuttle_cost_per_hour: shuttle,
        horizon_h,
        max_shuttles,
    })
}
