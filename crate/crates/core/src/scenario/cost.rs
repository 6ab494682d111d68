use serde::{Deserialize, Serialize};

use crate::model::Mode;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BusCost {
    pub wages_per_hour: f64,
    pub fringe_rate: f64,
    /// Published fringe amount; `fringe_rate * wages_per_hour` when absent.
    pub fringe_per_hour: Option<f64>,
    pub maintenance_per_hour: f64,
    pub purchase_price: f64,
    pub useful_life_years: f64,
    pub revenue_hours_per_year: f64,
    pub cleaning_per_hour: f64,
}

impl Default for BusCost {
    fn default() -> Self {
        BusCost {
            wages_per_hour: 23.52,
            fringe_rate: 0.68,
            fringe_per_hour: Some(16.03),
            maintenance_per_hour: 19.17,
            purchase_price: 625_000.0,
            useful_life_years: 12.0,
            revenue_hours_per_year: 3878.0,
            cleaning_per_hour: 3.37,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShuttleCost {
    pub wages_per_hour: f64,
    pub fringe_rate: f64,
    pub fringe_per_hour: Option<f64>,
    pub maintenance_per_mile: f64,
    /// Mileage per revenue hour; 12.56 turns $0.09/mi into $1.13/h.
    pub miles_per_hour: f64,
    pub purchase_price: f64,
    pub replacement_years: f64,
    /// Odometer reading at replacement; informational.
    pub replacement_miles: f64,
    pub revenue_hours_per_year: f64,
    pub cleaning_per_hour: f64,
}

impl Default for ShuttleCost {
    fn default() -> Self {
        ShuttleCost {
            wages_per_hour: 14.42,
            fringe_rate: 0.68,
            fringe_per_hour: Some(9.83),
            maintenance_per_mile: 0.09,
            miles_per_hour: 12.56,
            purchase_price: 30_000.0,
            replacement_years: 4.0,
            replacement_miles: 191_000.0,
            revenue_hours_per_year: 3878.0,
            cleaning_per_hour: 1.69,
        }
    }
}

/// Operating and capital cost components of buses and shuttles.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct CostModel {
    pub bus: BusCost,
    pub shuttle: ShuttleCost,
}

/// Hourly cost split into its components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HourlyCost {
    pub wages: f64,
    pub fringe: f64,
    pub maintenance: f64,
    pub depreciation: f64,
    pub cleaning: f64,
}

impl HourlyCost {
    pub fn total(&self) -> f64 {
        self.wages + self.fringe + self.maintenance + self.depreciation + self.cleaning
    }

    /// Labor and maintenance; the part funded from operating expenses.
    pub fn operating(&self) -> f64 {
        self.wages + self.fringe + self.maintenance + self.cleaning
    }
}

fn per_hour(price: f64, years: f64, hours_per_year: f64) -> Result<f64> {
    let hours = years * hours_per_year;
    if hours <= 0.0 {
        return Err(Error::DivisionByZero("vehicle lifetime in revenue hours"));
    }
    Ok(price / hours)
}

impl CostModel {
    pub fn validate(&self) -> Result<()> {
        let b = &self.bus;
        let s = &self.shuttle;
        let all = [
            b.wages_per_hour,
            b.fringe_rate,
            b.fringe_per_hour.unwrap_or(0.0),
            b.maintenance_per_hour,
            b.purchase_price,
            b.useful_life_years,
            b.revenue_hours_per_year,
            b.cleaning_per_hour,
            s.wages_per_hour,
            s.fringe_rate,
            s.fringe_per_hour.unwrap_or(0.0),
            s.maintenance_per_mile,
            s.miles_per_hour,
            s.purchase_price,
            s.replacement_years,
            s.replacement_miles,
            s.revenue_hours_per_year,
            s.cleaning_per_hour,
        ];
        if all.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidInput("cost components must be finite and nonnegative".into()));
        }
        Ok(())
    }

    pub fn hourly(&self, mode: Mode, cleaning: bool) -> Result<HourlyCost> {
        match mode {
            Mode::Bus => {
                let b = &self.bus;
                Ok(HourlyCost {
                    wages: b.wages_per_hour,
                    fringe: b.fringe_per_hour.unwrap_or(b.fringe_rate * b.wages_per_hour),
                    maintenance: b.maintenance_per_hour,
                    depreciation: per_hour(b.purchase_price, b.useful_life_years, b.revenue_hours_per_year)?,
                    cleaning: if cleaning { b.cleaning_per_hour } else { 0.0 },
                })
            }
            Mode::Shuttle => {
                let s = &self.shuttle;
                Ok(HourlyCost {
                    wages: s.wages_per_hour,
                    fringe: s.fringe_per_hour.unwrap_or(s.fringe_rate * s.wages_per_hour),
                    maintenance: s.maintenance_per_mile * s.miles_per_hour,
                    depreciation: per_hour(s.purchase_price, s.replacement_years, s.revenue_hours_per_year)?,
                    cleaning: if cleaning { s.cleaning_per_hour } else { 0.0 },
                })
            }
            Mode::Rail => Err(Error::WrongMode {
                operation: "vehicle_hourly_cost",
                expected: "bus or shuttle",
            }),
        }
    }
}

/// Cost per vehicle revenue hour.
pub fn vehicle_hourly_cost(mode: Mode, model: &CostModel, cleaning: bool) -> Result<f64> {
    Ok(model.hourly(mode, cleaning)?.total())
}

/// Cost of running the given buses and shuttles over the horizon.
pub fn system_cost(buses: u32, shuttles: usize, horizon_h: f64, model: &CostModel, cleaning: bool) -> Result<f64> {
    let bus = vehicle_hourly_cost(Mode::Bus, model, cleaning)?;
    let shuttle = vehicle_hourly_cost(Mode::Shuttle, model, cleaning)?;
    Ok((f64::from(buses) * bus + shuttles as f64 * shuttle) * horizon_h)
}

/// Budget after fare revenue falls with ridership: only the fare-funded
/// share of operating expenses shrinks.
pub fn scenario_budget(baseline: f64, ridership_fraction: f64, fare_share: f64, opex_share: f64) -> Result<f64> {
    for (name, v) in [
        ("ridership fraction", ridership_fraction),
        ("fare share", fare_share),
        ("operating share", opex_share),
    ] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidInput(format!("{name} must lie in [0, 1], got {v}")));
        }
    }
    Ok(baseline * (1.0 - opex_share * fare_share * (1.0 - ridership_fraction)))
}

/// Largest shuttle fleet whose cost over the horizon fits in what the
/// budget leaves after the buses.
pub fn fit_fleet_to_budget(budget: f64, bus_cost: f64, shuttle_per_hour: f64, horizon_h: f64) -> Result<usize> {
    if budget < bus_cost {
        return Err(Error::BudgetBelowBusCost { budget, bus_cost });
    }
    let per_shuttle = shuttle_per_hour * horizon_h;
    if per_shuttle <= 0.0 {
        return Err(Error::DivisionByZero("shuttle cost over the horizon"));
    }
    Ok(((budget - bus_cost) / per_shuttle + 1e-9).floor() as usize)
}
