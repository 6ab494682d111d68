use odmts::model::{Mode, Trip};
use odmts::scenario::{
    budget_report, fit_fleet_to_budget, read_scenarios, sample_demand, scenario_budget, system_cost,
    vehicle_hourly_cost, CostModel, Scenario,
};
use odmts::Error;
use proptest::prelude::*;

fn cents(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

#[test]
fn hourly_costs_match_the_published_components() {
    let m = CostModel::default();
    let bus = m.hourly(Mode::Bus, false).unwrap();
    assert_eq!(cents(bus.depreciation), 13.43);
    assert_eq!((bus.wages, bus.fringe, bus.maintenance), (23.52, 16.03, 19.17));
    assert_eq!(cents(vehicle_hourly_cost(Mode::Bus, &m, false).unwrap()), 72.15);
    assert_eq!(cents(vehicle_hourly_cost(Mode::Bus, &m, true).unwrap()), 75.52);

    let sh = m.hourly(Mode::Shuttle, false).unwrap();
    assert_eq!((sh.wages, sh.fringe), (14.42, 9.83));
    assert_eq!(cents(sh.maintenance), 1.13);
    assert_eq!(cents(sh.depreciation), 1.93);
    assert_eq!(cents(sh.wages + sh.fringe), 24.25);
    assert_eq!(cents(vehicle_hourly_cost(Mode::Shuttle, &m, false).unwrap()), 27.31);
    assert_eq!(cents(vehicle_hourly_cost(Mode::Shuttle, &m, true).unwrap()), 29.00);
}

#[test]
fn fringe_falls_back_to_the_rate() {
    let mut m = CostModel::default();
    m.shuttle.fringe_per_hour = None;
    let sh = m.hourly(Mode::Shuttle, false).unwrap();
    assert!((sh.fringe - 14.42 * 0.68).abs() < 1e-12);
}

#[test]
fn cost_errors() {
    let mut m = CostModel::default();
    m.bus.revenue_hours_per_year = 0.0;
    assert!(matches!(vehicle_hourly_cost(Mode::Bus, &m, false), Err(Error::DivisionByZero(_))));
    assert!(matches!(vehicle_hourly_cost(Mode::Rail, &CostModel::default(), false), Err(Error::WrongMode { .. })));
    m.bus.wages_per_hour = -1.0;
    assert!(m.validate().is_err());
}

#[test]
fn system_costs() {
    let m = CostModel::default();
    let all_buses = system_cost(465, 0, 4.0, &m, false).unwrap();
    assert!((all_buses - 134_000.0).abs() < 1000.0, "{all_buses}");
    let odmts = system_cost(24, 1100, 4.0, &m, false).unwrap();
    let bus = 23.52 + 16.03 + 19.17 + 625_000.0 / (12.0 * 3878.0);
    let shuttle = 14.42 + 9.83 + 0.09 * 12.56 + 30_000.0 / (4.0 * 3878.0);
    let want = 24.0 * bus * 4.0 + 1100.0 * shuttle * 4.0;
    assert!((odmts - want).abs() < 1e-6, "{odmts} vs {want}");
    assert!((odmts - 127_000.0).abs() < 1000.0);
    assert_eq!(system_cost(0, 0, 4.0, &m, true).unwrap(), 0.0);
}

#[test]
fn scenario_budgets() {
    let early = scenario_budget(127_000.0, 0.45, 0.33, 0.92).unwrap();
    assert!((early - 106_000.0).abs() < 1000.0, "{early}");
    assert!((early - 127_000.0 * (1.0 - 0.92 * 0.33 * 0.55)).abs() < 1e-6);
    assert!((early - 105_793.54).abs() < 0.01);
    let late = scenario_budget(127_000.0, 0.24, 0.33, 0.92).unwrap();
    assert!((late - 98_000.0).abs() < 1000.0, "{late}");
    assert_eq!(scenario_budget(127_000.0, 1.0, 0.33, 0.92).unwrap(), 127_000.0);
    assert!(scenario_budget(1.0, 1.5, 0.33, 0.92).is_err());
}

#[test]
fn fleets_fit_in_the_budget() {
    assert_eq!(fit_fleet_to_budget(1000.0, 100.0, 29.0, 4.0).unwrap(), 7);
    assert_eq!(fit_fleet_to_budget(100.0, 100.0, 29.0, 4.0).unwrap(), 0);
    assert!(matches!(
        fit_fleet_to_budget(99.0, 100.0, 29.0, 4.0),
        Err(Error::BudgetBelowBusCost { .. })
    ));
    // a larger fare share cuts deeper into the budget and the fleet
    let m = CostModel::default();
    let fleets: Vec<usize> = [0.33, 0.50, 0.66]
        .iter()
        .map(|&fare| {
            let s = Scenario { fare_share: fare, ..Scenario::early_pandemic() };
            budget_report(&s, 127_000.0, 24, 4.0, &m).unwrap().max_shuttles
        })
        .collect();
    assert!(fleets[0] > fleets[1] && fleets[1] > fleets[2], "{fleets:?}");
}

fn baseline_trips(n: usize) -> Vec<Trip> {
    (0..n)
        .map(|i| Trip::new(format!("t{i}"), "a", "b", 1 + (i % 5) as u32, i as f64))
        .collect()
}

fn passengers(trips: &[Trip]) -> usize {
    trips.iter().map(|t| t.passengers as usize).sum()
}

#[test]
fn sampling_identity_and_size() {
    let trips = baseline_trips(400);
    let all = sample_demand(&trips, 1.0, 3, |_| 0).unwrap();
    assert_eq!(all, trips);
    let n = passengers(&trips);
    let half = sample_demand(&trips, 0.45, 3, |t| t.passengers % 2).unwrap();
    let want = (0.45 * n as f64).round() as i64;
    assert!((passengers(&half) as i64 - want).abs() <= 1);
    assert_eq!(half, sample_demand(&trips, 0.45, 3, |t| t.passengers % 2).unwrap());
    assert_ne!(half, sample_demand(&trips, 0.45, 4, |t| t.passengers % 2).unwrap());
    for t in &half {
        let orig = trips.iter().find(|o| o.id == t.id).unwrap();
        assert!(t.passengers <= orig.passengers);
    }
    assert!(sample_demand(&trips, 0.0, 3, |_| 0).is_err());
}

#[test]
fn sampling_reaches_the_published_early_pandemic_ridership() {
    // 55871 baseline passengers; the published sample holds 25042
    let trips: Vec<Trip> = (0..55_871).map(|i| Trip::new(format!("t{i}"), "a", "b", 1, 0.0)).collect();
    let f = 25_042.0 / 55_871.0;
    let s = sample_demand(&trips, f, 1, |t| t.id.len() % 2).unwrap();
    assert_eq!(passengers(&s), 25_042);
    let at_45 = sample_demand(&trips, 0.45, 1, |_| 0).unwrap();
    assert_eq!(passengers(&at_45), 25_142);
}

#[test]
fn sampling_keeps_the_bus_rail_mix() {
    let trips = baseline_trips(3000);
    let is_rail = |t: &Trip| t.id.ends_with('7') || t.id.ends_with('3');
    let share = |ts: &[Trip]| {
        let rail: usize = ts.iter().filter(|t| is_rail(t)).map(|t| t.passengers as usize).sum();
        rail as f64 / passengers(ts) as f64
    };
    for f in [0.24, 0.45, 0.8] {
        let s = sample_demand(&trips, f, 11, is_rail).unwrap();
        assert!((share(&s) - share(&trips)).abs() < 0.01, "{f}");
    }
}

#[test]
fn scenarios_load_from_toml() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scenarios.toml");
    std::fs::write(
        &path,
        r#"
[[scenario]]
name = "early"
ridership_fraction = 0.45
shuttle_capacity = 1
bus_capacity_pct = 50
rail_capacity_pct = 50
cleaning = true

[[scenario]]
name = "strict"
ridership_fraction = 0.24
bus_enabled = false
bus_capacity_pct = 0
"#,
    )
    .unwrap();
    let s = read_scenarios(&path).unwrap();
    assert_eq!(s.len(), 2);
    assert_eq!(s[0].shuttle_capacity, 1);
    assert_eq!(s[0].seats(50, s[0].bus_capacity_pct), 25);
    assert!(!s[1].bus_enabled);
    assert_eq!(s[1].fare_share, 0.33);
    std::fs::write(&path, "[[scenario]]\nname = \"bad\"\nridership_fraction = 0\n").unwrap();
    assert!(read_scenarios(&path).is_err());
}

#[test]
fn presets_follow_the_scenario_table() {
    let e = Scenario::early_pandemic();
    assert_eq!((e.shuttle_capacity, e.bus_capacity_pct, e.rail_capacity_pct), (1, 50.0, 50.0));
    let s = Scenario::strict_late_pandemic();
    assert_eq!((s.bus_enabled, s.bus_capacity_pct, s.rail_capacity_pct), (false, 0.0, 25.0));
    assert_eq!(s.ridership_fraction, 0.24);
}

proptest! {
    #[test]
    fn budget_monotone(
        base in 1.0f64..1e6, f1 in 0.0f64..=1.0, f2 in 0.0f64..=1.0,
        fare1 in 0.0f64..=1.0, fare2 in 0.0f64..=1.0, opex in 0.0f64..=1.0,
    ) {
        let (lo, hi) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
        prop_assert!(scenario_budget(base, lo, 0.33, opex).unwrap() <= scenario_budget(base, hi, 0.33, opex).unwrap() + 1e-9);
        let (flo, fhi) = if fare1 <= fare2 { (fare1, fare2) } else { (fare2, fare1) };
        prop_assert!(scenario_budget(base, 0.5, fhi, opex).unwrap() <= scenario_budget(base, 0.5, flo, opex).unwrap() + 1e-9);
    }

    #[test]
    fn sample_size_within_one(n in 1usize..300, f in 0.01f64..=1.0, seed in any::<u64>(), groups in 1usize..4) {
        let trips = baseline_trips(n);
        let s = sample_demand(&trips, f, seed, |t| t.passengers as usize % groups).unwrap();
        let want = (f * passengers(&trips) as f64).round() as i64;
        prop_assert!((passengers(&s) as i64 - want).abs() <= 1);
    }

    #[test]
    fn fitted_fleet_is_largest_affordable(budget in 0.0f64..1e5, bus in 0.0f64..1e4, rate in 1.0f64..50.0) {
        prop_assume!(budget >= bus);
        let n = fit_fleet_to_budget(budget, bus, rate, 4.0).unwrap();
        prop_assert!(bus + n as f64 * rate * 4.0 <= budget + 1e-6);
        prop_assert!(bus + (n + 1) as f64 * rate * 4.0 > budget - 1e-6);
    }
}
