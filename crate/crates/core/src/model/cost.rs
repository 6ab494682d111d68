use super::{Arc, DesignParameters, Mode, Trip};
use crate::{Error, Result};

/// Weight on trip duration when time is valued at `dollars_per_hour`, so that
/// `alpha / (1 - alpha)` equals that valuation.
pub fn alpha_from_value_of_time(dollars_per_hour: f64) -> f64 {
    dollars_per_hour / (1.0 + dollars_per_hour)
}

/// Cost of opening a bus arc: `(1 - alpha) * tau * f * c_bus`, tau in hours.
pub fn arc_fixed_cost(arc: &Arc, params: &DesignParameters) -> Result<f64> {
    match (arc.mode, arc.frequency) {
        (Mode::Bus, Some(f)) => {
            Ok((1.0 - params.alpha) * arc.travel_time_h() * f64::from(f) * params.bus_cost_per_hour)
        }
        _ => Err(Error::WrongMode {
            operation: "arc_fixed_cost",
            expected: "bus",
        }),
    }
}

/// Weighted cost of moving all passengers of `trip` over `arc`.
///
/// Shuttles pay distance at the estimated per-mile cost plus ride time; bus
/// and rail legs pay ride time plus the expected wait of half a headway.
pub fn arc_trip_cost(arc: &Arc, trip: &Trip, params: &DesignParameters) -> f64 {
    f64::from(trip.passengers) * unit_arc_cost(arc, params, params.shuttle_cost_per_mile_estimate)
}

/// Per-passenger cost of an arc with an explicit shuttle cost per mile.
pub(crate) fn unit_arc_cost(arc: &Arc, params: &DesignParameters, shuttle_per_mile: f64) -> f64 {
    let alpha = params.alpha;
    match arc.mode {
        Mode::Shuttle => (1.0 - alpha) * arc.distance_mi * shuttle_per_mile + alpha * arc.travel_time_h(),
        Mode::Bus | Mode::Rail => {
            let f = f64::from(arc.frequency.unwrap_or(1).max(1));
            alpha * (arc.travel_time_h() + params.horizon_h() / (2.0 * f))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ArcId;
    use proptest::prelude::*;

    fn arc(mode: Mode, hours: f64, miles: f64, f: Option<u32>) -> Arc {
        Arc {
            id: ArcId(0),
            origin: 0,
            dest: 1,
            mode,
            frequency: f,
            travel_time_s: hours * 3600.0,
            distance_mi: miles,
        }
    }

    fn params(alpha: f64, c_bus: f64) -> DesignParameters {
        DesignParameters {
            alpha,
            bus_cost_per_hour: c_bus,
            ..DesignParameters::default()
        }
    }

    #[test]
    fn fixed_cost_examples() {
        let a = arc(Mode::Bus, 0.5, 3.0, Some(8));
        assert!((arc_fixed_cost(&a, &params(0.0, 72.15)).unwrap() - 288.60).abs() < 1e-9);
        assert_eq!(arc_fixed_cost(&a, &params(1.0, 72.15)).unwrap(), 0.0);
        let b = arc(Mode::Bus, 1.0, 3.0, Some(1));
        assert!((arc_fixed_cost(&b, &params(0.5, 1.0)).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fixed_cost_rejects_other_modes() {
        let a = arc(Mode::Rail, 0.5, 3.0, Some(24));
        assert!(matches!(
            arc_fixed_cost(&a, &params(0.0, 72.15)),
            Err(Error::WrongMode { .. })
        ));
    }

    #[test]
    fn trip_cost_examples() {
        let p = DesignParameters {
            alpha: 0.5,
            horizon_s: 4.0 * 3600.0,
            shuttle_cost_per_mile_estimate: 1.0,
            ..DesignParameters::default()
        };
        let bus = arc(Mode::Bus, 0.25, 5.0, Some(12));
        let trip2 = Trip::new("t", "a", "b", 2, 0.0);
        let want = 2.0 * 0.5 * (0.25 + 4.0 / 24.0);
        assert!((arc_trip_cost(&bus, &trip2, &p) - want).abs() < 1e-12);
        assert!((want - 0.4167).abs() < 1e-4);

        let shuttle = arc(Mode::Shuttle, 0.2, 3.0, None);
        let trip1 = Trip::new("t", "a", "b", 1, 0.0);
        assert!((arc_trip_cost(&shuttle, &trip1, &p) - 1.6).abs() < 1e-12);

        let pure_time = DesignParameters { alpha: 1.0, ..p };
        assert!((arc_trip_cost(&shuttle, &trip2, &pure_time) - 0.4).abs() < 1e-12);
    }

    #[test]
    fn default_alpha_values_time_at_minimum_wage() {
        let a = DesignParameters::default().alpha;
        assert!((a / (1.0 - a) - 7.25).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn trip_cost_is_linear_in_passengers(
            k in 1u32..50, hours in 0.01f64..2.0, miles in 0.0f64..30.0,
            alpha in 0.0f64..=1.0, bus in any::<bool>(), f in 1u32..30,
        ) {
            let a = if bus { arc(Mode::Bus, hours, miles, Some(f)) } else { arc(Mode::Shuttle, hours, miles, None) };
            let p = DesignParameters { alpha, ..DesignParameters::default() };
            let one = arc_trip_cost(&a, &Trip::new("t", "a", "b", 1, 0.0), &p);
            let many = arc_trip_cost(&a, &Trip::new("t", "a", "b", k, 0.0), &p);
            prop_assert!((many - f64::from(k) * one).abs() <= 1e-9 * (1.0 + many.abs()));
        }

        #[test]
        fn fixed_cost_monotone_in_frequency(
            f1 in 1u32..40, df in 0u32..40, hours in 0.01f64..2.0, alpha in 0.0f64..1.0,
        ) {
            let p = params(alpha, 72.15);
            let lo = arc_fixed_cost(&arc(Mode::Bus, hours, 1.0, Some(f1)), &p).unwrap();
            let hi = arc_fixed_cost(&arc(Mode::Bus, hours, 1.0, Some(f1 + df)), &p).unwrap();
            prop_assert!(hi >= lo);
        }
    }
}
