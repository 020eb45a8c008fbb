use nh3_powertrain::recovery::{apply_measure, HeatPools, Measure};
use proptest::prelude::*;

/// Heater input in closed form: each pool covers what it can, hot heat first.
fn oracle_heater(m: Measure, q_pre: f64, q_dec: f64, high: f64, low: f64) -> f64 {
    match m {
        Measure::I => q_pre + q_dec,
        Measure::II => (q_pre - low).max(0.0) + q_dec,
        Measure::III => q_pre + (q_dec - high).max(0.0),
        Measure::IV => {
            let spare = (high - q_dec).max(0.0);
            (q_pre - spare - low).max(0.0) + (q_dec - high).max(0.0)
        }
    }
}

fn heat() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), 0.0f64..200.0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn heater_demand_is_ordered_by_measure(q_pre in heat(), q_dec in heat(), high in heat(), low in heat()) {
        let pools = HeatPools { high_kw: high, low_kw: low };
        let w = Measure::ALL.map(|m| apply_measure(m, q_pre, q_dec, pools).unwrap().heater_kw);
        prop_assert!(w[0] >= w[1] && w[1] >= w[3]);
        prop_assert!(w[0] >= w[2] && w[2] >= w[3]);
    }

    #[test]
    fn heat_ledger_closes(q_pre in heat(), q_dec in heat(), high in heat(), low in heat()) {
        let pools = HeatPools { high_kw: high, low_kw: low };
        for m in Measure::ALL {
            let l = apply_measure(m, q_pre, q_dec, pools).unwrap();
            let demand = q_pre + q_dec;
            prop_assert!((l.heater_kw + l.recovered_kw() - demand).abs() <= 4.0 * f64::EPSILON * demand);
            prop_assert!(l.high_recovered_kw <= high && l.low_recovered_kw <= low);
            let oracle = oracle_heater(m, q_pre, q_dec, high, low);
            prop_assert!((l.heater_kw - oracle).abs() <= 4.0 * f64::EPSILON * demand, "{m}: {} vs {oracle}", l.heater_kw);
        }
    }
}

#[test]
fn negative_inputs_are_rejected() {
    let pools = HeatPools { high_kw: 1.0, low_kw: 1.0 };
    assert!(apply_measure(Measure::IV, -1.0, 0.0, pools).is_err());
    assert!(apply_measure(Measure::IV, 0.0, 0.0, HeatPools { high_kw: f64::NAN, low_kw: 0.0 }).is_err());
}
