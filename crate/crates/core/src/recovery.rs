//! Residual-heat pools and the four recovery measures.
//!
//! Accounting is by amount only: a pool covers a demand whenever it holds at
//! least as much heat, without any temperature-profile check inside a pool.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ice_gen::{high_temp_heat, low_temp_exhaust_heat, IceOperatingPoint};
use crate::pemfc::FcOperatingPoint;
use crate::thermo::ThermoDb;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct HeatPools {
    /// Heat hot enough to drive decomposition, kW.
    pub high_kw: f64,
    /// Heat usable only for preheating, kW.
    pub low_kw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Measure {
    /// Nothing recovered; heaters cover preheating and decomposition.
    I,
    /// Low-temperature heat preheats the feed.
    II,
    /// High-temperature heat drives decomposition.
    III,
    /// Both pools, high-temperature heat first.
    IV,
}

impl Measure {
    pub const ALL: [Measure; 4] = [Measure::I, Measure::II, Measure::III, Measure::IV];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::I => "I",
            Measure::II => "II",
            Measure::III => "III",
            Measure::IV => "IV",
        })
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" => Ok(Measure::I),
            "II" => Ok(Measure::II),
            "III" => Ok(Measure::III),
            "IV" => Ok(Measure::IV),
            other => Err(Error::arg(format!("unknown measure {other:?}; expected I, II, III or IV"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct HeatLedger {
    pub q_pre_kw: f64,
    pub q_dec_kw: f64,
    pub high_recovered_kw: f64,
    pub low_recovered_kw: f64,
    /// Electric heater input at 100 % conversion, kW.
    pub heater_kw: f64,
}

impl HeatLedger {
    pub fn recovered_kw(&self) -> f64 {
        self.high_recovered_kw + self.low_recovered_kw
    }
}

/// Sorts available heat into pools. `product_cooling_kw` is the sensible
/// heat released by cooling product gas to its delivery temperature. With
/// `exhaust_to_low_pool`, exhaust enthalpy below `t_dec` also joins the low pool.
pub fn classify(
    ice: Option<&IceOperatingPoint>,
    fc: Option<&FcOperatingPoint>,
    product_cooling_kw: f64,
    t_dec: f64,
    exhaust_to_low_pool: bool,
    thermo: &ThermoDb,
) -> Result<HeatPools> {
    if !(product_cooling_kw >= 0.0) {
        return Err(Error::arg(format!("product cooling must be non-negative, got {product_cooling_kw}")));
    }
    let mut pools = HeatPools {
        high_kw: 0.0,
        low_kw: product_cooling_kw,
    };
    if let Some(p) = ice {
        pools.high_kw = high_temp_heat(p, t_dec, thermo)?;
        pools.low_kw += p.coolant_heat_kw;
        if exhaust_to_low_pool {
            pools.low_kw += low_temp_exhaust_heat(p, t_dec, thermo)?;
        }
    }
    if let Some(p) = fc {
        pools.low_kw += p.heat_kw;
    }
    Ok(pools)
}

/// Allocates pools to the preheat and decomposition demands under `m`.
pub fn apply_measure(m: Measure, q_pre: f64, q_dec: f64, pools: HeatPools) -> Result<HeatLedger> {
    for (name, v) in [("preheat", q_pre), ("decomposition", q_dec), ("high pool", pools.high_kw), ("low pool", pools.low_kw)] {
        if !(v >= 0.0) {
            return Err(Error::arg(format!("{name} heat must be non-negative, got {v}")));
        }
    }
    let use_low = matches!(m, Measure::II | Measure::IV);
    let use_high = matches!(m, Measure::III | Measure::IV);
    let mut pre_left = q_pre;
    let mut dec_left = q_dec;
    let mut high = 0.0;
    let mut low = 0.0;
    if use_high {
        let to_dec = pools.high_kw.min(dec_left);
        dec_left -= to_dec;
        high += to_dec;
        if m == Measure::IV {
            let to_pre = (pools.high_kw - to_dec).min(pre_left);
            pre_left -= to_pre;
            // `to_dec + (high − to_dec)` can round one ulp past the pool.
            high = (high + to_pre).min(pools.high_kw);
        }
    }
    if use_low {
        let to_pre = pools.low_kw.min(pre_left);
        pre_left -= to_pre;
        low += to_pre;
    }
    Ok(HeatLedger {
        q_pre_kw: q_pre,
        q_dec_kw: q_dec,
        high_recovered_kw: high,
        low_recovered_kw: low,
        heater_kw: pre_left + dec_left,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pools(high: f64, low: f64) -> HeatPools {
        HeatPools { high_kw: high, low_kw: low }
    }

    #[test]
    fn no_demand_no_heater() {
        for m in Measure::ALL {
            assert_eq!(apply_measure(m, 0.0, 0.0, pools(5.0, 5.0)).unwrap().heater_kw, 0.0);
        }
    }

    #[test]
    fn measure_four_surplus_goes_to_preheat() {
        let l = apply_measure(Measure::IV, 30.0, 50.0, pools(60.0, 20.0)).unwrap();
        assert_eq!(l.heater_kw, 0.0);
        assert_eq!(l.high_recovered_kw, 60.0);
        assert_eq!(l.low_recovered_kw, 20.0);
    }

    #[test]
    fn measure_three_leaves_preheat_to_heaters() {
        let l = apply_measure(Measure::III, 30.0, 50.0, pools(30.0, 100.0)).unwrap();
        assert_eq!(l.heater_kw, 50.0);
        assert_eq!(l.low_recovered_kw, 0.0);
    }

    #[test]
    fn measure_two_and_one() {
        let l = apply_measure(Measure::II, 30.0, 50.0, pools(100.0, 12.0)).unwrap();
        assert_eq!(l.heater_kw, 50.0 + 18.0);
        let l = apply_measure(Measure::I, 30.0, 50.0, pools(100.0, 100.0)).unwrap();
        assert_eq!(l.heater_kw, 80.0);
        assert_eq!(l.recovered_kw(), 0.0);
    }

    #[test]
    fn empty_pools_collapse_to_measure_one() {
        let a = apply_measure(Measure::I, 7.0, 9.0, HeatPools::default()).unwrap();
        let b = apply_measure(Measure::IV, 7.0, 9.0, HeatPools::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn negative_input_rejected() {
        assert!(apply_measure(Measure::I, -1.0, 0.0, HeatPools::default()).is_err());
        assert!(apply_measure(Measure::I, 0.0, 0.0, pools(0.0, -1.0)).is_err());
    }

    #[test]
    fn measure_names_round_trip() {
        for m in Measure::ALL {
            assert_eq!(m.to_string().parse::<Measure>().unwrap(), m);
            let j = serde_json::to_string(&m).unwrap();
            assert_eq!(j, format!("\"{m}\""));
        }
        assert!("V".parse::<Measure>().is_err());
    }

    #[test]
    fn fuel_cell_only_has_no_high_pool() {
        let fc = FcOperatingPoint {
            current_density: 0.5,
            cell_voltage: 0.7,
            power_kw: 10.0,
            hydrogen_g_s: 0.1,
            heat_kw: 2.0,
            efficiency: 0.83,
        };
        let p = classify(None, Some(&fc), 1.5, 723.15, false, &ThermoDb::default()).unwrap();
        assert_eq!(p.high_kw, 0.0);
        assert_eq!(p.low_kw, 3.5);
        let none = classify(None, None, 0.0, 723.15, false, &ThermoDb::default()).unwrap();
        assert_eq!(none, HeatPools::default());
    }
}
