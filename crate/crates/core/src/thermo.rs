//! Ideal-gas species properties and the process duties built on them.
//!
//! Heat capacities are NASA 7-coefficient fits (GRI-Mech 3.0 thermodynamic
//! data, two temperature ranges joined at 1000 K). Only the five heat
//! capacity coefficients of each range are needed because every enthalpy in
//! this crate is a sensible enthalpy relative to 298.15 K; formation
//! enthalpies enter through the reaction enthalpy and heating values.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stream::GasStream;

/// Universal gas constant, J/(mol·K).
pub const GAS_CONSTANT: f64 = 8.314;
/// Faraday constant, C/mol.
pub const FARADAY: f64 = 96485.0;
pub const REFERENCE_TEMPERATURE: f64 = 298.15;
pub const REFERENCE_PRESSURE_KPA: f64 = 101.325;
/// Molar O2 fraction of the AIR pseudo-species.
pub const AIR_O2_FRACTION: f64 = 0.21;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Species {
    NH3,
    H2,
    N2,
    O2,
    H2O,
    AIR,
}

impl Species {
    pub const ALL: [Species; 6] = [
        Species::NH3,
        Species::H2,
        Species::N2,
        Species::O2,
        Species::H2O,
        Species::AIR,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Molar mass, g/mol.
    pub fn molar_mass(self) -> f64 {
        match self {
            Species::NH3 => 17.031,
            Species::H2 => 2.016,
            Species::N2 => 28.014,
            Species::O2 => 31.998,
            Species::H2O => 18.015,
            Species::AIR => AIR_O2_FRACTION * 31.998 + (1.0 - AIR_O2_FRACTION) * 28.014,
        }
    }

    /// Nitrogen and hydrogen atoms per molecule.
    pub fn atoms_nh(self) -> (f64, f64) {
        match self {
            Species::NH3 => (1.0, 3.0),
            Species::H2 => (0.0, 2.0),
            Species::N2 => (2.0, 0.0),
            Species::O2 => (0.0, 0.0),
            Species::H2O => (0.0, 2.0),
            Species::AIR => (2.0 * (1.0 - AIR_O2_FRACTION), 0.0),
        }
    }
}

impl fmt::Display for Species {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Molar heat capacity `cp/R = a1 + a2 T + a3 T² + a4 T³ + a5 T⁴`, one
/// coefficient set below `t_mid` and one above.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpPolynomial {
    pub species: Species,
    pub low: [f64; 5],
    pub high: [f64; 5],
    pub t_mid: f64,
    pub t_min: f64,
    pub t_max: f64,
}

const T_MIN: f64 = 250.0;
const T_MAX: f64 = 1500.0;

// GRI-Mech 3.0 thermo30.dat, coefficients a1..a5 (high range first in the
// source file; listed here low range first).
const NH3_CP: CpPolynomial = CpPolynomial {
    species: Species::NH3,
    low: [4.28602740e+00, -4.66052300e-03, 2.17185130e-05, -2.28088870e-08, 8.26380460e-12],
    high: [2.63445210e+00, 5.66625600e-03, -1.72786760e-06, 2.38671610e-10, -1.25787860e-14],
    t_mid: 1000.0,
    t_min: T_MIN,
    t_max: T_MAX,
};
const H2_CP: CpPolynomial = CpPolynomial {
    species: Species::H2,
    low: [2.34433112e+00, 7.98052075e-03, -1.94781510e-05, 2.01572094e-08, -7.37611761e-12],
    high: [3.33727920e+00, -4.94024731e-05, 4.99456778e-07, -1.79566394e-10, 2.00255376e-14],
    t_mid: 1000.0,
    t_min: T_MIN,
    t_max: T_MAX,
};
const N2_CP: CpPolynomial = CpPolynomial {
    species: Species::N2,
    low: [3.298677e+00, 1.4082404e-03, -3.963222e-06, 5.641515e-09, -2.444854e-12],
    high: [2.92664e+00, 1.4879768e-03, -5.68476e-07, 1.0097038e-10, -6.753351e-15],
    t_mid: 1000.0,
    t_min: T_MIN,
    t_max: T_MAX,
};
const O2_CP: CpPolynomial = CpPolynomial {
    species: Species::O2,
    low: [3.78245636e+00, -2.99673416e-03, 9.84730201e-06, -9.68129509e-09, 3.24372837e-12],
    high: [3.28253784e+00, 1.48308754e-03, -7.57966669e-07, 2.09470555e-10, -2.16717794e-14],
    t_mid: 1000.0,
    t_min: T_MIN,
    t_max: T_MAX,
};
const H2O_CP: CpPolynomial = CpPolynomial {
    species: Species::H2O,
    low: [4.19864056e+00, -2.03643410e-03, 6.52040211e-06, -5.48797062e-09, 1.77197817e-12],
    high: [3.03399249e+00, 2.17691804e-03, -1.64072518e-07, -9.70419870e-11, 1.68200992e-14],
    t_mid: 1000.0,
    t_min: T_MIN,
    t_max: T_MAX,
};

impl CpPolynomial {
    fn check(&self, t: f64) -> Result<()> {
        if t.is_finite() && t >= self.t_min && t <= self.t_max {
            Ok(())
        } else {
            Err(Error::TemperatureRange {
                species: self.species,
                temperature: t,
                min: self.t_min,
                max: self.t_max,
            })
        }
    }

    /// cp in J/(mol·K).
    pub fn cp(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        let a = if t < self.t_mid { &self.low } else { &self.high };
        Ok(GAS_CONSTANT * (a[0] + t * (a[1] + t * (a[2] + t * (a[3] + t * a[4])))))
    }

    /// Antiderivative of cp/R over one coefficient range.
    fn integral(a: &[f64; 5], t: f64) -> f64 {
        t * (a[0] + t * (a[1] / 2.0 + t * (a[2] / 3.0 + t * (a[3] / 4.0 + t * a[4] / 5.0))))
    }

    /// ∫ cp dT from 298.15 K to `t`, J/mol.
    pub fn sensible_enthalpy(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(GAS_CONSTANT * (self.h_over_r(t) - self.h_over_r(REFERENCE_TEMPERATURE)))
    }

    fn h_over_r(&self, t: f64) -> f64 {
        if t <= self.t_mid {
            Self::integral(&self.low, t)
        } else {
            Self::integral(&self.low, self.t_mid) + Self::integral(&self.high, t)
                - Self::integral(&self.high, self.t_mid)
        }
    }
}

/// Property database: heat capacity fits plus the scalar constants that
/// drive hydrogen-production duties and heating values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermoDb {
    /// Latent heat of NH3 vaporization, kJ/mol. Applied at tank temperature.
    pub latent_heat_kj_mol: f64,
    /// NH3 → 1.5 H2 + 0.5 N2 at 298.15 K, kJ per mol NH3.
    pub reaction_enthalpy_kj_mol: f64,
    pub lhv_nh3_kj_g: f64,
    pub lhv_h2_kj_g: f64,
    #[serde(skip, default = "default_polynomials")]
    polynomials: [CpPolynomial; 5],
}

fn default_polynomials() -> [CpPolynomial; 5] {
    [NH3_CP, H2_CP, N2_CP, O2_CP, H2O_CP]
}

impl Default for ThermoDb {
    fn default() -> Self {
        ThermoDb {
            latent_heat_kj_mol: 23.3,
            reaction_enthalpy_kj_mol: 46.1,
            lhv_nh3_kj_g: 18.6,
            lhv_h2_kj_g: 120.0,
            polynomials: default_polynomials(),
        }
    }
}

impl ThermoDb {
    pub fn polynomial(&self, species: Species) -> Option<&CpPolynomial> {
        self.polynomials.get(species.index())
    }

    /// Molar heat capacity, J/(mol·K).
    pub fn cp(&self, species: Species, t: f64) -> Result<f64> {
        match species {
            Species::AIR => Ok(AIR_O2_FRACTION * self.polynomials[3].cp(t)?
                + (1.0 - AIR_O2_FRACTION) * self.polynomials[2].cp(t)?),
            s => self.polynomials[s.index()].cp(t),
        }
    }

    /// Molar enthalpy relative to 298.15 K, J/mol.
    pub fn sensible_enthalpy(&self, species: Species, t: f64) -> Result<f64> {
        match species {
            Species::AIR => Ok(AIR_O2_FRACTION * self.polynomials[3].sensible_enthalpy(t)?
                + (1.0 - AIR_O2_FRACTION) * self.polynomials[2].sensible_enthalpy(t)?),
            s => self.polynomials[s.index()].sensible_enthalpy(t),
        }
    }

    /// Heat needed to take `stream` from `t_from` to `t_to`, W. Species with
    /// zero flow are not range-checked.
    pub fn stream_enthalpy_delta(&self, stream: &GasStream, t_from: f64, t_to: f64) -> Result<f64> {
        let mut q = 0.0;
        for s in Species::ALL {
            let n = stream.flow(s);
            if n != 0.0 {
                q += n * (self.sensible_enthalpy(s, t_to)? - self.sensible_enthalpy(s, t_from)?);
            }
        }
        Ok(q)
    }

    /// Vaporize saturated liquid NH3 at `t_tank` and superheat the vapor to
    /// `t_out`, W. Liquid sensible heat is folded into the latent constant.
    pub fn preheat_duty(&self, nh3_flow: f64, t_tank: f64, t_out: f64) -> Result<f64> {
        if !(nh3_flow >= 0.0) {
            return Err(Error::arg(format!("NH3 flow must be non-negative, got {nh3_flow}")));
        }
        if t_out < t_tank {
            return Err(Error::arg(format!(
                "preheat outlet {t_out} K is below tank temperature {t_tank} K"
            )));
        }
        let superheat = self.sensible_enthalpy(Species::NH3, t_out)?
            - self.sensible_enthalpy(Species::NH3, t_tank)?;
        Ok(nh3_flow * (self.latent_heat_kj_mol * 1e3 + superheat))
    }

    /// Reaction enthalpy at `t` with the Kirchhoff correction, kJ per mol NH3.
    pub fn decomposition_enthalpy(&self, t: f64) -> Result<f64> {
        let dh = 1.5 * self.sensible_enthalpy(Species::H2, t)?
            + 0.5 * self.sensible_enthalpy(Species::N2, t)?
            - self.sensible_enthalpy(Species::NH3, t)?;
        Ok(self.reaction_enthalpy_kj_mol + dh * 1e-3)
    }

    /// Lower heating value, kJ/g.
    pub fn lhv(&self, species: Species) -> Result<f64> {
        match species {
            Species::NH3 => Ok(self.lhv_nh3_kj_g),
            Species::H2 => Ok(self.lhv_h2_kj_g),
            s => Err(Error::UnsupportedSpecies(s)),
        }
    }

    /// Lower heating value, kJ/mol.
    pub fn molar_lhv(&self, species: Species) -> Result<f64> {
        Ok(self.lhv(species)? * species.molar_mass())
    }

    /// Heating-value gain per mol NH3 cracked: 1.5·LHV(H2) − LHV(NH3), kJ/mol.
    pub fn cracking_lhv_gain(&self) -> f64 {
        1.5 * self.lhv_h2_kj_g * Species::H2.molar_mass() - self.lhv_nh3_kj_g * Species::NH3.molar_mass()
    }
}

/// Ammonia-synthesis equilibrium constant for ½N2 + 3/2H2 ⇌ NH3,
/// `K = p_NH3 / (p_N2^0.5 · p_H2^1.5)` in bar⁻¹.
///
/// Gillespie & Beattie (1930) correlation,
/// `log10 Ka = −2.691122 log10 T − 5.519265e−5 T + 1.848863e−7 T² + 2001.6/T + 2.6899`
/// with Ka in atm⁻¹, converted to bar⁻¹.
pub fn equilibrium_constant(t: f64) -> Result<f64> {
    if !(400.0..=1200.0).contains(&t) {
        return Err(Error::arg(format!(
            "equilibrium correlation valid on [400, 1200] K, got {t} K"
        )));
    }
    let log10_ka = -2.691122 * t.log10() - 5.519265e-5 * t + 1.848863e-7 * t * t + 2001.6 / t + 2.6899;
    Ok(10f64.powf(log10_ka) / 1.01325)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trapezoid(db: &ThermoDb, s: Species, t: f64, n: usize) -> f64 {
        let h = (t - REFERENCE_TEMPERATURE) / n as f64;
        let mut acc = 0.5 * (db.cp(s, REFERENCE_TEMPERATURE).unwrap() + db.cp(s, t).unwrap());
        for k in 1..n {
            acc += db.cp(s, REFERENCE_TEMPERATURE + k as f64 * h).unwrap();
        }
        acc * h
    }

    #[test]
    fn zero_at_reference_for_every_species() {
        let db = ThermoDb::default();
        for s in Species::ALL {
            assert_eq!(db.sensible_enthalpy(s, REFERENCE_TEMPERATURE).unwrap(), 0.0);
        }
    }

    #[test]
    fn enthalpy_matches_trapezoid_oracle() {
        let db = ThermoDb::default();
        for s in Species::ALL {
            for &t in &[400.0, 723.15, 950.0, 1200.0, 1500.0] {
                let exact = db.sensible_enthalpy(s, t).unwrap();
                let oracle = trapezoid(&db, s, t, 200_000);
                assert!((exact - oracle).abs() < 1e-3, "{s} at {t}: {exact} vs {oracle}");
            }
        }
    }

    #[test]
    fn frozen_goldens_at_decomposition_temperature() {
        let db = ThermoDb::default();
        let n2 = db.sensible_enthalpy(Species::N2, 723.15).unwrap();
        let nh3 = db.sensible_enthalpy(Species::NH3, 723.15).unwrap();
        assert!((n2 - 12_697.0).abs() < 50.0, "N2 {n2}");
        assert!((17_000.0..19_000.0).contains(&nh3), "NH3 {nh3}");
    }

    #[test]
    fn out_of_range_names_species_and_bounds() {
        let db = ThermoDb::default();
        let err = db.sensible_enthalpy(Species::H2O, 2000.0).unwrap_err();
        match err {
            Error::TemperatureRange { species, min, max, .. } => {
                assert_eq!(species, Species::H2O);
                assert_eq!((min, max), (250.0, 1500.0));
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn cp_positive_over_range() {
        let db = ThermoDb::default();
        for s in Species::ALL {
            for k in 0..=1250 {
                assert!(db.cp(s, 250.0 + k as f64).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn polynomial_ranges_join_continuously() {
        let db = ThermoDb::default();
        for s in [Species::NH3, Species::H2, Species::N2, Species::O2, Species::H2O] {
            let lo = db.cp(s, 1000.0 - 1e-9).unwrap();
            let hi = db.cp(s, 1000.0).unwrap();
            assert!((lo - hi).abs() / hi < 2e-3, "{s}: {lo} vs {hi}");
        }
    }

    #[test]
    fn preheat_examples() {
        let db = ThermoDb::default();
        assert_eq!(db.preheat_duty(0.0, 298.15, 723.15).unwrap(), 0.0);
        assert!((db.preheat_duty(1.0, 298.15, 298.15).unwrap() - 23_300.0).abs() < 1e-9);
        let full = db.preheat_duty(1.0, 298.15, 723.15).unwrap();
        let oracle = 23_300.0 + trapezoid(&db, Species::NH3, 723.15, 100_000);
        assert!((full - oracle).abs() < 1e-2);
        assert!((40_000.0..42_500.0).contains(&full));
        assert!(db.preheat_duty(-1.0, 298.15, 723.15).is_err());
        assert!(db.preheat_duty(1.0, 400.0, 300.0).is_err());
    }

    #[test]
    fn kirchhoff_correction_matches_bookkeeping() {
        let db = ThermoDb::default();
        assert_eq!(db.decomposition_enthalpy(REFERENCE_TEMPERATURE).unwrap(), 46.1);
        // cool reactant to 298 K, react at reference, heat products back up
        let t = 723.15;
        let oracle = -trapezoid(&db, Species::NH3, t, 100_000)
            + 46_100.0
            + 1.5 * trapezoid(&db, Species::H2, t, 100_000)
            + 0.5 * trapezoid(&db, Species::N2, t, 100_000);
        let got = db.decomposition_enthalpy(t).unwrap() * 1e3;
        assert!((got - oracle).abs() < 1e-2, "{got} vs {oracle}");
    }

    #[test]
    fn heating_values() {
        let db = ThermoDb::default();
        assert_eq!(db.lhv(Species::H2).unwrap(), 120.0);
        assert_eq!(db.lhv(Species::NH3).unwrap(), 18.6);
        assert_eq!(db.lhv(Species::N2), Err(Error::UnsupportedSpecies(Species::N2)));
        // 1 mol NH3 carries 1.5 mol H2 worth about 360 kJ
        let h2_energy = 1.5 * db.molar_lhv(Species::H2).unwrap();
        assert!((h2_energy - 360.0).abs() < 3.0);
    }

    #[test]
    fn hydrogen_production_arithmetic() {
        let db = ThermoDb::default();
        let per_mol = db.preheat_duty(1.0, 298.15, 298.15).unwrap() * 1e-3
            + db.decomposition_enthalpy(298.15).unwrap();
        assert!((per_mol - 69.4).abs() < 1e-9);
        let share = per_mol / (360.0 * 0.40);
        assert!((share - 0.482).abs() < 1e-3);
    }

    #[test]
    fn equilibrium_constant_decreasing() {
        let mut prev = equilibrium_constant(400.0).unwrap();
        for k in 1..=800 {
            let v = equilibrium_constant(400.0 + k as f64).unwrap();
            assert!(v < prev);
            prev = v;
        }
        assert!(equilibrium_constant(399.0).is_err());
        assert!(equilibrium_constant(1201.0).is_err());
    }
}
