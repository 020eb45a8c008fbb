//! Ammonia–hydrogen engine driving a generator.
//!
//! The combined engine-generator efficiency is a tabulated curve over
//! generator output, interpolated monotonically between knots. Coolant and
//! friction losses are fractions of the fuel heating value; whatever is
//! left after work and those losses leaves with the exhaust.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Stage};
use crate::numeric::{brent, Pchip};
use crate::stream::GasStream;
use crate::thermo::{Species, ThermoDb, AIR_O2_FRACTION, REFERENCE_PRESSURE_KPA, REFERENCE_TEMPERATURE};

/// Upper limit of the exhaust temperature solve, K.
pub const EXHAUST_T_MAX: f64 = 1500.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineCurve {
    /// Mole fraction of H2 in the fuel mixture.
    pub hydrogen_mole_ratio: f64,
    pub max_thermal_efficiency: f64,
    pub excess_air_ratio: f64,
    pub nh3_injection_kpa: f64,
    pub h2_injection_kpa: f64,
    /// Generator output knots, kW. First and last knots bound the envelope.
    pub power_kw: Vec<f64>,
    /// Combined engine-generator efficiency at each knot.
    pub efficiency: Vec<f64>,
    /// Coolant heat as a fraction of fuel LHV at each knot.
    pub coolant_fraction: Vec<f64>,
    /// Friction and lubrication heat as a fraction of fuel LHV.
    pub friction_fraction: Vec<f64>,
    /// Separate generator efficiency per knot; when absent the generator is
    /// folded into the combined curve and has no loss of its own.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator_efficiency: Option<Vec<f64>>,
}

impl Default for EngineCurve {
    fn default() -> Self {
        EngineCurve {
            hydrogen_mole_ratio: 0.2,
            max_thermal_efficiency: 0.425,
            excess_air_ratio: 1.0,
            nh3_injection_kpa: 600.0,
            h2_injection_kpa: 2500.0,
            power_kw: vec![5.0, 20.0, 40.0, 60.0, 95.0, 120.0, 150.0, 185.0, 216.0],
            efficiency: vec![0.18, 0.28, 0.34, 0.372, 0.387, 0.385, 0.372, 0.335, 0.2824],
            coolant_fraction: vec![0.345, 0.285, 0.245, 0.22, 0.19, 0.19, 0.19, 0.205, 0.245],
            friction_fraction: vec![0.16, 0.12, 0.09, 0.08, 0.07, 0.075, 0.085, 0.10, 0.12],
            generator_efficiency: None,
        }
    }
}

/// Evaluated tables of an [`EngineCurve`].
struct Tables {
    efficiency: Pchip,
    coolant: Pchip,
    friction: Pchip,
    generator: Option<Pchip>,
}

impl EngineCurve {
    pub fn min_power_kw(&self) -> f64 {
        self.power_kw.first().copied().unwrap_or(0.0)
    }

    pub fn rated_power_kw(&self) -> f64 {
        self.power_kw.last().copied().unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("engine: {m}")));
        let n = self.power_kw.len();
        if n < 2 {
            return bad("at least two power knots are required".into());
        }
        if !(self.power_kw[0] > 0.0) {
            return bad("power knots must be positive".into());
        }
        for (name, v) in [
            ("efficiency", &self.efficiency),
            ("coolant_fraction", &self.coolant_fraction),
            ("friction_fraction", &self.friction_fraction),
        ] {
            if v.len() != n {
                return bad(format!("{name} has {} entries for {n} power knots", v.len()));
            }
        }
        if let Some(g) = &self.generator_efficiency {
            if g.len() != n {
                return bad(format!("generator_efficiency has {} entries for {n} power knots", g.len()));
            }
            if g.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
                return bad("generator efficiency must lie in (0, 1]".into());
            }
        }
        if !(0.0..=1.0).contains(&self.hydrogen_mole_ratio) {
            return bad(format!("hydrogen_mole_ratio must lie in [0, 1], got {}", self.hydrogen_mole_ratio));
        }
        if !(self.excess_air_ratio >= 1.0) {
            return bad(format!("excess_air_ratio below 1 is a rich mixture, got {}", self.excess_air_ratio));
        }
        for k in 0..n {
            let eta = self.efficiency[k];
            let gen = self.generator_efficiency.as_ref().map_or(1.0, |g| g[k]);
            let thermal = eta / gen;
            if !(eta > 0.0) || thermal > self.max_thermal_efficiency + 1e-12 {
                return bad(format!(
                    "efficiency {eta} at {} kW is outside (0, {}]",
                    self.power_kw[k],
                    self.max_thermal_efficiency * gen
                ));
            }
            let (c, f) = (self.coolant_fraction[k], self.friction_fraction[k]);
            if c < 0.0 || f < 0.0 || c + f + thermal > 1.0 {
                return bad(format!("heat split at {} kW leaves no exhaust heat", self.power_kw[k]));
            }
        }
        self.tables().map(|_| ())
    }

    fn tables(&self) -> Result<Tables> {
        let p = &self.power_kw;
        Ok(Tables {
            efficiency: Pchip::new(p, &self.efficiency)?,
            coolant: Pchip::new(p, &self.coolant_fraction)?,
            friction: Pchip::new(p, &self.friction_fraction)?,
            generator: self.generator_efficiency.as_deref().map(|g| Pchip::new(p, g)).transpose()?,
        })
    }

    fn check_envelope(&self, w_gen: f64) -> Result<()> {
        let (lo, hi) = (self.min_power_kw(), self.rated_power_kw());
        // tolerate rounding on the rated knot when grids are built by stepping
        if !(w_gen >= lo * (1.0 - 1e-12) && w_gen <= hi * (1.0 + 1e-12)) {
            return Err(Error::infeasible(
                Stage::IceGen,
                format!("generator output {w_gen} kW is outside the envelope [{lo}, {hi}] kW"),
            ));
        }
        Ok(())
    }

    /// Combined efficiency at generator output `w_gen`.
    pub fn efficiency_at(&self, w_gen: f64) -> Result<f64> {
        self.check_envelope(w_gen)?;
        Ok(self.tables()?.efficiency.eval(w_gen))
    }

    /// Same curve for an engine rated at `rated_kw`, with efficiency and heat
    /// split invariant in load fraction.
    pub fn rescaled(&self, rated_kw: f64) -> EngineCurve {
        let f = rated_kw / self.rated_power_kw();
        EngineCurve {
            power_kw: self.power_kw.iter().map(|p| p * f).collect(),
            ..self.clone()
        }
    }

    /// Heating value of one mole of fuel mixture, kJ/mol.
    pub fn molar_fuel_lhv(&self, thermo: &ThermoDb) -> f64 {
        let a = self.hydrogen_mole_ratio;
        (1.0 - a) * Species::NH3.molar_mass() * thermo.lhv_nh3_kj_g + a * Species::H2.molar_mass() * thermo.lhv_h2_kj_g
    }
}

/// Exhaust of `fuel_flow` mol/s of `(1−a) NH3 + a H2` burned completely with
/// `λ` times the stoichiometric air. The stream is returned at 298.15 K.
pub fn combustion_products(a: f64, lambda: f64, fuel_flow: f64) -> Result<GasStream> {
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::arg(format!("hydrogen mole ratio must lie in [0, 1], got {a}")));
    }
    if !(lambda >= 1.0) {
        return Err(Error::arg(format!("rich mixtures (λ = {lambda} < 1) are not supported")));
    }
    if !(fuel_flow >= 0.0) {
        return Err(Error::arg(format!("fuel flow must be non-negative, got {fuel_flow}")));
    }
    let o2_stoich = 0.75 * (1.0 - a) + 0.5 * a;
    let n2_air = (1.0 - AIR_O2_FRACTION) / AIR_O2_FRACTION * lambda * o2_stoich;
    GasStream::new(REFERENCE_TEMPERATURE, REFERENCE_PRESSURE_KPA)?
        .with(Species::H2O, fuel_flow * (1.5 * (1.0 - a) + a))?
        .with(Species::N2, fuel_flow * (0.5 * (1.0 - a) + n2_air))?
        .with(Species::O2, fuel_flow * (lambda - 1.0) * o2_stoich)
}

/// Combustion air for `fuel_flow` mol/s of mixture, mol/s.
pub fn air_flow(a: f64, lambda: f64, fuel_flow: f64) -> f64 {
    lambda * (0.75 * (1.0 - a) + 0.5 * a) * fuel_flow / AIR_O2_FRACTION
}

/// Fuel feed for generator output `w_gen`, as (NH3 g/s, H2 g/s).
pub fn fuel_for_power(w_gen: f64, curve: &EngineCurve, thermo: &ThermoDb) -> Result<(f64, f64)> {
    let n = fuel_moles_for_power(w_gen, curve, thermo)?;
    let a = curve.hydrogen_mole_ratio;
    Ok((
        (1.0 - a) * n * Species::NH3.molar_mass(),
        a * n * Species::H2.molar_mass(),
    ))
}

fn fuel_moles_for_power(w_gen: f64, curve: &EngineCurve, thermo: &ThermoDb) -> Result<f64> {
    let eta = curve.efficiency_at(w_gen)?;
    Ok(w_gen / eta / curve.molar_fuel_lhv(thermo))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IceOperatingPoint {
    pub w_gen_kw: f64,
    pub efficiency: f64,
    pub shaft_kw: f64,
    pub fuel_lhv_kw: f64,
    pub nh3_g_s: f64,
    pub h2_g_s: f64,
    pub air_g_s: f64,
    pub excess_air_ratio: f64,
    /// Exhaust at its solved temperature.
    pub exhaust: GasStream,
    pub exhaust_heat_kw: f64,
    pub coolant_heat_kw: f64,
    pub friction_heat_kw: f64,
    pub generator_loss_kw: f64,
}

impl IceOperatingPoint {
    pub fn exhaust_temperature_k(&self) -> f64 {
        self.exhaust.temperature_k
    }
}

/// Energy balance at `w_gen` with the curve's own excess air ratio.
pub fn energy_balance(w_gen: f64, curve: &EngineCurve, thermo: &ThermoDb) -> Result<IceOperatingPoint> {
    energy_balance_with(w_gen, curve, curve.excess_air_ratio, 0.0, thermo)
}

/// Energy balance at `w_gen` and excess air ratio `lambda`. `diluent_n2`
/// (mol/s) is inert nitrogen arriving with the fuel, e.g. from a cracker.
pub fn energy_balance_with(
    w_gen: f64,
    curve: &EngineCurve,
    lambda: f64,
    diluent_n2: f64,
    thermo: &ThermoDb,
) -> Result<IceOperatingPoint> {
    curve.check_envelope(w_gen)?;
    let tab = curve.tables()?;
    let eta = tab.efficiency.eval(w_gen);
    let eta_gen = tab.generator.as_ref().map_or(1.0, |g| g.eval(w_gen));
    let a = curve.hydrogen_mole_ratio;
    let fuel_lhv = w_gen / eta;
    let n_fuel = fuel_lhv / curve.molar_fuel_lhv(thermo);
    let shaft = w_gen / eta_gen;
    let coolant = tab.coolant.eval(w_gen) * fuel_lhv;
    let friction = tab.friction.eval(w_gen) * fuel_lhv;
    let exhaust_heat = fuel_lhv - shaft - coolant - friction;
    if !(exhaust_heat > 0.0) {
        return Err(Error::Calibration(format!(
            "heat split at {w_gen} kW leaves {exhaust_heat:.3} kW for the exhaust"
        )));
    }
    let mut exhaust = combustion_products(a, lambda, n_fuel)?;
    exhaust.set_flow(Species::N2, exhaust.flow(Species::N2) + diluent_n2)?;
    let t_exh = exhaust_temperature(&exhaust, exhaust_heat, thermo)?;
    exhaust.temperature_k = t_exh;
    Ok(IceOperatingPoint {
        w_gen_kw: w_gen,
        efficiency: eta,
        shaft_kw: shaft,
        fuel_lhv_kw: fuel_lhv,
        nh3_g_s: (1.0 - a) * n_fuel * Species::NH3.molar_mass(),
        h2_g_s: a * n_fuel * Species::H2.molar_mass(),
        air_g_s: air_flow(a, lambda, n_fuel) * Species::AIR.molar_mass(),
        excess_air_ratio: lambda,
        exhaust,
        exhaust_heat_kw: exhaust_heat,
        coolant_heat_kw: coolant,
        friction_heat_kw: friction,
        generator_loss_kw: shaft - w_gen,
    })
}

/// Temperature at which `exhaust` carries `heat_kw` above 298.15 K.
fn exhaust_temperature(exhaust: &GasStream, heat_kw: f64, thermo: &ThermoDb) -> Result<f64> {
    let q = |t: f64| thermo.stream_enthalpy_delta(exhaust, REFERENCE_TEMPERATURE, t).map(|w| w * 1e-3);
    let q_max = q(EXHAUST_T_MAX)?;
    if heat_kw > q_max {
        return Err(Error::Calibration(format!(
            "exhaust heat {heat_kw:.3} kW implies a temperature above {EXHAUST_T_MAX} K"
        )));
    }
    brent(
        |t| q(t).map_or(f64::NAN, |v| v - heat_kw),
        REFERENCE_TEMPERATURE,
        EXHAUST_T_MAX,
        1e-9,
        200,
    )
}

/// Exhaust enthalpy above the decomposition temperature, kW; zero when the
/// exhaust is not hotter than `t_dec`.
pub fn high_temp_heat(point: &IceOperatingPoint, t_dec: f64, thermo: &ThermoDb) -> Result<f64> {
    let t_exh = point.exhaust.temperature_k;
    if t_exh <= t_dec {
        return Ok(0.0);
    }
    Ok(thermo.stream_enthalpy_delta(&point.exhaust, t_dec, t_exh)? * 1e-3)
}

/// Exhaust enthalpy between 298.15 K and `min(t_dec, T_exh)`, kW.
pub fn low_temp_exhaust_heat(point: &IceOperatingPoint, t_dec: f64, thermo: &ThermoDb) -> Result<f64> {
    let t = point.exhaust.temperature_k.min(t_dec);
    Ok(thermo.stream_enthalpy_delta(&point.exhaust, REFERENCE_TEMPERATURE, t)? * 1e-3)
}
