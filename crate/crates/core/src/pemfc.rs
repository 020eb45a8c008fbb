//! PEM fuel cell stack: Nernst potential less activation, concentration and
//! ohmic overpotentials.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Stage};
use crate::numeric::brent;
use crate::thermo::{Species, ThermoDb, FARADAY, GAS_CONSTANT, REFERENCE_PRESSURE_KPA, REFERENCE_TEMPERATURE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FcStack {
    pub cells: f64,
    pub cell_area_cm2: f64,
    pub temperature_k: f64,
    pub p_h2_kpa: f64,
    pub p_o2_kpa: f64,
    pub alpha: f64,
    /// Exchange current density, A/cm².
    pub exchange_current: f64,
    /// Limiting current density, A/cm².
    pub limiting_current: f64,
    pub membrane_thickness_cm: f64,
    /// Membrane conductivity, 1/(Ω·cm).
    pub membrane_conductivity: f64,
    /// Lowest dispatchable stack output, kW.
    pub min_power_kw: f64,
    /// Dispatch ceiling, kW; the polarization peak when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_power_kw: Option<f64>,
}

impl Default for FcStack {
    fn default() -> Self {
        FcStack {
            cells: 400.0,
            cell_area_cm2: 280.0,
            temperature_k: 353.15,
            p_h2_kpa: 150.0,
            p_o2_kpa: 30.0,
            alpha: 0.5,
            exchange_current: 1e-4,
            limiting_current: 1.5,
            membrane_thickness_cm: 0.0125,
            membrane_conductivity: 0.1,
            min_power_kw: 1.0,
            max_power_kw: None,
        }
    }
}

impl FcStack {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("stack: {m}")));
        let positive = [
            self.cells,
            self.cell_area_cm2,
            self.temperature_k,
            self.p_h2_kpa,
            self.p_o2_kpa,
            self.exchange_current,
            self.limiting_current,
            self.membrane_thickness_cm,
            self.membrane_conductivity,
            self.min_power_kw,
        ];
        if positive.iter().any(|&v| !(v > 0.0)) {
            return bad("all physical parameters must be positive");
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad("alpha must lie in (0, 1]");
        }
        if !(self.exchange_current < self.limiting_current) {
            return bad("exchange current must be below the limiting current");
        }
        let peak = power_peak(self)?;
        if let Some(m) = self.max_power_kw {
            if m > peak.power_kw * (1.0 + 1e-12) {
                return bad("max_power_kw exceeds the polarization peak");
            }
        }
        if self.min_power_kw >= self.max_power_kw.unwrap_or(peak.power_kw) {
            return bad("min_power_kw must be below the maximum power");
        }
        Ok(())
    }

    /// Dispatch envelope `[min, max]`, kW.
    pub fn envelope(&self) -> Result<(f64, f64)> {
        let top = match self.max_power_kw {
            Some(m) => m,
            None => power_peak(self)?.power_kw,
        };
        Ok((self.min_power_kw, top))
    }

    /// Same cell physics with the cell count scaled so the dispatch ceiling
    /// becomes `max_kw`. The floor is an absolute minimum output and stays put.
    pub fn rescaled(&self, max_kw: f64) -> Result<FcStack> {
        let (_, hi) = self.envelope()?;
        let f = max_kw / hi;
        Ok(FcStack {
            cells: self.cells * f,
            max_power_kw: self.max_power_kw.map(|m| m * f),
            ..self.clone()
        })
    }

    fn rt_2f(&self) -> f64 {
        GAS_CONSTANT * self.temperature_k / (2.0 * FARADAY)
    }
}

/// Standard-pressure reversible voltage at temperature `t`, V.
pub fn standard_potential(t: f64) -> f64 {
    1.229 - 8.5e-4 * (t - REFERENCE_TEMPERATURE)
}

/// Nernst potential `E_T⁰ + (RT/2F)·ln(p_H2/p₀·√(p_O2/p₀))`, V.
pub fn nernst(stack: &FcStack) -> Result<f64> {
    if !(stack.p_h2_kpa > 0.0 && stack.p_o2_kpa > 0.0) {
        return Err(Error::arg("reactant partial pressures must be positive"));
    }
    let p0 = REFERENCE_PRESSURE_KPA;
    let arg = stack.p_h2_kpa / p0 * (stack.p_o2_kpa / p0).sqrt();
    Ok(standard_potential(stack.temperature_k) + stack.rt_2f() * arg.ln())
}

/// Closed-form polarization pieces at fixed stack state.
#[derive(Debug, Clone, Copy)]
struct Polarization {
    e_n: f64,
    b_act: f64,
    b_conc: f64,
    i0: f64,
    il: f64,
    r_ohm: f64,
}

impl Polarization {
    fn new(stack: &FcStack) -> Result<Self> {
        Ok(Polarization {
            e_n: nernst(stack)?,
            b_act: stack.rt_2f() / stack.alpha,
            b_conc: stack.rt_2f(),
            i0: stack.exchange_current,
            il: stack.limiting_current,
            r_ohm: stack.membrane_thickness_cm / stack.membrane_conductivity,
        })
    }

    fn voltage(&self, i: f64) -> f64 {
        let act = if i > self.i0 { self.b_act * (i / self.i0).ln() } else { 0.0 };
        let conc = self.b_conc * (self.il / (self.il - i)).ln();
        self.e_n - act - conc - self.r_ohm * i
    }

    fn dvdi(&self, i: f64) -> f64 {
        let act = if i > self.i0 { self.b_act / i } else { 0.0 };
        -act - self.b_conc / (self.il - i) - self.r_ohm
    }
}

fn check_current(i: f64, stack: &FcStack) -> Result<()> {
    if !(i > 0.0) {
        return Err(Error::arg(format!("current density must be positive, got {i}")));
    }
    if i >= stack.limiting_current {
        return Err(Error::infeasible(
            Stage::FuelCell,
            format!("current density {i} A/cm² reaches the limiting current {}", stack.limiting_current),
        ));
    }
    Ok(())
}

/// Cell voltage at current density `i` (A/cm²), V.
pub fn cell_voltage(i: f64, stack: &FcStack) -> Result<f64> {
    check_current(i, stack)?;
    Ok(Polarization::new(stack)?.voltage(i))
}

/// Analytic `dV/di`, V·cm²/A.
pub fn cell_voltage_slope(i: f64, stack: &FcStack) -> Result<f64> {
    check_current(i, stack)?;
    Ok(Polarization::new(stack)?.dvdi(i))
}

/// Stack output `N·V·i·A` at current density `i`, kW.
pub fn stack_power(i: f64, stack: &FcStack) -> Result<f64> {
    Ok(stack.cells * cell_voltage(i, stack)? * i * stack.cell_area_cm2 * 1e-3)
}

/// Faraday hydrogen consumption, g/s.
pub fn hydrogen_flow(i: f64, stack: &FcStack) -> Result<f64> {
    if !(i >= 0.0) {
        return Err(Error::arg(format!("current density must be non-negative, got {i}")));
    }
    Ok(stack.cells * i * stack.cell_area_cm2 * Species::H2.molar_mass() / (2.0 * FARADAY))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FcOperatingPoint {
    pub current_density: f64,
    pub cell_voltage: f64,
    pub power_kw: f64,
    pub hydrogen_g_s: f64,
    pub heat_kw: f64,
    pub efficiency: f64,
}

fn operating_point(i: f64, pol: &Polarization, stack: &FcStack, thermo: &ThermoDb) -> Result<FcOperatingPoint> {
    let v = pol.voltage(i);
    let power = stack.cells * v * i * stack.cell_area_cm2 * 1e-3;
    let h2 = hydrogen_flow(i, stack)?;
    let fuel = h2 * thermo.lhv_h2_kj_g;
    Ok(FcOperatingPoint {
        current_density: i,
        cell_voltage: v,
        power_kw: power,
        hydrogen_g_s: h2,
        heat_kw: fuel - power,
        efficiency: power / fuel,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerPeak {
    pub current_density: f64,
    pub power_kw: f64,
}

/// Polarization power peak, located by a root solve on `dP/di`.
pub fn power_peak(stack: &FcStack) -> Result<PowerPeak> {
    let pol = Polarization::new(stack)?;
    let (i0, il) = (stack.exchange_current, stack.limiting_current);
    let dp = |i: f64| pol.voltage(i) + i * pol.dvdi(i);
    let hi = il * (1.0 - 1e-12);
    if dp(i0) <= 0.0 {
        return Err(Error::Config("stack delivers no power above the exchange current".into()));
    }
    let i = brent(dp, i0, hi, 1e-15, 300)?;
    Ok(PowerPeak {
        current_density: i,
        power_kw: stack.cells * pol.voltage(i) * i * stack.cell_area_cm2 * 1e-3,
    })
}

/// Low-current-branch operating point delivering `power_kw`.
pub fn solve_current_for_power(power_kw: f64, stack: &FcStack, thermo: &ThermoDb) -> Result<FcOperatingPoint> {
    if !(power_kw > 0.0) {
        return Err(Error::arg(format!("stack power must be positive, got {power_kw}")));
    }
    let peak = power_peak(stack)?;
    if power_kw > peak.power_kw {
        return Err(Error::infeasible(
            Stage::FuelCell,
            format!("{power_kw} kW exceeds the stack maximum {:.4} kW", peak.power_kw),
        ));
    }
    let pol = Polarization::new(stack)?;
    let k = stack.cells * stack.cell_area_cm2 * 1e-3;
    let i = if power_kw == peak.power_kw {
        peak.current_density
    } else {
        brent(
            |i| k * pol.voltage(i) * i - power_kw,
            0.0,
            peak.current_density,
            1e-16,
            300,
        )?
    };
    let point = operating_point(i, &pol, stack, thermo)?;
    if (point.power_kw - power_kw).abs() > 1e-9 * power_kw {
        return Err(Error::Numerical(format!(
            "stack power inversion missed {power_kw} kW by {:.3e}",
            point.power_kw - power_kw
        )));
    }
    Ok(point)
}

/// Stack efficiency on the low-current branch at `power_kw`.
pub fn efficiency(power_kw: f64, stack: &FcStack, thermo: &ThermoDb) -> Result<f64> {
    Ok(solve_current_for_power(power_kw, stack, thermo)?.efficiency)
}
