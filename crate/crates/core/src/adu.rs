//! Ammonia decomposition unit: Temkin–Pyzhev kinetics in an isothermal,
//! isobaric packed bed.
//!
//! The bed is integrated along its length in terms of the NH3 conversion
//! `X`; species flows are reconstructed from the single reaction extent
//! (NH3 → 1.5 H2 + 0.5 N2), so N and H atoms balance by construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Stage};
use crate::numeric::{brent, dopri5, OdeOptions};
use crate::stream::GasStream;
use crate::thermo::{equilibrium_constant, Species, ThermoDb, GAS_CONSTANT};

/// Partial-pressure floor inside the rate expression, bar.
pub const PRESSURE_FLOOR_BAR: f64 = 1e-6;

/// Stoichiometric coefficients of (NH3, H2, N2).
pub const STOICHIOMETRY: [(Species, f64); 3] = [(Species::NH3, -1.0), (Species::H2, 1.5), (Species::N2, 0.5)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalystBed {
    pub activation_energy_kj_mol: f64,
    /// Pre-exponential factor for R in mol NH3/(m³·s) with pressures in bar.
    pub pre_exponential: f64,
    pub beta: f64,
    pub area_m2: f64,
    pub length_m: f64,
    pub temperature_k: f64,
    pub pressure_kpa: f64,
    /// Lowest acceptable outlet conversion; fixes the bed's hydrogen capacity.
    pub min_conversion: f64,
}

impl Default for CatalystBed {
    fn default() -> Self {
        CatalystBed {
            activation_energy_kj_mol: 117.0,
            pre_exponential: 1.5e7,
            beta: 0.27,
            area_m2: 0.05,
            length_m: 1.0,
            temperature_k: 723.15,
            pressure_kpa: 100.0,
            min_conversion: 0.9,
        }
    }
}

impl CatalystBed {
    pub fn volume_m3(&self) -> f64 {
        self.area_m2 * self.length_m
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad(format!("bed beta must lie in (0, 1), got {}", self.beta));
        }
        if !(self.area_m2 > 0.0) || !(self.length_m > 0.0) {
            return bad(format!(
                "bed area and length must be positive, got {} m² and {} m",
                self.area_m2, self.length_m
            ));
        }
        if !(self.pressure_kpa > 0.0) {
            return bad(format!("bed pressure must be positive, got {} kPa", self.pressure_kpa));
        }
        if !(self.pre_exponential > 0.0) || !(self.activation_energy_kj_mol >= 0.0) {
            return bad("bed kinetic constants must be positive".into());
        }
        equilibrium_constant(self.temperature_k).map_err(|e| Error::Config(e.to_string()))?;
        if !(self.min_conversion > 0.0 && self.min_conversion < 1.0) {
            return bad(format!("bed min_conversion must lie in (0, 1), got {}", self.min_conversion));
        }
        Ok(())
    }

    /// Same bed with its length rescaled to `volume_m3`.
    pub fn with_volume(&self, volume_m3: f64) -> CatalystBed {
        CatalystBed {
            length_m: volume_m3 / self.area_m2,
            ..self.clone()
        }
    }
}

/// Pre-evaluated rate law at fixed temperature.
#[derive(Debug, Clone, Copy)]
struct RateLaw {
    k: f64,
    k_syn_sq: f64,
    beta: f64,
}

impl RateLaw {
    fn new(bed: &CatalystBed, t: f64) -> Result<Self> {
        let k_syn = equilibrium_constant(t)?;
        Ok(RateLaw {
            k: bed.pre_exponential * (-bed.activation_energy_kj_mol * 1e3 / (GAS_CONSTANT * t)).exp(),
            k_syn_sq: k_syn * k_syn,
            beta: bed.beta,
        })
    }

    /// mol NH3/(m³·s). `ln a` with `a = p_NH3²/p_H2³` is formed once and
    /// shared by both terms.
    #[inline]
    fn eval(&self, p_nh3: f64, p_h2: f64, p_n2: f64) -> f64 {
        let p_nh3 = p_nh3.max(PRESSURE_FLOOR_BAR);
        let p_h2 = p_h2.max(PRESSURE_FLOOR_BAR);
        let ln_a = 2.0 * p_nh3.ln() - 3.0 * p_h2.ln();
        let forward = (self.beta * ln_a).exp();
        let reverse = p_n2 * self.k_syn_sq * ((self.beta - 1.0) * ln_a).exp();
        self.k * (forward - reverse)
    }
}

/// Temkin–Pyzhev decomposition rate, mol NH3/(m³ catalyst·s).
///
/// `R = k0·exp(−E/RT)·[(p_NH3²/p_H2³)^β − p_N2·K²·(p_H2³/p_NH3²)^(1−β)]`
/// where `K` is the synthesis constant of [`equilibrium_constant`]; the rate
/// vanishes when `p_NH3²/(p_N2·p_H2³) = K²`.
pub fn rate(t: f64, p_nh3: f64, p_h2: f64, p_n2: f64, bed: &CatalystBed) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::arg(format!("temperature must be positive, got {t}")));
    }
    if !(p_nh3 >= 0.0 && p_h2 >= 0.0 && p_n2 >= 0.0) {
        return Err(Error::arg("partial pressures must be non-negative"));
    }
    Ok(RateLaw::new(bed, t)?.eval(p_nh3, p_h2, p_n2))
}

/// Equilibrium conversion of a pure NH3 feed at (`t`, `pressure_kpa`).
pub fn equilibrium_conversion(t: f64, pressure_kpa: f64) -> Result<f64> {
    let k = equilibrium_constant(t)?;
    let p_bar = pressure_kpa * 1e-2;
    let c = k * k * p_bar * p_bar * 1.6875;
    // K²·p_N2·p_H2³ − p_NH3² scaled by (1+X)²/P²
    let g = |x: f64| c * x.powi(4) / ((1.0 + x) * (1.0 + x)) - (1.0 - x) * (1.0 - x);
    brent(g, 0.0, 1.0, 1e-15, 200)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AduResult {
    pub outlet: GasStream,
    /// Fraction of inlet NH3 decomposed.
    pub conversion: f64,
    /// Endothermic duty of the reaction, W.
    pub heat_duty_w: f64,
    pub ghsv_per_h: f64,
}

/// Volumetric flow at bed conditions over bed volume, 1/h.
pub fn ghsv(nh3_flow_mol_s: f64, bed: &CatalystBed) -> f64 {
    let vol_flow = nh3_flow_mol_s * GAS_CONSTANT * bed.temperature_k / (bed.pressure_kpa * 1e3);
    vol_flow / bed.volume_m3() * 3600.0
}

/// Pure-NH3 molar feed giving `ghsv_per_h` on `bed`, mol/s.
pub fn feed_for_ghsv(ghsv_per_h: f64, bed: &CatalystBed) -> f64 {
    ghsv_per_h / 3600.0 * bed.volume_m3() * bed.pressure_kpa * 1e3 / (GAS_CONSTANT * bed.temperature_k)
}

fn ode_options() -> OdeOptions {
    OdeOptions {
        rtol: 1e-10,
        atol: 1e-11,
        max_steps: 200_000,
        initial_fraction: 1e-10,
    }
}

/// Outlet conversion for `inlet` through `bed` (no validation).
fn conversion_through(inlet: &GasStream, bed: &CatalystBed, law: &RateLaw) -> Result<f64> {
    let n0 = inlet.flow(Species::NH3);
    let h0 = inlet.flow(Species::H2);
    let m0 = inlet.flow(Species::N2);
    let total0 = inlet.total_flow();
    let p_bar = bed.pressure_kpa * 1e-2;
    let scale = bed.area_m2 / n0;
    let rhs = |_z: f64, x: f64| {
        let xi = n0 * x;
        let total = total0 + xi;
        let f = p_bar / total;
        law.eval((n0 - xi) * f, (h0 + 1.5 * xi) * f, (m0 + 0.5 * xi) * f) * scale
    };
    let sol = dopri5(rhs, 0.0, bed.length_m, 0.0, &ode_options())?;
    Ok(sol.y)
}

fn outlet_for(inlet: &GasStream, conversion: f64) -> Result<GasStream> {
    let xi = inlet.flow(Species::NH3) * conversion;
    let mut out = inlet.clone();
    for (s, nu) in STOICHIOMETRY {
        out.set_flow(s, (inlet.flow(s) + nu * xi).max(0.0))?;
    }
    Ok(out)
}

/// Integrates the species balance `dn_i/dz = ν_i·R·A` over the bed length.
pub fn integrate_pfr(inlet: &GasStream, bed: &CatalystBed, thermo: &ThermoDb) -> Result<AduResult> {
    bed.validate()?;
    let n0 = inlet.flow(Species::NH3);
    if !(n0 > 0.0) {
        return Err(Error::arg("decomposition unit inlet carries no NH3"));
    }
    if (inlet.temperature_k - bed.temperature_k).abs() > 1e-9 * bed.temperature_k {
        return Err(Error::arg(format!(
            "inlet at {} K but the bed is isothermal at {} K",
            inlet.temperature_k, bed.temperature_k
        )));
    }
    let law = RateLaw::new(bed, bed.temperature_k)?;
    let mut conversion = conversion_through(inlet, bed, &law)?;
    if !(0.0..=1.0).contains(&conversion) {
        if conversion > 1.0 && conversion < 1.0 + 1e-9 {
            conversion = 1.0;
        } else {
            return Err(Error::Numerical(format!("conversion {conversion} left [0, 1]")));
        }
    }
    let mut outlet = outlet_for(inlet, conversion)?;
    outlet.pressure_kpa = bed.pressure_kpa;
    Ok(AduResult {
        outlet,
        conversion,
        heat_duty_w: n0 * conversion * thermo.decomposition_enthalpy(bed.temperature_k)? * 1e3,
        ghsv_per_h: ghsv(n0, bed),
    })
}

fn pure_nh3(flow: f64, bed: &CatalystBed) -> Result<GasStream> {
    GasStream::new(bed.temperature_k, bed.pressure_kpa)?.with(Species::NH3, flow)
}

/// Conversion of a pure NH3 feed of `flow` mol/s; bed assumed valid.
fn pure_conversion(flow: f64, bed: &CatalystBed, law: &RateLaw) -> Result<f64> {
    conversion_through(&pure_nh3(flow, bed)?, bed, law)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConversionPoint {
    pub ghsv_per_h: f64,
    pub conversion: f64,
    pub h2_rate_mol_s: f64,
}

/// Conversion and hydrogen production along a GHSV ladder (pure NH3 feed).
pub fn conversion_curve(bed: &CatalystBed, ghsv_list: &[f64], thermo: &ThermoDb) -> Result<Vec<ConversionPoint>> {
    ghsv_list
        .iter()
        .map(|&g| {
            if !(g > 0.0) {
                return Err(Error::arg(format!("GHSV must be positive, got {g}")));
            }
            let feed = feed_for_ghsv(g, bed);
            let r = integrate_pfr(&pure_nh3(feed, bed)?, bed, thermo)?;
            Ok(ConversionPoint {
                ghsv_per_h: g,
                conversion: r.conversion,
                h2_rate_mol_s: 1.5 * r.conversion * feed,
            })
        })
        .collect()
}

/// Smallest bed volume (at the template's cross-section) that delivers
/// `max_h2_demand` mol/s while keeping conversion at `min_conversion`.
pub fn size_catalyst(max_h2_demand: f64, min_conversion: f64, template: &CatalystBed) -> Result<f64> {
    template.validate()?;
    if !(max_h2_demand > 0.0) {
        return Err(Error::arg(format!("hydrogen demand must be positive, got {max_h2_demand}")));
    }
    let x_eq = equilibrium_conversion(template.temperature_k, template.pressure_kpa)?;
    if !(min_conversion > 0.0 && min_conversion < x_eq) {
        return Err(Error::infeasible(
            Stage::Adu,
            format!(
                "conversion {min_conversion} is unreachable; equilibrium bound at {} K, {} kPa is {x_eq:.6}",
                template.temperature_k, template.pressure_kpa
            ),
        ));
    }
    let feed = max_h2_demand / (1.5 * min_conversion);
    let law = RateLaw::new(template, template.temperature_k)?;
    let inlet = pure_nh3(feed, template)?;
    let x_at = |ln_len: f64| -> Result<f64> {
        let bed = CatalystBed {
            length_m: ln_len.exp(),
            ..template.clone()
        };
        conversion_through(&inlet, &bed, &law)
    };
    let (mut lo, mut hi) = (template.length_m.ln(), template.length_m.ln());
    while x_at(lo)? > min_conversion {
        lo -= 2.0;
    }
    while x_at(hi)? < min_conversion {
        hi += 2.0;
        if hi > 60.0 {
            return Err(Error::Numerical("bed sizing bracket diverged".into()));
        }
    }
    let mut failure = None;
    let ln_len = brent(
        |l| match x_at(l) {
            Ok(x) => x - min_conversion,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        1e-13,
        200,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(template.area_m2 * ln_len.exp())
}

/// Maximum hydrogen production at the bed's minimum acceptable conversion, mol/s.
pub fn bed_capacity(bed: &CatalystBed) -> Result<f64> {
    bed.validate()?;
    let law = RateLaw::new(bed, bed.temperature_k)?;
    let target = bed.min_conversion;
    let g = |ln_f: f64| pure_conversion(ln_f.exp(), bed, &law).map(|x| x - target);
    let mut ln_f = feed_for_ghsv(1.0, bed).ln();
    let mut lo = ln_f;
    while g(lo)? < 0.0 {
        lo -= 2.0;
        if lo < -200.0 {
            return Err(Error::infeasible(Stage::Adu, "bed cannot reach its minimum conversion"));
        }
    }
    while g(ln_f)? > 0.0 {
        ln_f += 2.0;
    }
    let root = brent(|l| g(l).unwrap_or(f64::NAN), lo, ln_f, 1e-13, 200)?;
    Ok(1.5 * target * root.exp())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeedSolution {
    pub nh3_feed_mol_s: f64,
    pub conversion: f64,
    pub adu: AduResult,
}

/// NH3 feed whose decomposition yields exactly `h2_demand` mol/s.
pub fn solve_feed_for_h2(h2_demand: f64, bed: &CatalystBed, thermo: &ThermoDb) -> Result<Option<FeedSolution>> {
    if h2_demand == 0.0 {
        return Ok(None);
    }
    if !(h2_demand > 0.0) {
        return Err(Error::arg(format!("hydrogen demand must be non-negative, got {h2_demand}")));
    }
    bed.validate()?;
    let law = RateLaw::new(bed, bed.temperature_k)?;
    let f_lo = h2_demand / 1.5;
    let f_hi = h2_demand / (1.5 * bed.min_conversion);
    let x_hi = pure_conversion(f_hi, bed, &law)?;
    if x_hi < bed.min_conversion {
        let cap = bed_capacity(bed)?;
        return Err(Error::infeasible(
            Stage::Adu,
            format!(
                "hydrogen demand {h2_demand:.6} mol/s exceeds bed capacity {cap:.6} mol/s at minimum conversion {}",
                bed.min_conversion
            ),
        ));
    }
    let mut failure = None;
    let residual = |f: f64| match pure_conversion(f, bed, &law) {
        Ok(x) => 1.5 * x * f - h2_demand,
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    };
    let feed = brent(residual, f_lo, f_hi, 1e-14 * f_hi, 200)?;
    if let Some(e) = failure {
        return Err(e);
    }
    let adu = integrate_pfr(&pure_nh3(feed, bed)?, bed, thermo)?;
    let produced = 1.5 * adu.conversion * feed;
    if (produced - h2_demand).abs() > 1e-8 * h2_demand {
        return Err(Error::Numerical(format!(
            "feed solve residual {:.3e} mol/s too large",
            produced - h2_demand
        )));
    }
    Ok(Some(FeedSolution {
        nh3_feed_mol_s: feed,
        conversion: adu.conversion,
        adu,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bed() -> CatalystBed {
        CatalystBed::default()
    }

    #[test]
    fn rate_vanishes_at_equilibrium() {
        let t = 723.15;
        let x = equilibrium_conversion(t, 100.0).unwrap();
        let p = 1.0;
        let tot = 1.0 + x;
        let (a, b, c) = (p * (1.0 - x) / tot, p * 1.5 * x / tot, p * 0.5 * x / tot);
        let r = rate(t, a, b, c, &bed()).unwrap();
        let fwd = rate(t, a, b, 0.0, &bed()).unwrap();
        assert!(r.abs() < 1e-9 * fwd, "{r} vs {fwd}");
    }

    #[test]
    fn forward_limit_without_nitrogen() {
        let b = bed();
        let t = 723.15;
        let r = rate(t, 0.5, 0.375, 0.0, &b).unwrap();
        let k = b.pre_exponential * (-117e3 / (GAS_CONSTANT * t)).exp();
        let expected = k * (0.25f64 / 0.375f64.powi(3)).powf(0.27);
        assert!((r - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn rate_golden_mid_composition() {
        let r = rate(723.15, 0.5, 0.375, 0.125, &bed()).unwrap();
        // hand evaluation of the closed form with Table-1 constants and the
        // Gillespie–Beattie constant
        let k = 1.5e7 * (-117e3f64 / (8.314 * 723.15)).exp();
        let ks = equilibrium_constant(723.15).unwrap();
        let a = 0.25 / 0.375f64.powi(3);
        let expected = k * (a.powf(0.27) - 0.125 * ks * ks * a.powf(-0.73));
        assert!(r > 0.0);
        assert!((r - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn zero_pressures_are_floored() {
        let r = rate(723.15, 1.0, 0.0, 0.0, &bed()).unwrap();
        assert!(r.is_finite() && r > 0.0);
        let r = rate(723.15, 0.0, 1.0, 0.5, &bed()).unwrap();
        assert!(r.is_finite() && r < 0.0);
    }

    #[test]
    fn short_bed_leaves_inlet_unchanged() {
        let b = CatalystBed {
            length_m: 1e-14,
            ..bed()
        };
        let inlet = pure_nh3(0.1, &b).unwrap();
        let r = integrate_pfr(&inlet, &b, &ThermoDb::default()).unwrap();
        assert!(r.conversion < 1e-6);
    }

    #[test]
    fn long_bed_reaches_equilibrium() {
        let b = CatalystBed {
            length_m: 1e4,
            ..bed()
        };
        let inlet = pure_nh3(1e-3, &b).unwrap();
        let r = integrate_pfr(&inlet, &b, &ThermoDb::default()).unwrap();
        let x_eq = equilibrium_conversion(723.15, 100.0).unwrap();
        assert!((r.conversion - x_eq).abs() < 1e-6, "{} vs {x_eq}", r.conversion);
        assert!(r.conversion <= x_eq + 1e-9);
    }

    #[test]
    fn inlet_must_match_bed_temperature() {
        let b = bed();
        let inlet = GasStream::new(700.0, 100.0).unwrap().with(Species::NH3, 0.1).unwrap();
        assert!(integrate_pfr(&inlet, &b, &ThermoDb::default()).is_err());
    }

    #[test]
    fn bad_geometry_is_config_error() {
        let b = CatalystBed { area_m2: 0.0, ..bed() };
        let inlet = pure_nh3(0.1, &bed()).unwrap();
        assert!(matches!(integrate_pfr(&inlet, &b, &ThermoDb::default()), Err(Error::Config(_))));
    }

    #[test]
    fn duty_is_conversion_times_reaction_enthalpy() {
        let thermo = ThermoDb::default();
        let b = bed();
        let inlet = pure_nh3(0.01, &b).unwrap();
        let r = integrate_pfr(&inlet, &b, &thermo).unwrap();
        let expected = 0.01 * r.conversion * thermo.decomposition_enthalpy(723.15).unwrap() * 1e3;
        assert!((r.heat_duty_w - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn sizing_unreachable_conversion_names_bound() {
        let err = size_catalyst(0.5, 0.999, &bed()).unwrap_err();
        assert!(err.is_infeasible());
        assert!(err.to_string().contains("equilibrium bound"));
    }

    #[test]
    fn feed_solve_zero_and_overload() {
        let thermo = ThermoDb::default();
        assert!(solve_feed_for_h2(0.0, &bed(), &thermo).unwrap().is_none());
        let cap = bed_capacity(&bed()).unwrap();
        let err = solve_feed_for_h2(cap * 1.01, &bed(), &thermo).unwrap_err();
        assert!(err.is_infeasible(), "{err}");
        let ok = solve_feed_for_h2(cap * 0.99, &bed(), &thermo).unwrap().unwrap();
        assert!(ok.conversion > bed().min_conversion);
    }
}
