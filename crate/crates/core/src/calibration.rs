//! The shipped calibration.
//!
//! Engine maps and stack constants are fitted once against published
//! headline numbers and then frozen; every regression test and figure
//! reproduction runs on these values. [`EngineCurve::default`] is already the
//! shipped engine. [`FcStack::default`] is a generic laboratory stack and is
//! *not* the shipped one; use [`fuel_cell_stack`] instead.

use crate::error::Result;
use crate::explore::{sized_config, ExploreOptions};
use crate::ice_gen::EngineCurve;
use crate::pemfc::FcStack;
use crate::system::{SystemConfig, Topology};

/// Total rated power shared between engine and stack in the composite
/// system and in sizing sweeps, kW.
pub const COMPOSITE_TOTAL_RATED_KW: f64 = 204.0;

/// Engine share of the composite system's rated power.
pub const COMPOSITE_R_ICE: f64 = 0.5;

/// Minimum stack output in the composite system, kW.
pub const COMPOSITE_STACK_FLOOR_KW: f64 = 17.0;

/// Default r_ICE ladder for sizing sweeps.
pub const SWEEP_R_VALUES: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

pub fn engine() -> EngineCurve {
    EngineCurve::default()
}

/// Stack of the fuel-cell hybrid.
pub fn fuel_cell_stack() -> FcStack {
    FcStack {
        cells: 1250.0,
        exchange_current: 1.8e-8,
        membrane_conductivity: 0.12,
        min_power_kw: 15.0,
        ..FcStack::default()
    }
}

/// Stack cell physics for the composite system before rescaling.
pub fn composite_stack() -> FcStack {
    FcStack {
        min_power_kw: COMPOSITE_STACK_FLOOR_KW,
        ..fuel_cell_stack()
    }
}

/// Unsized composite configuration that sizing sweeps rescale from.
pub fn composite_base() -> SystemConfig {
    SystemConfig::new(Topology::Composite, Some(engine()), Some(composite_stack()))
}

/// Ready-to-evaluate configuration for `topology` with a sized bed.
pub fn shipped(topology: Topology) -> Result<SystemConfig> {
    let mut cfg = match topology {
        Topology::IceHybrid => SystemConfig::new(topology, Some(engine()), None),
        Topology::FcHybrid => SystemConfig::new(topology, None, Some(fuel_cell_stack())),
        Topology::Composite => {
            let opts = ExploreOptions::default();
            return Ok(sized_config(&composite_base(), COMPOSITE_R_ICE, COMPOSITE_TOTAL_RATED_KW, &opts)?.0);
        }
    };
    cfg.size_bed()?;
    Ok(cfg)
}
