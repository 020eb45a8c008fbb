//! Steady-state models of ammonia-fuelled vehicle power systems.
//!
//! The crate is layered bottom-up: [`thermo`] properties feed the unit
//! models ([`adu`], [`ice_gen`], [`pemfc`]), which [`recovery`] and
//! [`system`] combine into whole-powertrain operating points; [`explore`]
//! sweeps those points into maps, curves and sizing studies.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adu;
pub mod calibration;
pub mod config;
pub mod error;
pub mod explore;
pub mod ice_gen;
pub mod numeric;
pub mod pemfc;
pub mod recovery;
pub mod stream;
pub mod system;
pub mod thermo;

pub use error::{Error, Result, Stage};
pub use stream::GasStream;
pub use thermo::{Species, ThermoDb};

#[cfg(doctest)]
mod book {
    macro_rules! chapters {
        ($($name:ident),*) => {
            $(
                #[doc = include_str!(concat!("../../../book/src/", stringify!($name), ".md"))]
                mod $name {}
            )*
        };
    }
    chapters!(introduction, thermo, cracker, engine, fuel_cell, recovery, system, explore, calibration, cli);
}
