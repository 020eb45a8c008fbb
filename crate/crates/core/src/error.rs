use std::fmt;

use crate::thermo::Species;

/// Subsystem in which an infeasibility was detected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Adu,
    IceGen,
    FuelCell,
    Separation,
    Recovery,
    System,
    Explore,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Adu => "decomposition unit",
            Stage::IceGen => "ICE-generator",
            Stage::FuelCell => "fuel cell",
            Stage::Separation => "hydrogen separation",
            Stage::Recovery => "heat recovery",
            Stage::System => "system",
            Stage::Explore => "explore",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("temperature {temperature} K is outside the {species} property range [{min}, {max}] K")]
    TemperatureRange {
        species: Species,
        temperature: f64,
        min: f64,
        max: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{0} has no heating value")]
    UnsupportedSpecies(Species),

    #[error("infeasible in {stage}: {reason}")]
    Infeasible { stage: Stage, reason: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("calibration error: {0}")]
    Calibration(String),

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn infeasible(stage: Stage, reason: impl Into<String>) -> Self {
        Error::Infeasible {
            stage,
            reason: reason.into(),
        }
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors that describe an unreachable operating point rather
    /// than a malformed request.
    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::Infeasible { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
