use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::thermo::Species;

/// Ideal-gas material stream: molar flows (mol/s), temperature (K) and
/// pressure (kPa).
#[derive(Debug, Clone, PartialEq)]
pub struct GasStream {
    flows: [f64; 6],
    pub temperature_k: f64,
    pub pressure_kpa: f64,
}

impl GasStream {
    pub fn new(temperature_k: f64, pressure_kpa: f64) -> Result<Self> {
        if !(temperature_k > 0.0) || !(pressure_kpa > 0.0) {
            return Err(Error::arg(format!(
                "stream needs positive temperature and pressure, got {temperature_k} K, {pressure_kpa} kPa"
            )));
        }
        Ok(GasStream {
            flows: [0.0; 6],
            temperature_k,
            pressure_kpa,
        })
    }

    pub fn with(mut self, species: Species, flow: f64) -> Result<Self> {
        self.set_flow(species, flow)?;
        Ok(self)
    }

    pub fn set_flow(&mut self, species: Species, flow: f64) -> Result<()> {
        if !(flow >= 0.0) || !flow.is_finite() {
            return Err(Error::arg(format!("{species} flow must be non-negative, got {flow}")));
        }
        self.flows[species.index()] = flow;
        Ok(())
    }

    pub fn flow(&self, species: Species) -> f64 {
        self.flows[species.index()]
    }

    pub fn total_flow(&self) -> f64 {
        self.flows.iter().sum()
    }

    /// Same composition scaled by `factor` ≥ 0.
    pub fn scaled(&self, factor: f64) -> GasStream {
        let mut out = self.clone();
        for f in out.flows.iter_mut() {
            *f *= factor;
        }
        out
    }

    /// Partial pressure in bar, ideal mixing; zero for an empty stream.
    pub fn partial_pressure_bar(&self, species: Species) -> f64 {
        let total = self.total_flow();
        if total == 0.0 {
            0.0
        } else {
            self.pressure_kpa * 1e-2 * self.flow(species) / total
        }
    }

    pub fn mass_flow_g_s(&self) -> f64 {
        Species::ALL.iter().map(|&s| self.flow(s) * s.molar_mass()).sum()
    }

    /// (N, H) atom flows, mol/s.
    pub fn atom_flows(&self) -> (f64, f64) {
        Species::ALL.iter().fold((0.0, 0.0), |(n, h), &s| {
            let (an, ah) = s.atoms_nh();
            (n + an * self.flow(s), h + ah * self.flow(s))
        })
    }
}

#[derive(Serialize, Deserialize)]
struct StreamRepr {
    flows_mol_s: BTreeMap<Species, f64>,
    temperature_k: f64,
    pressure_kpa: f64,
}

impl Serialize for GasStream {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        StreamRepr {
            flows_mol_s: Species::ALL
                .iter()
                .filter(|&&s| self.flow(s) != 0.0)
                .map(|&s| (s, self.flow(s)))
                .collect(),
            temperature_k: self.temperature_k,
            pressure_kpa: self.pressure_kpa,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GasStream {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = StreamRepr::deserialize(deserializer)?;
        let mut s = GasStream::new(repr.temperature_k, repr.pressure_kpa).map_err(serde::de::Error::custom)?;
        for (sp, f) in repr.flows_mol_s {
            s.set_flow(sp, f).map_err(serde::de::Error::custom)?;
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_pressures_sum_to_total() {
        let s = GasStream::new(723.15, 100.0)
            .unwrap()
            .with(Species::NH3, 0.5)
            .unwrap()
            .with(Species::H2, 0.375)
            .unwrap()
            .with(Species::N2, 0.125)
            .unwrap();
        let sum: f64 = Species::ALL.iter().map(|&sp| s.partial_pressure_bar(sp)).sum();
        assert!((sum - 1.0).abs() < 1e-15);
        assert!((s.partial_pressure_bar(Species::H2) - 0.375).abs() < 1e-15);
    }

    #[test]
    fn rejects_negative_flow_and_bad_state() {
        assert!(GasStream::new(0.0, 100.0).is_err());
        assert!(GasStream::new(300.0, -1.0).is_err());
        let s = GasStream::new(300.0, 100.0).unwrap();
        assert!(s.with(Species::H2, -1e-3).is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = GasStream::new(353.15, 101.325)
            .unwrap()
            .with(Species::H2, 0.2)
            .unwrap();
        let text = serde_json::to_string(&s).unwrap();
        let back: GasStream = serde_json::from_str(&text).unwrap();
        assert_eq!(s, back);
    }
}
