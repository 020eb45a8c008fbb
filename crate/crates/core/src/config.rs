//! Run configuration files.
//!
//! A run configuration is one TOML file with up to six sections: `[system]`,
//! `[thermo]`, `[bed]`, `[engine]`, `[stack]` and `[explore]`. Every key is
//! optional. Keys left out take the shipped value for the chosen topology,
//! and each section that was filled in is logged. Unknown sections or keys
//! are errors naming the key and its line. Without a `length_m` in `[bed]`
//! the bed is sized for the configured engines.
//!
//! ```
//! use nh3_powertrain::config::RunConfig;
//! use nh3_powertrain::system::Topology;
//!
//! let cfg = RunConfig::from_toml_str("[system]\ntopology = \"ice_hybrid\"\n", None).unwrap();
//! assert_eq!(cfg.system.topology, Topology::IceHybrid);
//!
//! let err = RunConfig::from_toml_str("[stack]\ncels = 10\n", None).unwrap_err();
//! assert!(err.to_string().contains("line 2"));
//! assert!(err.to_string().contains("stack.cels"));
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::de::{DeTable, DeValue};

use crate::calibration;
use crate::error::{Error, Result};
use crate::explore::{fingerprint, ExploreOptions};
use crate::system::{SystemConfig, Topology};

const SECTIONS: [&str; 6] = ["system", "thermo", "bed", "engine", "stack", "explore"];
const NESTED: [&str; 4] = ["thermo", "bed", "engine", "stack"];
/// Valid keys whose shipped value is unset and therefore absent from the
/// defaults.
const OPTIONAL_KEYS: [(&str, &str); 2] = [("engine", "generator_efficiency"), ("stack", "max_power_kw")];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub explore: ExploreOptions,
}

type Sections = BTreeMap<String, toml::Table>;

impl RunConfig {
    pub fn shipped(topology: Topology) -> Result<RunConfig> {
        Ok(RunConfig {
            system: calibration::shipped(topology)?,
            explore: ExploreOptions::default(),
        })
    }

    /// Reads a configuration file. `topology` overrides the file's choice.
    pub fn load(path: &Path, topology: Option<Topology>) -> Result<RunConfig> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::from_toml_str(&src, topology).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn from_toml_str(src: &str, topology: Option<Topology>) -> Result<RunConfig> {
        let doc = DeTable::parse(src).map_err(|e| Error::Config(e.to_string()))?;
        let line_of = |offset: usize| src[..offset.min(src.len())].matches('\n').count() + 1;
        let mut lines: BTreeMap<(String, String), usize> = BTreeMap::new();
        for (section, value) in doc.get_ref() {
            let name = section.get_ref().as_ref();
            let line = line_of(section.span().start);
            if !SECTIONS.contains(&name) {
                return Err(Error::Config(format!(
                    "line {line}: unknown section [{name}]; expected one of {}",
                    SECTIONS.join(", ")
                )));
            }
            let DeValue::Table(t) = value.get_ref() else {
                return Err(Error::Config(format!("line {line}: `{name}` must be a section")));
            };
            for key in t.keys() {
                lines.insert((name.to_string(), key.get_ref().to_string()), line_of(key.span().start));
            }
        }
        let user: toml::Table = toml::from_str(src).map_err(|e| Error::Config(e.to_string()))?;

        let file_topology = match user.get("system").and_then(|s| s.get("topology")) {
            Some(toml::Value::String(s)) => Some(s.parse::<Topology>().map_err(|e| {
                Error::Config(format!("line {}: system.topology: {e}", lines[&("system".into(), "topology".into())]))
            })?),
            Some(_) => {
                let line = lines[&("system".into(), "topology".into())];
                return Err(Error::Config(format!("line {line}: system.topology must be a string")));
            }
            None => None,
        };
        let topology = match (topology, file_topology) {
            (Some(t), Some(f)) if t != f => {
                log::info!("config: topology {t} overrides {f} from the file");
                t
            }
            (Some(t), _) | (None, Some(t)) => t,
            (None, None) => {
                log::info!("config: system.topology not set; using composite");
                Topology::Composite
            }
        };

        let defaults = RunConfig::shipped(topology)?;
        let mut merged = defaults.sections()?;
        let ser = |e: toml::ser::Error| Error::Config(format!("cannot serialize configuration: {e}"));
        let mut schema = merged.clone();
        schema.entry("engine".into()).or_insert(toml::Table::try_from(calibration::engine()).map_err(ser)?);
        schema.entry("stack".into()).or_insert(toml::Table::try_from(calibration::fuel_cell_stack()).map_err(ser)?);
        for ((section, key), line) in &lines {
            let known = schema.get(section).is_some_and(|t| t.contains_key(key))
                || OPTIONAL_KEYS.contains(&(section.as_str(), key.as_str()));
            if !known {
                return Err(Error::Config(format!("line {line}: unknown key {section}.{key}")));
            }
        }
        for section in SECTIONS {
            let given = user.get(section).and_then(|v| v.as_table());
            let table = merged.entry(section.to_string()).or_default();
            let filled: Vec<&str> = table
                .keys()
                .filter(|k| !given.is_some_and(|g| g.contains_key(*k)))
                .map(String::as_str)
                .collect();
            if !filled.is_empty() && (given.is_some() || section == "system") {
                log::info!("config: [{section}] keys {} not set; using shipped values", filled.join(", "));
            }
            if let Some(g) = given {
                for (k, v) in g {
                    table.insert(k.clone(), v.clone());
                }
            }
        }
        if let Some(s) = merged.get_mut("system") {
            s.insert("topology".into(), toml::Value::String(topology.to_string()));
        }
        for (section, present) in [("engine", topology.has_engine()), ("stack", topology.has_stack())] {
            if !present {
                if user.contains_key(section) {
                    log::info!("config: [{section}] ignored; topology {topology} has none");
                }
                merged.remove(section);
            }
        }
        let auto_size_bed = !user.get("bed").and_then(|b| b.get("length_m")).is_some();

        let located = |e: serde_path_to_error::Error<toml::de::Error>, prefix: Option<&str>| {
            let path = e.path().to_string();
            let mut parts = path.split('.');
            let (section, key) = match prefix {
                Some(p) => (p.to_string(), parts.next().unwrap_or("").to_string()),
                None => {
                    let first = parts.next().unwrap_or("").to_string();
                    if NESTED.contains(&first.as_str()) {
                        (first, parts.next().unwrap_or("").to_string())
                    } else {
                        ("system".to_string(), first)
                    }
                }
            };
            let at = lines.get(&(section.clone(), key.clone())).map_or(String::new(), |l| format!("line {l}: "));
            Error::Config(format!("{at}{section}.{key}: {}", e.inner()))
        };

        let mut system_table = merged.remove("system").unwrap_or_default();
        for section in NESTED {
            if let Some(t) = merged.remove(section) {
                system_table.insert(section.into(), toml::Value::Table(t));
            }
        }
        let explore_table = merged.remove("explore").unwrap_or_default();
        let mut system: SystemConfig = serde_path_to_error::deserialize(toml::Value::Table(system_table))
            .map_err(|e| located(e, None))?;
        let explore: ExploreOptions = serde_path_to_error::deserialize(toml::Value::Table(explore_table))
            .map_err(|e| located(e, Some("explore")))?;
        if auto_size_bed {
            system.size_bed()?;
        }
        system.validate()?;
        explore.validate()?;
        Ok(RunConfig { system, explore })
    }

    fn sections(&self) -> Result<Sections> {
        let ser = |e: toml::ser::Error| Error::Config(format!("cannot serialize configuration: {e}"));
        let mut system = toml::Table::try_from(&self.system).map_err(ser)?;
        let mut out = Sections::new();
        for section in NESTED {
            if let Some(toml::Value::Table(t)) = system.remove(section) {
                out.insert(section.into(), t);
            }
        }
        out.insert("system".into(), system);
        out.insert("explore".into(), toml::Table::try_from(&self.explore).map_err(ser)?);
        Ok(out)
    }

    /// The configuration as a complete file that loads back to itself.
    pub fn to_toml_string(&self) -> Result<String> {
        let mut doc = toml::Table::new();
        for (k, v) in self.sections()? {
            doc.insert(k, toml::Value::Table(v));
        }
        toml::to_string(&doc).map_err(|e| Error::Config(format!("cannot serialize configuration: {e}")))
    }

    pub fn fingerprint(&self) -> Result<String> {
        fingerprint(self)
    }
}
