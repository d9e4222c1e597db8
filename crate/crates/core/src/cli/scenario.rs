//! Scenario files and built-in targets.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::loadmodel::{dbm_to_watts, NetworkScenario, ScenarioGenerator};
use crate::mapping::{AffineMapping, LogSqrtMapping, SharedMapping};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathlossUnits {
    /// Gains in decibels; the linear gain is `10^(value/10)`.
    Db,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pathloss {
    pub units: PathlossUnits,
    /// One row per base station, one column per user.
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Noise {
    /// Noise power per resource block.
    Power { noise_power_w: f64 },
    /// Noise spectral density; multiplied by the block bandwidth.
    Psd { noise_psd_dbm_hz: f64 },
}

/// On-disk scenario document (JSON).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub num_bs: usize,
    pub num_users: usize,
    pub assignment: Vec<usize>,
    pub pathloss: Pathloss,
    pub demands_bps: Vec<f64>,
    pub resource_blocks: u32,
    pub bandwidth_hz: f64,
    pub noise: Noise,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_w: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_load: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_cap_bps: Option<f64>,
}

impl ScenarioFile {
    /// Converts to the validated model, turning dB gains and noise density
    /// into linear watts. A missing target load defaults to all ones.
    pub fn into_scenario(self) -> Result<NetworkScenario> {
        let gains = match self.pathloss.units {
            PathlossUnits::Linear => self.pathloss.values,
            PathlossUnits::Db => self
                .pathloss
                .values
                .into_iter()
                .map(|row| row.into_iter().map(|v| 10f64.powf(v / 10.0)).collect())
                .collect(),
        };
        let noise_w = match self.noise {
            Noise::Power { noise_power_w } => noise_power_w,
            Noise::Psd { noise_psd_dbm_hz } => dbm_to_watts(noise_psd_dbm_hz) * self.bandwidth_hz,
        };
        let s = NetworkScenario {
            num_bs: self.num_bs,
            num_users: self.num_users,
            assignment: self.assignment,
            gains,
            demands_bps: self.demands_bps,
            resource_blocks: self.resource_blocks,
            bandwidth_hz: self.bandwidth_hz,
            noise_w,
            power_w: self.power_w,
            target_load: Some(self.target_load.unwrap_or_else(|| vec![1.0; self.num_bs])),
            rate_cap_bps: self.rate_cap_bps,
        };
        s.validate()?;
        Ok(s)
    }

    /// Linear-unit document reproducing `s` exactly.
    pub fn from_scenario(s: &NetworkScenario) -> Self {
        Self {
            num_bs: s.num_bs,
            num_users: s.num_users,
            assignment: s.assignment.clone(),
            pathloss: Pathloss { units: PathlossUnits::Linear, values: s.gains.clone() },
            demands_bps: s.demands_bps.clone(),
            resource_blocks: s.resource_blocks,
            bandwidth_hz: s.bandwidth_hz,
            noise: Noise::Power { noise_power_w: s.noise_w },
            power_w: s.power_w.clone(),
            target_load: s.target_load.clone(),
            rate_cap_bps: s.rate_cap_bps,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario documents always serialize")
    }
}

pub fn parse_scenario(text: &str, origin: &str) -> Result<NetworkScenario> {
    let file: ScenarioFile = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("{origin}: line {} column {}: {e}", e.line(), e.column())))?;
    file.into_scenario()
}

pub fn load_scenario(path: &Path) -> Result<NetworkScenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_scenario(&text, &path.display().to_string())
}

/// What a command operates on.
#[derive(Clone)]
pub enum Target {
    Network(NetworkScenario),
    Mapping { name: String, mapping: SharedMapping },
}

impl Target {
    pub fn as_network(&self) -> Option<&NetworkScenario> {
        match self {
            Target::Network(s) => Some(s),
            Target::Mapping { .. } => None,
        }
    }

    /// SHA-256 over the canonical serialization of the target.
    pub fn digest(&self) -> String {
        let bytes = match self {
            Target::Network(s) => serde_json::to_vec(&ScenarioFile::from_scenario(s)).expect("serializable"),
            Target::Mapping { name, .. } => name.as_bytes().to_vec(),
        };
        let hash = Sha256::digest(&bytes);
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// The bundled five-cell scenario used by `builtin:grid5`.
pub fn grid5(seed: u64) -> Result<NetworkScenario> {
    let g = ScenarioGenerator { demand_bps: 2e5, ..ScenarioGenerator::default() };
    let mut s = g.generate(seed)?;
    s.target_load = Some(vec![1.0; s.num_bs]);
    Ok(s)
}

/// Resolves `--scenario`: a JSON file path or one of
/// `builtin:affine-1d`, `builtin:log-sqrt[:alpha=A]`, `builtin:grid5[:seed=S]`.
pub fn resolve_target(spec: &str) -> Result<Target> {
    let Some(rest) = spec.strip_prefix("builtin:") else {
        return Ok(Target::Network(load_scenario(Path::new(spec))?));
    };
    let (name, param) = match rest.split_once(':') {
        Some((n, p)) => (n, Some(p)),
        None => (rest, None),
    };
    let value = |key: &str| -> Result<Option<f64>> {
        match param {
            None => Ok(None),
            Some(p) => {
                let v = p
                    .strip_prefix(key)
                    .and_then(|v| v.strip_prefix('='))
                    .ok_or_else(|| Error::Parse(format!("expected `{key}=<value>` in `{spec}`")))?;
                v.parse::<f64>().map(Some).map_err(|_| Error::Parse(format!("invalid number `{v}` in `{spec}`")))
            }
        }
    };
    match name {
        "affine-1d" => {
            if param.is_some() {
                return Err(Error::Parse(format!("`{spec}` takes no parameters")));
            }
            Ok(Target::Mapping { name: spec.to_string(), mapping: Arc::new(AffineMapping::scalar(0.5, 1.0)?) })
        }
        "log-sqrt" => {
            let alpha = value("alpha")?.unwrap_or(0.5);
            Ok(Target::Mapping {
                name: format!("builtin:log-sqrt:alpha={alpha}"),
                mapping: Arc::new(LogSqrtMapping::new(alpha)?),
            })
        }
        "grid5" => {
            let seed = value("seed")?.unwrap_or(7.0);
            if seed < 0.0 || seed.fract() != 0.0 {
                return Err(Error::Parse(format!("seed must be a nonnegative integer in `{spec}`")));
            }
            Ok(Target::Network(grid5(seed as u64)?))
        }
        other => Err(Error::Parse(format!("unknown builtin `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "num_bs": 1, "num_users": 1, "assignment": [0],
        "pathloss": {"units": "linear", "values": [[1e-9]]},
        "demands_bps": [1e5], "resource_blocks": 50, "bandwidth_hz": 180000,
        "noise": {"noise_psd_dbm_hz": -154}
    }"#;

    #[test]
    fn minimal_file() {
        let s = parse_scenario(MINIMAL, "inline").unwrap();
        assert_eq!(s.num_bs, 1);
        assert_eq!(crate::loadmodel::coupling_matrix(&s).rows(), vec![vec![0.0]]);
        assert!((s.noise_w - 10f64.powf(-18.4) * 180000.0).abs() < 1e-25);
        assert_eq!(s.target_load, Some(vec![1.0]));
    }

    #[test]
    fn db_conversion() {
        let text = MINIMAL.replace(r#""units": "linear", "values": [[1e-9]]"#, r#""units": "db", "values": [[-90]]"#);
        let s = parse_scenario(&text, "inline").unwrap();
        assert!((s.gains[0][0] - 1e-9).abs() < 1e-24);
    }

    #[test]
    fn bad_assignment_is_reported() {
        let text = MINIMAL.replace(r#""assignment": [0]"#, r#""assignment": [1]"#);
        let err = parse_scenario(&text, "inline").unwrap_err();
        assert!(matches!(err, Error::InvalidScenario(m) if m.contains("assignment[0] = 1")));
    }

    #[test]
    fn parse_error_has_location() {
        let err = parse_scenario("{\n \"num_bs\": \"x\"}", "f.json").unwrap_err();
        assert!(matches!(err, Error::Parse(m) if m.starts_with("f.json: line 2")));
    }

    #[test]
    fn round_trip() {
        let s = grid5(3).unwrap();
        let text = ScenarioFile::from_scenario(&s).to_json();
        assert_eq!(parse_scenario(&text, "echo").unwrap(), s);
    }

    #[test]
    fn builtins() {
        assert!(matches!(resolve_target("builtin:affine-1d").unwrap(), Target::Mapping { .. }));
        assert!(resolve_target("builtin:log-sqrt:alpha=1.5").is_ok());
        assert!(resolve_target("builtin:log-sqrt:beta=1").is_err());
        assert!(resolve_target("builtin:nope").is_err());
        let a = resolve_target("builtin:grid5:seed=2").unwrap();
        let b = resolve_target("builtin:grid5:seed=2").unwrap();
        assert_eq!(a.digest(), b.digest());
    }
}
