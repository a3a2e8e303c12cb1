//! JSON run configuration with strict key checking and dotted overrides.
//!
//! A configuration is one JSON object mirroring [`ModelParams`] plus
//! optional command blocks:
//!
//! ```json
//! {
//!   "market":    { "theta": 0.094864, "alpha": 0.075891, "sigma": 0.15452 },
//!   "prefs":     { "rho": 0.05997, "nu": 0.25 },
//!   "pricing":   { "rho_hat": 0.05997, "mu_hat": 0.044623, "K": -1500 },
//!   "mortality": { "mu_l": 0.044623, "delta": 0.024581, "lambda_l": 0.1 },
//!   "sim":       { "n_paths": 100000, "dt": 0.003968, "horizon": 20, "x0": 100000, "seed": 42 },
//!   "sweep":     { "parameter": "Delta", "lo": 0, "hi": 0.22935, "n_points": 200 },
//!   "grid":      { "x_lo": 1000, "x_hi": 200000, "n": 100 },
//!   "verify":    { "x_l": 63800, "mc_paths": 10000, "mc_points": [100000] }
//! }
//! ```
//!
//! Keys are checked before typed parsing so that errors name the full path
//! (`market.sigma: required`, `market.sigmaa: unknown key`).

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::core_model::{MarketParams, ModelParams, MortalityParams, PreferenceParams, PricingParams};
use crate::error::{Error, Result};
use crate::monte_carlo::SimConfig;
use crate::sensitivity::SweepParameter;

/// Sweep block of the configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub parameter: SweepParameter,
    pub lo: f64,
    pub hi: f64,
    pub n_points: usize,
}

/// Wealth grid for value-function tables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub x_lo: f64,
    pub x_hi: f64,
    pub n: usize,
}

/// Optional settings of the verification suite.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyBlock {
    /// Replace the optimal pre-shock threshold (fault injection).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_l: Option<f64>,
    /// Paths of the Monte Carlo value check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_paths: Option<usize>,
    /// Wealth levels of the Monte Carlo value check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_points: Option<Vec<f64>>,
}

/// A fully parsed configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub market: MarketParams,
    pub prefs: PreferenceParams,
    pub pricing: PricingParams,
    pub mortality: MortalityParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyBlock>,
}

/// `(block, required keys, optional keys, block required)`.
const SCHEMA: [(&str, &[&str], &[&str], bool); 8] = [
    ("market", &["theta", "alpha", "sigma"], &[], true),
    ("prefs", &["rho", "nu"], &[], true),
    ("pricing", &["rho_hat", "mu_hat", "K"], &[], true),
    ("mortality", &["mu_l", "delta", "lambda_l"], &[], true),
    ("sim", &["n_paths", "dt", "horizon", "x0", "seed"], &[], false),
    ("sweep", &["parameter", "lo", "hi", "n_points"], &[], false),
    ("grid", &["x_lo", "x_hi", "n"], &[], false),
    ("verify", &[], &["x_l", "mc_paths", "mc_points"], false),
];

impl RunConfig {
    /// The model parameters (not yet validated).
    pub fn params(&self) -> ModelParams {
        ModelParams { market: self.market, prefs: self.prefs, pricing: self.pricing, mortality: self.mortality }
    }

    /// Configuration holding only model parameters.
    pub fn from_params(p: &ModelParams) -> Self {
        Self {
            market: p.market,
            prefs: p.prefs,
            pricing: p.pricing,
            mortality: p.mortality,
            sim: None,
            sweep: None,
            grid: None,
            verify: None,
        }
    }

    /// Parses a JSON document, applying `key=value` overrides first.
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self> {
        let mut doc: Value =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("config: invalid JSON: {e}")))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        Self::from_value(doc)
    }

    /// Checks keys against the schema, then deserializes.
    pub fn from_value(doc: Value) -> Result<Self> {
        let root = doc.as_object().ok_or_else(|| Error::Config("config: top level must be an object".into()))?;
        check_keys(root)?;
        serde_json::from_value(doc).map_err(|e| Error::Config(format!("config: {e}")))
    }

    /// Compact JSON that re-parses to an identical configuration.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("configuration serializes")
    }
}

fn check_keys(root: &Map<String, Value>) -> Result<()> {
    for key in root.keys() {
        if !SCHEMA.iter().any(|(block, ..)| block == key) {
            return Err(Error::Config(format!("{key}: unknown key")));
        }
    }
    for (block, required, optional, block_required) in SCHEMA {
        let Some(v) = root.get(block) else {
            if block_required {
                return Err(Error::Config(format!("{block}: required")));
            }
            continue;
        };
        let obj = v.as_object().ok_or_else(|| Error::Config(format!("{block}: must be an object")))?;
        for key in required {
            match obj.get(*key) {
                None | Some(Value::Null) => return Err(Error::Config(format!("{block}.{key}: required"))),
                Some(_) => {}
            }
        }
        for key in obj.keys() {
            if !required.contains(&key.as_str()) && !optional.contains(&key.as_str()) {
                return Err(Error::Config(format!("{block}.{key}: unknown key")));
            }
        }
    }
    Ok(())
}

/// Applies one `dotted.path=value` override. The value is parsed as JSON
/// when possible and kept as a string otherwise; missing objects on the
/// path are created.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}`: expected key=value")))?;
    let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.to_string()));
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::Config(format!("override `{assignment}`: empty key segment")));
    }
    let mut node = doc;
    for key in &keys[..keys.len() - 1] {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("override `{assignment}`: {key} is not an object")))?;
        node = obj.entry(key.to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
    let obj = node
        .as_object_mut()
        .ok_or_else(|| Error::Config(format!("override `{assignment}`: parent of the last key is not an object")))?;
    obj.insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_json() -> String {
        RunConfig::from_params(&ModelParams::reference()).to_json()
    }

    #[test]
    fn round_trip() {
        let cfg = RunConfig::parse(&reference_json(), &[]).unwrap();
        assert_eq!(RunConfig::parse(&cfg.to_json(), &[]).unwrap(), cfg);
    }

    #[test]
    fn missing_sigma_is_named() {
        let mut doc: Value = serde_json::from_str(&reference_json()).unwrap();
        doc["market"].as_object_mut().unwrap().remove("sigma");
        let e = RunConfig::from_value(doc).unwrap_err();
        assert_eq!(e.to_string(), "market.sigma: required");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = RunConfig::parse(&reference_json(), &["market.sigmaa=0.1".into()]).unwrap_err();
        assert_eq!(e.to_string(), "market.sigmaa: unknown key");
        let e = RunConfig::parse(&reference_json(), &["extra=1".into()]).unwrap_err();
        assert_eq!(e.to_string(), "extra: unknown key");
    }

    #[test]
    fn overrides_create_blocks() {
        let cfg = RunConfig::parse(&reference_json(), &["verify.x_l=63000".into(), "pricing.K=0".into()]).unwrap();
        assert_eq!(cfg.verify.unwrap().x_l, Some(63000.0));
        assert_eq!(cfg.pricing.k, 0.0);
    }
}
