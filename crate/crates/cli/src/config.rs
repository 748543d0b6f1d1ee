//! Run configuration: a JSON file whose polynomials use the library's
//! `[p, q, "re", "im"]` record form. Every field is optional.

use std::path::{Path, PathBuf};

use hfield::scalar::rational_from_wire;
use hfield::{CompactRectangle, ConnectionSpec, GaussianRational, WirtingerPolynomial};
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::ConfigError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvatureConfig {
    /// Eigenvalues are reported for `j = 0..=j_max`.
    #[serde(default = "default_j_max")]
    pub j_max: usize,
    /// Evaluation points as `["re", "im"]` rationals.
    #[serde(default = "default_points")]
    pub points: Vec<(String, String)>,
}

fn default_j_max() -> usize {
    9
}

fn default_points() -> Vec<(String, String)> {
    vec![
        ("0".into(), "0".into()),
        ("1".into(), "0".into()),
        ("1".into(), "1".into()),
    ]
}

impl Default for CurvatureConfig {
    fn default() -> Self {
        Self {
            j_max: default_j_max(),
            points: default_points(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_connection")]
    pub connection: ConnectionSpec,
    #[serde(default = "default_indices")]
    pub indices: Vec<usize>,
    #[serde(default = "default_functions")]
    pub functions: Vec<WirtingerPolynomial>,
    #[serde(default = "default_rect")]
    pub rect: CompactRectangle,
    #[serde(default = "default_m_identity")]
    pub m_identity: usize,
    #[serde(default = "default_m_decay")]
    pub m_decay: usize,
    #[serde(default = "default_m_greedy")]
    pub m_greedy: usize,
    #[serde(default = "default_m_splittings")]
    pub m_splittings: usize,
    #[serde(default)]
    pub curvature: CurvatureConfig,
    /// Multiplier on grid suprema when issuing `M`, as `"p/q"`.
    #[serde(default = "default_safety")]
    pub safety_factor: String,
}

fn default_connection() -> ConnectionSpec {
    ConnectionSpec::from_potential(hfield::poly::mono(1, 1, 1)).expect("s s̄ is real")
}

fn default_indices() -> Vec<usize> {
    vec![0, 1, 4]
}

fn default_functions() -> Vec<WirtingerPolynomial> {
    vec![
        WirtingerPolynomial::one(),
        WirtingerPolynomial::s(),
        hfield::poly::mono(1, 1, 1),
    ]
}

fn default_rect() -> CompactRectangle {
    CompactRectangle::symmetric_square(1, 64).expect("valid square")
}

fn default_m_identity() -> usize {
    6
}

fn default_m_decay() -> usize {
    10
}

fn default_m_greedy() -> usize {
    12
}

fn default_m_splittings() -> usize {
    8
}

fn default_safety() -> String {
    "2".into()
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

/// Identity sweeps beyond this order are refused; the splitting count grows
/// like the Bell numbers.
pub const MAX_IDENTITY_ORDER: usize = 9;
/// Exhaustive decay sweeps visit `2^m` sequences per order.
pub const MAX_DECAY_ORDER: usize = 16;
pub const MAX_SPLITTING_ORDER: usize = 11;

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io(path.to_path_buf(), e.to_string()))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.indices.is_empty() {
            return Err(ConfigError::Invalid("basis-index list is empty".into()));
        }
        if self.functions.is_empty() {
            return Err(ConfigError::Invalid("function list is empty".into()));
        }
        self.connection
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.rect
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.m_identity > MAX_IDENTITY_ORDER {
            return Err(ConfigError::Invalid(format!(
                "m_identity above {MAX_IDENTITY_ORDER}"
            )));
        }
        if self.m_decay > MAX_DECAY_ORDER || self.m_greedy > 4 * MAX_DECAY_ORDER {
            return Err(ConfigError::Invalid("decay caps too large".into()));
        }
        if self.m_splittings > MAX_SPLITTING_ORDER {
            return Err(ConfigError::Invalid(format!(
                "m_splittings above {MAX_SPLITTING_ORDER}"
            )));
        }
        if self.safety_factor()? < BigRational::from_integer(1.into()) {
            return Err(ConfigError::Invalid("safety factor below 1".into()));
        }
        self.curvature_points()?;
        Ok(())
    }

    pub fn safety_factor(&self) -> Result<BigRational, ConfigError> {
        rational_from_wire(&self.safety_factor).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn curvature_points(&self) -> Result<Vec<GaussianRational>, ConfigError> {
        self.curvature
            .points
            .iter()
            .map(|(re, im)| {
                let re = rational_from_wire(re).map_err(|e| ConfigError::Invalid(e.to_string()))?;
                let im = rational_from_wire(im).map_err(|e| ConfigError::Invalid(e.to_string()))?;
                Ok(GaussianRational::new(re, im))
            })
            .collect()
    }

    /// The curvature suite needs the potential, not just `k`.
    pub fn potential(&self) -> Result<&WirtingerPolynomial, ConfigError> {
        self.connection.potential().ok_or_else(|| {
            ConfigError::Invalid("curvature needs a real potential `g` in the connection".into())
        })
    }
}

/// Command-line overrides applied on top of the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub m_max: Option<usize>,
    pub grid: Option<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.indices, vec![0, 1, 4]);
        assert_eq!(cfg.connection.k(), &WirtingerPolynomial::sbar());
        assert_eq!(cfg.rect.grid_n(), 64);
        assert_eq!(
            cfg.curvature_points().unwrap()[2],
            GaussianRational::from_integer(1) + GaussianRational::i()
        );
    }

    #[test]
    fn rejects_bad_configs() {
        let empty = RunConfig::from_json(r#"{"indices": []}"#).unwrap();
        assert!(empty.validate().is_err());
        assert!(RunConfig::from_json(r#"{"connection": {"g": [[2,0,"1","0"]]}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"bogus": 1}"#).is_err());
        let k_only = RunConfig::from_json(r#"{"connection": {"k": [[0,1,"1","0"]]}}"#).unwrap();
        k_only.validate().unwrap();
        assert!(k_only.potential().is_err());
        let low_safety = RunConfig::from_json(r#"{"safety_factor": "1/2"}"#).unwrap();
        assert!(low_safety.validate().is_err());
    }
}
