//! Run configuration: flat TOML file plus command-line overrides.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::policies::{baseline_families, PolicyIISpec, PolicyISpec};
use crate::torus::ProfileKind;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub profile: ProfileKind,
    pub eps: Vec<f64>,
    /// Game step `dt = ε / dt_divisor`.
    pub dt_divisor: f64,
    /// Nodes per ε-cell in `x₂` for PDE runs.
    pub grid: usize,
    /// `x₁` spacing for PDE runs.
    pub h1: f64,
    /// PDE half-width; `2 + 3T` when unset.
    pub half_width: Option<f64>,
    pub horizon: f64,
    pub seed: u64,
    /// Player I family; the baseline family when unset.
    pub policy_i: Option<Vec<PolicyISpec>>,
    /// Player II family; the baseline family (seeded) when unset.
    pub policy_ii: Option<Vec<PolicyIISpec>>,
    pub out: Option<PathBuf>,
    pub plot: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            profile: ProfileKind::Paper,
            eps: (5..=9).map(|k| 4f64.powi(-k)).collect(),
            dt_divisor: 200.0,
            grid: 512,
            h1: 1.0 / 16.0,
            half_width: None,
            horizon: 1.0,
            seed: 0,
            policy_i: None,
            policy_ii: None,
            out: None,
            plot: None,
        }
    }
}

fn expect_float(key: &str, v: &toml::Value) -> Result<f64> {
    match v {
        toml::Value::Float(f) => Ok(*f),
        toml::Value::Integer(i) => Ok(*i as f64),
        other => Err(Error::Parse(format!("{key}: expected a number, got {other}"))),
    }
}

fn expect_uint(key: &str, v: &toml::Value) -> Result<u64> {
    match v {
        toml::Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        other => Err(Error::Parse(format!("{key}: expected a nonnegative integer, got {other}"))),
    }
}

fn expect_str<'a>(key: &str, v: &'a toml::Value) -> Result<&'a str> {
    v.as_str().ok_or_else(|| Error::Parse(format!("{key}: expected a string, got {v}")))
}

fn expect_list<'a>(key: &str, v: &'a toml::Value) -> Result<&'a [toml::Value]> {
    v.as_array()
        .map(Vec::as_slice)
        .ok_or_else(|| Error::Parse(format!("{key}: expected an array, got {v}")))
}

/// Parses a comma-separated list of reals.
pub fn parse_reals(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>().map_err(|_| Error::Parse(format!("'{t}' is not a number")))
        })
        .collect()
}

impl RunConfig {
    /// Reads the flat key-value file; unknown keys are an error.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        let mut cfg = Self::default();
        for (key, v) in &table {
            match key.as_str() {
                "profile" => cfg.profile = expect_str(key, v)?.parse()?,
                "eps" => {
                    cfg.eps = expect_list(key, v)?
                        .iter()
                        .map(|e| expect_float(key, e))
                        .collect::<Result<_>>()?
                }
                "dt_divisor" => cfg.dt_divisor = expect_float(key, v)?,
                "grid" => cfg.grid = expect_uint(key, v)? as usize,
                "h1" => cfg.h1 = expect_float(key, v)?,
                "L" => cfg.half_width = Some(expect_float(key, v)?),
                "T" => cfg.horizon = expect_float(key, v)?,
                "seed" => cfg.seed = expect_uint(key, v)?,
                "policy_i" => {
                    cfg.policy_i = Some(
                        expect_list(key, v)?
                            .iter()
                            .map(|e| expect_str(key, e)?.parse())
                            .collect::<Result<_>>()?,
                    )
                }
                "policy_ii" => {
                    cfg.policy_ii = Some(
                        expect_list(key, v)?
                            .iter()
                            .map(|e| expect_str(key, e)?.parse())
                            .collect::<Result<_>>()?,
                    )
                }
                "out" => cfg.out = Some(PathBuf::from(expect_str(key, v)?)),
                "plot" => cfg.plot = Some(PathBuf::from(expect_str(key, v)?)),
                other => return Err(Error::Parse(format!("unknown configuration key '{other}'"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps.is_empty() {
            return Err(Error::InvalidArgument("ε list is empty".into()));
        }
        if let Some(e) = self.eps.iter().find(|&&e| !(e > 0.0 && e <= 0.25)) {
            return Err(Error::InvalidArgument(format!("ε must lie in (0, 1/4], got {e}")));
        }
        if !(self.dt_divisor > 0.0 && self.dt_divisor.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt_divisor must be positive, got {}", self.dt_divisor)));
        }
        if self.grid == 0 || !(self.h1 > 0.0) {
            return Err(Error::InvalidArgument("grid and h1 must be positive".into()));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidArgument(format!("T must be positive, got {}", self.horizon)));
        }
        if matches!(self.half_width, Some(l) if !(l > 0.0)) {
            return Err(Error::InvalidArgument("L must be positive".into()));
        }
        Ok(())
    }

    pub fn dt(&self, eps: f64) -> f64 {
        eps / self.dt_divisor
    }

    pub fn family_i(&self) -> Vec<PolicyISpec> {
        self.policy_i.clone().unwrap_or_else(|| baseline_families(self.seed).0)
    }

    pub fn family_ii(&self) -> Vec<PolicyIISpec> {
        self.policy_ii.clone().unwrap_or_else(|| baseline_families(self.seed).1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_file() {
        let cfg = RunConfig::from_toml_str(
            r#"
profile = "experiments"
eps = [0.25, 0.125, 0.0625]
grid = 256
T = 1
seed = 9
policy_ii = ["zero", "random:4"]
out = "rate.csv"
"#,
        )
        .unwrap();
        assert_eq!(cfg.profile, ProfileKind::Experiments);
        assert_eq!(cfg.eps, vec![0.25, 0.125, 0.0625]);
        assert_eq!(cfg.grid, 256);
        assert_eq!(cfg.family_ii(), vec![PolicyIISpec::Zero, PolicyIISpec::Random(4)]);
        assert_eq!(cfg.family_i().len(), 3);
        assert_eq!(cfg.out.as_deref(), Some(Path::new("rate.csv")));
    }

    #[test]
    fn rejects_unknown_names() {
        assert!(matches!(RunConfig::from_toml_str("colour = 1"), Err(Error::Parse(_))));
        assert!(matches!(RunConfig::from_toml_str("profile = \"wide\""), Err(Error::Parse(_))));
        assert!(matches!(RunConfig::from_toml_str("policy_i = [\"sprint\"]"), Err(Error::Parse(_))));
        assert!(RunConfig::from_toml_str("eps = [0.5]").unwrap_err().is_precondition());
    }

    #[test]
    fn default_grid_is_powers_of_four() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.eps.first(), Some(&(1.0 / 1024.0)));
        assert_eq!(cfg.eps.last(), Some(&(1.0 / 262144.0)));
        assert_eq!(cfg.dt(1.0 / 1024.0), 1.0 / 204800.0);
    }

    #[test]
    fn reals_list() {
        assert_eq!(parse_reals("1, 0.5,-2").unwrap(), vec![1.0, 0.5, -2.0]);
        assert!(parse_reals("1,x").is_err());
    }
}
