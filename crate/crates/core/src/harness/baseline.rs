use std::collections::BTreeMap;

use serde::Deserialize;

use super::HarnessError;

const SHIPPED: &str = include_str!("../../baselines/regression.toml");

/// A measured ratio and the regression constant a check must stay under.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Baseline {
    pub measured: f64,
    pub c_reg: f64,
}

/// Regression constants keyed by family, e.g. `sin.j1.k2.L2` under `gn`.
#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Baselines {
    #[serde(default)]
    pub gn: BTreeMap<String, Baseline>,
    #[serde(default)]
    pub thm1: BTreeMap<String, Baseline>,
}

impl Baselines {
    pub fn shipped() -> Self {
        Self::parse(SHIPPED).expect("shipped baselines parse")
    }

    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| super::suite::config_error(text, &e))
    }

    pub fn gn(&self, family: &str) -> Result<Baseline, HarnessError> {
        self.gn.get(family).copied().ok_or_else(|| HarnessError::MissingBaseline(format!("gn.{family}")))
    }

    pub fn thm1(&self, family: &str) -> Result<Baseline, HarnessError> {
        self.thm1.get(family).copied().ok_or_else(|| HarnessError::MissingBaseline(format!("thm1.{family}")))
    }
}
