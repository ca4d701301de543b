//! Run configuration: a TOML key-value file with strict key checking.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::blowup::{NormSpec, ScheduleRule};
use crate::error::{Error, Result};
use crate::heteroclinic::SearchConfig;
use crate::nonlinearity::NonlinearityModel;
use crate::spectral::WeightFunction;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub nonlinearity: NonlinearityConfig,
    pub h0: f64,
    pub lambda: f64,
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default)]
    pub bridge: BridgeConfig,
    #[serde(default)]
    pub glue: GlueConfig,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearityConfig {
    pub family: String,
    #[serde(default)]
    pub params: Vec<f64>,
    #[serde(default)]
    pub table_path: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BridgeConfig {
    /// Half-scales S for which transition profiles are built and verified.
    #[serde(default = "default_s_values")]
    pub s_values: Vec<f64>,
    #[serde(default = "default_residual_tol")]
    pub residual_tol: f64,
}

fn default_s_values() -> Vec<f64> {
    vec![2.0, 4.0, 8.0]
}

fn default_residual_tol() -> f64 {
    1e-6
}

impl Default for BridgeConfig {
    fn default() -> Self {
        Self { s_values: default_s_values(), residual_tol: default_residual_tol() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlueConfig {
    #[serde(default = "default_k_max")]
    pub k_max: u32,
    /// "default" or "weighted".
    #[serde(default = "default_rule")]
    pub rule: String,
    /// Weight for the weighted rule and for weighted norms.
    #[serde(default)]
    pub weight: Option<WeightSpec>,
    /// Global multiplier for the half-scales S_k (smaller forcing for
    /// larger values, at the price of a later blow-up time).
    #[serde(default = "one")]
    pub s_multiplier: f64,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "default_norms")]
    pub norms: Vec<NormConfig>,
    #[serde(default = "default_junction_tol")]
    pub junction_tol: f64,
}

fn default_k_max() -> u32 {
    12
}

fn default_rule() -> String {
    "default".into()
}

fn one() -> f64 {
    1.0
}

fn default_alphas() -> Vec<f64> {
    vec![0.5, 1.0]
}

fn default_norms() -> Vec<NormConfig> {
    vec![NormConfig { kind: "gevrey".into(), r: Some(1.0), s: Some(2.0) }]
}

fn default_junction_tol() -> f64 {
    1e-9
}

impl Default for GlueConfig {
    fn default() -> Self {
        Self {
            k_max: default_k_max(),
            rule: default_rule(),
            weight: None,
            s_multiplier: 1.0,
            alphas: default_alphas(),
            norms: default_norms(),
            junction_tol: default_junction_tol(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSpec {
    /// "gevrey" (params r, s), "zero", or "power" (params c, p for c·σ^p).
    pub kind: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormConfig {
    /// "gevrey", "plain", or "weighted" (uses glue.weight).
    pub kind: String,
    #[serde(default)]
    pub r: Option<f64>,
    #[serde(default)]
    pub s: Option<f64>,
}

/// Parses, defaults and validates a config file. Unknown keys are errors.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
    let config: RunConfig = toml::from_str(&text)
        .map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
    config.validate()?;
    Ok(config)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 1.0) {
            return Err(Error::config(format!("λ > 1 required, got lambda = {}", self.lambda)));
        }
        if !(self.h0 > 0.0) {
            return Err(Error::config(format!("h0 must be positive, got {}", self.h0)));
        }
        self.build_model()?;
        if self.glue.rule != "default" && self.glue.rule != "weighted" {
            return Err(Error::config(format!(
                "glue.rule must be \"default\" or \"weighted\", got {:?}",
                self.glue.rule
            )));
        }
        if self.glue.rule == "weighted" || self.glue.norms.iter().any(|n| n.kind == "weighted") {
            self.weight()?;
        }
        for n in &self.glue.norms {
            self.norm_spec(n)?;
        }
        if self.bridge.s_values.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::config("bridge.s_values must be positive"));
        }
        Ok(())
    }

    pub fn build_model(&self) -> Result<Arc<NonlinearityModel>> {
        let nl = &self.nonlinearity;
        let need = |n: usize| -> Result<()> {
            if nl.params.len() != n {
                return Err(Error::config(format!(
                    "nonlinearity.family = {:?} needs exactly {n} params, got {}",
                    nl.family,
                    nl.params.len()
                )));
            }
            Ok(())
        };
        match nl.family.as_str() {
            "constant" => {
                need(1)?;
                NonlinearityModel::constant(nl.params[0])
            }
            "affine" => {
                need(2)?;
                NonlinearityModel::affine(nl.params[0], nl.params[1])
            }
            "pohozaev" => {
                need(2)?;
                NonlinearityModel::pohozaev(nl.params[0], nl.params[1])
            }
            "plateau" => {
                need(4)?;
                NonlinearityModel::plateau(nl.params[0], nl.params[1], nl.params[2], nl.params[3])
            }
            "tabulated" => {
                let path = nl.table_path.as_ref().ok_or_else(|| {
                    Error::config("nonlinearity.table_path required for the tabulated family")
                })?;
                if !path.exists() {
                    return Err(Error::config(format!("table file {} not found", path.display())));
                }
                NonlinearityModel::tabulated_from_csv(path)
            }
            other => Err(Error::config(format!(
                "unknown nonlinearity.family {other:?} (expected constant, affine, pohozaev, \
                 plateau, or tabulated)"
            ))),
        }
    }

    pub fn weight(&self) -> Result<WeightFunction> {
        let spec = self.glue.weight.as_ref().ok_or_else(|| {
            Error::config("glue.weight required for the weighted rule or weighted norms")
        })?;
        let need = |n: usize| -> Result<()> {
            if spec.params.len() != n {
                return Err(Error::config(format!(
                    "glue.weight kind {:?} needs {n} params, got {}",
                    spec.kind,
                    spec.params.len()
                )));
            }
            Ok(())
        };
        match spec.kind.as_str() {
            "gevrey" => {
                need(2)?;
                Ok(WeightFunction::gevrey(spec.params[0], spec.params[1]))
            }
            "zero" => Ok(WeightFunction::zero()),
            "power" => {
                need(2)?;
                let (c, p) = (spec.params[0], spec.params[1]);
                Ok(WeightFunction::from_fn(&format!("power(c={c}, p={p})"), move |sigma| {
                    c * sigma.powf(p)
                }))
            }
            other => Err(Error::config(format!("unknown weight kind {other:?}"))),
        }
    }

    pub fn schedule_rule(&self) -> Result<ScheduleRule> {
        match self.glue.rule.as_str() {
            "default" => Ok(ScheduleRule::Default),
            "weighted" => Ok(ScheduleRule::Weighted(self.weight()?)),
            other => Err(Error::config(format!("unknown glue.rule {other:?}"))),
        }
    }

    pub fn norm_spec(&self, n: &NormConfig) -> Result<NormSpec> {
        match n.kind.as_str() {
            "gevrey" => Ok(NormSpec::Gevrey {
                r: n.r.ok_or_else(|| Error::config("gevrey norm needs r"))?,
                s: n.s.ok_or_else(|| Error::config("gevrey norm needs s"))?,
            }),
            "plain" => Ok(NormSpec::Plain),
            "weighted" => Ok(NormSpec::Weighted(self.weight()?)),
            other => Err(Error::config(format!("unknown norm kind {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<RunConfig> {
        let config: RunConfig =
            toml::from_str(s).map_err(|e| Error::config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse(
            r#"
            h0 = 1.0
            lambda = 2.0
            nonlinearity.family = "constant"
            nonlinearity.params = [1.0]
            "#,
        )
        .unwrap();
        assert_eq!(c.glue.k_max, 12);
        assert_eq!(c.bridge.s_values, vec![2.0, 4.0, 8.0]);
        assert_eq!(c.search.delta_accept, 1e-4);
        assert!(c.build_model().is_ok());
    }

    #[test]
    fn lambda_must_exceed_one() {
        let err = parse(
            r#"
            h0 = 1.0
            lambda = 1.0
            nonlinearity.family = "constant"
            nonlinearity.params = [1.0]
            "#,
        );
        match err {
            Err(Error::Config(msg)) => assert!(msg.contains("λ > 1 required"), "{msg}"),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_errors() {
        let err = parse(
            r#"
            h0 = 1.0
            lambda = 2.0
            wavelength = 3.0
            nonlinearity.family = "constant"
            nonlinearity.params = [1.0]
            "#,
        );
        match err {
            Err(Error::Config(msg)) => assert!(msg.contains("wavelength"), "{msg}"),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn family_params_validated() {
        assert!(parse(
            r#"
            h0 = 1.0
            lambda = 2.0
            nonlinearity.family = "affine"
            nonlinearity.params = [1.0]
            "#,
        )
        .is_err());
        assert!(parse(
            r#"
            h0 = 1.0
            lambda = 2.0
            nonlinearity.family = "nope"
            "#,
        )
        .is_err());
    }

    #[test]
    fn weighted_rule_needs_weight() {
        let err = parse(
            r#"
            h0 = 1.0
            lambda = 2.0
            nonlinearity.family = "constant"
            nonlinearity.params = [1.0]
            glue.rule = "weighted"
            "#,
        );
        assert!(err.is_err());
        let ok = parse(
            r#"
            h0 = 1.0
            lambda = 2.0
            nonlinearity.family = "constant"
            nonlinearity.params = [1.0]
            glue.rule = "weighted"
            glue.weight = { kind = "gevrey", params = [1.0, 2.0] }
            "#,
        );
        assert!(ok.is_ok());
    }
}
