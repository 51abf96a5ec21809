//! Flat JSON run configurations with `--set key=value` overrides.

use std::fmt;
use std::path::{Path, PathBuf};

use gmbclust::{
    ConcentrationPriorSpec, GraphPriorSpec, HyperDirichletSpec, SamplerConfig, ScenarioSpec,
    ThresholdRule,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// Invalid or incomplete configuration (exit code 2).
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

/// Reads the optional config file and applies overrides in order. Override
/// values are parsed as JSON when possible and kept as strings otherwise.
pub fn load<T: DeserializeOwned>(path: Option<&Path>, overrides: &[String]) -> anyhow::Result<T> {
    let mut map = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| config_err(format!("cannot read config {}: {e}", p.display())))?;
            match serde_json::from_str::<Value>(&text)
                .map_err(|e| config_err(format!("config {}: {e}", p.display())))?
            {
                Value::Object(m) => m,
                _ => return Err(config_err(format!("config {} is not a JSON object", p.display()))),
            }
        }
        None => Map::new(),
    };
    for o in overrides {
        let (key, raw) = o
            .split_once('=')
            .ok_or_else(|| config_err(format!("--set expects key=value, got `{o}`")))?;
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_owned()));
        map.insert(key.trim().to_owned(), value);
    }
    serde_json::from_value(Value::Object(map)).map_err(|e| config_err(format!("config: {e}")))
}

fn default_edge_weight() -> f64 {
    0.4
}
fn default_low() -> f64 {
    0.35
}
fn default_high() -> f64 {
    0.65
}
fn default_half() -> f64 {
    0.5
}
fn default_rule() -> String {
    "random".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub output_dir: PathBuf,
    pub q: usize,
    pub n_per_cluster: Vec<usize>,
    pub truth_edges: usize,
    pub m_moves: usize,
    pub seed: u64,
    #[serde(default = "default_edge_weight")]
    pub edge_weight: f64,
    /// `random` (uniform on `[threshold_low, threshold_high]`) or `constant`.
    #[serde(default = "default_rule")]
    pub threshold_rule: String,
    #[serde(default = "default_low")]
    pub threshold_low: f64,
    #[serde(default = "default_high")]
    pub threshold_high: f64,
    #[serde(default = "default_half")]
    pub threshold_value: f64,
    /// Explicit per-variable quantile orders; overrides the rule.
    #[serde(default)]
    pub thresholds: Option<Vec<f64>>,
    #[serde(default)]
    pub allow_nonchordal: bool,
    /// Keep only the first this-many variables of the generated data.
    #[serde(default)]
    pub keep_first: Option<usize>,
}

impl SimulateConfig {
    pub fn scenario(&self) -> anyhow::Result<ScenarioSpec> {
        let thresholds = match (&self.thresholds, self.threshold_rule.as_str()) {
            (Some(values), _) => ThresholdRule::Explicit {
                values: values.clone(),
            },
            (None, "random") => ThresholdRule::Random {
                low: self.threshold_low,
                high: self.threshold_high,
            },
            (None, "constant") => ThresholdRule::Constant {
                value: self.threshold_value,
            },
            (None, other) => {
                return Err(config_err(format!(
                    "threshold_rule must be `random` or `constant`, got `{other}`"
                )))
            }
        };
        if let Some(k) = self.keep_first {
            if k == 0 || k > self.q {
                return Err(config_err(format!("keep_first = {k} must lie in 1..={}", self.q)));
            }
        }
        Ok(ScenarioSpec {
            q: self.q,
            n_per_cluster: self.n_per_cluster.clone(),
            truth_edges: self.truth_edges,
            m_moves: self.m_moves,
            thresholds,
            edge_weight: self.edge_weight,
            seed: self.seed,
            allow_nonchordal: self.allow_nonchordal,
        })
    }
}

fn one() -> f64 {
    1.0
}
fn three() -> f64 {
    3.0
}
fn one_usize() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub input: PathBuf,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub missing_token: Option<String>,
    pub iterations: usize,
    pub burn_in: usize,
    #[serde(default = "one_usize")]
    pub thin: usize,
    pub seed: u64,
    #[serde(default = "one_usize")]
    pub chains: usize,
    #[serde(default = "one_usize")]
    pub aux_components: usize,
    #[serde(default)]
    pub baseline_mode: bool,
    #[serde(default = "one")]
    pub a: f64,
    #[serde(default = "one")]
    pub a_g: f64,
    #[serde(default = "one")]
    pub b_g: f64,
    #[serde(default = "three")]
    pub c: f64,
    #[serde(default = "one")]
    pub d: f64,
    #[serde(default)]
    pub progress_every: usize,
}

impl FitConfig {
    /// Sampler settings for chain `chain`, seeded with `seed + chain`.
    pub fn sampler(&self, chain: usize) -> anyhow::Result<SamplerConfig> {
        if self.chains == 0 {
            return Err(config_err("chains must be at least 1"));
        }
        let wrap = |e: gmbclust::Error| config_err(e.to_string());
        let cfg = SamplerConfig {
            iterations: self.iterations,
            burn_in: self.burn_in,
            thin: self.thin,
            seed: self.seed.wrapping_add(chain as u64),
            aux_components: self.aux_components,
            baseline_mode: self.baseline_mode,
            hyper: HyperDirichletSpec::new(self.a).map_err(wrap)?,
            graph_prior: GraphPriorSpec::new(self.a_g, self.b_g).map_err(wrap)?,
            concentration: ConcentrationPriorSpec::new(self.c, self.d).map_err(wrap)?,
            progress_every: self.progress_every,
        };
        cfg.validate().map_err(wrap)?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummarizeConfig {
    pub traces: Vec<PathBuf>,
    pub output_dir: PathBuf,
    /// Subjects (0-based rows) to write edge inclusion probabilities for.
    /// Defaults to the first member of every estimated cluster.
    #[serde(default)]
    pub subjects: Option<Vec<usize>>,
    #[serde(default = "default_true")]
    pub heatmap: bool,
    /// CSV of known group labels (last column, one row per subject) for support.csv.
    #[serde(default)]
    pub labels: Option<PathBuf>,
}

fn default_true() -> bool {
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_and_missing_keys() {
        let cfg: SummarizeConfig = load(
            None,
            &[
                "traces=[\"a.jsonl\"]".into(),
                "output_dir=out".into(),
                "heatmap=false".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.output_dir, PathBuf::from("out"));
        assert!(!cfg.heatmap);

        let err = load::<SimulateConfig>(None, &["output_dir=x".into()]).unwrap_err();
        assert!(err.to_string().contains("missing field `q`"), "{err}");
        assert!(err.downcast_ref::<ConfigError>().is_some());
    }
}
