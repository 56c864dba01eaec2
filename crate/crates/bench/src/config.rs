use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use ordershap_core::Method;

use crate::error::{BenchError, Result};
use crate::simulation::{ModelId, MIN_FEATURES};
use crate::synth::BaselineKind;

/// One simulation setting. Config files hold either a single object or an
/// array of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelId,
    /// Coefficient of the six-way term; order6 only.
    #[serde(default)]
    pub alpha: Option<f64>,
    pub p: usize,
    pub n_instances: usize,
    pub baseline: BaselineKind,
    pub methods: Vec<Method>,
    #[serde(default = "default_orders")]
    pub convergence_orders: Vec<usize>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    pub seed: u64,
}

fn default_orders() -> Vec<usize> {
    vec![2, 4, 6, 8]
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_instances == 0 {
            return Err(BenchError::Config("n_instances must be at least 1".into()));
        }
        if self.p < MIN_FEATURES {
            return Err(BenchError::Config(format!("p must be at least {MIN_FEATURES}, got {}", self.p)));
        }
        match (self.model, self.alpha) {
            (ModelId::Order6, None) => return Err(BenchError::Config("order6 needs alpha".into())),
            (ModelId::Order6, Some(a)) if !(a > 0.0 && a.is_finite()) => {
                return Err(BenchError::Config(format!("alpha must be positive, got {a}")))
            }
            (ModelId::Order2 | ModelId::Order4, Some(_)) => {
                return Err(BenchError::Config("alpha only applies to order6".into()))
            }
            _ => {}
        }
        for m in &self.methods {
            match *m {
                Method::OrderK { order: 0 } => return Err(BenchError::Config("order must be >= 1".into())),
                Method::Sampling { samples: 0, .. } => {
                    return Err(BenchError::Config("samples must be >= 1".into()))
                }
                Method::Iterative { max_order, threshold } if max_order == 0 || !(threshold > 0.0) => {
                    return Err(BenchError::Config("iterative needs max_order >= 1 and threshold > 0".into()))
                }
                Method::Exact if self.p > ordershap_core::oracle::EXACT_SUBSETS_LIMIT => {
                    return Err(BenchError::Config(format!("exact enumeration is limited to p <= 20, got {}", self.p)))
                }
                Method::Permutations if self.p > ordershap_core::oracle::EXACT_PERMUTATIONS_LIMIT => {
                    return Err(BenchError::Config(format!("permutation enumeration is limited to p <= 9, got {}", self.p)))
                }
                _ => {}
            }
        }
        if self.convergence_orders.contains(&0) {
            return Err(BenchError::Config("convergence orders must be >= 1".into()));
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        self.model.label(self.alpha)
    }
}

pub fn load_configs(path: &Path) -> Result<Vec<ExperimentConfig>> {
    let text = std::fs::read_to_string(path)?;
    parse_configs(&text)
}

pub fn parse_configs(text: &str) -> Result<Vec<ExperimentConfig>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        Many(Vec<ExperimentConfig>),
        One(Box<ExperimentConfig>),
    }
    let configs = match serde_json::from_str(text)? {
        OneOrMany::Many(v) => v,
        OneOrMany::One(c) => vec![*c],
    };
    if configs.is_empty() {
        return Err(BenchError::Config("no experiment configured".into()));
    }
    for c in &configs {
        c.validate()?;
    }
    Ok(configs)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE: &str = r#"{
        "model": "order6", "alpha": 0.5, "p": 10, "n_instances": 100,
        "baseline": "p975", "seed": 3,
        "methods": [{"kind": "fdcmp"}, {"kind": "orderk", "order": 6},
                    {"kind": "iterative", "max_order": 10, "threshold": 0.0001},
                    {"kind": "sampling", "samples": 25, "seed": 1}, {"kind": "exact"}]
    }"#;

    #[test]
    fn parses_single_and_array() {
        let one = parse_configs(ONE).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].baseline, BaselineKind::Percentile975);
        assert_eq!(one[0].convergence_orders, vec![2, 4, 6, 8]);
        assert_eq!(one[0].methods.len(), 5);
        let many = parse_configs(&format!("[{ONE}, {ONE}]")).unwrap();
        assert_eq!(many.len(), 2);
    }

    #[test]
    fn rejects_invalid() {
        assert!(parse_configs(&ONE.replace("\"p\": 10", "\"p\": 8")).is_err());
        assert!(parse_configs(&ONE.replace("\"n_instances\": 100", "\"n_instances\": 0")).is_err());
        assert!(parse_configs(&ONE.replace("\"alpha\": 0.5,", "")).is_err());
        assert!(parse_configs(&ONE.replace("\"samples\": 25", "\"samples\": 0")).is_err());
        assert!(parse_configs(&ONE.replace("\"p\": 10", "\"p\": 21")).is_err());
        assert!(parse_configs("[]").is_err());
    }
}
