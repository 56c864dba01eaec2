//! The simulation models: main effects on every feature plus a fixed set of
//! interactions among the first eight features.

use serde::{Deserialize, Serialize};

use ordershap_core::PolynomialModel;

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelId {
    Order2,
    Order4,
    Order6,
}

impl ModelId {
    pub fn order(self) -> usize {
        match self {
            ModelId::Order2 => 2,
            ModelId::Order4 => 4,
            ModelId::Order6 => 6,
        }
    }

    pub fn label(self, alpha: Option<f64>) -> String {
        match (self, alpha) {
            (ModelId::Order6, Some(a)) => format!("order6-{a}"),
            _ => format!("order{}", self.order()),
        }
    }
}

impl std::str::FromStr for ModelId {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "order2" => Ok(ModelId::Order2),
            "order4" => Ok(ModelId::Order4),
            "order6" => Ok(ModelId::Order6),
            other => Err(BenchError::Config(format!("unknown model id {other:?}"))),
        }
    }
}

/// Smallest `p` covering the fixed interaction indices.
pub const MIN_FEATURES: usize = 10;

const PAIRS: [[usize; 2]; 4] = [[0, 1], [2, 3], [4, 5], [6, 7]];
const QUADS: [[usize; 4]; 2] = [[0, 1, 2, 3], [4, 5, 6, 7]];
const SIX: [usize; 6] = [0, 1, 2, 3, 4, 5];

/// `sum_j x_j + x0x1 + x2x3 + x4x5 + x6x7`, plus `x0x1x2x3 + x4x5x6x7` for
/// order 4, plus `alpha * x0..x5` for order 6 (0-based indices).
pub fn build_simulation_model(id: ModelId, alpha: Option<f64>, p: usize) -> Result<PolynomialModel> {
    if p < MIN_FEATURES {
        return Err(BenchError::Config(format!("the simulation models need p >= {MIN_FEATURES}, got {p}")));
    }
    let mut terms: Vec<(f64, Vec<usize>)> = (0..p).map(|j| (1.0, vec![j])).collect();
    terms.extend(PAIRS.iter().map(|v| (1.0, v.to_vec())));
    if matches!(id, ModelId::Order4 | ModelId::Order6) {
        terms.extend(QUADS.iter().map(|v| (1.0, v.to_vec())));
    }
    if id == ModelId::Order6 {
        let alpha = alpha.ok_or_else(|| BenchError::Config("order6 needs alpha".into()))?;
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(BenchError::Config(format!("alpha must be positive, got {alpha}")));
        }
        terms.push((alpha, SIX.to_vec()));
    }
    Ok(PolynomialModel::new(p, terms)?)
}

/// Features that take part in at least one interaction term.
pub fn interaction_features(model: &PolynomialModel) -> Vec<bool> {
    let mut flags = vec![false; model.p()];
    for t in model.terms().iter().filter(|t| t.vars.len() > 1) {
        for &j in &t.vars {
            flags[j] = true;
        }
    }
    flags
}
