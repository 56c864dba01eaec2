//! Synthetic inputs: standard-normal datasets and baseline points.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use ordershap_core::{Dataset, FeatureVector};

use crate::error::{BenchError, Result};

/// `n x p` i.i.d. N(0, 1) draws, row-major, reproducible per seed.
pub fn generate_dataset(p: usize, n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 || p == 0 {
        return Err(BenchError::Config(format!("dataset needs n >= 1 and p >= 1, got n={n} p={p}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = (0..n * p).map(|_| StandardNormal.sample(&mut rng)).collect();
    Ok(Dataset::from_row_major(p, values)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineKind {
    Mean,
    #[serde(alias = "p975")]
    Percentile975,
}

impl BaselineKind {
    pub fn label(self) -> &'static str {
        match self {
            BaselineKind::Mean => "mean",
            BaselineKind::Percentile975 => "percentile975",
        }
    }
}

/// Per-column mean or per-column 97.5th percentile.
pub fn make_baseline(data: &Dataset, kind: BaselineKind) -> Result<FeatureVector> {
    if data.is_empty() {
        return Err(BenchError::Data("baseline of an empty dataset".into()));
    }
    let values = (0..data.p())
        .map(|j| {
            let col = data.column(j);
            match kind {
                BaselineKind::Mean => col.iter().sum::<f64>() / col.len() as f64,
                BaselineKind::Percentile975 => percentile(col, 0.975),
            }
        })
        .collect();
    Ok(FeatureVector::new(values)?)
}

/// Empirical quantile with linear interpolation between the order
/// statistics at positions `floor(h)` and `ceil(h)`, `h = (n - 1) * level`.
pub fn percentile(mut values: Vec<f64>, level: f64) -> f64 {
    assert!(!values.is_empty());
    values.sort_by(f64::total_cmp);
    let h = (values.len() - 1) as f64 * level.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    values[lo] + (h - lo as f64) * (values[hi] - values[lo])
}
