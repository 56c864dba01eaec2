//! Accuracy, convergence and timing experiments over the simulation models.
//!
//! The reference attribution is always the decomposition route, which is
//! exact for these polynomial models and cheap at any `p`.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use ordershap_core::iterative::convergence_metric;
use ordershap_core::{
    decompose_polynomial, explain_batch, CostVariant, Dataset, FeatureVector, Method, PolynomialModel, StructuredModel,
};

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::simulation::{build_simulation_model, interaction_features};
use crate::synth::{generate_dataset, make_baseline};

/// Everything an experiment needs, derived deterministically from a config.
pub struct Setting {
    pub model: PolynomialModel,
    pub structure: StructuredModel,
    pub data: Dataset,
    pub baseline: FeatureVector,
    pub variant: CostVariant,
}

pub fn prepare(config: &ExperimentConfig) -> Result<Setting> {
    config.validate()?;
    let model = build_simulation_model(config.model, config.alpha, config.p)?;
    let structure = decompose_polynomial(&model);
    let data = generate_dataset(config.p, config.n_instances, config.seed)?;
    let baseline = make_baseline(&data, config.baseline)?;
    let variant = CostVariant::Baseline(baseline.clone());
    Ok(Setting { model, structure, data, baseline, variant })
}

/// Exact reference attributions via the decomposition route.
pub fn true_shap(setting: &Setting, parallel: bool) -> Result<Vec<Vec<f64>>> {
    let out = explain_batch(&setting.model, Some(&setting.structure), &setting.variant, &setting.data, &Method::Decomposition, parallel)?;
    Ok(out.matrix())
}

fn method_samples(method: &Method) -> Option<usize> {
    match method {
        Method::Sampling { samples, .. } => Some(*samples),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracyRow {
    pub model: String,
    pub p: usize,
    pub baseline: &'static str,
    pub method: String,
    pub samples: Option<usize>,
    pub instance: usize,
    pub feature: usize,
    /// False for features with main effects only.
    pub interaction: bool,
    pub true_phi: f64,
    pub estimated_phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodAccuracy {
    pub model: String,
    pub baseline: &'static str,
    pub method: String,
    pub exact: bool,
    pub rmse: f64,
    /// RMSE over interaction features only.
    pub rmse_interaction: f64,
    pub max_abs_error: f64,
    pub eval_count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyReport {
    pub rows: Vec<AccuracyRow>,
    pub summary: Vec<MethodAccuracy>,
}

/// One row per (instance, feature, method), instance-major within each
/// method block.
pub fn run_accuracy_experiment(config: &ExperimentConfig, parallel: bool) -> Result<AccuracyReport> {
    let setting = prepare(config)?;
    let reference = true_shap(&setting, parallel)?;
    let interaction = interaction_features(&setting.model);
    let label = config.label();
    let baseline = config.baseline.label();
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for method in &config.methods {
        let out = explain_batch(&setting.model, Some(&setting.structure), &setting.variant, &setting.data, method, parallel)?;
        let (mut sq, mut sq_int, mut n_int, mut max_abs) = (0.0, 0.0, 0usize, 0.0f64);
        let mut cells = 0usize;
        for (instance, (est, truth)) in out.attributions.iter().zip(&reference).enumerate() {
            for (feature, (&e, &t)) in est.phi.iter().zip(truth).enumerate() {
                let d = e - t;
                sq += d * d;
                cells += 1;
                if interaction[feature] {
                    sq_int += d * d;
                    n_int += 1;
                }
                max_abs = max_abs.max(d.abs());
                rows.push(AccuracyRow {
                    model: label.clone(),
                    p: config.p,
                    baseline,
                    method: method.label(),
                    samples: method_samples(method),
                    instance,
                    feature,
                    interaction: interaction[feature],
                    true_phi: t,
                    estimated_phi: e,
                });
            }
        }
        summary.push(MethodAccuracy {
            model: label.clone(),
            baseline,
            method: method.label(),
            exact: method.is_exact(),
            rmse: (sq / cells as f64).sqrt(),
            rmse_interaction: if n_int > 0 { (sq_int / n_int as f64).sqrt() } else { 0.0 },
            max_abs_error: max_abs,
            eval_count: out.total_evals(),
        });
    }
    Ok(AccuracyReport { rows, summary })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub model: String,
    pub alpha: Option<f64>,
    pub baseline: &'static str,
    pub order: usize,
    /// Convergence metric of the order-K attributions against the exact ones.
    pub relative_difference: f64,
}

pub fn run_convergence_experiment(config: &ExperimentConfig, parallel: bool) -> Result<Vec<ConvergenceRow>> {
    let setting = prepare(config)?;
    let reference = true_shap(&setting, parallel)?;
    config
        .convergence_orders
        .iter()
        .map(|&order| {
            let out = explain_batch(&setting.model, None, &setting.variant, &setting.data, &Method::OrderK { order }, parallel)?;
            Ok(ConvergenceRow {
                model: config.label(),
                alpha: config.alpha,
                baseline: config.baseline.label(),
                order,
                relative_difference: convergence_metric(&out.matrix(), &reference)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingRow {
    pub model: String,
    pub p: usize,
    pub n_instances: usize,
    pub method: String,
    /// Wall clock, single worker. Informative only.
    pub seconds: f64,
    pub eval_count: u64,
    pub evals_per_instance: f64,
    /// Evaluations weighted by terms (or components) touched per call.
    pub term_evals: u64,
    pub order_used: Option<usize>,
}

/// Runs every configured method on one worker and records wall clock and
/// evaluation counts.
pub fn run_timing_experiment(config: &ExperimentConfig) -> Result<Vec<TimingRow>> {
    let setting = prepare(config)?;
    config
        .methods
        .iter()
        .map(|method| {
            let start = Instant::now();
            let out = explain_batch(&setting.model, Some(&setting.structure), &setting.variant, &setting.data, method, false)?;
            let seconds = start.elapsed().as_secs_f64();
            Ok(TimingRow {
                model: config.label(),
                p: config.p,
                n_instances: config.n_instances,
                method: method.label(),
                seconds,
                eval_count: out.total_evals(),
                evals_per_instance: out.total_evals() as f64 / config.n_instances as f64,
                term_evals: out.total_work(),
                order_used: out.order_used,
            })
        })
        .collect()
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
