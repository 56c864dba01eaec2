//! Iterative order estimation for models of unknown order.
//!
//! Attributions are computed at orders 1, 2, 4, 6, ... and the loop stops as
//! soon as two consecutive attribution matrices agree under
//! [`convergence_metric`]. Orders `2t+1` and `2t+2` share the same tail
//! formula, so odd orders above 1 are skipped.

use rayon::prelude::*;

use crate::attribution::{Attribution, MethodKind};
use crate::cost::{CostContext, CostVariant};
use crate::data::Dataset;
use crate::error::{Result, ShapError};
use crate::model::Model;
use crate::orderk::shap_order_k;

/// Below this the variance (or mean squared difference) is treated as zero.
const DEGENERATE: f64 = 1e-12;

/// How differences between consecutive attribution matrices are reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MetricKind {
    /// `mean((cur - prev)^2) / var(cur)`
    MeanSquared,
    /// `mean(|cur - prev|)^2 / var(cur)`. The default: with a 1e-4 threshold
    /// it stops the simulation models at the orders reported for them, where
    /// the mean-squared reading runs one order further.
    #[default]
    SquaredMeanAbs,
}

/// `mean(|current - previous|)^2 / var(current)` over all cells, with the
/// population variance. A constant `current` yields 0 when the matrices
/// agree and infinity otherwise.
pub fn convergence_metric(current: &[Vec<f64>], previous: &[Vec<f64>]) -> Result<f64> {
    convergence_metric_with(current, previous, MetricKind::default())
}

pub fn convergence_metric_with(current: &[Vec<f64>], previous: &[Vec<f64>], kind: MetricKind) -> Result<f64> {
    if current.len() != previous.len() {
        return Err(ShapError::ShapeMismatch(format!("{} rows vs {} rows", current.len(), previous.len())));
    }
    if current.is_empty() {
        return Err(ShapError::EmptyDataset);
    }
    let mut cells = 0usize;
    let (mut sum, mut sum_abs, mut sum_sq) = (0.0, 0.0, 0.0);
    for (c, p) in current.iter().zip(previous) {
        if c.len() != p.len() {
            return Err(ShapError::ShapeMismatch(format!("row of {} vs row of {}", c.len(), p.len())));
        }
        for (a, b) in c.iter().zip(p) {
            let d = a - b;
            sum += a;
            sum_abs += d.abs();
            sum_sq += d * d;
            cells += 1;
        }
    }
    if cells == 0 {
        return Err(ShapError::EmptyDataset);
    }
    let n = cells as f64;
    let mean = sum / n;
    let variance = current.iter().flatten().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    let difference = match kind {
        MetricKind::MeanSquared => sum_sq / n,
        MetricKind::SquaredMeanAbs => (sum_abs / n).powi(2),
    };
    if variance < DEGENERATE {
        return Ok(if difference < DEGENERATE { 0.0 } else { f64::INFINITY });
    }
    Ok(difference / variance)
}

/// The order schedule `1, 2, 4, 6, ...` up to `max_order`.
pub fn order_sequence(max_order: usize) -> Vec<usize> {
    let mut orders = Vec::new();
    let mut k = 1;
    while k <= max_order {
        orders.push(k);
        k = if k == 1 { 2 } else { k + 2 };
    }
    orders
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterativeOptions {
    pub max_order: usize,
    pub threshold: f64,
    pub metric: MetricKind,
    /// Stop recomputing instances whose own rows have already converged.
    /// Off by default; with it off every order recomputes every instance.
    pub drop_converged: bool,
    pub parallel: bool,
}

impl Default for IterativeOptions {
    fn default() -> Self {
        IterativeOptions { max_order: 10, threshold: 1e-4, metric: MetricKind::default(), drop_converged: false, parallel: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderStep {
    pub order: usize,
    /// Metric against the previous order; infinite for the first order.
    pub metric: f64,
}

/// Evaluation counts of one instance's cost context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct InstanceStats {
    pub eval_count: u64,
    pub work: u64,
    pub distinct_subsets: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterativeOutcome {
    pub attributions: Vec<Attribution>,
    /// Last order computed.
    pub order_used: usize,
    pub converged: bool,
    pub history: Vec<OrderStep>,
    pub stats: Vec<InstanceStats>,
}

impl IterativeOutcome {
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        self.attributions.iter().map(|a| a.phi.clone()).collect()
    }
}

/// Runs the order schedule over all instances. One cost context per
/// instance is kept for the whole run, so each order only pays for the
/// coalition sizes it adds.
pub fn shap_iterative<M: Model + Sync + ?Sized>(
    model: &M,
    variant: &CostVariant,
    instances: &Dataset,
    options: &IterativeOptions,
) -> Result<IterativeOutcome> {
    if instances.is_empty() {
        return Err(ShapError::EmptyDataset);
    }
    if options.max_order == 0 {
        return Err(ShapError::InvalidParameter("max_order must be at least 1".into()));
    }
    if !(options.threshold > 0.0) {
        return Err(ShapError::InvalidParameter("threshold must be positive".into()));
    }
    let mut contexts =
        instances.rows().map(|x| CostContext::new(model, variant, x)).collect::<Result<Vec<_>>>()?;
    let n = contexts.len();
    let mut active = vec![true; n];
    let mut previous: Option<Vec<Vec<f64>>> = None;
    let mut history = Vec::new();
    let mut converged = false;
    let mut order_used = 0;

    for order in order_sequence(options.max_order) {
        let fresh = compute_order(&mut contexts, &active, order, options.parallel)?;
        let current: Vec<Vec<f64>> = match &previous {
            Some(prev) => fresh.into_iter().zip(prev).map(|(f, p)| f.unwrap_or_else(|| p.clone())).collect(),
            None => fresh.into_iter().map(|f| f.expect("first order computes every instance")).collect(),
        };
        let metric = match &previous {
            Some(prev) => convergence_metric_with(&current, prev, options.metric)?,
            None => f64::INFINITY,
        };
        history.push(OrderStep { order, metric });
        order_used = order;
        if options.drop_converged {
            if let Some(prev) = &previous {
                freeze_converged(&current, prev, &mut active, options);
            }
        }
        previous = Some(current);
        if metric < options.threshold {
            converged = true;
            break;
        }
    }

    let matrix = previous.expect("at least one order is evaluated");
    let stats: Vec<InstanceStats> = contexts
        .iter()
        .map(|c| InstanceStats { eval_count: c.eval_count(), work: c.work(), distinct_subsets: c.distinct_subsets() })
        .collect();
    let attributions = matrix
        .into_iter()
        .zip(&stats)
        .map(|(phi, s)| Attribution {
            phi,
            method: MethodKind::Iterative,
            order_used: Some(order_used),
            converged: Some(converged),
            eval_count: s.eval_count,
        })
        .collect();
    Ok(IterativeOutcome { attributions, order_used, converged, history, stats })
}

fn compute_order<M: Model + Sync + ?Sized>(
    contexts: &mut [CostContext<'_, M>],
    active: &[bool],
    order: usize,
    parallel: bool,
) -> Result<Vec<Option<Vec<f64>>>> {
    let run = |(ctx, &on): (&mut CostContext<'_, M>, &bool)| -> Result<Option<Vec<f64>>> {
        if on {
            Ok(Some(shap_order_k(ctx, order)?.phi))
        } else {
            Ok(None)
        }
    };
    if parallel {
        contexts.par_iter_mut().zip(active.par_iter()).map(run).collect()
    } else {
        contexts.iter_mut().zip(active.iter()).map(run).collect()
    }
}

/// Marks instances whose own rows changed by less than the threshold
/// (relative to the variance of the whole current matrix).
fn freeze_converged(current: &[Vec<f64>], previous: &[Vec<f64>], active: &mut [bool], options: &IterativeOptions) {
    let cells: Vec<f64> = current.iter().flatten().copied().collect();
    let mean = cells.iter().sum::<f64>() / cells.len() as f64;
    let variance = cells.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / cells.len() as f64;
    for ((row, prev), on) in current.iter().zip(previous).zip(active.iter_mut()) {
        if !*on {
            continue;
        }
        let diffs: Vec<f64> = row.iter().zip(prev).map(|(a, b)| a - b).collect();
        let d = match options.metric {
            MetricKind::MeanSquared => diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len() as f64,
            MetricKind::SquaredMeanAbs => (diffs.iter().map(|d| d.abs()).sum::<f64>() / diffs.len() as f64).powi(2),
        };
        let settled = if variance < DEGENERATE { d < DEGENERATE } else { d / variance < options.threshold };
        if settled {
            *on = false;
        }
    }
}
