//! Coalition cost functions `c(f, u)` bound to one instance.
//!
//! Two variants are provided, both additive in `f` and both satisfying the
//! dummy property `c(f_v, u) = c(f_v, u ∩ v)`:
//!
//! * [`CostVariant::Baseline`]: `c(f, u) = f(x_u, z_ū)` for a reference point `z`.
//! * [`CostVariant::KernelEmpirical`]: `c(f, u) = mean_b f(x_u, b_ū)` over the
//!   rows `b` of a background dataset, each row substituted jointly.

use std::collections::HashMap;
use std::hash::{BuildHasherDefault, Hasher};

use crate::data::Dataset;
use crate::error::{Result, ShapError};
use crate::model::{check_point, ComponentModel, FeatureVector, Model, ModelSum, StructuredModel};
use crate::subset::{SubsetMask, MAX_FEATURES};

#[derive(Debug, Clone, PartialEq)]
pub enum CostVariant {
    Baseline(FeatureVector),
    KernelEmpirical(Dataset),
}

impl CostVariant {
    pub fn p(&self) -> usize {
        match self {
            CostVariant::Baseline(z) => z.len(),
            CostVariant::KernelEmpirical(bg) => bg.p(),
        }
    }

    fn validate(&self, p: usize) -> Result<()> {
        match self {
            CostVariant::Baseline(z) => {
                if z.len() != p {
                    return Err(ShapError::DimensionMismatch { expected: p, got: z.len() });
                }
            }
            CostVariant::KernelEmpirical(bg) => {
                if bg.is_empty() {
                    return Err(ShapError::EmptyDataset);
                }
                if bg.p() != p {
                    return Err(ShapError::DimensionMismatch { expected: p, got: bg.p() });
                }
            }
        }
        Ok(())
    }
}

/// Multiplicative hash for mask keys; SipHash dominates the cost of small
/// polynomial evaluations otherwise.
#[derive(Default)]
pub struct MaskHasher(u64);

impl Hasher for MaskHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = (self.0.rotate_left(5) ^ b as u64).wrapping_mul(0x51_7c_c1_b7_27_22_0a_95);
        }
    }

    fn write_u64(&mut self, v: u64) {
        self.0 = (v ^ (v >> 29)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        self.0 ^= self.0 >> 32;
    }
}

pub type MaskMap<V> = HashMap<SubsetMask, V, BuildHasherDefault<MaskHasher>>;

/// A cost function bound to one model, one cost variant and one instance,
/// with a memo of every coalition value computed so far.
pub struct CostContext<'a, M: ?Sized> {
    model: &'a M,
    variant: &'a CostVariant,
    x: &'a [f64],
    cache: MaskMap<f64>,
    eval_count: u64,
    work: u64,
    point: Vec<f64>,
}

impl<'a, M: Model + ?Sized> CostContext<'a, M> {
    pub fn new(model: &'a M, variant: &'a CostVariant, x: &'a [f64]) -> Result<Self> {
        let p = model.n_features();
        if p > MAX_FEATURES {
            return Err(ShapError::TooManyFeatures { p, limit: MAX_FEATURES, method: "cost function" });
        }
        check_point(x, p)?;
        variant.validate(p)?;
        Ok(CostContext {
            model,
            variant,
            x,
            cache: MaskMap::default(),
            eval_count: 0,
            work: 0,
            point: vec![0.0; p],
        })
    }

    pub fn p(&self) -> usize {
        self.x.len()
    }

    pub fn model(&self) -> &'a M {
        self.model
    }

    pub fn variant(&self) -> &'a CostVariant {
        self.variant
    }

    pub fn x(&self) -> &'a [f64] {
        self.x
    }

    /// Fresh model evaluations performed so far (background rows count once each).
    pub fn eval_count(&self) -> u64 {
        self.eval_count
    }

    /// Elementary evaluations (model evaluations weighted by
    /// [`Model::eval_weight`]).
    pub fn work(&self) -> u64 {
        self.work
    }

    /// Number of distinct coalitions evaluated.
    pub fn distinct_subsets(&self) -> usize {
        self.cache.len()
    }

    pub fn is_cached(&self, u: SubsetMask) -> bool {
        self.cache.contains_key(&u)
    }

    pub(crate) fn add_counts(&mut self, evals: u64, work: u64) {
        self.eval_count += evals;
        self.work += work;
    }

    /// `c(f, u)`, memoized.
    pub fn cost(&mut self, u: SubsetMask) -> Result<f64> {
        if let Some(&v) = self.cache.get(&u) {
            return Ok(v);
        }
        let p = self.p();
        if !u.is_subset_of(SubsetMask::full(p)) {
            let index = SubsetMask::from_bits(u.bits() & !SubsetMask::full(p).bits()).iter().next().unwrap_or(p);
            return Err(ShapError::FeatureOutOfRange { index, p });
        }
        let weight = self.model.eval_weight();
        let value = match self.variant {
            CostVariant::Baseline(z) => {
                fill_point(&mut self.point, self.x, z, u);
                self.eval_count += 1;
                self.work += weight;
                finite(self.model.eval_point(&self.point)?)?
            }
            CostVariant::KernelEmpirical(bg) => {
                let mut sum = 0.0;
                for b in bg.rows() {
                    fill_point(&mut self.point, self.x, b, u);
                    sum += finite(self.model.eval_point(&self.point)?)?;
                }
                let n = bg.n_rows() as u64;
                self.eval_count += n;
                self.work += weight * n;
                sum / bg.n_rows() as f64
            }
        };
        self.cache.insert(u, value);
        Ok(value)
    }

    /// `c(f, u + i) - c(f, u)`.
    pub fn gradient(&mut self, u: SubsetMask, i: usize) -> Result<f64> {
        Ok(self.cost(u.with(i))? - self.cost(u)?)
    }
}

#[inline]
fn fill_point(point: &mut [f64], x: &[f64], other: &[f64], u: SubsetMask) {
    for (j, slot) in point.iter_mut().enumerate() {
        *slot = if u.contains(j) { x[j] } else { other[j] };
    }
}

#[inline]
fn finite(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ShapError::NonFiniteOutput { value: v })
    }
}

/// Largest observed violations of the additivity and dummy properties.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssumptionReport {
    /// `max |c(f1+f2,u) - c(f1,u) - c(f2,u)|`
    pub max_additivity_violation: f64,
    /// `max |c(f_v,u) - c(f_v,u∩v)|` over components `f_v` of `f1`
    pub max_dummy_violation: f64,
    /// Largest absolute cost value seen (at least 1).
    pub scale: f64,
    pub checks: usize,
}

impl AssumptionReport {
    pub fn passes(&self, rel_tol: f64) -> bool {
        self.max_additivity_violation <= rel_tol * self.scale && self.max_dummy_violation <= rel_tol * self.scale
    }
}

/// Probes the additivity and dummy properties of a cost variant on trial
/// coalitions and instances. Violations are reported, never raised.
pub fn check_assumption1<M2: Model>(
    variant: &CostVariant,
    f1: &StructuredModel,
    f2: &M2,
    trial_subsets: &[SubsetMask],
    trial_instances: &Dataset,
) -> Result<AssumptionReport> {
    let p = f1.p();
    if f2.n_features() != p {
        return Err(ShapError::DimensionMismatch { expected: p, got: f2.n_features() });
    }
    let sum = ModelSum(f1, f2);
    let mut report = AssumptionReport { max_additivity_violation: 0.0, max_dummy_violation: 0.0, scale: 1.0, checks: 0 };
    for x in trial_instances.rows() {
        let mut c_sum = CostContext::new(&sum, variant, x)?;
        let mut c1 = CostContext::new(f1, variant, x)?;
        let mut c2 = CostContext::new(f2, variant, x)?;
        let components: Vec<ComponentModel<'_>> = f1.components().iter().map(|c| ComponentModel::new(p, c)).collect();
        let mut comp_ctx = components
            .iter()
            .map(|m| CostContext::new(m, variant, x))
            .collect::<Result<Vec<_>>>()?;
        for &u in trial_subsets {
            let (a, b, c) = (c_sum.cost(u)?, c1.cost(u)?, c2.cost(u)?);
            report.scale = report.scale.max(a.abs()).max(b.abs()).max(c.abs());
            report.max_additivity_violation = report.max_additivity_violation.max((a - b - c).abs());
            for (ctx, comp) in comp_ctx.iter_mut().zip(f1.components()) {
                let full = ctx.cost(u)?;
                let restricted = ctx.cost(u.intersection(comp.vars))?;
                report.scale = report.scale.max(full.abs());
                report.max_dummy_violation = report.max_dummy_violation.max((full - restricted).abs());
            }
            report.checks += 1;
        }
    }
    Ok(report)
}
