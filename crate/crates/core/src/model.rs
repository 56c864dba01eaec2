//! Model representations: explicit polynomial term sums, structured
//! component sums, and opaque black-box evaluators.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use smallvec::SmallVec;

use crate::error::{Result, ShapError};
use crate::subset::{SubsetMask, MAX_FEATURES};

/// Something that maps a `p`-dimensional point to a real number.
///
/// `eval_point` receives a slice of length `n_features()`; callers that
/// cannot guarantee that should go through [`evaluate`].
pub trait Model {
    fn n_features(&self) -> usize;

    fn eval_point(&self, x: &[f64]) -> Result<f64>;

    /// Declared or structural interaction order, when known.
    fn order_hint(&self) -> Option<usize> {
        None
    }

    /// Elementary evaluations (terms or component calls) one `eval_point`
    /// performs. Used only for work accounting.
    fn eval_weight(&self) -> u64 {
        1
    }
}

impl<M: Model + ?Sized> Model for &M {
    fn n_features(&self) -> usize {
        (**self).n_features()
    }
    fn eval_point(&self, x: &[f64]) -> Result<f64> {
        (**self).eval_point(x)
    }
    fn order_hint(&self) -> Option<usize> {
        (**self).order_hint()
    }
    fn eval_weight(&self) -> u64 {
        (**self).eval_weight()
    }
}

/// Checked evaluation: dimension and finiteness of both input and output.
pub fn evaluate<M: Model + ?Sized>(model: &M, x: &[f64]) -> Result<f64> {
    check_point(x, model.n_features())?;
    let y = model.eval_point(x)?;
    if !y.is_finite() {
        return Err(ShapError::NonFiniteOutput { value: y });
    }
    Ok(y)
}

pub(crate) fn check_point(x: &[f64], p: usize) -> Result<()> {
    if x.len() != p {
        return Err(ShapError::DimensionMismatch { expected: p, got: x.len() });
    }
    if let Some(index) = x.iter().position(|v| !v.is_finite()) {
        return Err(ShapError::NonFiniteInput { index });
    }
    Ok(())
}

/// A validated instance or reference point.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(ShapError::NonFiniteInput { index });
        }
        Ok(FeatureVector(values))
    }

    pub fn zeros(p: usize) -> Self {
        FeatureVector(vec![0.0; p])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Deref for FeatureVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// One monomial `coef * prod_{j in vars} x_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coef: f64,
    /// Strictly increasing feature indices; empty for the constant term.
    pub vars: Vec<usize>,
}

impl Term {
    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.vars.iter().fold(self.coef, |acc, &j| acc * x[j])
    }
}

/// A multilinear polynomial over `p` features.
///
/// Terms over the same variable set are merged on construction and terms
/// whose coefficient ends up exactly zero are dropped, so [`Self::order`]
/// reflects the effective interaction order.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialModel {
    p: usize,
    terms: Vec<Term>,
}

impl PolynomialModel {
    /// Builds a model from `(coef, vars)` pairs. Duplicate variable sets are
    /// summed.
    pub fn new<I, V>(p: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, V)>,
        V: AsRef<[usize]>,
    {
        if p > MAX_FEATURES {
            return Err(ShapError::TooManyFeatures { p, limit: MAX_FEATURES, method: "model" });
        }
        let mut merged: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (coef, vars) in terms {
            if !coef.is_finite() {
                return Err(ShapError::MalformedSpec(format!("non-finite coefficient {coef}")));
            }
            let vars = normalize_vars(vars.as_ref(), p)?;
            *merged.entry(vars).or_insert(0.0) += coef;
        }
        Ok(Self::from_merged(p, merged))
    }

    pub(crate) fn from_merged(p: usize, merged: BTreeMap<Vec<usize>, f64>) -> Self {
        let mut terms: Vec<Term> = merged
            .into_iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|(vars, coef)| Term { coef, vars })
            .collect();
        terms.sort_by(|a, b| a.vars.len().cmp(&b.vars.len()).then_with(|| a.vars.cmp(&b.vars)));
        PolynomialModel { p, terms }
    }

    pub fn zero(p: usize) -> Self {
        PolynomialModel { p, terms: Vec::new() }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Largest term cardinality; 0 for a constant model.
    pub fn order(&self) -> usize {
        self.terms.iter().map(|t| t.vars.len()).max().unwrap_or(0)
    }

    /// Term-wise sum of two models over the same feature set.
    pub fn sum(&self, other: &PolynomialModel) -> Result<PolynomialModel> {
        if self.p != other.p {
            return Err(ShapError::DimensionMismatch { expected: self.p, got: other.p });
        }
        let mut merged: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for t in self.terms.iter().chain(&other.terms) {
            *merged.entry(t.vars.clone()).or_insert(0.0) += t.coef;
        }
        Ok(Self::from_merged(self.p, merged))
    }

    /// Features that appear in at least one term.
    pub fn used_features(&self) -> SubsetMask {
        self.terms
            .iter()
            .fold(SubsetMask::EMPTY, |acc, t| acc.union(SubsetMask::from_indices(t.vars.iter().copied())))
    }
}

fn normalize_vars(vars: &[usize], p: usize) -> Result<Vec<usize>> {
    let mut v = vars.to_vec();
    v.sort_unstable();
    for w in v.windows(2) {
        if w[0] == w[1] {
            return Err(ShapError::RepeatedFeature { index: w[0] });
        }
    }
    if let Some(&index) = v.iter().find(|&&j| j >= p) {
        return Err(ShapError::FeatureOutOfRange { index, p });
    }
    Ok(v)
}

impl Model for PolynomialModel {
    fn n_features(&self) -> usize {
        self.p
    }

    #[inline]
    fn eval_point(&self, x: &[f64]) -> Result<f64> {
        Ok(self.terms.iter().map(|t| t.eval(x)).sum())
    }

    fn order_hint(&self) -> Option<usize> {
        Some(self.order())
    }

    fn eval_weight(&self) -> u64 {
        self.terms.len().max(1) as u64
    }
}

pub type ComponentEvaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Evaluator for one component `f_v(x_v)`; the argument is the sub-vector
/// `x_v` in increasing feature order.
#[derive(Clone)]
pub enum ComponentFn {
    /// `coef * prod(x_v)`; a constant when `v` is empty.
    Monomial(f64),
    Custom(ComponentEvaluator),
}

impl ComponentFn {
    pub fn custom<F>(f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        ComponentFn::Custom(Arc::new(f))
    }

    #[inline]
    pub fn call(&self, xv: &[f64]) -> f64 {
        match self {
            ComponentFn::Monomial(c) => xv.iter().fold(*c, |acc, v| acc * v),
            ComponentFn::Custom(f) => f(xv),
        }
    }
}

impl fmt::Debug for ComponentFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComponentFn::Monomial(c) => write!(f, "Monomial({c})"),
            ComponentFn::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Component {
    pub vars: SubsetMask,
    pub f: ComponentFn,
}

impl Component {
    /// `f_v` evaluated on the coordinates of `v` taken from a full-length point.
    #[inline]
    pub fn eval_full(&self, x: &[f64]) -> f64 {
        let xv: SmallVec<[f64; 8]> = self.vars.iter().map(|j| x[j]).collect();
        self.f.call(&xv)
    }
}

/// `f(x) = sum_v f_v(x_v)` with each component's variable set known.
#[derive(Debug, Clone)]
pub struct StructuredModel {
    p: usize,
    components: Vec<Component>,
}

impl StructuredModel {
    /// At most one component may have an empty variable set (the constant).
    pub fn new(p: usize, components: Vec<Component>) -> Result<Self> {
        if p > MAX_FEATURES {
            return Err(ShapError::TooManyFeatures { p, limit: MAX_FEATURES, method: "model" });
        }
        let full = SubsetMask::full(p);
        let mut constants = 0;
        for c in &components {
            if !c.vars.is_subset_of(full) {
                let index = SubsetMask::from_bits(c.vars.bits() & !full.bits()).iter().next().unwrap_or(p);
                return Err(ShapError::FeatureOutOfRange { index, p });
            }
            if c.vars.is_empty() {
                constants += 1;
            }
        }
        if constants > 1 {
            return Err(ShapError::InvalidParameter("more than one constant component".into()));
        }
        Ok(StructuredModel { p, components })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn order(&self) -> usize {
        self.components.iter().map(|c| c.vars.len()).max().unwrap_or(0)
    }
}

impl Model for StructuredModel {
    fn n_features(&self) -> usize {
        self.p
    }

    fn eval_point(&self, x: &[f64]) -> Result<f64> {
        Ok(self.components.iter().map(|c| c.eval_full(x)).sum())
    }

    fn order_hint(&self) -> Option<usize> {
        Some(self.order())
    }

    fn eval_weight(&self) -> u64 {
        self.components.len().max(1) as u64
    }
}

/// A single component `f_v` viewed as a model over all `p` features.
#[derive(Debug, Clone, Copy)]
pub struct ComponentModel<'a> {
    p: usize,
    component: &'a Component,
}

impl<'a> ComponentModel<'a> {
    pub fn new(p: usize, component: &'a Component) -> Self {
        ComponentModel { p, component }
    }
}

impl Model for ComponentModel<'_> {
    fn n_features(&self) -> usize {
        self.p
    }

    #[inline]
    fn eval_point(&self, x: &[f64]) -> Result<f64> {
        Ok(self.component.eval_full(x))
    }

    fn order_hint(&self) -> Option<usize> {
        Some(self.component.vars.len())
    }
}

pub type BlackBoxEvaluator = Arc<dyn Fn(&[f64]) -> std::result::Result<f64, String> + Send + Sync>;

/// An opaque evaluator with an optional declared interaction order.
///
/// The evaluator must be deterministic. Failures are reported as
/// [`ShapError::Evaluation`].
#[derive(Clone)]
pub struct BlackBoxModel {
    p: usize,
    evaluator: BlackBoxEvaluator,
    declared_order: Option<usize>,
}

impl BlackBoxModel {
    pub fn new<F>(p: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        BlackBoxModel { p, evaluator: Arc::new(move |x| Ok(f(x))), declared_order: None }
    }

    pub fn fallible<F>(p: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> std::result::Result<f64, String> + Send + Sync + 'static,
    {
        BlackBoxModel { p, evaluator: Arc::new(f), declared_order: None }
    }

    pub fn with_declared_order(mut self, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(ShapError::InvalidOrder { order, p: self.p, reason: "declared order must be at least 1" });
        }
        self.declared_order = Some(order);
        Ok(self)
    }

    pub fn declared_order(&self) -> Option<usize> {
        self.declared_order
    }
}

impl fmt::Debug for BlackBoxModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlackBoxModel")
            .field("p", &self.p)
            .field("declared_order", &self.declared_order)
            .finish_non_exhaustive()
    }
}

impl Model for BlackBoxModel {
    fn n_features(&self) -> usize {
        self.p
    }

    fn eval_point(&self, x: &[f64]) -> Result<f64> {
        (self.evaluator)(x).map_err(ShapError::Evaluation)
    }

    fn order_hint(&self) -> Option<usize> {
        self.declared_order
    }
}

/// `f1 + f2` evaluated pointwise.
#[derive(Debug, Clone, Copy)]
pub struct ModelSum<A, B>(pub A, pub B);

impl<A: Model, B: Model> Model for ModelSum<A, B> {
    fn n_features(&self) -> usize {
        self.0.n_features()
    }

    fn eval_point(&self, x: &[f64]) -> Result<f64> {
        Ok(self.0.eval_point(x)? + self.1.eval_point(x)?)
    }

    fn eval_weight(&self) -> u64 {
        self.0.eval_weight() + self.1.eval_weight()
    }
}

/// Groups terms by variable set, one component per distinct set.
pub fn decompose_polynomial(model: &PolynomialModel) -> StructuredModel {
    let components = model
        .terms()
        .iter()
        .map(|t| Component { vars: SubsetMask::from_indices(t.vars.iter().copied()), f: ComponentFn::Monomial(t.coef) })
        .collect();
    StructuredModel { p: model.p(), components }
}

/// Highest interaction order of a model with known structure.
pub fn model_order<M: Model + ?Sized>(model: &M) -> Option<usize> {
    model.order_hint()
}
