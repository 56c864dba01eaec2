//! Exact Shapley attributions that exploit model structure.
//!
//! Three exact routes are provided, from most to least structural knowledge:
//!
//! * [`decomposition`]: the model is a known sum of low-dimensional
//!   components; each component is enumerated over its own features only.
//! * [`orderk`]: only the highest interaction order `K` is known; the
//!   attribution needs coalitions of size at most `floor((K-1)/2)` and their
//!   complements, i.e. polynomially many cost evaluations.
//! * [`iterative`]: the order is unknown; the order-`K` attribution is
//!   recomputed for `K = 1, 2, 4, 6, ...` until consecutive results agree.
//!
//! The brute-force subset and permutation forms and a permutation-sampling
//! estimator live in [`oracle`]. All routines work through a [`CostContext`],
//! which binds a model, a cost variant (baseline or empirical kernel) and
//! the instance being explained.

pub mod attribution;
pub mod cost;
pub mod data;
pub mod decomposition;
pub mod error;
pub mod explain;
pub mod iterative;
pub mod model;
pub mod oracle;
pub mod orderk;
pub mod spec;
pub mod subset;

pub use attribution::{Attribution, MethodKind};
pub use cost::{check_assumption1, AssumptionReport, CostContext, CostVariant};
pub use data::Dataset;
pub use decomposition::{shap_from_decomposition, shap_orthogonal_fanova};
pub use error::{Result, ShapError};
pub use explain::{explain_batch, BatchResult, Method};
pub use iterative::{convergence_metric, shap_iterative, IterativeOptions, IterativeOutcome, MetricKind};
pub use model::{
    decompose_polynomial, evaluate, model_order, BlackBoxModel, Component, ComponentFn, FeatureVector, Model,
    PolynomialModel, StructuredModel,
};
pub use oracle::{sampling_std_order2, shap_exact_permutations, shap_exact_subsets, shap_sampling};
pub use orderk::{shap_order_k, solve_coefficients, verify_coefficients, OrderKCoefficients};
pub use spec::{parse_model_spec, serialize_model_spec};
pub use subset::SubsetMask;
