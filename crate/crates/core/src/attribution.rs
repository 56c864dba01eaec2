use serde::{Deserialize, Serialize};

/// Which routine produced an [`Attribution`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodKind {
    ExactSubsets,
    ExactPermutations,
    Sampling,
    Decomposition,
    OrthogonalFanova,
    OrderK,
    Iterative,
}

impl MethodKind {
    pub fn is_exact(self) -> bool {
        !matches!(self, MethodKind::Sampling | MethodKind::Iterative | MethodKind::OrthogonalFanova)
    }

    pub fn name(self) -> &'static str {
        match self {
            MethodKind::ExactSubsets => "exact-subsets",
            MethodKind::ExactPermutations => "exact-permutations",
            MethodKind::Sampling => "sampling",
            MethodKind::Decomposition => "f-dcmp",
            MethodKind::OrthogonalFanova => "orthogonal-fanova",
            MethodKind::OrderK => "order-k",
            MethodKind::Iterative => "iterative",
        }
    }
}

/// Per-feature attributions for one instance, with method metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Attribution {
    pub phi: Vec<f64>,
    pub method: MethodKind,
    pub order_used: Option<usize>,
    pub converged: Option<bool>,
    /// Model evaluations made by the cost context (cumulative for that context).
    pub eval_count: u64,
}

impl Attribution {
    pub(crate) fn new(phi: Vec<f64>, method: MethodKind, eval_count: u64) -> Self {
        Attribution { phi, method, order_used: None, converged: None, eval_count }
    }

    pub fn total(&self) -> f64 {
        self.phi.iter().sum()
    }
}
