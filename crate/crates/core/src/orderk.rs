//! Exact Shapley values in polynomial time from the interaction order alone.
//!
//! For a model of order `K` with `q = floor((K-1)/2)`,
//!
//! ```text
//! phi_i = sum_{m=0..q} a_m (d_m + d_{p-m-1})
//! ```
//!
//! where `d_m` is the mean gradient of feature `i` over all coalitions of `m`
//! other features. Only the two tails of coalition sizes (`<= q` and
//! `>= p-q-1`) are evaluated. Orders 1 and 2 use closed forms anchored at
//! the empty coalition.

use crate::attribution::{Attribution, MethodKind};
use crate::cost::CostContext;
use crate::error::{Result, ShapError};
use crate::model::Model;
use crate::oracle::shap_exact_subsets;
use crate::subset::{binomial, SubsetMask};

/// Per-equation tolerance for the triangular system itself.
pub const SYSTEM_TOLERANCE: f64 = 1e-10;
/// Tolerance on the pairwise weight identity checked by [`verify_coefficients`].
pub const IDENTITY_TOLERANCE: f64 = 1e-9;

/// `q = floor((K-1)/2)`; orders `2t+1` and `2t+2` share the same `q`.
pub fn half_order(order: usize) -> usize {
    order.saturating_sub(1) / 2
}

/// Whether the tail formula applies: the low and high size tails must not overlap.
pub fn tails_disjoint(p: usize, order: usize) -> bool {
    2 * (half_order(order) + 1) <= p
}

/// Solved tail weights `a_0..a_q` for a given `(p, K)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderKCoefficients {
    p: usize,
    order: usize,
    a: Vec<f64>,
}

impl OrderKCoefficients {
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn q(&self) -> usize {
        half_order(self.order)
    }

    pub fn weights(&self) -> &[f64] {
        &self.a
    }

    /// Wraps caller-provided weights, e.g. to probe [`verify_coefficients`].
    pub fn from_weights(p: usize, order: usize, a: Vec<f64>) -> Result<Self> {
        if order == 0 || a.len() != half_order(order) + 1 {
            return Err(ShapError::InvalidOrder { order, p, reason: "weight count must equal floor((K-1)/2) + 1" });
        }
        if !tails_disjoint(p, order) {
            return Err(ShapError::InvalidOrder { order, p, reason: "requires 2(q+1) <= p" });
        }
        Ok(OrderKCoefficients { p, order, a })
    }
}

/// `C(p-2r-1, m-r) / C(p-1, m)`
fn tail_ratio(p: usize, r: usize, m: usize) -> f64 {
    binomial(p as i64 - 2 * r as i64 - 1, m as i64 - r as i64) / binomial(p as i64 - 1, m as i64)
}

/// `r! r! / (2r+1)!` as a product of `r` factors `t / (r + t)` over `2r+1`.
fn center_weight(r: usize) -> f64 {
    (1..=r).fold(1.0 / (2 * r + 1) as f64, |acc, t| acc * t as f64 / (r + t) as f64)
}

/// Solves the upper-triangular system
/// `2 sum_{m=r..q} a_m C(p-2r-1, m-r)/C(p-1, m) = r! r!/(2r+1)!`, `r = 0..q`,
/// by back-substitution from `r = q`.
pub fn solve_coefficients(p: usize, order: usize) -> Result<OrderKCoefficients> {
    if order == 0 {
        return Err(ShapError::InvalidOrder { order, p, reason: "order must be at least 1" });
    }
    if !tails_disjoint(p, order) {
        return Err(ShapError::InvalidOrder { order, p, reason: "requires 2(q+1) <= p" });
    }
    let q = half_order(order);
    let mut a = vec![0.0; q + 1];
    for r in (0..=q).rev() {
        let tail: f64 = (r + 1..=q).map(|m| a[m] * tail_ratio(p, r, m)).sum();
        // diagonal entry is 1 / C(p-1, r)
        a[r] = (center_weight(r) / 2.0 - tail) * binomial(p as i64 - 1, r as i64);
    }
    Ok(OrderKCoefficients { p, order, a })
}

/// Residuals of the solved weights against the system they came from and
/// against the pairwise identity
/// `sum_m a_m (C(p-k, m-j) + C(p-k, p-m-j-1)) / C(p-1, m) = j!(k-j-1)!/k!`
/// for every `0 <= j < k <= K`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientReport {
    pub max_system_residual: f64,
    pub max_identity_residual: f64,
    /// `(j, k)` attaining the largest identity residual.
    pub worst_pair: Option<(usize, usize)>,
    pub pairs_checked: usize,
}

impl CoefficientReport {
    pub fn passes(&self) -> bool {
        self.max_system_residual <= SYSTEM_TOLERANCE && self.max_identity_residual <= IDENTITY_TOLERANCE
    }
}

/// Left side of the pairwise identity for one `(j, k)`.
pub fn identity_lhs(c: &OrderKCoefficients, j: usize, k: usize) -> f64 {
    let p = c.p as i64;
    let (j, k) = (j as i64, k as i64);
    c.a.iter()
        .enumerate()
        .map(|(m, &am)| {
            let m = m as i64;
            am * (binomial(p - k, m - j) + binomial(p - k, p - m - j - 1)) / binomial(p - 1, m)
        })
        .sum()
}

/// `j!(k-j-1)!/k! = 1 / (k C(k-1, j))`
pub fn identity_rhs(j: usize, k: usize) -> f64 {
    1.0 / (k as f64 * binomial(k as i64 - 1, j as i64))
}

pub fn verify_coefficients(c: &OrderKCoefficients) -> CoefficientReport {
    let q = c.q();
    let mut max_system_residual: f64 = 0.0;
    for r in 0..=q {
        let lhs: f64 = 2.0 * (r..=q).map(|m| c.a[m] * tail_ratio(c.p, r, m)).sum::<f64>();
        max_system_residual = max_system_residual.max((lhs - center_weight(r)).abs());
    }
    let mut max_identity_residual: f64 = 0.0;
    let mut worst_pair = None;
    let mut pairs_checked = 0;
    for k in 1..=c.order {
        for j in 0..k {
            let residual = (identity_lhs(c, j, k) - identity_rhs(j, k)).abs();
            if worst_pair.is_none() || residual > max_identity_residual {
                max_identity_residual = residual;
                worst_pair = Some((j, k));
            }
            pairs_checked += 1;
        }
    }
    CoefficientReport { max_system_residual, max_identity_residual, worst_pair, pairs_checked }
}

/// Per-feature mean gradients over coalitions of size `m` and over their
/// complements (size `p-m-1`), for `m = 0..=q`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientAverages {
    /// `low[i][m] = d_m` for feature `i`
    pub low: Vec<Vec<f64>>,
    /// `high[i][m] = d_{p-m-1}` for feature `i`
    pub high: Vec<Vec<f64>>,
}

/// Computes `d_m` and `d_{p-m-1}` in one pass over the size-`m` coalitions:
/// the gradient at `w = M \ (u+i)` is `c(M \ u) - c(M \ (u+i))`, and the map
/// `u -> w` is a bijection between the two sizes.
pub fn gradient_averages<M: Model + ?Sized>(ctx: &mut CostContext<'_, M>, q: usize) -> Result<GradientAverages> {
    let p = ctx.p();
    let full = SubsetMask::full(p);
    let mut low = vec![vec![0.0; q + 1]; p];
    let mut high = vec![vec![0.0; q + 1]; p];
    for i in 0..p {
        let others = full.without(i);
        for m in 0..=q {
            let count = binomial(p as i64 - 1, m as i64);
            let (mut lo, mut hi) = (0.0, 0.0);
            for u in others.k_subsets(m) {
                let with_i = u.with(i);
                lo += ctx.cost(with_i)? - ctx.cost(u)?;
                hi += ctx.cost(u.complement(p))? - ctx.cost(with_i.complement(p))?;
            }
            low[i][m] = lo / count;
            high[i][m] = hi / count;
        }
    }
    Ok(GradientAverages { low, high })
}

/// Exact Shapley values for models whose interaction order is at most `order`.
///
/// * `K = 1`: `phi_i = c({i}) - c(∅)`
/// * `K = 2`: `phi_i = (c({i}) - c(∅) + c(M) - c(M \ i)) / 2`
/// * `K >= 3`: tail formula when `2(q+1) <= p`, else full enumeration (then
///   `p <= K`, so it is cheap).
///
/// Exactness holds only if the model's true order does not exceed `order`.
pub fn shap_order_k<M: Model + ?Sized>(ctx: &mut CostContext<'_, M>, order: usize) -> Result<Attribution> {
    let p = ctx.p();
    if order == 0 {
        return Err(ShapError::InvalidOrder { order, p, reason: "order must be at least 1" });
    }
    let phi = match order {
        1 => {
            let empty = ctx.cost(SubsetMask::EMPTY)?;
            (0..p).map(|i| Ok(ctx.cost(SubsetMask::singleton(i))? - empty)).collect::<Result<Vec<_>>>()?
        }
        2 => {
            let full = SubsetMask::full(p);
            let empty = ctx.cost(SubsetMask::EMPTY)?;
            let all = ctx.cost(full)?;
            (0..p)
                .map(|i| Ok(0.5 * (ctx.cost(SubsetMask::singleton(i))? - empty + all - ctx.cost(full.without(i))?)))
                .collect::<Result<Vec<_>>>()?
        }
        _ if !tails_disjoint(p, order) => shap_exact_subsets(ctx)?.phi,
        _ => {
            let coefficients = solve_coefficients(p, order)?;
            let averages = gradient_averages(ctx, coefficients.q())?;
            (0..p)
                .map(|i| {
                    coefficients
                        .weights()
                        .iter()
                        .enumerate()
                        .map(|(m, a)| a * (averages.low[i][m] + averages.high[i][m]))
                        .sum()
                })
                .collect()
        }
    };
    let mut attribution = Attribution::new(phi, MethodKind::OrderK, ctx.eval_count());
    attribution.order_used = Some(order);
    Ok(attribution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::CostVariant;
    use crate::model::{FeatureVector, PolynomialModel};

    #[test]
    fn p10_order4_weights() {
        for order in [3, 4] {
            let c = solve_coefficients(10, order).unwrap();
            assert!((c.weights()[0] + 0.25).abs() < 1e-12);
            assert!((c.weights()[1] - 0.75).abs() < 1e-12);
            assert!(verify_coefficients(&c).passes());
        }
    }

    #[test]
    fn q0_weight_is_one_half() {
        let c = solve_coefficients(10, 2).unwrap();
        assert_eq!(c.weights(), &[0.5]);
        assert_eq!(solve_coefficients(3, 1).unwrap().weights(), &[0.5]);
    }

    #[test]
    fn identity_pairs_by_hand() {
        let c = OrderKCoefficients::from_weights(10, 4, vec![-0.25, 0.75]).unwrap();
        assert!((identity_lhs(&c, 0, 3) - 1.0 / 3.0).abs() < 1e-15);
        assert!((identity_lhs(&c, 1, 3) - 1.0 / 6.0).abs() < 1e-15);
        assert!((identity_rhs(1, 3) - 1.0 / 6.0).abs() < 1e-15);
        assert!((identity_lhs(&c, 0, 1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn perturbed_weights_fail() {
        let c = OrderKCoefficients::from_weights(10, 4, vec![-0.25 + 1e-3, 0.75]).unwrap();
        let report = verify_coefficients(&c);
        assert!(!report.passes());
        assert!(report.max_identity_residual >= 1e-3 - 1e-12);
    }

    #[test]
    fn invalid_orders() {
        assert!(solve_coefficients(10, 0).is_err());
        // K = 5 needs p >= 6
        assert!(solve_coefficients(5, 5).is_err());
        assert!(solve_coefficients(6, 5).is_ok());
        assert!(OrderKCoefficients::from_weights(10, 4, vec![0.5]).is_err());
    }

    #[test]
    fn center_weights() {
        assert_eq!(center_weight(0), 1.0);
        assert!((center_weight(1) - 1.0 / 6.0).abs() < 1e-16);
        assert!((center_weight(2) - 4.0 / 120.0).abs() < 1e-16);
        assert!((center_weight(3) - 36.0 / 5040.0).abs() < 1e-16);
    }

    #[test]
    fn order2_closed_form() {
        let mut terms: Vec<(f64, Vec<usize>)> = (0..10).map(|j| (1.0, vec![j])).collect();
        terms.push((1.0, vec![0, 1]));
        let m = PolynomialModel::new(10, terms).unwrap();
        let v = CostVariant::Baseline(FeatureVector::zeros(10));
        let x = [1.0; 10];
        let mut ctx = CostContext::new(&m, &v, &x).unwrap();
        let a = shap_order_k(&mut ctx, 2).unwrap();
        assert_eq!(a.phi[0], 1.5);
        assert_eq!(a.phi[8], 1.0);
        assert_eq!(a.order_used, Some(2));
        assert_eq!(ctx.distinct_subsets(), 22);
    }

    #[test]
    fn additive_order1() {
        let m = PolynomialModel::new(4, (0..4).map(|j| (1.0, vec![j]))).unwrap();
        let z = [0.5, 0.5, -1.0, 2.0];
        let x = [1.0, 2.0, 3.0, 4.0];
        let v = CostVariant::Baseline(FeatureVector::new(z.to_vec()).unwrap());
        let a = shap_order_k(&mut CostContext::new(&m, &v, &x).unwrap(), 1).unwrap();
        for j in 0..4 {
            assert_eq!(a.phi[j], x[j] - z[j]);
        }
        assert!(shap_order_k(&mut CostContext::new(&m, &v, &x).unwrap(), 0).is_err());
    }
}
