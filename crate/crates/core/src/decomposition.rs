//! Shapley values from a known functional decomposition.
//!
//! With an additive, dummy-respecting cost, the attribution of `f = sum_v f_v`
//! is the sum of the attributions of its components, and each component only
//! needs the `2^|v|` coalitions inside `v`.

use crate::attribution::{Attribution, MethodKind};
use crate::cost::CostContext;
use crate::error::{Result, ShapError};
use crate::model::{ComponentModel, FeatureVector, StructuredModel};
use crate::oracle::shapley_from_table;
use crate::subset::SubsetMask;

/// Default largest component size enumerated exhaustively.
pub const COMPONENT_LIMIT: usize = 15;

pub fn shap_from_decomposition(ctx: &mut CostContext<'_, StructuredModel>) -> Result<Attribution> {
    shap_from_decomposition_with_limit(ctx, COMPONENT_LIMIT)
}

/// Sums per-component Shapley values computed with the component's own
/// feature count in the weights. Components are processed in their stored
/// order, so the result is reproducible bit for bit.
pub fn shap_from_decomposition_with_limit(ctx: &mut CostContext<'_, StructuredModel>, limit: usize) -> Result<Attribution> {
    let model = ctx.model();
    let p = model.p();
    if let Some(c) = model.components().iter().find(|c| c.vars.len() > limit) {
        return Err(ShapError::ComponentTooLarge { size: c.vars.len(), limit });
    }
    let mut phi = vec![0.0; p];
    let mut evals = 0;
    let mut work = 0;
    for component in model.components() {
        let k = component.vars.len();
        if k == 0 {
            continue;
        }
        let view = ComponentModel::new(p, component);
        let mut local = CostContext::new(&view, ctx.variant(), ctx.x())?;
        let mut table = vec![0.0; 1usize << k];
        for size in 0..=k {
            for u in SubsetMask::full(k).k_subsets(size) {
                table[u.bits() as usize] = local.cost(component.vars.deposit(u.bits()))?;
            }
        }
        let local_phi = shapley_from_table(k, &table);
        for (feature, value) in component.vars.iter().zip(local_phi) {
            phi[feature] += value;
        }
        evals += local.eval_count();
        work += local.work();
    }
    ctx.add_counts(evals, work);
    Ok(Attribution::new(phi, MethodKind::Decomposition, ctx.eval_count()))
}

/// Kernel SHAP under independent features for a decomposition that satisfies
/// hierarchical orthogonality: every component's value is split evenly among
/// its features. The orthogonality is the caller's assertion and is not
/// checked. Costs nothing beyond one evaluation per non-constant component.
pub fn shap_orthogonal_fanova(model: &StructuredModel, x: &FeatureVector) -> Result<Attribution> {
    let p = model.p();
    if x.len() != p {
        return Err(ShapError::DimensionMismatch { expected: p, got: x.len() });
    }
    let mut phi = vec![0.0; p];
    let mut evals = 0;
    for component in model.components() {
        let k = component.vars.len();
        if k == 0 {
            continue;
        }
        let value = component.eval_full(x);
        if !value.is_finite() {
            return Err(ShapError::NonFiniteOutput { value });
        }
        evals += 1;
        let share = value / k as f64;
        for feature in component.vars.iter() {
            phi[feature] += share;
        }
    }
    Ok(Attribution::new(phi, MethodKind::OrthogonalFanova, evals))
}

/// Sum of the global Shapley weights `|u|!(p-|u|-1)!/p!` over every
/// `u ⊆ M \ i` with `u ∩ v = local`, for a component `v` of size `k` containing `i`.
/// Exposed for testing the collapse to the component-local weight.
pub fn collapsed_weight(p: usize, k: usize, local_size: usize) -> f64 {
    use crate::subset::{binomial, shapley_weight};
    (local_size..p)
        .map(|s| shapley_weight(p, s) * binomial((p - k) as i64, (s - local_size) as i64))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::CostVariant;
    use crate::model::{decompose_polynomial, Component, ComponentFn, PolynomialModel};
    use crate::oracle::shap_exact_subsets;
    use crate::subset::shapley_weight;

    #[test]
    fn additive_model_gives_component_differences() {
        let comps = vec![
            Component { vars: SubsetMask::singleton(0), f: ComponentFn::custom(|v| v[0].sin()) },
            Component { vars: SubsetMask::singleton(1), f: ComponentFn::custom(|v| v[0] * v[0]) },
            Component { vars: SubsetMask::singleton(2), f: ComponentFn::custom(|v| 3.0 * v[0]) },
        ];
        let s = StructuredModel::new(3, comps).unwrap();
        let z = [0.1, 0.2, 0.3];
        let x = [1.0, -2.0, 0.5];
        let v = CostVariant::Baseline(FeatureVector::new(z.to_vec()).unwrap());
        let a = shap_from_decomposition(&mut CostContext::new(&s, &v, &x).unwrap()).unwrap();
        assert!((a.phi[0] - (1.0f64.sin() - 0.1f64.sin())).abs() < 1e-15);
        assert!((a.phi[1] - (4.0 - 0.04)).abs() < 1e-15);
        assert!((a.phi[2] - 3.0 * 0.2).abs() < 1e-15);
        assert_eq!(a.eval_count, 6);
    }

    #[test]
    fn pair_component_matches_two_path_average() {
        let f12 = |v: &[f64]| (v[0] + 1.0) * v[1].exp();
        let comps = vec![
            Component { vars: SubsetMask::singleton(0), f: ComponentFn::Monomial(1.0) },
            Component { vars: SubsetMask::singleton(1), f: ComponentFn::Monomial(1.0) },
            Component { vars: SubsetMask::from_indices([0, 1]), f: ComponentFn::custom(f12) },
        ];
        let s = StructuredModel::new(3, comps).unwrap();
        let (x1, x2, z1, z2) = (0.7, -0.4, 0.2, 1.3);
        let v = CostVariant::Baseline(FeatureVector::new(vec![z1, z2, 0.0]).unwrap());
        let x = [x1, x2, 5.0];
        let a = shap_from_decomposition(&mut CostContext::new(&s, &v, &x).unwrap()).unwrap();
        let expected = (x1 - z1) + 0.5 * (f12(&[x1, z2]) - f12(&[z1, z2])) + 0.5 * (f12(&[x1, x2]) - f12(&[z1, x2]));
        assert!((a.phi[0] - expected).abs() < 1e-14);
        assert_eq!(a.phi[2], 0.0);
    }

    #[test]
    fn matches_oracle_on_fixed_polynomial() {
        let m = PolynomialModel::new(
            8,
            [(1.0, vec![0]), (-0.5, vec![3]), (2.0, vec![1, 2]), (0.7, vec![0, 4, 5]), (-1.2, vec![2, 3, 6, 7]), (0.3, vec![])],
        )
        .unwrap();
        let s = decompose_polynomial(&m);
        let x = [0.5, -1.0, 1.5, 2.0, -0.3, 0.8, 1.1, -2.2];
        let v = CostVariant::Baseline(FeatureVector::new(vec![0.1, 0.2, -0.1, 0.0, 0.4, -0.6, 0.9, 1.0]).unwrap());
        let a = shap_from_decomposition(&mut CostContext::new(&s, &v, &x).unwrap()).unwrap();
        let b = shap_exact_subsets(&mut CostContext::new(&m, &v, &x).unwrap()).unwrap();
        for j in 0..8 {
            assert!((a.phi[j] - b.phi[j]).abs() < 1e-10);
        }
        // 2 + 2 + 4 + 8 + 16 component evaluations
        assert_eq!(a.eval_count, 32);
    }

    #[test]
    fn component_limit() {
        let m = PolynomialModel::new(5, [(1.0, vec![0, 1, 2, 3])]).unwrap();
        let s = decompose_polynomial(&m);
        let v = CostVariant::Baseline(FeatureVector::zeros(5));
        let x = [1.0; 5];
        let mut ctx = CostContext::new(&s, &v, &x).unwrap();
        assert_eq!(shap_from_decomposition_with_limit(&mut ctx, 3), Err(ShapError::ComponentTooLarge { size: 4, limit: 3 }));
    }

    #[test]
    fn orthogonal_fast_path_splits_evenly() {
        let m = PolynomialModel::new(4, [(1.0, vec![0]), (1.0, vec![1]), (1.0, vec![0, 1]), (3.0, vec![1, 2, 3]), (5.0, vec![])]).unwrap();
        let s = decompose_polynomial(&m);
        let x = FeatureVector::new(vec![2.0, 3.0, -1.0, 0.5]).unwrap();
        let a = shap_orthogonal_fanova(&s, &x).unwrap();
        assert_eq!(a.phi[0], 2.0 + 3.0);
        assert_eq!(a.phi[1], 3.0 + 3.0 + 3.0 * 3.0 * -1.0 * 0.5 / 3.0);
        assert_eq!(a.phi[2], a.phi[3]);
        assert_eq!(a.eval_count, 4);
    }

    #[test]
    fn global_weights_collapse_to_local_weights() {
        for p in 1..=12 {
            for k in 1..=p {
                for j in 0..k {
                    let collapsed = collapsed_weight(p, k, j);
                    let local = shapley_weight(k, j);
                    assert!((collapsed - local).abs() < 1e-14 * local.max(1.0), "p={p} k={k} j={j}");
                }
            }
        }
    }
}
