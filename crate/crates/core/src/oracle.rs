//! Brute-force Shapley values (subset and permutation forms) and the
//! permutation-sampling estimator.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::attribution::{Attribution, MethodKind};
use crate::cost::CostContext;
use crate::error::{Result, ShapError};
use crate::model::Model;
use crate::subset::{shapley_weight, SubsetMask};

/// Default feature limit for subset enumeration (`2^p` coalitions).
pub const EXACT_SUBSETS_LIMIT: usize = 20;
/// Feature limit for permutation enumeration (`p!` orderings).
pub const EXACT_PERMUTATIONS_LIMIT: usize = 9;

/// Shapley values by the weighted sum over every coalition not containing `i`.
pub fn shap_exact_subsets<M: Model + ?Sized>(ctx: &mut CostContext<'_, M>) -> Result<Attribution> {
    shap_exact_subsets_with_limit(ctx, EXACT_SUBSETS_LIMIT)
}

pub fn shap_exact_subsets_with_limit<M: Model + ?Sized>(ctx: &mut CostContext<'_, M>, limit: usize) -> Result<Attribution> {
    let p = ctx.p();
    if p > limit {
        return Err(ShapError::TooManyFeatures { p, limit, method: "exact subset enumeration" });
    }
    let full = SubsetMask::full(p);
    let mut table = vec![0.0; 1usize << p];
    for k in 0..=p {
        for u in full.k_subsets(k) {
            table[u.bits() as usize] = ctx.cost(u)?;
        }
    }
    let phi = shapley_from_table(p, &table);
    Ok(Attribution::new(phi, MethodKind::ExactSubsets, ctx.eval_count()))
}

/// Shapley-weighted sum over a dense table of coalition values
/// indexed by bitmask over `p` local features.
pub(crate) fn shapley_from_table(p: usize, table: &[f64]) -> Vec<f64> {
    debug_assert_eq!(table.len(), 1usize << p);
    let weights: Vec<f64> = (0..p).map(|s| shapley_weight(p, s)).collect();
    let mut phi = vec![0.0; p];
    for (i, slot) in phi.iter_mut().enumerate() {
        let bit = 1usize << i;
        let mut acc = 0.0;
        for u in 0..table.len() {
            if u & bit == 0 {
                acc += weights[u.count_ones() as usize] * (table[u | bit] - table[u]);
            }
        }
        *slot = acc;
    }
    phi
}

/// Shapley values by averaging marginal contributions over all `p!`
/// orderings. Only meant as a cross-check of the subset form.
pub fn shap_exact_permutations<M: Model + ?Sized>(ctx: &mut CostContext<'_, M>) -> Result<Attribution> {
    let p = ctx.p();
    if p > EXACT_PERMUTATIONS_LIMIT {
        return Err(ShapError::TooManyFeatures { p, limit: EXACT_PERMUTATIONS_LIMIT, method: "exact permutation enumeration" });
    }
    let mut sums = vec![0.0; p];
    let mut perm: Vec<usize> = (0..p).collect();
    let mut count = 0u64;

    // Heap's algorithm, iterative form
    let mut c = vec![0usize; p];
    sweep_permutation(ctx, &perm, &mut sums)?;
    count += 1;
    let mut i = 1;
    while i < p {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            sweep_permutation(ctx, &perm, &mut sums)?;
            count += 1;
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    let phi = sums.into_iter().map(|s| s / count as f64).collect();
    Ok(Attribution::new(phi, MethodKind::ExactPermutations, ctx.eval_count()))
}

/// Adds `c(Pre^i(S) + i) - c(Pre^i(S))` for every feature of one ordering.
fn sweep_permutation<M: Model + ?Sized>(ctx: &mut CostContext<'_, M>, perm: &[usize], sums: &mut [f64]) -> Result<()> {
    let mut prefix = SubsetMask::EMPTY;
    let mut prev = ctx.cost(prefix)?;
    for &j in perm {
        prefix = prefix.with(j);
        let cur = ctx.cost(prefix)?;
        sums[j] += cur - prev;
        prev = cur;
    }
    Ok(())
}

/// Monte Carlo estimate from `m` uniformly drawn orderings (with
/// replacement). Each ordering contributes one gradient per feature from a
/// single prefix sweep, so at most `m * (p + 1)` coalitions are evaluated.
pub fn shap_sampling<M: Model + ?Sized>(ctx: &mut CostContext<'_, M>, m: usize, seed: u64) -> Result<Attribution> {
    if m == 0 {
        return Err(ShapError::InvalidParameter("sample count must be at least 1".into()));
    }
    let p = ctx.p();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..p).collect();
    let mut sums = vec![0.0; p];
    for _ in 0..m {
        perm.shuffle(&mut rng);
        sweep_permutation(ctx, &perm, &mut sums)?;
    }
    let phi = sums.into_iter().map(|s| s / m as f64).collect();
    Ok(Attribution::new(phi, MethodKind::Sampling, ctx.eval_count()))
}

/// Closed-form standard error of the sampled attribution of feature 0 for
/// `f = sum_j x_j + x_0 x_1` under a baseline cost:
/// `|(x_0 - z_0)(x_1 - z_1)| / sqrt(4m)`.
pub fn sampling_std_order2(x: &[f64], z: &[f64], m: usize) -> Result<f64> {
    if x.len() < 2 || z.len() != x.len() {
        return Err(ShapError::DimensionMismatch { expected: x.len().max(2), got: z.len() });
    }
    if m == 0 {
        return Err(ShapError::InvalidParameter("sample count must be at least 1".into()));
    }
    Ok(((x[0] - z[0]) * (x[1] - z[1])).abs() / (4.0 * m as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::CostVariant;
    use crate::model::{FeatureVector, PolynomialModel};

    fn xy() -> PolynomialModel {
        PolynomialModel::new(2, [(1.0, vec![0]), (1.0, vec![1]), (1.0, vec![0, 1])]).unwrap()
    }

    fn baseline(z: &[f64]) -> CostVariant {
        CostVariant::Baseline(FeatureVector::new(z.to_vec()).unwrap())
    }

    #[test]
    fn xy_model_hand_expansion() {
        // phi_0 = 1/2 [f(1,0) - f(0,0)] + 1/2 [f(1,1) - f(0,1)] = 1/2 * 1 + 1/2 * 2
        let m = xy();
        let v = baseline(&[0.0, 0.0]);
        let x = [1.0, 1.0];
        let a = shap_exact_subsets(&mut CostContext::new(&m, &v, &x).unwrap()).unwrap();
        assert_eq!(a.phi, vec![1.5, 1.5]);
        assert_eq!(a.eval_count, 4);
        let b = shap_exact_permutations(&mut CostContext::new(&m, &v, &x).unwrap()).unwrap();
        assert_eq!(b.phi, vec![1.5, 1.5]);
    }

    #[test]
    fn additive_model_gives_differences() {
        let m = PolynomialModel::new(4, (0..4).map(|j| (1.0, vec![j]))).unwrap();
        let z = [0.5, -1.0, 2.0, 0.0];
        let x = [1.0, 2.0, 3.0, -4.0];
        let v = baseline(&z);
        let a = shap_exact_subsets(&mut CostContext::new(&m, &v, &x).unwrap()).unwrap();
        for j in 0..4 {
            assert!((a.phi[j] - (x[j] - z[j])).abs() < 1e-14);
        }
    }

    #[test]
    fn x_equal_z_gives_zeros() {
        let m = PolynomialModel::new(3, [(2.0, vec![0, 1, 2]), (1.0, vec![1])]).unwrap();
        let x = [0.3, 0.7, -1.1];
        let v = baseline(&x);
        let a = shap_exact_subsets(&mut CostContext::new(&m, &v, &x).unwrap()).unwrap();
        assert_eq!(a.phi, vec![0.0; 3]);
    }

    #[test]
    fn single_feature_permutation() {
        let m = PolynomialModel::new(1, [(3.0, vec![0]), (1.0, vec![])]).unwrap();
        let v = baseline(&[1.0]);
        let mut ctx = CostContext::new(&m, &v, &[2.0]).unwrap();
        let a = shap_exact_permutations(&mut ctx).unwrap();
        let expected = ctx.cost(SubsetMask::full(1)).unwrap() - ctx.cost(SubsetMask::EMPTY).unwrap();
        assert_eq!(a.phi, vec![expected]);
    }

    #[test]
    fn limits() {
        let m = PolynomialModel::zero(10);
        let v = baseline(&[0.0; 10]);
        let x = [0.0; 10];
        let mut ctx = CostContext::new(&m, &v, &x).unwrap();
        assert!(matches!(shap_exact_permutations(&mut ctx), Err(ShapError::TooManyFeatures { .. })));
        assert!(matches!(shap_exact_subsets_with_limit(&mut ctx, 8), Err(ShapError::TooManyFeatures { .. })));
        assert!(shap_sampling(&mut ctx, 0, 1).is_err());
    }

    #[test]
    fn sampling_is_exact_for_additive_models() {
        let m = PolynomialModel::new(5, (0..5).map(|j| (j as f64 + 1.0, vec![j]))).unwrap();
        let x = [1.0, -2.0, 0.5, 3.0, 1.5];
        let v = baseline(&[0.0; 5]);
        for seed in 0..5 {
            let a = shap_sampling(&mut CostContext::new(&m, &v, &x).unwrap(), 3, seed).unwrap();
            for j in 0..5 {
                assert!((a.phi[j] - (j as f64 + 1.0) * x[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_and_bounded() {
        let m = PolynomialModel::new(6, [(1.0, vec![0, 1]), (1.0, vec![2, 3, 4]), (0.5, vec![5])]).unwrap();
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let v = baseline(&[0.0; 6]);
        let mut c1 = CostContext::new(&m, &v, &x).unwrap();
        let a = shap_sampling(&mut c1, 7, 42).unwrap();
        let b = shap_sampling(&mut CostContext::new(&m, &v, &x).unwrap(), 7, 42).unwrap();
        assert_eq!(a, b);
        assert!(c1.distinct_subsets() <= 7 * 7);
        let c = shap_sampling(&mut CostContext::new(&m, &v, &x).unwrap(), 7, 43).unwrap();
        assert_ne!(a.phi, c.phi);
    }

    #[test]
    fn closed_form_std() {
        let x = [1.0; 10];
        let z = [0.0; 10];
        assert!((sampling_std_order2(&x, &z, 25).unwrap() - 0.1).abs() < 1e-15);
        let mut x2 = x;
        x2[1] = 0.0;
        assert_eq!(sampling_std_order2(&x2, &z, 25).unwrap(), 0.0);
        let s = sampling_std_order2(&[2.0, 3.0], &[0.5, -1.0], 9).unwrap();
        let s4 = sampling_std_order2(&[2.0, 3.0], &[0.5, -1.0], 36).unwrap();
        assert!((s4 - s / 2.0).abs() < 1e-15);
    }
}
