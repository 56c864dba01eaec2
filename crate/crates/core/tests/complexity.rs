mod common;

use ordershap_core::iterative::order_sequence;
use ordershap_core::orderk::half_order;
use ordershap_core::subset::binomial;
use ordershap_core::{
    decompose_polynomial, shap_from_decomposition, shap_iterative, shap_order_k, shap_sampling, CostContext,
    CostVariant, Dataset, FeatureVector, IterativeOptions, PolynomialModel,
};

fn sixway(p: usize) -> PolynomialModel {
    let mut terms: Vec<(f64, Vec<usize>)> = (0..p).map(|j| (1.0, vec![j])).collect();
    terms.push((1.0, vec![0, 1]));
    terms.push((1.0, vec![0, 1, 2, 3]));
    terms.push((0.5, vec![0, 1, 2, 3, 4, 5]));
    PolynomialModel::new(p, terms).unwrap()
}

/// Subsets of size at most `q + 1` plus their complements.
fn tail_count(p: usize, q: usize) -> usize {
    let sizes: std::collections::BTreeSet<usize> = (0..=q + 1).flat_map(|s| [s, p - s]).collect();
    sizes.into_iter().map(|s| binomial(p as i64, s as i64) as usize).sum()
}

#[test]
fn order_k_touches_only_the_tails() {
    let x: Vec<f64> = (0..40).map(|j| 0.1 * j as f64 - 1.0).collect();
    for p in [8, 10, 14, 20, 40] {
        let model = sixway(p);
        let variant = CostVariant::Baseline(FeatureVector::zeros(p));
        for order in 1..=8 {
            if 2 * (half_order(order) + 1) > p {
                continue;
            }
            let mut ctx = CostContext::new(&model, &variant, &x[..p]).unwrap();
            let a = shap_order_k(&mut ctx, order).unwrap();
            let want = match order {
                1 => p + 1,
                2 => 2 * p + 2,
                _ => tail_count(p, half_order(order)),
            };
            assert_eq!(ctx.distinct_subsets(), want, "p={p} K={order}");
            assert_eq!(a.eval_count, want as u64);
        }
    }
}

#[test]
fn order_k_counts_for_ten_features() {
    // K = 3, 4: sizes 0, 1, 2 and complements; K = 5, 6: adds size 3
    assert_eq!(tail_count(10, 1), 2 * (1 + 10 + 45));
    assert_eq!(tail_count(10, 2), 2 * (1 + 10 + 45 + 120));
}

#[test]
fn kernel_counts_each_background_row() {
    let p = 10;
    let model = sixway(p);
    let background = Dataset::from_row_major(p, (0..5 * p).map(|v| v as f64 * 0.01).collect()).unwrap();
    let variant = CostVariant::KernelEmpirical(background);
    let x = vec![0.5; p];
    let mut ctx = CostContext::new(&model, &variant, &x).unwrap();
    shap_order_k(&mut ctx, 4).unwrap();
    assert_eq!(ctx.eval_count(), 5 * tail_count(p, 1) as u64);
}

#[test]
fn sampling_bound() {
    let p = 12;
    let model = sixway(p);
    let variant = CostVariant::Baseline(FeatureVector::zeros(p));
    let x = vec![1.0; p];
    for m in [1, 5, 25, 100] {
        let mut ctx = CostContext::new(&model, &variant, &x).unwrap();
        let a = shap_sampling(&mut ctx, m, 3).unwrap();
        assert!(a.eval_count <= (m * (p + 1)) as u64, "m={m}: {}", a.eval_count);
    }
}

#[test]
fn decomposition_bound() {
    for p in [10, 20, 40] {
        let model = sixway(p);
        let structure = decompose_polynomial(&model);
        let bound: u64 = structure.components().iter().map(|c| 1u64 << c.vars.len()).sum();
        let variant = CostVariant::Baseline(FeatureVector::zeros(p));
        let x = vec![1.0; p];
        let a = shap_from_decomposition(&mut CostContext::new(&structure, &variant, &x).unwrap()).unwrap();
        assert!(a.eval_count <= bound);
        assert_eq!(a.eval_count, 2 * p as u64 + 4 + 16 + 64);
    }
}

#[test]
fn iterative_reuses_lower_orders() {
    let p = 10;
    let model = sixway(p);
    let variant = CostVariant::Baseline(FeatureVector::zeros(p));
    let instances = Dataset::from_rows(p, &[vec![1.0; p], vec![-0.5; p]]).unwrap();
    let options = IterativeOptions { max_order: 10, threshold: 1e-12, parallel: false, ..Default::default() };
    let out = shap_iterative(&model, &variant, &instances, &options).unwrap();
    assert_eq!(out.order_used, 8);
    assert_eq!(order_sequence(8), vec![1, 2, 4, 6, 8]);
    for s in &out.stats {
        // order 8 needs the widest tails; every lower order is a subset
        assert_eq!(s.distinct_subsets, tail_count(p, 3));
        assert_eq!(s.eval_count, s.distinct_subsets as u64);
    }
}
