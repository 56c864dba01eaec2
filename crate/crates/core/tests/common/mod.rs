#![allow(dead_code)]

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ordershap_core::{CostVariant, Dataset, FeatureVector, PolynomialModel};

/// A random polynomial whose highest term has exactly `order` variables.
pub fn random_model(rng: &mut ChaCha8Rng, p: usize, order: usize) -> PolynomialModel {
    let n_terms = rng.random_range(1..=8);
    let mut terms: Vec<(f64, Vec<usize>)> = Vec::new();
    let mut push = |rng: &mut ChaCha8Rng, size: usize| {
        let mut vars = sample(rng, p, size).into_vec();
        vars.sort_unstable();
        let mut coef: f64 = rng.random_range(-2.0..2.0);
        if coef.abs() < 0.05 {
            coef = 1.0;
        }
        terms.push((coef, vars));
    };
    push(rng, order);
    for _ in 1..n_terms {
        let size = rng.random_range(0..=order);
        push(rng, size);
    }
    let model = PolynomialModel::new(p, terms).unwrap();
    assert_eq!(model.order(), order);
    model
}

pub fn random_point(rng: &mut ChaCha8Rng, p: usize) -> Vec<f64> {
    (0..p).map(|_| rng.random_range(-1.5..1.5)).collect()
}

pub fn baseline(rng: &mut ChaCha8Rng, p: usize) -> CostVariant {
    CostVariant::Baseline(FeatureVector::new(random_point(rng, p)).unwrap())
}

pub fn kernel(rng: &mut ChaCha8Rng, p: usize, rows: usize) -> CostVariant {
    let values = (0..rows).flat_map(|_| random_point(rng, p)).collect();
    CostVariant::KernelEmpirical(Dataset::from_row_major(p, values).unwrap())
}

/// A model, an instance and both cost variants drawn from one seed.
pub struct Case {
    pub model: PolynomialModel,
    pub x: Vec<f64>,
    pub variants: [CostVariant; 2],
}

pub fn random_case(seed: u64, p_range: std::ops::RangeInclusive<usize>, max_order: usize) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = rng.random_range(p_range);
    let order = rng.random_range(1..=max_order.min(p));
    let model = random_model(&mut rng, p, order);
    let x = random_point(&mut rng, p);
    let variants = [baseline(&mut rng, p), kernel(&mut rng, p, 3)];
    Case { model, x, variants }
}

pub fn assert_close(a: &[f64], b: &[f64], tol: f64, what: &str) {
    assert_eq!(a.len(), b.len(), "{what}: length");
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        assert!((x - y).abs() <= tol, "{what}: feature {i}: {x} vs {y} (diff {:e})", (x - y).abs());
    }
}
