use dhde::forest::{fit_forest, kfold_cv, permutation_importance, FoldMode, ForestParams, MaxFeatures};
use dhde::linalg::Matrix;
use dhde::stats;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn names(k: usize) -> Vec<String> {
    (0..k).map(|j| format!("x{j}")).collect()
}

/// y = sin(x0) + x1² + small noise, plus an irrelevant x2.
fn nonlinear(n: usize, seed: u64) -> (Matrix, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.05).unwrap();
    let mut cols = vec![Vec::with_capacity(n); 3];
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let a: f64 = rng.random_range(-3.0..3.0);
        let b: f64 = rng.random_range(-1.5..1.5);
        let c: f64 = rng.random_range(-1.0..1.0);
        cols[0].push(a);
        cols[1].push(b);
        cols[2].push(c);
        y.push(a.sin() + b * b + noise.sample(&mut rng));
    }
    (Matrix::from_columns(&cols).unwrap(), y)
}

#[test]
fn step_function_memorized() {
    let xs: Vec<f64> = (0..200).map(|i| i as f64 / 10.0).collect();
    let y: Vec<f64> = xs.iter().map(|&v| (v / 4.0).floor()).collect();
    let x = Matrix::from_columns(&[xs]).unwrap();
    let m = fit_forest(&x, &y, &names(1), &ForestParams { n_trees: 50, ..Default::default() }, 1).unwrap();
    assert!(stats::r_squared(&y, &m.predict(&x).unwrap()) > 0.99);
}

#[test]
fn same_seed_same_bits() {
    let (x, y) = nonlinear(300, 4);
    let p = ForestParams { n_trees: 40, ..Default::default() };
    let a = fit_forest(&x, &y, &names(3), &p, 99).unwrap().predict(&x).unwrap();
    let b = fit_forest(&x, &y, &names(3), &p, 99).unwrap().predict(&x).unwrap();
    assert!(a.iter().zip(&b).all(|(u, v)| u.to_bits() == v.to_bits()));
    let c = fit_forest(&x, &y, &names(3), &p, 100).unwrap().predict(&x).unwrap();
    assert_ne!(a, c);
}

#[test]
fn cv_on_nonlinear_dgp() {
    let (x, y) = nonlinear(2000, 8);
    let p = ForestParams { n_trees: 100, ..Default::default() };
    let r = kfold_cv(&x, &y, &names(3), &p, 5, FoldMode::Shuffled, 8).unwrap();
    assert!(r.mean_r2 > 0.8, "{r:?}");
    assert_eq!(r.fold_r2.len(), 5);
}

#[test]
fn cv_on_noise_is_not_better_than_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cols: Vec<Vec<f64>> = (0..3).map(|_| (0..400).map(|_| rng.random::<f64>()).collect()).collect();
    let y: Vec<f64> = (0..400).map(|_| rng.random::<f64>()).collect();
    let x = Matrix::from_columns(&cols).unwrap();
    let p = ForestParams { n_trees: 60, ..Default::default() };
    let r = kfold_cv(&x, &y, &names(3), &p, 5, FoldMode::Chronological, 5).unwrap();
    assert!(r.mean_r2 <= 0.05, "{r:?}");
}

#[test]
fn importance_finds_dominant_and_ignores_absent() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut draw = |n: usize| {
        let cols: Vec<Vec<f64>> = (0..3).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let y: Vec<f64> = (0..n).map(|i| 5.0 * cols[1][i] + 0.5 * cols[0][i]).collect();
        (Matrix::from_columns(&cols).unwrap(), y)
    };
    let (x, y) = draw(600);
    let (xe, ye) = draw(400);
    let m = fit_forest(&x, &y, &names(3), &ForestParams { n_trees: 80, ..Default::default() }, 3).unwrap();
    let r = permutation_importance(&m, &xe, &ye, 10, 3).unwrap();
    assert_eq!(r.rank_of("x1"), Some(1));
    let absent = r.features.iter().find(|f| f.name == "x2").unwrap();
    assert!(absent.mean.abs() < 0.01, "{absent:?}");
    assert!(permutation_importance(&m, &x, &y, 0, 3).is_err());
}

#[test]
fn duplicated_feature_keeps_predictions_stable() {
    let (x, y) = nonlinear(400, 21);
    // With every feature examined at each node the copy only ever ties with
    // its original, and ties go to the lower column.
    let p = ForestParams { n_trees: 200, max_features: MaxFeatures::All, ..Default::default() };
    let base = fit_forest(&x, &y, &names(3), &p, 2).unwrap().predict(&x).unwrap();
    let dup = x.insert_column(3, &x.column(0)).unwrap();
    let more = fit_forest(&dup, &y, &names(4), &p, 2).unwrap().predict(&dup).unwrap();
    let sd = stats::std_pop(&y);
    let worst = base.iter().zip(&more).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(worst < 0.05 * sd, "max delta {worst} vs σ {sd}");
}
