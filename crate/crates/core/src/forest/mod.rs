//! Random-forest regression, k-fold cross-validation and permutation
//! importance.
//!
//! Randomness: tree `t` draws from ChaCha8 seeded with the master seed on
//! stream `t`; the cross-validation shuffle uses stream `CV_STREAM`; the
//! permutations for feature `j` use stream `j` of a ChaCha8 seeded with the
//! importance seed. Trees are grown in parallel and summed in index order,
//! so results do not depend on the thread count.

mod tree;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::stats;
pub use tree::Tree;
use tree::TreeParams;

pub const CV_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    /// max(1, floor(p/3)).
    #[default]
    Third,
    All,
    Fixed(usize),
}

impl MaxFeatures {
    pub fn resolve(self, p: usize) -> usize {
        match self {
            MaxFeatures::Third => (p / 3).max(1),
            MaxFeatures::All => p,
            MaxFeatures::Fixed(m) => m.clamp(1, p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_features: MaxFeatures,
    pub min_samples_leaf: usize,
    pub max_depth: Option<usize>,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 500,
            max_features: MaxFeatures::Third,
            min_samples_leaf: 1,
            max_depth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub params: ForestParams,
    pub seed: u64,
    pub names: Vec<String>,
    trees: Vec<Tree>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForestSummary {
    pub n_trees: usize,
    pub max_features: usize,
    pub min_samples_leaf: usize,
    pub max_depth: Option<usize>,
    pub seed: u64,
    pub features: Vec<String>,
    pub total_nodes: usize,
}

pub const MIN_ROWS: usize = 10;

pub fn fit_forest(x: &Matrix, y: &[f64], names: &[String], params: &ForestParams, seed: u64) -> Result<ForestModel> {
    let n = x.nrows();
    if y.len() != n || names.len() != x.ncols() {
        return Err(Error::invalid("design, names and target disagree in size"));
    }
    if n < MIN_ROWS {
        return Err(Error::insufficient(format!("forest needs at least {MIN_ROWS} rows, got {n}")));
    }
    if params.n_trees == 0 || params.min_samples_leaf == 0 || x.ncols() == 0 {
        return Err(Error::invalid("n_trees, min_samples_leaf and feature count must be positive"));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite target"));
    }
    if y.iter().all(|&v| v == y[0]) {
        return Err(Error::degenerate("target is constant"));
    }
    let tp = TreeParams {
        max_features: params.max_features.resolve(x.ncols()),
        min_samples_leaf: params.min_samples_leaf,
        max_depth: params.max_depth,
    };
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let samples: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            Tree::grow(x, y, samples, &tp, &mut rng)
        })
        .collect();
    Ok(ForestModel {
        params: *params,
        seed,
        names: names.to_vec(),
        trees,
    })
}

impl ForestModel {
    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict_row(row)).sum();
        sum / self.trees.len() as f64
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.ncols() != self.names.len() {
            return Err(Error::invalid(format!(
                "prediction matrix has {} columns, model has {}",
                x.ncols(),
                self.names.len()
            )));
        }
        Ok((0..x.nrows())
            .into_par_iter()
            .map(|i| self.predict_row(x.row(i)))
            .collect())
    }

    pub fn summary(&self) -> ForestSummary {
        ForestSummary {
            n_trees: self.trees.len(),
            max_features: self.params.max_features.resolve(self.names.len()),
            min_samples_leaf: self.params.min_samples_leaf,
            max_depth: self.params.max_depth,
            seed: self.seed,
            features: self.names.clone(),
            total_nodes: self.trees.iter().map(Tree::node_count).sum(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FoldMode {
    #[default]
    Shuffled,
    Chronological,
}

/// Test-row indices of each fold. The first n mod k folds get one extra row.
/// Chronological folds are contiguous blocks in row order.
pub fn kfold_indices(n: usize, k: usize, mode: FoldMode, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::invalid(format!("k = {k}; cross-validation needs k ≥ 2")));
    }
    if n < 5 * k {
        return Err(Error::insufficient(format!("{n} rows for {k} folds, need at least {}", 5 * k)));
    }
    let mut order: Vec<usize> = (0..n).collect();
    if mode == FoldMode::Shuffled {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(CV_STREAM);
        order.shuffle(&mut rng);
    }
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = n / k + usize::from(f < n % k);
        let mut fold = order[start..start + size].to_vec();
        fold.sort_unstable();
        folds.push(fold);
        start += size;
    }
    Ok(folds)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvReport {
    pub k: usize,
    pub mode: FoldMode,
    pub fold_r2: Vec<f64>,
    pub mean_r2: f64,
    /// Population standard deviation across folds.
    pub std_r2: f64,
}

pub fn kfold_cv(
    x: &Matrix,
    y: &[f64],
    names: &[String],
    params: &ForestParams,
    k: usize,
    mode: FoldMode,
    seed: u64,
) -> Result<CvReport> {
    let n = x.nrows();
    let folds = kfold_indices(n, k, mode, seed)?;
    let mut fold_r2 = Vec::with_capacity(k);
    for test in &folds {
        let mut in_test = vec![false; n];
        for &i in test {
            in_test[i] = true;
        }
        let train: Vec<usize> = (0..n).filter(|&i| !in_test[i]).collect();
        let ytrain: Vec<f64> = train.iter().map(|&i| y[i]).collect();
        let model = fit_forest(&x.select_rows(&train), &ytrain, names, params, seed)?;
        let pred = model.predict(&x.select_rows(test))?;
        let ytest: Vec<f64> = test.iter().map(|&i| y[i]).collect();
        fold_r2.push(stats::r_squared(&ytest, &pred));
    }
    Ok(CvReport {
        k,
        mode,
        mean_r2: stats::mean(&fold_r2),
        std_r2: stats::std_pop(&fold_r2),
        fold_r2,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureImportance {
    pub name: String,
    pub rank: usize,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImportanceReport {
    pub baseline_r2: f64,
    pub repeats: usize,
    pub seed: u64,
    /// Sorted by mean drop, largest first.
    pub features: Vec<FeatureImportance>,
}

impl ImportanceReport {
    pub fn rank_of(&self, name: &str) -> Option<usize> {
        self.features.iter().find(|f| f.name == name).map(|f| f.rank)
    }
}

/// Mean and spread of R²(original) − R²(column j shuffled) over `repeats`
/// permutations of the evaluation rows.
pub fn permutation_importance(
    model: &ForestModel,
    x: &Matrix,
    y: &[f64],
    repeats: usize,
    seed: u64,
) -> Result<ImportanceReport> {
    if repeats < 1 {
        return Err(Error::invalid("repeats must be at least 1"));
    }
    if y.len() != x.nrows() {
        return Err(Error::invalid("evaluation data disagree in size"));
    }
    let baseline_r2 = stats::r_squared(y, &model.predict(x)?);
    let per_feature: Vec<Vec<f64>> = (0..x.ncols())
        .into_par_iter()
        .map(|j| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(j as u64);
            let original = x.column(j);
            let mut shuffled = original.clone();
            let mut xp = x.clone();
            (0..repeats)
                .map(|_| {
                    shuffled.copy_from_slice(&original);
                    shuffled.shuffle(&mut rng);
                    for (i, v) in shuffled.iter().enumerate() {
                        xp.set(i, j, *v);
                    }
                    let pred: Vec<f64> = (0..xp.nrows()).map(|i| model.predict_row(xp.row(i))).collect();
                    baseline_r2 - stats::r_squared(y, &pred)
                })
                .collect()
        })
        .collect();
    let mut features: Vec<FeatureImportance> = per_feature
        .iter()
        .enumerate()
        .map(|(j, drops)| FeatureImportance {
            name: model.names[j].clone(),
            rank: 0,
            mean: stats::mean(drops),
            std: stats::std_pop(drops),
        })
        .collect();
    features.sort_by(|a, b| b.mean.total_cmp(&a.mean));
    for (r, f) in features.iter_mut().enumerate() {
        f.rank = r + 1;
    }
    Ok(ImportanceReport {
        baseline_r2,
        repeats,
        seed,
        features,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|j| format!("x{j}")).collect()
    }

    #[test]
    fn folds_partition_rows() {
        for mode in [FoldMode::Shuffled, FoldMode::Chronological] {
            let folds = kfold_indices(53, 5, mode, 7).unwrap();
            let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
            assert_eq!(sizes, vec![11, 11, 11, 10, 10]);
            let mut all: Vec<usize> = folds.concat();
            all.sort_unstable();
            assert_eq!(all, (0..53).collect::<Vec<_>>());
        }
        let chrono = kfold_indices(20, 4, FoldMode::Chronological, 0).unwrap();
        assert_eq!(chrono[1], vec![5, 6, 7, 8, 9]);
        assert!(kfold_indices(20, 1, FoldMode::Shuffled, 0).is_err());
        assert!(kfold_indices(9, 2, FoldMode::Shuffled, 0).is_err());
    }

    #[test]
    fn prediction_is_mean_of_trees() {
        let x1: Vec<f64> = (0..40).map(|i| ((i * 13) % 17) as f64).collect();
        let x2: Vec<f64> = (0..40).map(|i| ((i * 5) % 7) as f64).collect();
        let y: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| a * b).collect();
        let x = Matrix::from_columns(&[x1, x2]).unwrap();
        let p = ForestParams {
            n_trees: 7,
            ..Default::default()
        };
        let m = fit_forest(&x, &y, &names(2), &p, 11).unwrap();
        let row = x.row(3);
        let manual: f64 = m.trees().iter().map(|t| t.predict_row(row)).sum::<f64>() / 7.0;
        assert_eq!(m.predict_row(row), manual);
        assert_eq!(m, fit_forest(&x, &y, &names(2), &p, 11).unwrap());
    }

    #[test]
    fn errors() {
        let x = Matrix::from_columns(&[(0..12).map(f64::from).collect()]).unwrap();
        assert!(matches!(
            fit_forest(&x, &[1.0; 12], &names(1), &ForestParams::default(), 0),
            Err(Error::Degenerate(_))
        ));
        let small = Matrix::from_columns(&[(0..5).map(f64::from).collect()]).unwrap();
        assert!(fit_forest(&small, &[1.0, 2.0, 3.0, 4.0, 5.0], &names(1), &ForestParams::default(), 0).is_err());
    }
}
