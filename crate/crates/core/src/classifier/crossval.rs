use serde::{Deserialize, Serialize};

use super::{fit_model, ConfusionMatrix, FeatureMatrix, ModelSpec};
use crate::error::{Error, Result};
use crate::signal::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValResult {
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    /// Summed over folds.
    pub confusion: ConfusionMatrix,
    /// Per fold: (train rows, test rows).
    pub fold_sizes: Vec<(usize, usize)>,
}

/// Fold index of every row: each class is shuffled and dealt round-robin, so
/// class counts per fold differ by at most one.
pub fn stratified_folds(
    features: &FeatureMatrix,
    k_folds: usize,
    rng: &RngStream,
) -> Result<Vec<usize>> {
    if k_folds < 2 {
        return Err(Error::invalid("k_folds must be >= 2"));
    }
    let (classes, groups) = features.indices_by_class();
    let mut rng = rng.derive_label("folds");
    let mut fold = vec![0; features.n_rows()];
    for (class, mut rows) in classes.iter().zip(groups) {
        if rows.len() < k_folds {
            return Err(Error::invalid(format!(
                "class {class:?} has {} rows, fewer than {k_folds} folds",
                rows.len()
            )));
        }
        rng.shuffle(&mut rows);
        for (pos, i) in rows.into_iter().enumerate() {
            fold[i] = pos % k_folds;
        }
    }
    Ok(fold)
}

/// Stratified k-fold cross-validation.
pub fn crossval(
    features: &FeatureMatrix,
    k_folds: usize,
    spec: &ModelSpec,
    rng: &RngStream,
) -> Result<CrossValResult> {
    features.validate()?;
    let fold = stratified_folds(features, k_folds, rng)?;
    let mut confusion = ConfusionMatrix::new(features.classes());
    let mut fold_accuracies = Vec::with_capacity(k_folds);
    let mut fold_sizes = Vec::with_capacity(k_folds);
    for f in 0..k_folds {
        let (test_idx, train_idx): (Vec<usize>, Vec<usize>) =
            (0..features.n_rows()).partition(|&i| fold[i] == f);
        let train = features.subset(&train_idx);
        let test = features.subset(&test_idx);
        let model = fit_model(&train, spec, &rng.derive(f as u64))?;
        let pred = model.predict(&test)?;
        let mut cm = ConfusionMatrix::new(model.classes().to_vec());
        cm.record(&test.labels, &pred)?;
        fold_accuracies.push(cm.accuracy());
        fold_sizes.push((train_idx.len(), test_idx.len()));
        for (acc, row) in confusion.counts.iter_mut().zip(&cm.counts) {
            for (a, v) in acc.iter_mut().zip(row) {
                *a += v;
            }
        }
    }
    let mean_accuracy = fold_accuracies.iter().sum::<f64>() / k_folds as f64;
    Ok(CrossValResult {
        fold_accuracies,
        mean_accuracy,
        confusion,
        fold_sizes,
    })
}

/// Train on one matrix, test on another (cross-domain). Every test label must
/// be a training class.
pub fn evaluate_split(
    train: &FeatureMatrix,
    test: &FeatureMatrix,
    spec: &ModelSpec,
    rng: &RngStream,
) -> Result<ConfusionMatrix> {
    if train.dim != test.dim {
        return Err(Error::invalid(format!(
            "train rows have {} features, test rows {}",
            train.dim, test.dim
        )));
    }
    let classes = train.classes();
    if let Some(l) = test
        .labels
        .iter()
        .find(|l| classes.binary_search(l).is_err())
    {
        return Err(Error::invalid(format!(
            "test label {l:?} does not occur in the training set"
        )));
    }
    let model = fit_model(train, spec, rng)?;
    let pred = model.predict(test)?;
    let mut cm = ConfusionMatrix::new(classes);
    cm.record(&test.labels, &pred)?;
    Ok(cm)
}
