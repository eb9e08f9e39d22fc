//! Lightweight classifiers over feature rows: nearest centroid, k-NN and
//! multinomial softmax, with stratified k-fold cross-validation.

mod centroid;
mod crossval;
mod knn;
mod matrix;
pub mod model_io;
mod softmax;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::RngStream;

pub use centroid::{fit_centroid, CentroidModel};
pub use crossval::{crossval, evaluate_split, CrossValResult};
pub use knn::{fit_knn, KnnModel, DEFAULT_K};
pub use matrix::{FeatureMatrix, Representation};
pub use model_io::{read_model, write_model};
pub use softmax::{fit_softmax, loss_and_gradient, SoftmaxHyper, SoftmaxModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distance {
    #[default]
    Cosine,
    Euclidean,
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    #[default]
    Centroid,
    Knn,
    Softmax,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Centroid => "centroid",
            ModelKind::Knn => "knn",
            ModelKind::Softmax => "softmax",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "centroid" => Ok(ModelKind::Centroid),
            "knn" => Ok(ModelKind::Knn),
            "softmax" => Ok(ModelKind::Softmax),
            _ => Err(Error::invalid(format!(
                "unknown model kind {s:?} (expected centroid, knn or softmax)"
            ))),
        }
    }
}

/// Classifier choice plus its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub distance: Distance,
    pub k: usize,
    pub softmax: SoftmaxHyper,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec {
            kind: ModelKind::Centroid,
            distance: Distance::Cosine,
            k: DEFAULT_K,
            softmax: SoftmaxHyper::default(),
        }
    }
}

impl ModelSpec {
    pub fn of_kind(kind: ModelKind) -> Self {
        ModelSpec {
            kind,
            ..ModelSpec::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Centroid(CentroidModel),
    Knn(KnnModel),
    Softmax(SoftmaxModel),
}

pub fn fit_model(train: &FeatureMatrix, spec: &ModelSpec, rng: &RngStream) -> Result<Model> {
    Ok(match spec.kind {
        ModelKind::Centroid => Model::Centroid(fit_centroid(train, spec.distance)?),
        ModelKind::Knn => Model::Knn(fit_knn(train, spec.k)?),
        ModelKind::Softmax => Model::Softmax(fit_softmax(train, &spec.softmax, rng)?),
    })
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Centroid(_) => ModelKind::Centroid,
            Model::Knn(_) => ModelKind::Knn,
            Model::Softmax(_) => ModelKind::Softmax,
        }
    }

    pub fn classes(&self) -> &[String] {
        match self {
            Model::Centroid(m) => &m.classes,
            Model::Knn(m) => &m.classes,
            Model::Softmax(m) => &m.classes,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Model::Centroid(m) => m.dim(),
            Model::Knn(m) => m.dim(),
            Model::Softmax(m) => m.dim(),
        }
    }

    pub fn predict(&self, rows: &FeatureMatrix) -> Result<Predictions> {
        match self {
            Model::Centroid(m) => m.predict(rows),
            Model::Knn(m) => m.predict(rows),
            Model::Softmax(m) => m.predict(rows),
        }
    }
}

pub(crate) fn check_dim(expected: usize, rows: &FeatureMatrix) -> Result<()> {
    rows.validate()?;
    if rows.dim != expected {
        return Err(Error::invalid(format!(
            "feature dimension {} does not match the model's {}",
            rows.dim, expected
        )));
    }
    Ok(())
}

/// Predicted labels with the winning score per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub labels: Vec<String>,
    pub class_indices: Vec<usize>,
    pub scores: Vec<f64>,
}

impl Predictions {
    /// Argmax of per-class scores, rows scored in parallel. The first
    /// (lowest-ordered) class wins exact ties.
    pub(crate) fn from_scores<F>(classes: &[String], rows: &FeatureMatrix, score: F) -> Predictions
    where
        F: Fn(&[f64]) -> Vec<f64> + Sync,
    {
        let best: Vec<(usize, f64)> = (0..rows.n_rows())
            .into_par_iter()
            .map(|i| {
                let s = score(&rows.row_f64(i));
                let mut arg = 0;
                for (c, &v) in s.iter().enumerate() {
                    if v > s[arg] {
                        arg = c;
                    }
                }
                (arg, s[arg])
            })
            .collect();
        Predictions {
            labels: best.iter().map(|&(c, _)| classes[c].clone()).collect(),
            class_indices: best.iter().map(|&(c, _)| c).collect(),
            scores: best.iter().map(|&(_, s)| s).collect(),
        }
    }

    pub fn accuracy(&self, truth: &[String]) -> f64 {
        if truth.is_empty() {
            return 0.0;
        }
        let hits = self
            .labels
            .iter()
            .zip(truth)
            .filter(|(a, b)| a == b)
            .count();
        hits as f64 / truth.len() as f64
    }
}

/// Counts indexed `[true class][predicted class]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(classes: Vec<String>) -> Self {
        let n = classes.len();
        ConfusionMatrix {
            classes,
            counts: vec![vec![0; n]; n],
        }
    }

    pub fn record(&mut self, truth: &[String], predictions: &Predictions) -> Result<()> {
        for (t, &p) in truth.iter().zip(&predictions.class_indices) {
            let ti = self
                .classes
                .binary_search(t)
                .map_err(|_| Error::invalid(format!("test label {t:?} is not a training class")))?;
            self.counts[ti][p] += 1;
        }
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.classes.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            0.0
        } else {
            self.correct() as f64 / total as f64
        }
    }

    /// Recall per true class; NaN-free (classes without test rows report 0).
    pub fn per_class_accuracy(&self) -> Vec<f64> {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let n: u64 = row.iter().sum();
                if n == 0 {
                    0.0
                } else {
                    row[i] as f64 / n as f64
                }
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("true\\predicted");
        for c in &self.classes {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (c, row) in self.classes.iter().zip(&self.counts) {
            out.push_str(c);
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}
