use super::{check_dim, FeatureMatrix, Predictions};
use crate::error::{Error, Result};

pub const DEFAULT_K: usize = 5;

/// k nearest neighbours under cosine similarity.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    pub k: usize,
    pub classes: Vec<String>,
    /// Unit-normalized training rows (zero rows stay zero).
    pub rows: Vec<Vec<f64>>,
    pub row_class: Vec<usize>,
}

pub fn fit_knn(train: &FeatureMatrix, k: usize) -> Result<KnnModel> {
    train.validate()?;
    if k == 0 {
        return Err(Error::invalid("k must be >= 1"));
    }
    let classes = train.classes();
    if classes.len() < 2 {
        return Err(Error::invalid("need at least 2 classes"));
    }
    let rows = (0..train.n_rows())
        .map(|i| unit(&train.row_f64(i)))
        .collect();
    let row_class = train
        .labels
        .iter()
        .map(|l| classes.binary_search(l).expect("label is a class"))
        .collect();
    Ok(KnnModel {
        k,
        classes,
        rows,
        row_class,
    })
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n == 0.0 {
        v.to_vec()
    } else {
        v.iter().map(|x| x / n).collect()
    }
}

impl KnnModel {
    pub fn dim(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// Per-class score: vote count plus summed similarity scaled below one
    /// vote, so similarity only breaks ties between equal counts.
    pub fn scores(&self, row: &[f64]) -> Vec<f64> {
        let q = unit(row);
        let mut sims: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| (r.iter().zip(&q).map(|(a, b)| a * b).sum::<f64>(), i))
            .collect();
        let k = self.k.min(sims.len());
        // Stable order: higher similarity first, then lower training index.
        sims.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut votes = vec![0usize; self.classes.len()];
        let mut summed = vec![0.0f64; self.classes.len()];
        for &(s, i) in &sims[..k] {
            votes[self.row_class[i]] += 1;
            summed[self.row_class[i]] += s;
        }
        // Summed similarity lies in [-k, k]; squeeze it into (-0.5, 0.5).
        votes
            .iter()
            .zip(&summed)
            .map(|(&v, &s)| v as f64 + s / (2.0 * k as f64 + 1.0))
            .collect()
    }

    pub fn predict(&self, rows: &FeatureMatrix) -> Result<Predictions> {
        check_dim(self.dim(), rows)?;
        Ok(Predictions::from_scores(&self.classes, rows, |r| {
            self.scores(r)
        }))
    }
}
