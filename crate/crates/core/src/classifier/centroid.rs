use super::{check_dim, Distance, FeatureMatrix, Predictions};
use crate::error::{Error, Result};
use crate::signal::cosine_similarity;

/// One mean vector per training class.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroidModel {
    pub classes: Vec<String>,
    pub centroids: Vec<Vec<f64>>,
    pub distance: Distance,
}

pub fn fit_centroid(train: &FeatureMatrix, distance: Distance) -> Result<CentroidModel> {
    train.validate()?;
    let (classes, groups) = train.indices_by_class();
    if classes.len() < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 classes, got {}",
            classes.len()
        )));
    }
    let centroids = groups
        .iter()
        .map(|rows| {
            let mut acc = vec![0.0f64; train.dim];
            for &i in rows {
                for (a, &v) in acc.iter_mut().zip(train.row(i)) {
                    *a += f64::from(v);
                }
            }
            let n = rows.len() as f64;
            acc.iter_mut().for_each(|a| *a /= n);
            acc
        })
        .collect();
    Ok(CentroidModel {
        classes,
        centroids,
        distance,
    })
}

impl CentroidModel {
    pub fn dim(&self) -> usize {
        self.centroids.first().map_or(0, Vec::len)
    }

    /// Per-class scores; larger is closer (cosine similarity, or negated
    /// Euclidean distance).
    pub fn scores(&self, row: &[f64]) -> Vec<f64> {
        self.centroids
            .iter()
            .map(|c| match self.distance {
                Distance::Cosine => cosine_similarity(row, c),
                Distance::Euclidean => -row
                    .iter()
                    .zip(c)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt(),
            })
            .collect()
    }

    /// Nearest centroid; exact ties go to the lowest-ordered label.
    pub fn predict(&self, rows: &FeatureMatrix) -> Result<Predictions> {
        check_dim(self.dim(), rows)?;
        Ok(Predictions::from_scores(&self.classes, rows, |r| {
            self.scores(r)
        }))
    }
}
