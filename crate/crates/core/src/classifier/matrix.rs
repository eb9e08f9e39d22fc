use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What a feature row holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Representation {
    Eps,
    RawIq,
}

impl Representation {
    pub fn as_str(self) -> &'static str {
        match self {
            Representation::Eps => "eps",
            Representation::RawIq => "raw-iq",
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Representation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eps" => Ok(Representation::Eps),
            "raw-iq" => Ok(Representation::RawIq),
            _ => Err(Error::invalid(format!(
                "unknown representation {s:?} (expected eps or raw-iq)"
            ))),
        }
    }
}

/// Row-major feature rows with per-row device labels and domain tags.
///
/// Rows are stored as 32-bit floats, the same precision as feature files, so a
/// write/read round trip is lossless.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub dim: usize,
    pub data: Vec<f32>,
    pub labels: Vec<String>,
    pub domain_tags: Vec<String>,
    pub representation: Representation,
    /// Digest of the extraction settings that produced the rows.
    pub config_hash: String,
    /// Spectral bin spacing for EPS rows; 0 for raw IQ.
    pub bin_resolution_hz: f64,
}

impl FeatureMatrix {
    pub fn new(dim: usize, representation: Representation, config_hash: impl Into<String>) -> Self {
        FeatureMatrix {
            dim,
            data: Vec::new(),
            labels: Vec::new(),
            domain_tags: Vec::new(),
            representation,
            config_hash: config_hash.into(),
            bin_resolution_hz: 0.0,
        }
    }

    /// Matrix from f64 rows, for tests and small toy problems.
    pub fn from_rows(rows: &[Vec<f64>], labels: &[&str]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        let mut m = FeatureMatrix::new(dim, Representation::Eps, "");
        for (r, l) in rows.iter().zip(labels) {
            m.push(r, l, "")?;
        }
        if rows.len() != labels.len() {
            return Err(Error::invalid("rows and labels differ in count"));
        }
        Ok(m)
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn push(&mut self, row: &[f64], label: &str, domain_tag: &str) -> Result<()> {
        if row.len() != self.dim {
            return Err(Error::invalid(format!(
                "row has {} features, matrix expects {}",
                row.len(),
                self.dim
            )));
        }
        self.data.extend(row.iter().map(|&v| v as f32));
        self.labels.push(label.to_string());
        self.domain_tags.push(domain_tag.to_string());
        Ok(())
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_f64(&self, i: usize) -> Vec<f64> {
        self.row(i).iter().map(|&v| f64::from(v)).collect()
    }

    /// Sorted distinct labels; class index order everywhere.
    pub fn classes(&self) -> Vec<String> {
        self.labels
            .iter()
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.data.len() != self.dim * self.labels.len() {
            return Err(Error::invalid(format!(
                "matrix holds {} values, expected {} rows x {} features",
                self.data.len(),
                self.labels.len(),
                self.dim
            )));
        }
        if self.domain_tags.len() != self.labels.len() {
            return Err(Error::invalid("domain tag count differs from label count"));
        }
        if let Some(i) = self.data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: i });
        }
        Ok(())
    }

    pub fn subset(&self, indices: &[usize]) -> FeatureMatrix {
        let mut out = FeatureMatrix {
            data: Vec::with_capacity(indices.len() * self.dim),
            labels: Vec::with_capacity(indices.len()),
            domain_tags: Vec::with_capacity(indices.len()),
            ..self.metadata_only()
        };
        for &i in indices {
            out.data.extend_from_slice(self.row(i));
            out.labels.push(self.labels[i].clone());
            out.domain_tags.push(self.domain_tags[i].clone());
        }
        out
    }

    /// Empty matrix carrying this matrix's shape and provenance.
    pub fn metadata_only(&self) -> FeatureMatrix {
        FeatureMatrix {
            dim: self.dim,
            data: Vec::new(),
            labels: Vec::new(),
            domain_tags: Vec::new(),
            representation: self.representation,
            config_hash: self.config_hash.clone(),
            bin_resolution_hz: self.bin_resolution_hz,
        }
    }

    /// Appends rows from a matrix produced with the same settings.
    pub fn append(&mut self, other: &FeatureMatrix) -> Result<()> {
        if other.dim != self.dim || other.representation != self.representation {
            return Err(Error::invalid(format!(
                "cannot append {} x {} rows to {} x {} matrix",
                other.representation, other.dim, self.representation, self.dim
            )));
        }
        if other.config_hash != self.config_hash {
            return Err(Error::invalid(format!(
                "config hash mismatch: {} vs {}",
                self.config_hash, other.config_hash
            )));
        }
        self.data.extend_from_slice(&other.data);
        self.labels.extend_from_slice(&other.labels);
        self.domain_tags.extend_from_slice(&other.domain_tags);
        Ok(())
    }

    /// Row indices grouped by class, in [`classes`](Self::classes) order.
    pub fn indices_by_class(&self) -> (Vec<String>, Vec<Vec<usize>>) {
        let classes = self.classes();
        let mut groups = vec![Vec::new(); classes.len()];
        for (i, l) in self.labels.iter().enumerate() {
            let c = classes.binary_search(l).expect("label is a class");
            groups[c].push(i);
        }
        (classes, groups)
    }
}
