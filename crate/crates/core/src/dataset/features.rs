use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{sidecar_path, FORMAT_VERSION};
use crate::classifier::{FeatureMatrix, Representation};
use crate::error::{Error, Result};

/// Sidecar of a feature file: row-major little-endian f32 values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSetMeta {
    pub format_version: u32,
    pub rows: usize,
    pub dim: usize,
    pub representation: Representation,
    pub config_hash: String,
    pub bin_resolution_hz: f64,
    pub labels: Vec<String>,
    pub domain_tags: Vec<String>,
}

impl FeatureSetMeta {
    fn of(m: &FeatureMatrix) -> Self {
        FeatureSetMeta {
            format_version: FORMAT_VERSION,
            rows: m.n_rows(),
            dim: m.dim,
            representation: m.representation,
            config_hash: m.config_hash.clone(),
            bin_resolution_hz: m.bin_resolution_hz,
            labels: m.labels.clone(),
            domain_tags: m.domain_tags.clone(),
        }
    }
}

fn encode(data: &[f32]) -> Vec<u8> {
    data.iter().flat_map(|v| v.to_le_bytes()).collect()
}

fn write_meta(path: &Path, meta: &FeatureSetMeta) -> Result<()> {
    let side = sidecar_path(path);
    let json = serde_json::to_vec_pretty(meta).map_err(|e| Error::json(&side, e))?;
    fs::write(&side, json).map_err(|e| Error::io(&side, e))
}

fn read_meta(path: &Path) -> Result<FeatureSetMeta> {
    let side = sidecar_path(path);
    let json = fs::read(&side).map_err(|e| Error::io(&side, e))?;
    let meta: FeatureSetMeta = serde_json::from_slice(&json).map_err(|e| Error::json(&side, e))?;
    if meta.format_version != FORMAT_VERSION {
        return Err(Error::format(
            &side,
            format!("unsupported format_version {}", meta.format_version),
        ));
    }
    if meta.labels.len() != meta.rows || meta.domain_tags.len() != meta.rows {
        return Err(Error::format(&side, "label/tag counts disagree with rows"));
    }
    Ok(meta)
}

/// Sidecar of a feature file, without loading the rows.
pub fn read_feature_meta(path: &Path) -> Result<FeatureSetMeta> {
    read_meta(path)
}

pub fn write_feature_set(features: &FeatureMatrix, path: &Path) -> Result<()> {
    features.validate()?;
    fs::write(path, encode(&features.data)).map_err(|e| Error::io(path, e))?;
    write_meta(path, &FeatureSetMeta::of(features))
}

pub fn read_feature_set(path: &Path) -> Result<FeatureMatrix> {
    let meta = read_meta(path)?;
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let expected = meta.rows * meta.dim * 4;
    if bytes.len() != expected {
        return Err(Error::format(
            path,
            format!(
                "{} bytes on disk, sidecar shape {} x {} needs {expected}",
                bytes.len(),
                meta.rows,
                meta.dim
            ),
        ));
    }
    let data = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
        .collect();
    let m = FeatureMatrix {
        dim: meta.dim,
        data,
        labels: meta.labels,
        domain_tags: meta.domain_tags,
        representation: meta.representation,
        config_hash: meta.config_hash,
        bin_resolution_hz: meta.bin_resolution_hz,
    };
    m.validate()
        .map_err(|e| Error::format(path, e.to_string()))?;
    Ok(m)
}

/// Appends rows to an existing feature file (or creates it). Rows from a
/// different extraction config are rejected.
pub fn append_feature_set(features: &FeatureMatrix, path: &Path) -> Result<()> {
    if !path.exists() {
        return write_feature_set(features, path);
    }
    features.validate()?;
    let mut meta = read_meta(path)?;
    if meta.config_hash != features.config_hash {
        return Err(Error::invalid(format!(
            "config hash mismatch: {} holds {}, new rows have {}",
            path.display(),
            meta.config_hash,
            features.config_hash
        )));
    }
    if meta.dim != features.dim || meta.representation != features.representation {
        return Err(Error::invalid(format!(
            "shape mismatch: {} holds {} x {} rows",
            path.display(),
            meta.representation,
            meta.dim
        )));
    }
    let mut f = OpenOptions::new()
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    f.write_all(&encode(&features.data))
        .map_err(|e| Error::io(path, e))?;
    meta.rows += features.n_rows();
    meta.labels.extend_from_slice(&features.labels);
    meta.domain_tags.extend_from_slice(&features.domain_tags);
    write_meta(path, &meta)
}

/// CSV with `label,domain,` followed by the feature columns.
pub fn write_feature_csv(features: &FeatureMatrix, path: &Path) -> Result<()> {
    let mut out = String::from("label,domain");
    for k in 0..features.dim {
        out.push_str(&format!(",f{k}"));
    }
    out.push('\n');
    for i in 0..features.n_rows() {
        out.push_str(&features.labels[i]);
        out.push(',');
        out.push_str(&features.domain_tags[i]);
        for v in features.row(i) {
            out.push_str(&format!(",{v:e}"));
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
