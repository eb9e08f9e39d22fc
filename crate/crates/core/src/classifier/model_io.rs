//! Versioned model files: a little-endian binary parameter blob plus a JSON
//! descriptor next to it (same path, `.json` extension).
//!
//! Binary layout: magic `EPSM`, u32 version, u32 kind (0 centroid, 1 knn,
//! 2 softmax), u32 class count, u64 feature dimension, u64 training-row count
//! (k-NN only, else 0), then for k-NN one u32 class index per training row,
//! then all parameters as f64.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{CentroidModel, Distance, KnnModel, Model, ModelKind, SoftmaxHyper, SoftmaxModel};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"EPSM";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDescriptor {
    pub format_version: u32,
    pub kind: ModelKind,
    pub classes: Vec<String>,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance: Option<Distance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub softmax: Option<SoftmaxHyper>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub loss_history: Vec<f64>,
}

pub fn descriptor_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

fn kind_code(kind: ModelKind) -> u32 {
    match kind {
        ModelKind::Centroid => 0,
        ModelKind::Knn => 1,
        ModelKind::Softmax => 2,
    }
}

pub fn write_model(path: &Path, model: &Model) -> Result<()> {
    let classes = model.classes().to_vec();
    let dim = model.dim();
    let mut desc = ModelDescriptor {
        format_version: FORMAT_VERSION,
        kind: model.kind(),
        classes,
        dim,
        distance: None,
        k: None,
        softmax: None,
        loss_history: Vec::new(),
    };
    let mut labels: Vec<u32> = Vec::new();
    let mut params: Vec<f64> = Vec::new();
    match model {
        Model::Centroid(m) => {
            desc.distance = Some(m.distance);
            m.centroids.iter().for_each(|c| params.extend_from_slice(c));
        }
        Model::Knn(m) => {
            desc.k = Some(m.k);
            labels = m.row_class.iter().map(|&c| c as u32).collect();
            m.rows.iter().for_each(|r| params.extend_from_slice(r));
        }
        Model::Softmax(m) => {
            desc.softmax = Some(m.hyper);
            desc.loss_history = m.loss_history.clone();
            params.extend_from_slice(&m.weights);
            params.extend_from_slice(&m.bias);
            params.extend_from_slice(&m.feature_mean);
            params.extend_from_slice(&m.feature_scale);
        }
    }
    let mut buf = Vec::with_capacity(32 + 4 * labels.len() + 8 * params.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&kind_code(desc.kind).to_le_bytes());
    buf.extend_from_slice(&(desc.classes.len() as u32).to_le_bytes());
    buf.extend_from_slice(&(dim as u64).to_le_bytes());
    buf.extend_from_slice(&(labels.len() as u64).to_le_bytes());
    labels
        .iter()
        .for_each(|l| buf.extend_from_slice(&l.to_le_bytes()));
    params
        .iter()
        .for_each(|p| buf.extend_from_slice(&p.to_le_bytes()));
    fs::write(path, &buf).map_err(|e| Error::io(path, e))?;
    let dpath = descriptor_path(path);
    let json = serde_json::to_vec_pretty(&desc).map_err(|e| Error::json(&dpath, e))?;
    fs::write(&dpath, json).map_err(|e| Error::io(&dpath, e))?;
    Ok(())
}

struct Reader<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::format(
                self.path,
                format!("truncated at byte {} (need {n} more)", self.pos),
            ));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(
            n.checked_mul(8)
                .ok_or_else(|| Error::format(self.path, "size overflow"))?,
        )?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }
}

pub fn read_model(path: &Path) -> Result<Model> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let dpath = descriptor_path(path);
    let djson = fs::read(&dpath).map_err(|e| Error::io(&dpath, e))?;
    let desc: ModelDescriptor =
        serde_json::from_slice(&djson).map_err(|e| Error::json(&dpath, e))?;
    let mut r = Reader {
        path,
        bytes: &bytes,
        pos: 0,
    };
    if r.take(4)? != MAGIC {
        return Err(Error::format(path, "bad magic bytes"));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::format(
            path,
            format!("unsupported version {version}"),
        ));
    }
    let kind = r.u32()?;
    let n_classes = r.u32()? as usize;
    let dim = r.u64()? as usize;
    let n_rows = r.u64()? as usize;
    if kind != kind_code(desc.kind) || n_classes != desc.classes.len() || dim != desc.dim {
        return Err(Error::format(
            path,
            "binary header disagrees with descriptor",
        ));
    }
    let model = match desc.kind {
        ModelKind::Centroid => {
            let p = r.f64s(n_classes * dim)?;
            Model::Centroid(CentroidModel {
                classes: desc.classes,
                centroids: p.chunks(dim.max(1)).map(<[f64]>::to_vec).collect(),
                distance: desc.distance.unwrap_or_default(),
            })
        }
        ModelKind::Knn => {
            let mut row_class = Vec::with_capacity(n_rows);
            for _ in 0..n_rows {
                let c = r.u32()? as usize;
                if c >= n_classes {
                    return Err(Error::format(path, format!("class index {c} out of range")));
                }
                row_class.push(c);
            }
            let p = r.f64s(n_rows * dim)?;
            Model::Knn(KnnModel {
                k: desc
                    .k
                    .ok_or_else(|| Error::format(&dpath, "k-NN descriptor lacks k"))?,
                classes: desc.classes,
                rows: p.chunks(dim.max(1)).map(<[f64]>::to_vec).collect(),
                row_class,
            })
        }
        ModelKind::Softmax => {
            let weights = r.f64s(n_classes * dim)?;
            let bias = r.f64s(n_classes)?;
            let feature_mean = r.f64s(dim)?;
            let feature_scale = r.f64s(dim)?;
            Model::Softmax(SoftmaxModel {
                classes: desc.classes,
                weights,
                bias,
                feature_mean,
                feature_scale,
                hyper: desc.softmax.ok_or_else(|| {
                    Error::format(&dpath, "softmax descriptor lacks hyperparameters")
                })?,
                loss_history: desc.loss_history,
            })
        }
    };
    if r.pos != bytes.len() {
        return Err(Error::format(
            path,
            format!("{} trailing bytes after parameters", bytes.len() - r.pos),
        ));
    }
    Ok(model)
}
