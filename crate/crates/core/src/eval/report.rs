use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use super::TOOL_VERSION;
use crate::classifier::{ConfusionMatrix, ModelKind, ModelSpec, Representation};
use crate::error::{Error, Result};

pub const REPORT_VERSION: u32 = 1;

/// Note attached to every report about what the synthetic domains can and
/// cannot stand in for.
pub const MODELING_NOTE: &str = "capture days and enrollment/deployment sessions are modeled only by re-seeding noise and redrawing multipath";

/// Wall-clock details of a run. Everything outside this field is a pure
/// function of the inputs and seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub created_unix_s: u64,
    pub threads: usize,
}

impl RunInfo {
    pub fn now() -> Self {
        RunInfo {
            created_unix_s: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            threads: rayon::current_num_threads(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub report_version: u32,
    pub tool_version: String,
    pub train_domain: String,
    pub test_domain: String,
    pub train_file: String,
    pub test_file: String,
    /// True when train and test rows come from the same file (cross-validated).
    pub same_domain: bool,
    pub representation: Representation,
    pub model: ModelKind,
    pub model_spec: ModelSpec,
    /// Fold count for same-domain reports, `None` for a single split.
    pub k_folds: Option<usize>,
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    /// Rows are true devices, columns predictions; row sums are test counts.
    pub confusion: ConfusionMatrix,
    pub per_device_accuracy: BTreeMap<String, f64>,
    pub config_hash: String,
    pub train_rows: usize,
    pub test_rows: usize,
    pub seed: u64,
    pub notes: Vec<String>,
    pub run_info: RunInfo,
}

impl EvalReport {
    /// Equality of everything except [`RunInfo`].
    pub fn same_results(&self, other: &EvalReport) -> bool {
        let mut a = self.clone();
        a.run_info = other.run_info.clone();
        a == *other
    }
}

pub(crate) fn per_device(confusion: &ConfusionMatrix) -> BTreeMap<String, f64> {
    confusion
        .classes
        .iter()
        .cloned()
        .zip(confusion.per_class_accuracy())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarmupPoint {
    pub capture_time_s: f64,
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarmupReport {
    pub report_version: u32,
    pub tool_version: String,
    pub scenario: String,
    pub seed: u64,
    pub representation: Representation,
    pub model: ModelKind,
    pub train_time_s: f64,
    pub train_day: u64,
    pub test_day: u64,
    pub frames_per_device: usize,
    /// Cross-validated accuracy on the training capture itself.
    pub baseline_accuracy: f64,
    pub baseline_fold_accuracies: Vec<f64>,
    pub points: Vec<WarmupPoint>,
    /// Accuracy never drops as capture time approaches the training time.
    pub monotone: bool,
    pub notes: Vec<String>,
    pub run_info: RunInfo,
}

impl WarmupReport {
    pub fn accuracies(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.accuracy).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub train_domain: String,
    pub test_domain: String,
    pub model: ModelKind,
    pub representation: Representation,
    pub same_domain: bool,
    pub mean_accuracy: f64,
    pub tool_version: String,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummarySection {
    pub representation: Representation,
    pub rows: Vec<SummaryRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub report_version: u32,
    pub tool_version: String,
    pub sections: Vec<SummarySection>,
    pub warnings: Vec<String>,
}

impl Summary {
    pub fn n_rows(&self) -> usize {
        self.sections.iter().map(|s| s.rows.len()).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "representation,train_domain,test_domain,model,same_domain,mean_accuracy,tool_version,source\n",
        );
        for s in &self.sections {
            for r in &s.rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    r.representation,
                    r.train_domain,
                    r.test_domain,
                    r.model.as_str(),
                    r.same_domain,
                    r.mean_accuracy,
                    r.tool_version,
                    r.source
                ));
            }
        }
        out
    }
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut json = serde_json::to_vec_pretty(value).map_err(|e| Error::json(path, e))?;
    json.push(b'\n');
    std::fs::write(path, json).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| Error::json(path, e))
}

pub(crate) fn tool_version() -> String {
    TOOL_VERSION.to_string()
}
