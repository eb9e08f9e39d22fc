use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pipeline::{extract_into, Extractor, FrameGenerator};
use super::report::{
    per_device, read_json, tool_version, write_json, EvalReport, RunInfo, Summary, SummaryRow,
    SummarySection, WarmupPoint, WarmupReport, MODELING_NOTE, REPORT_VERSION,
};
use super::scenario::Scenario;
use crate::classifier::{
    crossval, evaluate_split, FeatureMatrix, ModelKind, ModelSpec, Representation,
};
use crate::dataset::{
    read_feature_meta, read_feature_set, write_feature_set, RecordingMeta, RecordingReader,
    RecordingWriter, FORMAT_VERSION,
};
use crate::eps::EpsConfig;
use crate::error::{Error, Result};
use crate::signal::{IqFrame, RngStream};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SCENARIO_FILE: &str = "scenario.json";
pub const POPULATION_FILE: &str = "population.json";

/// Frames written per batch while simulating.
const WRITE_BATCH: usize = 128;

/// One frame inside a recording file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Relative to the dataset directory.
    pub file: String,
    pub offset: u64,
    pub length: u64,
    pub device_id: String,
    pub domain: String,
    pub capture_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub tool_version: String,
    pub scenario: String,
    pub seed: u64,
    pub sample_rate_hz: f64,
    pub domains: Vec<String>,
    pub devices: Vec<String>,
    pub frames: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn load(dataset: &Path) -> Result<Self> {
        let path = dataset.join(MANIFEST_FILE);
        let m: Manifest = read_json(&path)?;
        if m.format_version != FORMAT_VERSION {
            return Err(Error::format(
                &path,
                format!("unsupported format_version {}", m.format_version),
            ));
        }
        Ok(m)
    }
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Generates every (domain, device) recording of a scenario under `out`, plus
/// `manifest.json`, `scenario.json` and `population.json`.
pub fn cmd_simulate(scenario: &Scenario, out: &Path) -> Result<Manifest> {
    let gen = FrameGenerator::new(scenario)?;
    create_dir(out)?;
    write_json(&out.join(SCENARIO_FILE), scenario)?;
    write_json(&out.join(POPULATION_FILE), &gen.population())?;

    let n = scenario.frames_per_device_per_domain;
    let fs_hz = scenario.waveform.sample_rate_hz;
    let mut frames = Vec::with_capacity(scenario.domains.len() * gen.population().len() * n);
    for domain in &scenario.domains {
        let dir = out.join("recordings").join(&domain.name);
        create_dir(&dir)?;
        let channel = scenario.channel(domain);
        let slots = gen.domain_slots(domain, n);
        log::info!("simulating domain {} ({} frames)", domain.name, slots.len());
        for device_slots in slots.chunks(n) {
            let device_id = gen.population()[device_slots[0].device].device_id.clone();
            let rel = format!("recordings/{}/{}.iq", domain.name, device_id);
            let meta = RecordingMeta {
                format_version: FORMAT_VERSION,
                sample_rate_hz: fs_hz,
                center_freq_hz: 0.0,
                device_id: Some(device_id.clone()),
                domain_tag: domain.name.clone(),
                capture_time_s: device_slots[0].capture_time_s,
                sample_count: 0,
            };
            let mut writer = RecordingWriter::create(&out.join(&rel), meta)?;
            for batch in device_slots.chunks(WRITE_BATCH) {
                let batch_frames: Vec<IqFrame> = batch
                    .par_iter()
                    .map(|&s| gen.domain_frame(domain, &channel, s))
                    .collect::<Result<_>>()?;
                for (slot, f) in batch.iter().zip(&batch_frames) {
                    let offset = writer.write_samples(&f.samples)?;
                    frames.push(ManifestEntry {
                        file: rel.clone(),
                        offset,
                        length: f.len() as u64,
                        device_id: device_id.clone(),
                        domain: domain.name.clone(),
                        capture_time_s: slot.capture_time_s,
                    });
                }
            }
            writer.finish()?;
        }
    }
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        tool_version: tool_version(),
        scenario: scenario.name.clone(),
        seed: scenario.seed,
        sample_rate_hz: fs_hz,
        domains: scenario.domains.iter().map(|d| d.name.clone()).collect(),
        devices: gen
            .population()
            .iter()
            .map(|p| p.device_id.clone())
            .collect(),
        frames,
    };
    write_json(&out.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExtractOptions {
    pub representation: Option<Representation>,
    /// Overrides the EPS settings stored with the dataset's scenario.
    pub eps: Option<EpsConfig>,
    pub raw_iq_window: Option<usize>,
}

/// Path of the feature file for one domain.
pub fn feature_path(out: &Path, domain: &str, representation: Representation) -> PathBuf {
    out.join(format!("{domain}.{representation}.f32"))
}

/// One feature file per domain of a simulated dataset. An existing output
/// file produced with different settings is an error, never overwritten.
pub fn cmd_extract(dataset: &Path, out: &Path, opts: &ExtractOptions) -> Result<Vec<PathBuf>> {
    let manifest = Manifest::load(dataset)?;
    let scenario: Scenario = read_json(&dataset.join(SCENARIO_FILE))?;
    let representation = opts.representation.unwrap_or(Representation::Eps);
    let extractor = match representation {
        Representation::Eps => Extractor::Eps(opts.eps.clone().unwrap_or(scenario.eps)),
        Representation::RawIq => Extractor::RawIq {
            window: opts.raw_iq_window.unwrap_or(scenario.raw_iq_window),
        },
    };
    extractor.validate()?;
    let required = match &extractor {
        Extractor::Eps(cfg) => 2 * cfg.min_frame_len,
        Extractor::RawIq { window } => *window,
    };
    if let Some(e) = manifest
        .frames
        .iter()
        .find(|e| (e.length as usize) < required)
    {
        return Err(Error::TooShort {
            required,
            actual: e.length as usize,
        });
    }
    create_dir(out)?;
    let hash = extractor.config_hash();
    let paths: Vec<PathBuf> = manifest
        .domains
        .iter()
        .map(|d| feature_path(out, d, representation))
        .collect();
    for p in paths.iter().filter(|p| p.exists()) {
        let meta = read_feature_meta(p)?;
        if meta.config_hash != hash || meta.representation != representation {
            return Err(Error::invalid(format!(
                "{} was extracted with config {} ({}); refusing to overwrite with config {hash}",
                p.display(),
                meta.config_hash,
                meta.representation
            )));
        }
    }

    for (domain, path) in manifest.domains.iter().zip(&paths) {
        let entries: Vec<&ManifestEntry> = manifest
            .frames
            .iter()
            .filter(|e| &e.domain == domain)
            .collect();
        log::info!(
            "extracting {representation} for {domain} ({} frames)",
            entries.len()
        );
        let mut matrix = extractor.empty_matrix(manifest.sample_rate_hz);
        let mut reader: Option<(String, RecordingReader)> = None;
        for batch in entries.chunks(WRITE_BATCH) {
            let mut frames = Vec::with_capacity(batch.len());
            for e in batch {
                if reader.as_ref().is_none_or(|(f, _)| f != &e.file) {
                    reader = Some((
                        e.file.clone(),
                        RecordingReader::open(&dataset.join(&e.file))?,
                    ));
                }
                let (_, r) = reader.as_mut().expect("opened above");
                let mut frame = r.read_range(e.offset, e.length)?;
                frame.device_id = Some(e.device_id.clone());
                frame.domain_tag = e.domain.clone();
                frame.capture_time_s = e.capture_time_s;
                frames.push(frame);
            }
            extract_into(&mut matrix, &extractor, &frames)?;
        }
        write_feature_set(&matrix, path)?;
    }
    Ok(paths)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluateOptions {
    pub model: ModelSpec,
    pub k_folds: usize,
    pub seed: u64,
}

impl Default for EvaluateOptions {
    fn default() -> Self {
        EvaluateOptions {
            model: ModelSpec::default(),
            k_folds: 5,
            seed: 0,
        }
    }
}

fn domain_name(m: &FeatureMatrix, path: &Path) -> String {
    let tags: BTreeSet<&str> = m.domain_tags.iter().map(String::as_str).collect();
    if tags.is_empty() || tags.contains("") {
        return file_stem(path);
    }
    tags.into_iter().collect::<Vec<_>>().join("+")
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn same_file(a: &Path, b: &Path) -> Result<bool> {
    let ca = fs::canonicalize(a).map_err(|e| Error::io(a, e))?;
    let cb = fs::canonicalize(b).map_err(|e| Error::io(b, e))?;
    Ok(ca == cb)
}

fn check_compatible(train: &FeatureMatrix, test: &FeatureMatrix, test_path: &Path) -> Result<()> {
    if train.dim != test.dim || train.representation != test.representation {
        return Err(Error::invalid(format!(
            "{}: {} rows of {} features cannot be scored by a model trained on {} rows of {}",
            test_path.display(),
            test.representation,
            test.dim,
            train.representation,
            train.dim
        )));
    }
    if train.config_hash != test.config_hash {
        return Err(Error::invalid(format!(
            "{}: extraction config {} differs from training config {}",
            test_path.display(),
            test.config_hash,
            train.config_hash
        )));
    }
    let classes: BTreeSet<&String> = train.labels.iter().collect();
    let test_classes: BTreeSet<&String> = test.labels.iter().collect();
    if classes.is_disjoint(&test_classes) {
        return Err(Error::invalid(format!(
            "{}: no device label in common with the training set",
            test_path.display()
        )));
    }
    Ok(())
}

/// `<out>/<train stem>__<test stem>.<model>.report.json`, where `cmd_evaluate`
/// writes the report for one pair; the confusion CSV sits next to it.
pub fn report_path(out: &Path, train: &Path, test: &Path, model: ModelKind) -> PathBuf {
    out.join(format!(
        "{}__{}.{}.report.json",
        file_stem(train),
        file_stem(test),
        model.as_str()
    ))
}

/// Same-domain cross-validation when a test file is the training file (or no
/// test file is given); otherwise one cross-domain split per test file.
/// Writes each report to [`report_path`] with its confusion matrix as CSV.
pub fn cmd_evaluate(
    train_path: &Path,
    test_paths: &[PathBuf],
    out: &Path,
    opts: &EvaluateOptions,
) -> Result<Vec<EvalReport>> {
    let train = read_feature_set(train_path)?;
    let rng = RngStream::new(opts.seed, 0).derive_label("evaluate");
    let tests: Vec<PathBuf> = if test_paths.is_empty() {
        vec![train_path.to_path_buf()]
    } else {
        test_paths.to_vec()
    };
    create_dir(out)?;
    let mut reports = Vec::with_capacity(tests.len());
    for test_path in &tests {
        let same = same_file(train_path, test_path)?;
        let report = if same {
            let cv = crossval(&train, opts.k_folds, &opts.model, &rng)?;
            let per_device_accuracy = per_device(&cv.confusion);
            EvalReport {
                report_version: REPORT_VERSION,
                tool_version: tool_version(),
                train_domain: domain_name(&train, train_path),
                test_domain: domain_name(&train, train_path),
                train_file: file_name(train_path),
                test_file: file_name(test_path),
                same_domain: true,
                representation: train.representation,
                model: opts.model.kind,
                model_spec: opts.model,
                k_folds: Some(opts.k_folds),
                fold_accuracies: cv.fold_accuracies,
                mean_accuracy: cv.mean_accuracy,
                confusion: cv.confusion,
                per_device_accuracy,
                config_hash: train.config_hash.clone(),
                train_rows: train.n_rows(),
                test_rows: train.n_rows(),
                seed: opts.seed,
                notes: vec![MODELING_NOTE.to_string()],
                run_info: RunInfo::now(),
            }
        } else {
            let test = read_feature_set(test_path)?;
            check_compatible(&train, &test, test_path)?;
            let cm = evaluate_split(&train, &test, &opts.model, &rng)?;
            let acc = cm.accuracy();
            EvalReport {
                report_version: REPORT_VERSION,
                tool_version: tool_version(),
                train_domain: domain_name(&train, train_path),
                test_domain: domain_name(&test, test_path),
                train_file: file_name(train_path),
                test_file: file_name(test_path),
                same_domain: false,
                representation: train.representation,
                model: opts.model.kind,
                model_spec: opts.model,
                k_folds: None,
                fold_accuracies: vec![acc],
                mean_accuracy: acc,
                per_device_accuracy: per_device(&cm),
                confusion: cm,
                config_hash: train.config_hash.clone(),
                train_rows: train.n_rows(),
                test_rows: test.n_rows(),
                seed: opts.seed,
                notes: vec![MODELING_NOTE.to_string()],
                run_info: RunInfo::now(),
            }
        };
        let json = report_path(out, train_path, test_path, report.model);
        write_json(&json, &report)?;
        let csv = json.with_file_name(
            json.file_name()
                .expect("has name")
                .to_string_lossy()
                .replace(".report.json", ".confusion.csv"),
        );
        fs::write(&csv, report.confusion.to_csv()).map_err(|e| Error::io(&csv, e))?;
        reports.push(report);
    }
    Ok(reports)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct WarmupOptions {
    /// Overrides the scenario's capture times.
    pub capture_times_s: Option<Vec<f64>>,
    pub representation: Option<Representation>,
}

pub const WARMUP_REPORT_FILE: &str = "warmup.report.json";
pub const WARMUP_CSV_FILE: &str = "warmup_accuracy.csv";

/// Trains on frames captured at the stabilized training time and tests on
/// frames captured at each requested time after power-on.
pub fn run_warmup(scenario: &Scenario, opts: &WarmupOptions) -> Result<WarmupReport> {
    scenario.validate()?;
    let w = &scenario.warmup;
    let times = opts
        .capture_times_s
        .clone()
        .unwrap_or_else(|| w.capture_times_s.clone());
    scenario.check_capture_times(&times)?;
    if w.frames_per_device < scenario.k_folds {
        return Err(Error::invalid(
            "warm-up frames_per_device must be >= k_folds",
        ));
    }
    let representation = opts.representation.unwrap_or(Representation::Eps);
    let extractor = Extractor::for_scenario(scenario, representation);
    let gen = FrameGenerator::new(scenario)?;
    let rng = scenario.root_rng().derive_label("warmup-eval");

    let train = gen.warmup_features(
        w.train_day,
        "train",
        w.train_time_s,
        w.frames_per_device,
        &extractor,
    )?;
    let baseline = crossval(&train, scenario.k_folds, &scenario.classifier, &rng)?;
    let mut points = Vec::with_capacity(times.len());
    for &t in &times {
        log::info!("warm-up test capture at {t} s");
        let test = gen.warmup_features(w.test_day, "test", t, w.frames_per_device, &extractor)?;
        let cm = evaluate_split(&train, &test, &scenario.classifier, &rng)?;
        points.push(WarmupPoint {
            capture_time_s: t,
            accuracy: cm.accuracy(),
            confusion: cm,
        });
    }
    let monotone = points.windows(2).all(|p| p[1].accuracy >= p[0].accuracy);
    Ok(WarmupReport {
        report_version: REPORT_VERSION,
        tool_version: tool_version(),
        scenario: scenario.name.clone(),
        seed: scenario.seed,
        representation,
        model: scenario.classifier.kind,
        train_time_s: w.train_time_s,
        train_day: w.train_day,
        test_day: w.test_day,
        frames_per_device: w.frames_per_device,
        baseline_accuracy: baseline.mean_accuracy,
        baseline_fold_accuracies: baseline.fold_accuracies,
        points,
        monotone,
        notes: vec![MODELING_NOTE.to_string()],
        run_info: RunInfo::now(),
    })
}

/// [`run_warmup`], writing the report and an accuracy-vs-time CSV to `out`.
pub fn cmd_warmup(scenario: &Scenario, out: &Path, opts: &WarmupOptions) -> Result<WarmupReport> {
    let report = run_warmup(scenario, opts)?;
    create_dir(out)?;
    write_json(&out.join(WARMUP_REPORT_FILE), &report)?;
    let mut csv = String::from("capture_time_s,accuracy\n");
    for p in &report.points {
        csv.push_str(&format!("{},{}\n", p.capture_time_s, p.accuracy));
    }
    let path = out.join(WARMUP_CSV_FILE);
    fs::write(&path, csv).map_err(|e| Error::io(&path, e))?;
    Ok(report)
}

pub const SUMMARY_JSON_FILE: &str = "summary.json";
pub const SUMMARY_CSV_FILE: &str = "summary.csv";
pub const MEAN_EPS_CSV_FILE: &str = "mean_eps.csv";

/// Merges evaluation reports into one table keyed by (train domain, test
/// domain, model, representation), one section per representation. EPS
/// feature files, if given, are reduced to a per-device, per-domain mean
/// spectrum CSV. Reports from another tool version are kept but flagged.
pub fn cmd_report(reports: &[PathBuf], features: &[PathBuf], out: &Path) -> Result<Summary> {
    if reports.is_empty() {
        return Err(Error::invalid("report needs at least one report file"));
    }
    let mut warnings = Vec::new();
    let mut table: BTreeMap<(Representation, String, String, String), SummaryRow> = BTreeMap::new();
    for path in reports {
        let r: EvalReport = read_json(path)?;
        if r.tool_version != tool_version() || r.report_version != REPORT_VERSION {
            warnings.push(format!(
                "{}: written by tool {} (report version {}), this is {} (report version {REPORT_VERSION})",
                path.display(),
                r.tool_version,
                r.report_version,
                tool_version()
            ));
        }
        let key = (
            r.representation,
            r.train_domain.clone(),
            r.test_domain.clone(),
            r.model.as_str().to_string(),
        );
        let row = SummaryRow {
            train_domain: r.train_domain,
            test_domain: r.test_domain,
            model: r.model,
            representation: r.representation,
            same_domain: r.same_domain,
            mean_accuracy: r.mean_accuracy,
            tool_version: r.tool_version,
            source: file_name(path),
        };
        if let Some(prev) = table.insert(key, row) {
            warnings.push(format!(
                "{} supersedes {} for the same (train, test, model, representation)",
                file_name(path),
                prev.source
            ));
        }
    }
    let mut sections: Vec<SummarySection> = Vec::new();
    for ((repr, ..), row) in table {
        match sections.last_mut() {
            Some(s) if s.representation == repr => s.rows.push(row),
            _ => sections.push(SummarySection {
                representation: repr,
                rows: vec![row],
            }),
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    let summary = Summary {
        report_version: REPORT_VERSION,
        tool_version: tool_version(),
        sections,
        warnings,
    };
    create_dir(out)?;
    write_json(&out.join(SUMMARY_JSON_FILE), &summary)?;
    let csv = out.join(SUMMARY_CSV_FILE);
    fs::write(&csv, summary.to_csv()).map_err(|e| Error::io(&csv, e))?;
    if !features.is_empty() {
        write_mean_eps_csv(features, &out.join(MEAN_EPS_CSV_FILE))?;
    }
    Ok(summary)
}

/// Long-format CSV `device,domain,component,bin,frequency_hz,power` of the
/// mean EPS per device and domain.
pub fn write_mean_eps_csv(features: &[PathBuf], path: &Path) -> Result<()> {
    let mut out = String::from("device,domain,component,bin,frequency_hz,power\n");
    for fpath in features {
        let m = read_feature_set(fpath)?;
        if m.representation != Representation::Eps {
            return Err(Error::invalid(format!(
                "{}: mean spectra need EPS features, found {}",
                fpath.display(),
                m.representation
            )));
        }
        let n_bins = m.dim / 2;
        let mut groups: BTreeMap<(&str, &str), (Vec<f64>, usize)> = BTreeMap::new();
        for i in 0..m.n_rows() {
            let (sum, count) = groups
                .entry((&m.labels[i], &m.domain_tags[i]))
                .or_insert_with(|| (vec![0.0; m.dim], 0));
            for (s, &v) in sum.iter_mut().zip(m.row(i)) {
                *s += f64::from(v);
            }
            *count += 1;
        }
        for ((device, domain), (sum, count)) in groups {
            for (c, component) in ["I", "Q"].iter().enumerate() {
                for k in 0..n_bins {
                    let f = (k as f64 - (n_bins / 2) as f64) * m.bin_resolution_hz;
                    let v = sum[c * n_bins + k] / count as f64;
                    out.push_str(&format!("{device},{domain},{component},{k},{f},{v:e}\n"));
                }
            }
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
