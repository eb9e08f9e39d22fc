use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use sha2::{Digest, Sha256};

use epsfp::channel::ChannelPreset;
use epsfp::classifier::{ModelKind, Representation};
use epsfp::device::WaveformSpec;
use epsfp::eps::EpsConfig;
use epsfp::eval::*;

fn digest(path: &Path) -> String {
    hex::encode(Sha256::digest(fs::read(path).unwrap()))
}

/// Four devices, two domains, short frames: fast enough to run the full
/// pipeline several times.
fn small() -> Scenario {
    let mut s = Scenario::quick();
    s.population.n_devices = 4;
    s.domains = [ChannelPreset::Wired, ChannelPreset::Random3m]
        .iter()
        .map(|&p| DomainSpec::new(p.as_str(), p))
        .collect();
    s.frames_per_device_per_domain = 10;
    s
}

fn write_scenario(dir: &Path, s: &Scenario) -> PathBuf {
    let p = dir.join("scenario-in.json");
    fs::write(&p, serde_json::to_vec_pretty(s).unwrap()).unwrap();
    p
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_epsfp"))
}

#[test]
fn simulate_lists_every_frame() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = Scenario::quick();
    s.population.n_devices = 15;
    s.population.separation_hz = 500.0;
    s.domains.truncate(2);
    s.frames_per_device_per_domain = 100;
    // Short low-rate frames keep the 3000-frame dataset small on disk.
    s.waveform = WaveformSpec {
        bit_rate_bps: 100e3,
        frame_bits: 100,
        sample_rate_hz: 4.5e6,
        ..WaveformSpec::default()
    };
    let m = cmd_simulate(&s, dir.path()).unwrap();
    assert_eq!(m.frames.len(), 15 * 2 * 100);
    assert_eq!(m.devices.len(), 15);
    let back = Manifest::load(dir.path()).unwrap();
    assert_eq!(back, m);
    let first = &m.frames[0];
    let f = epsfp::dataset::read_recording_range(
        &dir.path().join(&first.file),
        first.offset,
        first.length,
    )
    .unwrap();
    assert_eq!(f.len() as u64, first.length);
}

#[test]
fn simulate_is_deterministic_and_seed_sensitive() {
    let s = small();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    cmd_simulate(&s, a.path()).unwrap();
    cmd_simulate(&s, b.path()).unwrap();
    let mut other = s.clone();
    other.seed += 1;
    cmd_simulate(&other, c.path()).unwrap();
    assert_eq!(
        digest(&a.path().join(MANIFEST_FILE)),
        digest(&b.path().join(MANIFEST_FILE))
    );
    let rec = "recordings/wired/dev01.iq";
    assert_eq!(digest(&a.path().join(rec)), digest(&b.path().join(rec)));
    assert_ne!(digest(&a.path().join(rec)), digest(&c.path().join(rec)));
}

#[test]
fn duplicate_domains_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = small();
    s.domains.push(s.domains[0].clone());
    assert!(cmd_simulate(&s, dir.path()).is_err());

    let cfg = write_scenario(dir.path(), &s);
    let err = dir.path().join("err.json");
    let status = bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .arg("--error-json")
        .arg(&err)
        .output()
        .unwrap()
        .status;
    assert!(!status.success());
    let body: serde_json::Value = serde_json::from_slice(&fs::read(&err).unwrap()).unwrap();
    assert_eq!(body["command"], "simulate");
    assert_eq!(body["kind"], "invalid_input");
    assert!(body["message"].as_str().unwrap().contains("duplicate"));
}

#[test]
fn extract_shapes_rerun_and_conflicts() {
    let s = small();
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let feat = dir.path().join("feat");
    cmd_simulate(&s, &data).unwrap();

    let eps = cmd_extract(&data, &feat, &ExtractOptions::default()).unwrap();
    let raw_opts = ExtractOptions {
        representation: Some(Representation::RawIq),
        ..ExtractOptions::default()
    };
    let raw = cmd_extract(&data, &feat, &raw_opts).unwrap();
    assert_eq!(eps.len(), 2);
    let e = epsfp::dataset::read_feature_set(&eps[0]).unwrap();
    let r = epsfp::dataset::read_feature_set(&raw[0]).unwrap();
    assert_eq!(e.dim, 2 * 4096);
    assert_eq!(r.dim, 2 * 8192);
    assert_eq!(e.n_rows(), 4 * 10);

    let before = digest(&eps[1]);
    cmd_extract(&data, &feat, &ExtractOptions::default()).unwrap();
    assert_eq!(digest(&eps[1]), before);

    let other = ExtractOptions {
        eps: Some(EpsConfig {
            smoothing_taps: 31,
            ..EpsConfig::default()
        }),
        ..ExtractOptions::default()
    };
    let err = cmd_extract(&data, &feat, &other).unwrap_err();
    assert!(err.to_string().contains("refusing to overwrite"));
    assert_eq!(digest(&eps[1]), before);
}

#[test]
fn extract_rejects_short_frames() {
    let mut s = small();
    s.waveform.frame_bits = 200;
    let dir = tempfile::tempdir().unwrap();
    cmd_simulate(&s, &dir.path().join("data")).unwrap();
    let err = cmd_extract(
        &dir.path().join("data"),
        &dir.path().join("f"),
        &ExtractOptions::default(),
    )
    .unwrap_err();
    assert!(matches!(err, epsfp::Error::TooShort { .. }));
}

#[test]
fn evaluate_same_and_cross_domain() {
    let s = small();
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let feat = dir.path().join("feat");
    let out = dir.path().join("reports");
    cmd_simulate(&s, &data).unwrap();
    let files = cmd_extract(&data, &feat, &ExtractOptions::default()).unwrap();

    let opts = EvaluateOptions::default();
    let reports = cmd_evaluate(&files[0], &files, &out, &opts).unwrap();
    let same = &reports[0];
    assert!(same.same_domain);
    assert_eq!(same.fold_accuracies.len(), 5);
    assert_eq!(same.confusion.total() as usize, same.test_rows);
    for (row, class) in same.confusion.counts.iter().zip(&same.confusion.classes) {
        assert_eq!(row.iter().sum::<u64>(), 10, "{class}");
    }
    let cross = &reports[1];
    assert!(!cross.same_domain);
    assert_eq!(cross.train_domain, "wired");
    assert_eq!(cross.test_domain, "random-3m");
    assert_eq!(cross.fold_accuracies.len(), 1);
    let trace: u64 = (0..4).map(|i| cross.confusion.counts[i][i]).sum();
    assert_eq!(
        cross.mean_accuracy,
        trace as f64 / cross.confusion.total() as f64
    );

    let path = report_path(&out, &files[0], &files[1], ModelKind::Centroid);
    let on_disk: EvalReport = read_json(&path).unwrap();
    assert_eq!(&on_disk, cross);
    let csv =
        fs::read_to_string(path.with_file_name("wired.eps__random-3m.eps.centroid.confusion.csv"))
            .unwrap();
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn evaluate_rejects_mismatched_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let mut a = epsfp::classifier::FeatureMatrix::new(4, Representation::Eps, "h");
    let mut b = epsfp::classifier::FeatureMatrix::new(4, Representation::Eps, "h");
    let mut c = epsfp::classifier::FeatureMatrix::new(6, Representation::Eps, "h");
    for i in 0..10 {
        let v = i as f64;
        a.push(&[1.0, v, 0.0, 0.0], &format!("a{}", i % 2), "x")
            .unwrap();
        b.push(&[1.0, v, 0.0, 0.0], &format!("b{}", i % 2), "y")
            .unwrap();
        c.push(&[1.0, v, 0.0, 0.0, 0.0, 0.0], &format!("a{}", i % 2), "z")
            .unwrap();
    }
    let pa = dir.path().join("a.f32");
    let pb = dir.path().join("b.f32");
    let pc = dir.path().join("c.f32");
    for (m, p) in [(&a, &pa), (&b, &pb), (&c, &pc)] {
        epsfp::dataset::write_feature_set(m, p).unwrap();
    }
    let out = dir.path().join("out");
    let opts = EvaluateOptions::default();
    let disjoint = cmd_evaluate(&pa, &[pb], &out, &opts).unwrap_err();
    assert!(disjoint.to_string().contains("no device label in common"));
    let dims = cmd_evaluate(&pa, &[pc], &out, &opts).unwrap_err();
    assert!(dims.to_string().contains("features"));
}

#[test]
fn report_grid_passthrough_and_sections() {
    let dir = tempfile::tempdir().unwrap();
    let template = EvalReport {
        report_version: REPORT_VERSION,
        tool_version: TOOL_VERSION.into(),
        train_domain: String::new(),
        test_domain: String::new(),
        train_file: String::new(),
        test_file: String::new(),
        same_domain: false,
        representation: Representation::Eps,
        model: ModelKind::Centroid,
        model_spec: Default::default(),
        k_folds: None,
        fold_accuracies: vec![0.5],
        mean_accuracy: 0.5,
        confusion: epsfp::classifier::ConfusionMatrix::new(vec!["d".into()]),
        per_device_accuracy: Default::default(),
        config_hash: "h".into(),
        train_rows: 1,
        test_rows: 1,
        seed: 0,
        notes: vec![],
        run_info: RunInfo::now(),
    };
    let locs = ["loc-a", "loc-b", "loc-c"];
    let mut files = Vec::new();
    for tr in locs {
        for te in locs {
            let mut r = template.clone();
            r.train_domain = tr.into();
            r.test_domain = te.into();
            r.same_domain = tr == te;
            let p = dir.path().join(format!("{tr}-{te}.json"));
            fs::write(&p, serde_json::to_vec(&r).unwrap()).unwrap();
            files.push(p);
        }
    }
    let s = cmd_report(&files, &[], &dir.path().join("grid")).unwrap();
    assert_eq!(s.n_rows(), 9);
    assert_eq!(s.sections.len(), 1);
    assert!(s.warnings.is_empty());

    let single = cmd_report(&files[..1], &[], &dir.path().join("one")).unwrap();
    assert_eq!(single.n_rows(), 1);
    assert_eq!(single.sections[0].rows[0].mean_accuracy, 0.5);

    let mut raw = template.clone();
    raw.representation = Representation::RawIq;
    raw.tool_version = "0.0.1".into();
    let p = dir.path().join("raw.json");
    fs::write(&p, serde_json::to_vec(&raw).unwrap()).unwrap();
    let mixed = cmd_report(&[files[0].clone(), p], &[], &dir.path().join("mixed")).unwrap();
    assert_eq!(mixed.sections.len(), 2);
    assert_eq!(mixed.sections[1].representation, Representation::RawIq);
    assert_eq!(mixed.warnings.len(), 1);
    let csv = fs::read_to_string(dir.path().join("mixed").join(SUMMARY_CSV_FILE)).unwrap();
    assert_eq!(csv.lines().count(), 3);

    assert!(cmd_report(&[], &[], &dir.path().join("none")).is_err());
}

#[test]
fn warmup_rejects_bad_schedules() {
    let s = small();
    let unsorted = WarmupOptions {
        capture_times_s: Some(vec![720.0, 60.0]),
        ..WarmupOptions::default()
    };
    assert!(run_warmup(&s, &unsorted).is_err());
    let beyond = WarmupOptions {
        capture_times_s: Some(vec![60.0, 1e5]),
        ..WarmupOptions::default()
    };
    assert!(run_warmup(&s, &beyond)
        .unwrap_err()
        .to_string()
        .contains("schedule"));
}

#[test]
fn warmup_at_stabilized_time_matches_baseline() {
    let mut s = Scenario::default();
    s.warmup.frames_per_device = 10;
    let opts = WarmupOptions {
        capture_times_s: Some(vec![720.0; 3]),
        ..WarmupOptions::default()
    };
    let r = run_warmup(&s, &opts).unwrap();
    let acc = r.accuracies();
    assert!(acc.iter().all(|&a| a == acc[0]));
    assert!((acc[0] - r.baseline_accuracy).abs() <= 0.01);
}

#[test]
fn warmup_across_days_is_above_chance_but_degraded() {
    let mut s = Scenario::default();
    s.warmup.frames_per_device = 10;
    s.warmup.train_time_s = 60.0;
    s.warmup.test_day = 1;
    let opts = WarmupOptions {
        capture_times_s: Some(vec![60.0]),
        ..WarmupOptions::default()
    };
    let early = run_warmup(&s, &opts).unwrap();
    let stable = run_warmup(
        &Scenario {
            warmup: WarmupSpec {
                frames_per_device: 10,
                ..WarmupSpec::default()
            },
            ..Scenario::default()
        },
        &WarmupOptions::default(),
    )
    .unwrap();
    let chance = 1.0 / s.population.n_devices as f64;
    let acc = early.points[0].accuracy;
    assert!(acc > chance, "{acc}");
    assert!(
        acc < stable.baseline_accuracy,
        "{acc} vs {}",
        stable.baseline_accuracy
    );
}

#[test]
fn cli_pipeline_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_scenario(dir.path(), &small());
    let run = |tag: &str| -> (Vec<String>, EvalReport) {
        let root = dir.path().join(tag);
        let ok = |c: &mut Command| assert!(c.output().unwrap().status.success());
        ok(bin()
            .args(["simulate", "--threads", "1", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(root.join("data")));
        ok(bin()
            .args(["extract", "--dataset"])
            .arg(root.join("data"))
            .arg("--out")
            .arg(root.join("feat")));
        let train = root.join("feat/wired.eps.f32");
        let test = root.join("feat/random-3m.eps.f32");
        ok(bin()
            .args(["evaluate", "--seed", "3", "--train"])
            .arg(&train)
            .arg("--test")
            .arg(&test)
            .arg("--out")
            .arg(root.join("rep")));
        let hashes = ["wired", "random-3m"]
            .iter()
            .map(|d| digest(&root.join(format!("feat/{d}.eps.f32"))))
            .collect();
        let report = read_json(&report_path(
            &root.join("rep"),
            &train,
            &test,
            ModelKind::Centroid,
        ))
        .unwrap();
        (hashes, report)
    };
    let (ha, ra) = run("a");
    let (hb, rb) = run("b");
    assert_eq!(ha, hb);
    assert!(ra.same_results(&rb));
}

#[test]
fn cli_usage_errors_exit_nonzero_with_json() {
    let dir = tempfile::tempdir().unwrap();
    let err = dir.path().join("e.json");
    let status = bin()
        .args(["evaluate", "--out", "x", "--error-json"])
        .arg(&err)
        .output()
        .unwrap()
        .status;
    assert!(!status.success());
    let body: serde_json::Value = serde_json::from_slice(&fs::read(&err).unwrap()).unwrap();
    assert_eq!(body["kind"], "usage");

    let missing = bin()
        .args(["warmup", "--out"])
        .arg(dir.path().join("w"))
        .output()
        .unwrap()
        .status;
    assert!(!missing.success());
}

#[test]
fn checked_in_scenarios_match_defaults() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    assert_eq!(
        Scenario::load(&dir.join("default.json")).unwrap(),
        Scenario::default()
    );
    assert_eq!(
        Scenario::load(&dir.join("quick.json")).unwrap(),
        Scenario::quick()
    );
}
