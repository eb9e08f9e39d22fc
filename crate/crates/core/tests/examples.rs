//! Runs the fast examples so they cannot rot.

#![allow(dead_code)]

#[path = "../examples/channel_invariance.rs"]
mod channel_invariance;
#[path = "../examples/classifiers.rs"]
mod classifiers;
#[path = "../examples/cross_domain.rs"]
mod cross_domain;
#[path = "../examples/end_to_end.rs"]
mod end_to_end;
#[path = "../examples/eps_extract.rs"]
mod eps_extract;
#[path = "../examples/hump_count.rs"]
mod hump_count;
#[path = "../examples/packet_detection.rs"]
mod packet_detection;
#[path = "../examples/recording_roundtrip.rs"]
mod recording_roundtrip;
#[path = "../examples/toy_envelope.rs"]
mod toy_envelope;
#[path = "../examples/warmup_drift.rs"]
mod warmup_drift;

#[test]
fn hump_count_matches_twice_offset_times_duration() {
    for (_, humps, expected) in hump_count::run().unwrap() {
        assert_eq!(humps as f64, expected);
    }
}

#[test]
fn toy_envelope_tracks_closed_form() {
    let results = toy_envelope::run().unwrap();
    assert!(results[0].degenerate && results[0].humps == 0);
    for r in &results[1..] {
        assert!(r.relative_rms_error < 0.05);
        assert_eq!(
            r.humps as f64,
            (2.0 * r.cfo_hz * toy_envelope::DURATION_S).round()
        );
    }
}

#[test]
fn eps_extract_peak() {
    let p = eps_extract::run(9_800.0).unwrap();
    assert!((p.i_peak_hz - 19_600.0).abs() <= p.bin_resolution_hz);
    assert!((p.q_peak_hz - 19_600.0).abs() <= p.bin_resolution_hz);
}

#[test]
fn channel_invariance_contrast() {
    let (eps, raw) = channel_invariance::run().unwrap();
    assert!(eps > 0.98 && raw < 0.9);
}

#[test]
fn packet_detection_finds_every_burst() {
    let (truth, index) = packet_detection::run(3).unwrap();
    assert_eq!(index.packets.len(), truth.len());
}

#[test]
fn recording_roundtrip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    assert!(recording_roundtrip::run(dir.path()).unwrap());
}

#[test]
fn classifiers_agree() {
    let dir = tempfile::tempdir().unwrap();
    let (scores, same) = classifiers::run(dir.path(), 5, 10).unwrap();
    assert!(same);
    assert!(scores.iter().all(|&(_, acc)| acc > 0.9), "{scores:?}");
}

#[test]
fn end_to_end_summary() {
    let dir = tempfile::tempdir().unwrap();
    let s = end_to_end::run(dir.path()).unwrap();
    assert_eq!(s.sections.len(), 2);
    assert_eq!(s.n_rows(), 2 * end_to_end::scenario().domains.len());
    assert!(dir
        .path()
        .join("summary")
        .join(epsfp::eval::MEAN_EPS_CSV_FILE)
        .exists());
}

#[test]
fn warmup_drift_recovers() {
    let r = warmup_drift::run(10).unwrap();
    let acc = r.accuracies();
    assert!(acc.first() < acc.last());
}

#[test]
fn cross_domain_grid() {
    let grid = cross_domain::run(5, 6).unwrap();
    for (e, r) in grid[0].iter().flatten().zip(grid[1].iter().flatten()) {
        assert!(e >= r);
    }
}
