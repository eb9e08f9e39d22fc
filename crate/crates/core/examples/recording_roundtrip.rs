//! Write and read back an IQ recording and a feature file.
//!
//! Recordings are headerless interleaved little-endian f32 I/Q with a JSON
//! sidecar; feature files are row-major f32 with a JSON sidecar holding shape,
//! labels and the extraction config hash.
//!
//! ```text
//! cargo run --example recording_roundtrip
//! ```

use std::path::Path;

use epsfp::classifier::{FeatureMatrix, Representation};
use epsfp::dataset::{
    read_feature_set, read_recording, read_recording_range, write_feature_set, write_recording,
};
use epsfp::device::{transmit_frame, DeviceProfile, WaveformSpec};
use epsfp::eps::{extract_eps, EpsConfig};
use epsfp::signal::RngStream;

/// Returns whether both round trips were exact.
pub fn run(dir: &Path) -> epsfp::Result<bool> {
    let device = DeviceProfile::pure_cfo("dev00", 11_000.0);
    let frame = transmit_frame(
        &device,
        &WaveformSpec::default(),
        720.0,
        &RngStream::new(5, 0),
    )?
    .with_labels(Some("dev00".into()), "bench");
    // Samples are stored as f32; quantize first so the comparison is exact.
    let mut frame = frame;
    for s in frame.samples.iter_mut() {
        s.re = f64::from(s.re as f32);
        s.im = f64::from(s.im as f32);
    }
    let rec = dir.join("capture.iq");
    write_recording(&rec, &frame)?;
    let back = read_recording(&rec)?;
    let part = read_recording_range(&rec, 100, 50)?;
    let recording_ok = back == frame && part.samples[..] == frame.samples[100..150];

    let cfg = EpsConfig::default();
    let eps = extract_eps(&frame, &cfg)?;
    let mut m = FeatureMatrix::new(2 * cfg.n_bins, Representation::Eps, cfg.config_hash());
    m.bin_resolution_hz = eps.bin_resolution_hz;
    m.push(&eps.to_row(), "dev00", "bench")?;
    let feat = dir.join("bench.eps.f32");
    write_feature_set(&m, &feat)?;
    let features_ok = read_feature_set(&feat)? == m;
    Ok(recording_ok && features_ok)
}

fn main() -> epsfp::Result<()> {
    let dir = std::env::temp_dir().join("epsfp-recording-example");
    std::fs::create_dir_all(&dir).map_err(|e| epsfp::Error::InvalidInput(e.to_string()))?;
    let ok = run(&dir)?;
    println!("files in {}: round trips exact = {ok}", dir.display());
    Ok(())
}
