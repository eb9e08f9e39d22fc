//! One device seen through every channel preset.
//!
//! Multipath phase, path loss and noise reshape the raw samples, so raw-IQ rows
//! of the same device barely correlate across domains, while its EPS rows stay
//! nearly identical.
//!
//! ```text
//! cargo run --example channel_invariance
//! ```

use epsfp::channel::{apply_channel, make_domain, ChannelPreset};
use epsfp::device::{make_population, transmit_frame, WaveformSpec};
use epsfp::eps::{extract_eps, raw_iq_feature, EpsConfig, DEFAULT_RAW_IQ_WINDOW};
use epsfp::signal::{cosine_similarity, RngStream};

/// Mean pairwise cosine similarity across presets: (EPS, raw IQ).
pub fn run() -> epsfp::Result<(f64, f64)> {
    let root = RngStream::new(11, 0);
    let device = make_population(2, 500.0, &root.derive_label("population"))?.remove(0);
    let spec = WaveformSpec::default();
    let cfg = EpsConfig::default();
    let mut eps_rows = Vec::new();
    let mut raw_rows = Vec::new();
    for preset in ChannelPreset::ALL {
        let channel = make_domain(preset.as_str(), preset, &root.derive_label(preset.as_str()));
        let tx = transmit_frame(&device, &spec, 720.0, &root.derive_label("frame"))?;
        let rx = apply_channel(&tx, &channel.for_frame(0))?;
        eps_rows.push(extract_eps(&rx, &cfg)?.to_row());
        raw_rows.push(raw_iq_feature(&rx, DEFAULT_RAW_IQ_WINDOW)?);
    }
    let mean_pairwise = |rows: &[Vec<f64>]| {
        let mut sum = 0.0;
        let mut n = 0;
        for a in 0..rows.len() {
            for b in a + 1..rows.len() {
                sum += cosine_similarity(&rows[a], &rows[b]);
                n += 1;
            }
        }
        sum / n as f64
    };
    Ok((mean_pairwise(&eps_rows), mean_pairwise(&raw_rows)))
}

fn main() -> epsfp::Result<()> {
    let (eps, raw) = run()?;
    println!("mean cross-domain cosine similarity: EPS {eps:.4}, raw IQ {raw:.4}");
    Ok(())
}
