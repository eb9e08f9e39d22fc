//! Energy detection of frames in a longer noisy capture.
//!
//! ```text
//! cargo run --example packet_detection
//! ```

use epsfp::channel::{apply_channel, ChannelConfig};
use epsfp::dataset::{detect_packets, PacketIndex};
use epsfp::device::{transmit_frame, DeviceProfile, WaveformSpec};
use epsfp::signal::{ComplexSample, IqFrame, RngStream};

/// Burst start positions and the detector output.
pub fn run(seed: u64) -> epsfp::Result<(Vec<(usize, usize)>, PacketIndex)> {
    let spec = WaveformSpec {
        frame_bits: 40,
        ..WaveformSpec::default()
    };
    let device = DeviceProfile::pure_cfo("dut", 12_000.0);
    let rng = RngStream::new(seed, 0);
    let burst = transmit_frame(&device, &spec, 720.0, &rng)?;
    let len = burst.len();

    let mut samples = vec![ComplexSample::new(0.0, 0.0); 12 * len];
    let mut truth = Vec::new();
    let mut start = len / 2;
    while start + len < samples.len() {
        samples[start..start + len].copy_from_slice(&burst.samples);
        truth.push((start, len));
        start += len + len / 2 + (seed as usize * 37) % len;
    }
    let capture = IqFrame::new(samples, spec.sample_rate_hz);
    let noisy = apply_channel(
        &capture,
        &ChannelConfig {
            snr_db: Some(20.0),
            seed: rng.derive_label("noise"),
            ..ChannelConfig::identity()
        },
    )?;
    let index = detect_packets(&noisy, 6.0, 64, len / 2)?;
    Ok((truth, index))
}

fn main() -> epsfp::Result<()> {
    let (truth, index) = run(1)?;
    println!("noise floor {:.3e}", index.noise_floor);
    for (p, (start, len)) in index.packets.iter().zip(&truth) {
        println!(
            "detected {:>7}..{:<7} true {:>7}..{:<7}",
            p.start_sample,
            p.end_sample(),
            start,
            start + len
        );
    }
    println!(
        "{} detected, {} transmitted",
        index.packets.len(),
        truth.len()
    );
    Ok(())
}
