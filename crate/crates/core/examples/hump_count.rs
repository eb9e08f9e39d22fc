//! Envelope humps of a CFO-rotated chip stream.
//!
//! A ±1 chip stream is rotated by a small carrier offset Δf. The I component is
//! then the chip stream times cos(2πΔf·t), so its envelope is |cos(2πΔf·t)|:
//! one hump per half cycle, 2·Δf humps per second.
//!
//! ```text
//! cargo run --example hump_count
//! ```

use std::f64::consts::PI;

use epsfp::device::{transmit_baseband, Baseband, DeviceProfile};
use epsfp::eps::{count_humps, extract_envelope, EpsConfig};
use epsfp::signal::RngStream;

const FS: f64 = 1e6;
const CHIP_RATE: f64 = 100e3;
const DURATION_S: f64 = 0.01;

/// Constant-modulus NRZ chip stream with seeded random signs.
pub fn chip_stream(seed: u64) -> Baseband {
    let n = (FS * DURATION_S) as usize;
    let per_chip = (FS / CHIP_RATE) as usize;
    let mut rng = RngStream::new(seed, 0);
    let mut phase = vec![0.0; n];
    for chunk in phase.chunks_mut(per_chip) {
        let p = if rng.below(2) == 0 { 0.0 } else { PI };
        chunk.fill(p);
    }
    Baseband {
        amplitude: vec![1.0; n],
        phase,
        sample_rate_hz: FS,
    }
}

pub fn envelope_config() -> EpsConfig {
    EpsConfig {
        decimation_factor: 10,
        n_bins: 1024,
        min_frame_len: 1024,
        ..EpsConfig::default()
    }
}

/// (Δf, counted humps, expected 2·Δf·T).
pub fn run() -> epsfp::Result<Vec<(f64, usize, f64)>> {
    let baseband = chip_stream(7);
    let cfg = envelope_config();
    let mut out = Vec::new();
    for df in [50.0, 100.0, 200.0] {
        let device = DeviceProfile::pure_cfo("dut", df);
        let frame = transmit_baseband(&device, &baseband, 0.0, &RngStream::new(1, 0))?;
        let env = extract_envelope(&frame.i_component(), FS, &cfg)?;
        out.push((df, count_humps(&env.values), 2.0 * df * DURATION_S));
    }
    Ok(out)
}

fn main() -> epsfp::Result<()> {
    println!("{:>8} {:>8} {:>8}", "cfo_hz", "humps", "2*df*T");
    for (df, humps, expected) in run()? {
        println!("{df:>8} {humps:>8} {expected:>8}");
    }
    Ok(())
}
