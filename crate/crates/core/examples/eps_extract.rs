//! EPS of one simulated 802.11b-style frame.
//!
//! The dominant non-DC bin of both rows sits at ±2·CFO, the hump rate of the
//! envelope.
//!
//! ```text
//! cargo run --example eps_extract [cfo_hz]
//! ```

use epsfp::device::{transmit_frame, DeviceProfile, WaveformSpec};
use epsfp::eps::{dominant_sideband, extract_eps, peak_to_median, EpsConfig};
use epsfp::signal::RngStream;

pub struct Peak {
    pub cfo_hz: f64,
    pub bin_resolution_hz: f64,
    pub i_peak_hz: f64,
    pub q_peak_hz: f64,
    pub i_peak_to_median: f64,
}

pub fn run(cfo_hz: f64) -> epsfp::Result<Peak> {
    let spec = WaveformSpec::default();
    let device = DeviceProfile::pure_cfo("dut", cfo_hz);
    let frame = transmit_frame(&device, &spec, 720.0, &RngStream::new(3, 0))?;
    let eps = extract_eps(&frame, &EpsConfig::default())?;
    let peak_hz = |s: &[f64]| {
        dominant_sideband(s).map_or(0.0, |k| k.unsigned_abs() as f64 * eps.bin_resolution_hz)
    };
    Ok(Peak {
        cfo_hz,
        bin_resolution_hz: eps.bin_resolution_hz,
        i_peak_hz: peak_hz(&eps.i_spectrum),
        q_peak_hz: peak_hz(&eps.q_spectrum),
        i_peak_to_median: peak_to_median(&eps.i_spectrum),
    })
}

fn main() -> epsfp::Result<()> {
    let cfo = std::env::args()
        .nth(1)
        .map(|a| a.parse::<f64>().expect("cfo in Hz"))
        .unwrap_or(9_800.0);
    let p = run(cfo)?;
    println!(
        "cfo {:.1} Hz, bin spacing {:.1} Hz",
        p.cfo_hz, p.bin_resolution_hz
    );
    println!(
        "I peak at ±{:.1} Hz, Q peak at ±{:.1} Hz (2·cfo = {:.1})",
        p.i_peak_hz,
        p.q_peak_hz,
        2.0 * cfo
    );
    println!("I peak-to-median ratio {:.2e}", p.i_peak_to_median);
    Ok(())
}
