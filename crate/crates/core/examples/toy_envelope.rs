//! The slow toy signal a(t) = sin(2π·10·t) rotated by a sub-hertz offset.
//!
//! The extracted I envelope follows |cos(2πΔf·t)| and gains 2·Δf humps per
//! second; with no offset it stays flat and the EPS row is flagged degenerate.
//!
//! ```text
//! cargo run --example toy_envelope
//! ```

use std::f64::consts::PI;

use epsfp::eps::{count_humps, envelope_to_eps, extract_envelope, EpsConfig};

pub const FS: f64 = 2000.0;
pub const DURATION_S: f64 = 10.0;

pub fn toy_config() -> EpsConfig {
    EpsConfig {
        decimation_factor: 4,
        n_bins: 8192,
        min_frame_len: 1024,
        ..EpsConfig::default()
    }
}

pub struct ToyResult {
    pub cfo_hz: f64,
    /// RMS of (envelope - |cos(2πΔf·t)|), relative to the closed form's RMS.
    pub relative_rms_error: f64,
    pub humps: usize,
    pub degenerate: bool,
}

pub fn run() -> epsfp::Result<Vec<ToyResult>> {
    let cfg = toy_config();
    let n = (FS * DURATION_S) as usize;
    let mut out = Vec::new();
    for df in [0.0, 0.1, 0.2, 0.5] {
        let i: Vec<f64> = (0..n)
            .map(|k| {
                let t = k as f64 / FS;
                (2.0 * PI * 10.0 * t).sin() * (2.0 * PI * df * t).cos()
            })
            .collect();
        let env = extract_envelope(&i, FS, &cfg)?;
        let (mut err, mut norm) = (0.0, 0.0);
        for (k, v) in env.values.iter().enumerate() {
            let truth = (2.0 * PI * df * env.time_of(k)).cos().abs();
            err += (v - truth).powi(2);
            norm += truth * truth;
        }
        out.push(ToyResult {
            cfo_hz: df,
            relative_rms_error: (err / norm).sqrt(),
            humps: count_humps(&env.values),
            degenerate: envelope_to_eps(&env, &cfg)?.degenerate,
        });
    }
    Ok(out)
}

fn main() -> epsfp::Result<()> {
    println!(
        "{:>6} {:>10} {:>6} {:>10}",
        "df_hz", "rel_rms", "humps", "degenerate"
    );
    for r in run()? {
        println!(
            "{:>6} {:>10.5} {:>6} {:>10}",
            r.cfo_hz, r.relative_rms_error, r.humps, r.degenerate
        );
    }
    Ok(())
}
