//! Accuracy against capture time after power-on.
//!
//! Devices power on with a CFO below their stable value and settle
//! exponentially. A model trained on stabilized frames misreads early frames
//! and recovers as the oscillators settle.
//!
//! ```text
//! cargo run --release --example warmup_drift
//! ```

use epsfp::device::cfo_at;
use epsfp::eval::{run_warmup, FrameGenerator, Scenario, WarmupOptions, WarmupReport};

pub fn scenario(frames_per_device: usize) -> Scenario {
    let mut s = Scenario::default();
    s.name = "warmup-example".into();
    s.warmup.frames_per_device = frames_per_device;
    s
}

pub fn run(frames_per_device: usize) -> epsfp::Result<WarmupReport> {
    run_warmup(&scenario(frames_per_device), &WarmupOptions::default())
}

fn main() -> epsfp::Result<()> {
    let s = scenario(20);
    let gen = FrameGenerator::new(&s)?;
    let first = &gen.population()[0];
    println!(
        "{} settles from {:.0} Hz to {:.0} Hz:",
        first.device_id, first.cfo_initial_hz, first.cfo_stable_hz
    );
    for t in [0.0, 60.0, 240.0, 480.0, 720.0] {
        println!("  t = {t:>5} s  cfo {:.1} Hz", cfo_at(first, t)?);
    }
    let r = run(20)?;
    println!(
        "baseline (cross-validated at {} s): {:.3}",
        r.train_time_s, r.baseline_accuracy
    );
    for p in &r.points {
        println!("  test at {:>5} s: {:.3}", p.capture_time_s, p.accuracy);
    }
    Ok(())
}
