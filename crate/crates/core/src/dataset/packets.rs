use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::IqFrame;

/// Length of the centered moving average applied to |x|² before thresholding.
pub const DEFAULT_SMOOTHING_WINDOW: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Packet {
    pub start_sample: usize,
    pub length_samples: usize,
    pub peak_power: f64,
    pub mean_power: f64,
}

impl Packet {
    pub fn end_sample(&self) -> usize {
        self.start_sample + self.length_samples
    }
}

/// Detected packets, sorted and non-overlapping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PacketIndex {
    pub packets: Vec<Packet>,
    /// 10th percentile of the smoothed power.
    pub noise_floor: f64,
    /// Set when the capture's power is constant, so no floor can be told
    /// apart from signal.
    pub degenerate: bool,
}

pub fn detect_packets(
    capture: &IqFrame,
    threshold_db_above_noise: f64,
    min_gap_samples: usize,
    min_len_samples: usize,
) -> Result<PacketIndex> {
    detect_packets_with(
        capture,
        threshold_db_above_noise,
        min_gap_samples,
        min_len_samples,
        DEFAULT_SMOOTHING_WINDOW,
    )
}

/// Energy detector: runs where the smoothed power exceeds the noise floor by
/// the threshold; runs closer than `min_gap_samples` are merged and runs
/// shorter than `min_len_samples` dropped.
pub fn detect_packets_with(
    capture: &IqFrame,
    threshold_db_above_noise: f64,
    min_gap_samples: usize,
    min_len_samples: usize,
    smoothing_window: usize,
) -> Result<PacketIndex> {
    capture.validate()?;
    if smoothing_window == 0 || min_len_samples == 0 {
        return Err(Error::invalid("smoothing window and min_len must be > 0"));
    }
    if !threshold_db_above_noise.is_finite() {
        return Err(Error::invalid("threshold must be finite"));
    }
    let required = 10 * min_len_samples;
    if capture.len() < required {
        return Err(Error::TooShort {
            required,
            actual: capture.len(),
        });
    }
    let power: Vec<f64> = capture.samples.iter().map(|s| s.norm_sqr()).collect();
    let smoothed = moving_average(&power, smoothing_window);

    let mut sorted = smoothed.clone();
    sorted.sort_by(f64::total_cmp);
    let noise_floor = sorted[sorted.len() / 10];
    let max = sorted[sorted.len() - 1];
    let min = sorted[0];
    if max - min <= 1e-12 * max.abs().max(f64::MIN_POSITIVE) {
        log::warn!("packet detection: capture power is constant, no packets reported");
        return Ok(PacketIndex {
            packets: Vec::new(),
            noise_floor,
            degenerate: true,
        });
    }
    let threshold = noise_floor * 10f64.powf(threshold_db_above_noise / 10.0);

    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut start = None;
    for (k, &v) in smoothed.iter().enumerate() {
        match (v > threshold, start) {
            (true, None) => start = Some(k),
            (false, Some(s)) => {
                runs.push((s, k));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, smoothed.len()));
    }

    let mut merged: Vec<(usize, usize)> = Vec::with_capacity(runs.len());
    for (s, e) in runs {
        match merged.last_mut() {
            Some(last) if s - last.1 < min_gap_samples => last.1 = e,
            _ => merged.push((s, e)),
        }
    }

    let packets = merged
        .into_iter()
        .filter(|(s, e)| e - s >= min_len_samples)
        .map(|(s, e)| {
            let seg = &power[s..e];
            Packet {
                start_sample: s,
                length_samples: e - s,
                peak_power: seg.iter().cloned().fold(0.0, f64::max),
                mean_power: seg.iter().sum::<f64>() / seg.len() as f64,
            }
        })
        .collect();
    Ok(PacketIndex {
        packets,
        noise_floor,
        degenerate: false,
    })
}

/// Centered moving average; windows are clipped at the ends.
fn moving_average(x: &[f64], window: usize) -> Vec<f64> {
    let mut prefix = Vec::with_capacity(x.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for v in x {
        acc += v;
        prefix.push(acc);
    }
    let half = window / 2;
    (0..x.len())
        .map(|k| {
            let lo = k.saturating_sub(half);
            let hi = (k + window - half).min(x.len());
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}
