//! Envelope extraction and the double-sided envelope power spectrum (EPS).
//!
//! Per component: analytic-signal magnitude, anti-alias lowpass, decimation,
//! smoothing lowpass, window-weighted DC removal, windowed power spectrum
//! normalized to unit sum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::fir::{self, decimate_valid, filter_centered, lowpass};
use crate::signal::{
    dft_power_double_sided, fir_hilbert, hilbert_analytic, IqFrame, Window, DEFAULT_MIN_FRAME_LEN,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HilbertMode {
    #[default]
    FrequencyDomain,
    Fir,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpsConfig {
    pub decimation_factor: usize,
    /// Smoothing cutoff as a fraction of the post-decimation Nyquist frequency.
    pub smoothing_cutoff_frac: f64,
    pub smoothing_taps: usize,
    pub n_bins: usize,
    pub hilbert_mode: HilbertMode,
    pub fir_taps: usize,
    pub window: Window,
    /// Lowpass at 0.45/decimation_factor of Nyquist before decimating. Disable
    /// to decimate the raw envelope directly.
    pub anti_alias: bool,
    pub anti_alias_taps: usize,
    /// Frames shorter than twice this are rejected by [`extract_eps`].
    pub min_frame_len: usize,
    /// Rows whose envelope AC power is this far below the squared reference
    /// envelope level are treated as flat.
    pub flat_threshold_db: f64,
}

impl Default for EpsConfig {
    fn default() -> Self {
        EpsConfig {
            decimation_factor: 15,
            smoothing_cutoff_frac: 0.2,
            smoothing_taps: 63,
            n_bins: 4096,
            hilbert_mode: HilbertMode::FrequencyDomain,
            fir_taps: 101,
            window: Window::Hann,
            anti_alias: true,
            anti_alias_taps: 151,
            min_frame_len: DEFAULT_MIN_FRAME_LEN,
            flat_threshold_db: -40.0,
        }
    }
}

impl EpsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.decimation_factor == 0 {
            return Err(Error::invalid("decimation_factor must be >= 1"));
        }
        if !(self.smoothing_cutoff_frac > 0.0 && self.smoothing_cutoff_frac < 0.5) {
            return Err(Error::invalid("smoothing_cutoff_frac must lie in (0, 0.5)"));
        }
        if self.n_bins < 2 || self.n_bins % 2 != 0 {
            return Err(Error::invalid(format!(
                "n_bins must be even and >= 2, got {}",
                self.n_bins
            )));
        }
        if self.smoothing_taps % 2 == 0 || (self.anti_alias && self.anti_alias_taps % 2 == 0) {
            return Err(Error::invalid("filter tap counts must be odd"));
        }
        if self.hilbert_mode == HilbertMode::Fir && self.fir_taps % 2 == 0 {
            return Err(Error::invalid("fir_taps must be odd"));
        }
        if !self.flat_threshold_db.is_finite() {
            return Err(Error::invalid("flat_threshold_db must be finite"));
        }
        Ok(())
    }

    pub fn decimated_rate_hz(&self, fs: f64) -> f64 {
        fs / self.decimation_factor as f64
    }

    pub fn bin_resolution_hz(&self, fs: f64) -> f64 {
        self.decimated_rate_hz(fs) / self.n_bins as f64
    }

    fn hilbert_trim(&self) -> usize {
        match self.hilbert_mode {
            HilbertMode::FrequencyDomain => 0,
            HilbertMode::Fir => self.fir_taps - 1,
        }
    }

    fn anti_alias_trim(&self) -> usize {
        if self.anti_alias {
            self.anti_alias_taps - 1
        } else {
            0
        }
    }

    /// Input samples lost to filter edges before decimation.
    pub fn trim(&self) -> usize {
        self.hilbert_trim() + self.anti_alias_trim()
    }

    /// Envelope length produced from `input_len` samples (before the n_bins cap).
    pub fn envelope_len(&self, input_len: usize) -> usize {
        input_len.saturating_sub(self.trim()) / self.decimation_factor
    }

    /// Shortest input whose decimated envelope reaches n_bins/4 samples.
    pub fn min_input_len(&self) -> usize {
        (self.n_bins / 4) * self.decimation_factor + self.trim()
    }

    fn max_input_len(&self) -> usize {
        self.n_bins * self.decimation_factor + self.trim()
    }

    /// Short stable digest of the configuration, recorded with feature files.
    pub fn config_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(&Sha256::digest(&json)[..8])
    }
}

/// Smoothed, decimated envelope of one real component.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub values: Vec<f64>,
    pub sample_rate_hz: f64,
    /// Time of `values[0]` relative to the first input sample.
    pub start_time_s: f64,
    /// Level against which flatness is judged; the mean envelope by default.
    pub reference_level: f64,
}

impl Envelope {
    pub fn new(values: Vec<f64>, sample_rate_hz: f64) -> Self {
        let reference_level = mean(&values);
        Envelope {
            values,
            sample_rate_hz,
            start_time_s: 0.0,
            reference_level,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time_of(&self, index: usize) -> f64 {
        self.start_time_s + index as f64 / self.sample_rate_hz
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }
}

fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        x.iter().sum::<f64>() / x.len() as f64
    }
}

/// |analytic(x)|, anti-aliased, decimated and smoothed.
pub fn extract_envelope(x: &[f64], fs: f64, cfg: &EpsConfig) -> Result<Envelope> {
    cfg.validate()?;
    if !(fs > 0.0 && fs.is_finite()) {
        return Err(Error::invalid(format!("sample rate must be > 0, got {fs}")));
    }
    let required = cfg.min_input_len();
    if x.len() < required {
        return Err(Error::TooShort {
            required,
            actual: x.len(),
        });
    }
    let x = &x[..x.len().min(cfg.max_input_len())];

    let (magnitude, first_index) = match cfg.hilbert_mode {
        HilbertMode::FrequencyDomain => {
            let z = hilbert_analytic(x)?;
            (z.iter().map(|s| s.norm()).collect::<Vec<_>>(), 0)
        }
        HilbertMode::Fir => {
            let z = fir_hilbert(x, cfg.fir_taps)?;
            let start = z.valid.start;
            (z.valid_samples().iter().map(|s| s.norm()).collect(), start)
        }
    };

    let d = cfg.decimation_factor;
    let n_out = (magnitude.len() - cfg.anti_alias_trim()) / d;
    let n_out = n_out.min(cfg.n_bins);
    let (decimated, centre_offset) = if cfg.anti_alias {
        let h = anti_alias_filter(cfg);
        (
            decimate_valid(&magnitude, &h, d, n_out),
            cfg.anti_alias_taps / 2,
        )
    } else {
        ((0..n_out).map(|j| magnitude[j * d]).collect(), 0)
    };

    let smoothing = lowpass(0.5 * cfg.smoothing_cutoff_frac, cfg.smoothing_taps);
    let mut values = filter_centered(&decimated, &smoothing);
    for v in values.iter_mut() {
        *v = v.max(0.0);
    }
    let mut env = Envelope::new(values, cfg.decimated_rate_hz(fs));
    env.start_time_s = (first_index + centre_offset) as f64 / fs;
    Ok(env)
}

/// One EPS row and whether its envelope was judged flat.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsRow {
    pub spectrum: Vec<f64>,
    pub degenerate: bool,
}

/// DC-removed, windowed, unit-sum double-sided power spectrum of an envelope.
///
/// The DC estimate is the window-weighted mean, so the windowed sequence has
/// exactly zero sum and the DC bin vanishes. Flat envelopes yield an all-zero
/// row flagged degenerate.
pub fn envelope_to_eps(env: &Envelope, cfg: &EpsConfig) -> Result<EpsRow> {
    cfg.validate()?;
    if env.values.is_empty() {
        return Err(Error::invalid("empty envelope"));
    }
    crate::signal::check_finite(&env.values)?;
    let w = cfg.window.coefficients(env.values.len());
    let wsum: f64 = w.iter().sum();
    let dc = env.values.iter().zip(&w).map(|(e, w)| e * w).sum::<f64>() / wsum;
    let windowed: Vec<f64> = env
        .values
        .iter()
        .zip(&w)
        .map(|(e, w)| (e - dc) * w)
        .collect();
    let ac_power =
        windowed.iter().map(|v| v * v).sum::<f64>() / w.iter().map(|v| v * v).sum::<f64>();
    let floor = env.reference_level.powi(2) * 10f64.powf(cfg.flat_threshold_db / 10.0);
    if ac_power <= floor {
        return Ok(EpsRow {
            spectrum: vec![0.0; cfg.n_bins],
            degenerate: true,
        });
    }
    Ok(EpsRow {
        spectrum: dft_power_double_sided(&windowed, cfg.n_bins)?,
        degenerate: false,
    })
}

/// The 2 x n_bins EPS of one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsFeature {
    pub i_spectrum: Vec<f64>,
    pub q_spectrum: Vec<f64>,
    pub bin_resolution_hz: f64,
    pub i_degenerate: bool,
    pub q_degenerate: bool,
    pub device_id: Option<String>,
    pub domain_tag: String,
}

impl EpsFeature {
    pub fn n_bins(&self) -> usize {
        self.i_spectrum.len()
    }

    /// I row followed by Q row.
    pub fn to_row(&self) -> Vec<f64> {
        let mut row = Vec::with_capacity(2 * self.n_bins());
        row.extend_from_slice(&self.i_spectrum);
        row.extend_from_slice(&self.q_spectrum);
        row
    }

    /// Frequency of bin `k` relative to DC.
    pub fn bin_frequency_hz(&self, k: usize) -> f64 {
        (k as f64 - (self.n_bins() / 2) as f64) * self.bin_resolution_hz
    }
}

/// EPS of the I and Q components of a frame, processed independently.
///
/// Flatness of each row is judged against the larger of the two mean
/// envelopes, so a component that carries only residual leakage is not
/// mistaken for a modulated one.
pub fn extract_eps(frame: &IqFrame, cfg: &EpsConfig) -> Result<EpsFeature> {
    frame.validate()?;
    cfg.validate()?;
    let required = 2 * cfg.min_frame_len;
    if frame.len() < required {
        return Err(Error::TooShort {
            required,
            actual: frame.len(),
        });
    }
    let fs = frame.sample_rate_hz;
    let wrap = |component: &'static str| {
        move |e: Error| Error::Component {
            component,
            source: Box::new(e),
        }
    };
    let mut env_i = extract_envelope(&frame.i_component(), fs, cfg).map_err(wrap("I"))?;
    let mut env_q = extract_envelope(&frame.q_component(), fs, cfg).map_err(wrap("Q"))?;
    let reference = env_i.mean().max(env_q.mean());
    env_i.reference_level = reference;
    env_q.reference_level = reference;
    let i = envelope_to_eps(&env_i, cfg).map_err(wrap("I"))?;
    let q = envelope_to_eps(&env_q, cfg).map_err(wrap("Q"))?;
    Ok(EpsFeature {
        i_spectrum: i.spectrum,
        q_spectrum: q.spectrum,
        bin_resolution_hz: cfg.bin_resolution_hz(fs),
        i_degenerate: i.degenerate,
        q_degenerate: q.degenerate,
        device_id: frame.device_id.clone(),
        domain_tag: frame.domain_tag.clone(),
    })
}

pub const DEFAULT_RAW_IQ_WINDOW: usize = 8192;

/// Raw-IQ baseline row: the first `window` I samples then the first `window`
/// Q samples, divided by the RMS magnitude over the window.
pub fn raw_iq_feature(frame: &IqFrame, window: usize) -> Result<Vec<f64>> {
    frame.validate()?;
    if window == 0 {
        return Err(Error::invalid("raw-IQ window must be > 0"));
    }
    if frame.len() < window {
        return Err(Error::TooShort {
            required: window,
            actual: frame.len(),
        });
    }
    let head = &frame.samples[..window];
    let rms = (head.iter().map(|s| s.norm_sqr()).sum::<f64>() / window as f64).sqrt();
    let scale = if rms > 0.0 { 1.0 / rms } else { 0.0 };
    let mut row = Vec::with_capacity(2 * window);
    row.extend(head.iter().map(|s| s.re * scale));
    row.extend(head.iter().map(|s| s.im * scale));
    Ok(row)
}

/// Signed offset (in bins from DC) of the largest non-DC bin. `None` for an
/// all-zero spectrum. Ties resolve to the negative-frequency side.
pub fn dominant_sideband(spectrum: &[f64]) -> Option<isize> {
    let centre = spectrum.len() / 2;
    let mut best: Option<(usize, f64)> = None;
    for (k, &v) in spectrum.iter().enumerate() {
        if k == centre {
            continue;
        }
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((k, v));
        }
    }
    match best {
        Some((k, v)) if v > 0.0 => Some(k as isize - centre as isize),
        _ => None,
    }
}

/// Ratio of the largest non-DC bin to the median non-DC bin.
pub fn peak_to_median(spectrum: &[f64]) -> f64 {
    let centre = spectrum.len() / 2;
    let mut rest: Vec<f64> = spectrum
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != centre)
        .map(|(_, v)| *v)
        .collect();
    if rest.is_empty() {
        return 0.0;
    }
    rest.sort_by(f64::total_cmp);
    let max = rest[rest.len() - 1];
    let median = rest[rest.len() / 2];
    if max == 0.0 {
        0.0
    } else {
        max / median
    }
}

/// Number of envelope humps, counted as dips through the lower band of a
/// 30%/70% hysteresis between the envelope's minimum and maximum.
///
/// Envelopes whose peak-to-peak range is under 20% of their maximum have no
/// humps.
pub fn count_humps(envelope: &[f64]) -> usize {
    let (lo_v, hi_v) = envelope
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let range = hi_v - lo_v;
    if envelope.is_empty() || !(range > 0.2 * hi_v) {
        return 0;
    }
    let lo = lo_v + 0.3 * range;
    let hi = lo_v + 0.7 * range;
    let mut armed = false;
    let mut count = 0;
    for &v in envelope {
        if v >= hi {
            armed = true;
        } else if armed && v <= lo {
            count += 1;
            armed = false;
        }
    }
    count
}

/// Anti-alias lowpass used by [`extract_envelope`], exposed for inspection.
pub fn anti_alias_filter(cfg: &EpsConfig) -> Vec<f64> {
    fir::lowpass(
        0.5 * 0.45 / cfg.decimation_factor as f64,
        cfg.anti_alias_taps,
    )
}
