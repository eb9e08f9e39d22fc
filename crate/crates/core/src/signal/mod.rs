//! Foundational sample types and numerics shared by every pipeline stage.

mod fft;
pub mod fir;
mod hilbert;
mod rng;
mod spectrum;

use serde::{Deserialize, Serialize};

pub use hilbert::{fir_hilbert, hilbert_analytic, FirAnalytic};
pub use rng::RngStream;
pub use spectrum::{
    apply_window, bin_frequency_hz, dft_power_double_sided, power_spectrum_double_sided, Window,
};

use crate::error::{Error, Result};

/// One complex baseband sample; `re` is the I amplitude, `im` the Q amplitude.
pub type ComplexSample = num_complex::Complex64;

/// Default minimum frame length unit; frames entering EPS extraction must hold
/// at least twice this many samples.
pub const DEFAULT_MIN_FRAME_LEN: usize = 8192;

/// One captured or simulated packet in complex baseband.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IqFrame {
    #[serde(skip)]
    pub samples: Vec<ComplexSample>,
    pub sample_rate_hz: f64,
    pub center_freq_hz: f64,
    pub device_id: Option<String>,
    /// Seconds since the transmitter was powered on.
    pub capture_time_s: f64,
    pub domain_tag: String,
}

impl IqFrame {
    pub fn new(samples: Vec<ComplexSample>, sample_rate_hz: f64) -> Self {
        IqFrame {
            samples,
            sample_rate_hz,
            center_freq_hz: 0.0,
            device_id: None,
            capture_time_s: 0.0,
            domain_tag: String::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    pub fn i_component(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.re).collect()
    }

    pub fn q_component(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.im).collect()
    }

    /// Mean of |s|² over the frame.
    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    /// Checks metadata and that every sample is finite.
    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate_hz > 0.0 && self.sample_rate_hz.is_finite()) {
            return Err(Error::invalid(format!(
                "sample_rate_hz must be positive, got {}",
                self.sample_rate_hz
            )));
        }
        if !(self.center_freq_hz >= 0.0) {
            return Err(Error::invalid("center_freq_hz must be >= 0"));
        }
        if !(self.capture_time_s >= 0.0) {
            return Err(Error::invalid("capture_time_s must be >= 0"));
        }
        if let Some(index) = self
            .samples
            .iter()
            .position(|s| !(s.re.is_finite() && s.im.is_finite()))
        {
            return Err(Error::NonFinite { index });
        }
        Ok(())
    }

    pub fn with_labels(mut self, device_id: Option<String>, domain_tag: impl Into<String>) -> Self {
        self.device_id = device_id;
        self.domain_tag = domain_tag.into();
        self
    }
}

/// Rejects sequences containing NaN or infinities.
pub fn check_finite(x: &[f64]) -> Result<()> {
    match x.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

/// Cosine similarity; zero vectors compare as 0.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na.sqrt() * nb.sqrt())
    }
}
