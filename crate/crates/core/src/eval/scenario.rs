use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{make_domain, ChannelConfig, ChannelPreset};
use crate::classifier::ModelSpec;
use crate::device::{make_population_with, DeviceProfile, PopulationBounds, WaveformSpec};
use crate::eps::{EpsConfig, DEFAULT_RAW_IQ_WINDOW};
use crate::error::{Error, Result};
use crate::signal::RngStream;

pub const SCENARIO_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PopulationSpec {
    pub n_devices: usize,
    pub separation_hz: f64,
    pub bounds: PopulationBounds,
}

impl Default for PopulationSpec {
    fn default() -> Self {
        PopulationSpec {
            n_devices: 15,
            separation_hz: 500.0,
            bounds: PopulationBounds::default(),
        }
    }
}

/// One capture domain: a channel preset plus when its frames are captured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub name: String,
    pub preset: ChannelPreset,
    /// Seconds after power-on of the first frame.
    #[serde(default = "default_capture_start")]
    pub capture_start_s: f64,
    /// Spacing between consecutive frames of one device.
    #[serde(default = "default_frame_interval")]
    pub frame_interval_s: f64,
    /// Overrides the preset's SNR prior.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
}

fn default_capture_start() -> f64 {
    720.0
}

fn default_frame_interval() -> f64 {
    0.005
}

impl DomainSpec {
    pub fn new(name: &str, preset: ChannelPreset) -> Self {
        DomainSpec {
            name: name.to_string(),
            preset,
            capture_start_s: default_capture_start(),
            frame_interval_s: default_frame_interval(),
            snr_db: None,
        }
    }
}

/// Warm-up experiment settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WarmupSpec {
    /// Channel preset the warm-up frames pass through.
    pub preset: ChannelPreset,
    pub train_time_s: f64,
    pub capture_times_s: Vec<f64>,
    pub frames_per_device: usize,
    /// Frames at a nominal capture time spread uniformly over this many seconds.
    pub capture_spread_s: f64,
    /// Each power-on day scales every device's warm-up gap by a factor drawn
    /// from [1 - j, 1 + j].
    pub day_jitter_frac: f64,
    /// Latest capture time the schedule allows.
    pub schedule_end_s: f64,
    /// Power-on day of the training capture.
    pub train_day: u64,
    /// Power-on day of the test captures; equal to `train_day` for same-day tests.
    pub test_day: u64,
}

impl Default for WarmupSpec {
    fn default() -> Self {
        WarmupSpec {
            preset: ChannelPreset::Wireless1m,
            train_time_s: 720.0,
            capture_times_s: vec![60.0, 240.0, 480.0, 720.0],
            frames_per_device: 200,
            capture_spread_s: 10.0,
            day_jitter_frac: 0.1,
            schedule_end_s: 3600.0,
            train_day: 0,
            test_day: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Scenario {
    pub format_version: u32,
    pub name: String,
    pub seed: u64,
    pub population: PopulationSpec,
    pub waveform: WaveformSpec,
    pub domains: Vec<DomainSpec>,
    pub frames_per_device_per_domain: usize,
    pub eps: EpsConfig,
    pub raw_iq_window: usize,
    pub classifier: ModelSpec,
    pub k_folds: usize,
    pub warmup: WarmupSpec,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            format_version: SCENARIO_FORMAT_VERSION,
            name: "default".into(),
            seed: 2024,
            population: PopulationSpec::default(),
            waveform: WaveformSpec::default(),
            domains: ChannelPreset::ALL
                .iter()
                .map(|&p| DomainSpec::new(p.as_str(), p))
                .collect(),
            frames_per_device_per_domain: 4000,
            eps: EpsConfig::default(),
            raw_iq_window: DEFAULT_RAW_IQ_WINDOW,
            classifier: ModelSpec::default(),
            k_folds: 5,
            warmup: WarmupSpec::default(),
        }
    }
}

impl Scenario {
    /// Small variant for smoke runs: 5 devices, 3 domains, 20 frames each.
    pub fn quick() -> Self {
        Scenario {
            name: "quick".into(),
            population: PopulationSpec {
                n_devices: 5,
                separation_hz: 1500.0,
                ..PopulationSpec::default()
            },
            domains: [
                ChannelPreset::Wired,
                ChannelPreset::Wireless1m,
                ChannelPreset::Random3m,
            ]
            .iter()
            .map(|&p| DomainSpec::new(p.as_str(), p))
            .collect(),
            frames_per_device_per_domain: 20,
            warmup: WarmupSpec {
                frames_per_device: 20,
                ..WarmupSpec::default()
            },
            ..Scenario::default()
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let s: Scenario = serde_json::from_slice(&bytes).map_err(|e| Error::json(path, e))?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != SCENARIO_FORMAT_VERSION {
            return Err(Error::invalid(format!(
                "unsupported scenario format_version {}",
                self.format_version
            )));
        }
        self.waveform.validate()?;
        self.eps.validate()?;
        if self.domains.is_empty() {
            return Err(Error::invalid("scenario lists no domains"));
        }
        let mut seen = HashSet::new();
        for d in &self.domains {
            if d.name.is_empty() || d.name.contains(['/', '\\']) {
                return Err(Error::invalid(format!("invalid domain name {:?}", d.name)));
            }
            if !seen.insert(d.name.as_str()) {
                return Err(Error::invalid(format!(
                    "duplicate domain name {:?}",
                    d.name
                )));
            }
            if !(d.capture_start_s >= 0.0 && d.frame_interval_s >= 0.0) {
                return Err(Error::invalid(format!(
                    "domain {:?}: capture times must be >= 0",
                    d.name
                )));
            }
        }
        if self.k_folds < 2 {
            return Err(Error::invalid("k_folds must be >= 2"));
        }
        if self.frames_per_device_per_domain < self.k_folds {
            return Err(Error::invalid(format!(
                "frames_per_device_per_domain ({}) must be >= k_folds ({})",
                self.frames_per_device_per_domain, self.k_folds
            )));
        }
        if self.raw_iq_window == 0 {
            return Err(Error::invalid("raw_iq_window must be > 0"));
        }
        let w = &self.warmup;
        if !(0.0..1.0).contains(&w.day_jitter_frac) || w.capture_spread_s < 0.0 {
            return Err(Error::invalid(
                "warm-up jitter must lie in [0, 1) and spread >= 0",
            ));
        }
        Ok(())
    }

    /// Validates warm-up capture times against the schedule.
    pub fn check_capture_times(&self, times: &[f64]) -> Result<()> {
        if times.is_empty() {
            return Err(Error::invalid("no capture times given"));
        }
        if times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("capture times must be sorted ascending"));
        }
        let end = self.warmup.schedule_end_s;
        if let Some(t) = times.iter().find(|&&t| !(0.0..=end).contains(&t)) {
            return Err(Error::invalid(format!(
                "capture time {t} s is outside the schedule [0, {end}] s"
            )));
        }
        if !(0.0..=end).contains(&self.warmup.train_time_s) {
            return Err(Error::invalid("warm-up train time is outside the schedule"));
        }
        Ok(())
    }

    pub fn root_rng(&self) -> RngStream {
        RngStream::new(self.seed, 0)
    }

    pub fn population(&self) -> Result<Vec<DeviceProfile>> {
        let mut pop = make_population_with(
            self.population.n_devices,
            self.population.separation_hz,
            &self.population.bounds,
            &self.root_rng().derive_label("population"),
        )?;
        // Listing order follows device id so outputs sort naturally.
        pop.sort_by(|a, b| a.device_id.cmp(&b.device_id));
        Ok(pop)
    }

    pub fn channel(&self, domain: &DomainSpec) -> ChannelConfig {
        let seed = self
            .root_rng()
            .derive_label("domain")
            .derive_label(&domain.name);
        let mut cfg = make_domain(&domain.name, domain.preset, &seed);
        if let Some(snr) = domain.snr_db {
            cfg.snr_db = Some(snr);
        }
        cfg
    }

    pub fn domain(&self, name: &str) -> Result<&DomainSpec> {
        self.domains
            .iter()
            .find(|d| d.name == name)
            .ok_or_else(|| Error::invalid(format!("scenario has no domain named {name:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        Scenario::default().validate().unwrap();
        Scenario::quick().validate().unwrap();
        let json = serde_json::to_string(&Scenario::default()).unwrap();
        let back: Scenario = serde_json::from_str(&json).unwrap();
        assert_eq!(back, Scenario::default());
    }

    #[test]
    fn duplicate_domains_rejected() {
        let mut s = Scenario::quick();
        s.domains.push(s.domains[0].clone());
        assert!(s.validate().is_err());
    }

    #[test]
    fn too_few_frames_rejected() {
        let mut s = Scenario::quick();
        s.frames_per_device_per_domain = 3;
        assert!(s.validate().is_err());
    }

    #[test]
    fn capture_time_bounds() {
        let s = Scenario::quick();
        s.check_capture_times(&[60.0, 720.0]).unwrap();
        assert!(s.check_capture_times(&[720.0, 60.0]).is_err());
        assert!(s.check_capture_times(&[60.0, 1e6]).is_err());
    }
}
