use rayon::prelude::*;
use serde::Serialize;

use super::scenario::{DomainSpec, Scenario};
use crate::channel::{apply_channel, make_domain, ChannelConfig};
use crate::classifier::{FeatureMatrix, Representation};
use crate::device::{generate_baseband, transmit_baseband, Baseband, DeviceProfile, PayloadMode};
use crate::eps::{extract_eps, raw_iq_feature, EpsConfig};
use crate::error::{Error, Result};
use crate::signal::{IqFrame, RngStream};

/// Rows extracted per parallel batch; bounds peak memory for wide raw-IQ rows.
const BATCH_ROWS: usize = 256;

/// How a frame becomes a feature row.
#[derive(Debug, Clone, PartialEq)]
pub enum Extractor {
    Eps(EpsConfig),
    RawIq { window: usize },
}

impl Extractor {
    pub fn for_scenario(scenario: &Scenario, representation: Representation) -> Self {
        match representation {
            Representation::Eps => Extractor::Eps(scenario.eps.clone()),
            Representation::RawIq => Extractor::RawIq {
                window: scenario.raw_iq_window,
            },
        }
    }

    pub fn representation(&self) -> Representation {
        match self {
            Extractor::Eps(_) => Representation::Eps,
            Extractor::RawIq { .. } => Representation::RawIq,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Extractor::Eps(cfg) => 2 * cfg.n_bins,
            Extractor::RawIq { window } => 2 * window,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Extractor::Eps(cfg) => cfg.validate(),
            Extractor::RawIq { window } if *window == 0 => {
                Err(Error::invalid("raw-IQ window must be > 0"))
            }
            Extractor::RawIq { .. } => Ok(()),
        }
    }

    /// Digest recorded in feature files; differing settings never share a hash.
    pub fn config_hash(&self) -> String {
        match self {
            Extractor::Eps(cfg) => cfg.config_hash(),
            Extractor::RawIq { window } => {
                use sha2::{Digest, Sha256};
                #[derive(Serialize)]
                struct Raw {
                    representation: &'static str,
                    window: usize,
                }
                let json = serde_json::to_vec(&Raw {
                    representation: "raw-iq",
                    window: *window,
                })
                .expect("serializes");
                hex::encode(&Sha256::digest(&json)[..8])
            }
        }
    }

    pub fn row(&self, frame: &IqFrame) -> Result<Vec<f64>> {
        match self {
            Extractor::Eps(cfg) => Ok(extract_eps(frame, cfg)?.to_row()),
            Extractor::RawIq { window } => raw_iq_feature(frame, *window),
        }
    }

    pub fn empty_matrix(&self, sample_rate_hz: f64) -> FeatureMatrix {
        let mut m = FeatureMatrix::new(self.dim(), self.representation(), self.config_hash());
        if let Extractor::Eps(cfg) = self {
            m.bin_resolution_hz = cfg.bin_resolution_hz(sample_rate_hz);
        }
        m
    }
}

/// Extracts rows for `frames` in parallel and appends them in order.
pub fn extract_into(
    matrix: &mut FeatureMatrix,
    extractor: &Extractor,
    frames: &[IqFrame],
) -> Result<()> {
    let rows: Vec<Vec<f64>> = frames
        .par_iter()
        .map(|f| extractor.row(f))
        .collect::<Result<_>>()?;
    for (row, f) in rows.iter().zip(frames) {
        let label = f
            .device_id
            .as_deref()
            .ok_or_else(|| Error::invalid("frame has no device label"))?;
        matrix.push(row, label, &f.domain_tag)?;
    }
    Ok(())
}

/// Where and when one frame is captured.
#[derive(Debug, Clone, Copy)]
pub struct FrameSlot {
    pub device: usize,
    pub index: usize,
    pub capture_time_s: f64,
}

/// Deterministic frame source for a scenario. Every frame is a pure function
/// of the scenario, its capture condition, device and index, so frames can be
/// generated in any order and on any number of threads.
#[derive(Debug, Clone)]
pub struct FrameGenerator {
    scenario: Scenario,
    population: Vec<DeviceProfile>,
    fixed_baseband: Option<Baseband>,
    root: RngStream,
}

impl FrameGenerator {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        scenario.validate()?;
        let root = scenario.root_rng();
        let fixed_baseband = match scenario.waveform.payload_mode {
            PayloadMode::FixedZeros => Some(generate_baseband(&scenario.waveform, &root)?),
            PayloadMode::SeededRandom => None,
        };
        Ok(FrameGenerator {
            scenario: scenario.clone(),
            population: scenario.population()?,
            fixed_baseband,
            root,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn population(&self) -> &[DeviceProfile] {
        &self.population
    }

    fn transmit(&self, profile: &DeviceProfile, t: f64, rng: &RngStream) -> Result<IqFrame> {
        match &self.fixed_baseband {
            Some(bb) => transmit_baseband(profile, bb, t, rng),
            None => {
                let bb = generate_baseband(&self.scenario.waveform, rng)?;
                transmit_baseband(profile, &bb, t, rng)
            }
        }
    }

    fn received(
        &self,
        profile: &DeviceProfile,
        channel: &ChannelConfig,
        slot: FrameSlot,
        rng: &RngStream,
    ) -> Result<IqFrame> {
        let tx = self.transmit(profile, slot.capture_time_s, rng)?;
        let per_frame = channel.for_frame(((slot.device as u64) << 32) | slot.index as u64);
        apply_channel(&tx, &per_frame)
    }

    /// Capture slots of a domain in manifest order: device-major.
    pub fn domain_slots(&self, domain: &DomainSpec, frames_per_device: usize) -> Vec<FrameSlot> {
        (0..self.population.len())
            .flat_map(|device| {
                (0..frames_per_device).map(move |index| FrameSlot {
                    device,
                    index,
                    capture_time_s: domain.capture_start_s + index as f64 * domain.frame_interval_s,
                })
            })
            .collect()
    }

    pub fn domain_frame(
        &self,
        domain: &DomainSpec,
        channel: &ChannelConfig,
        slot: FrameSlot,
    ) -> Result<IqFrame> {
        let profile = &self.population[slot.device];
        let rng = self
            .root
            .derive_label("frames")
            .derive_label(&domain.name)
            .derive_label(&profile.device_id)
            .derive(slot.index as u64);
        self.received(profile, channel, slot, &rng)
    }

    /// Features of the first `frames_per_device` frames of every device in a
    /// domain, generated and extracted without touching disk.
    pub fn domain_features(
        &self,
        domain: &DomainSpec,
        frames_per_device: usize,
        extractors: &[Extractor],
    ) -> Result<Vec<FeatureMatrix>> {
        let channel = self.scenario.channel(domain);
        let slots = self.domain_slots(domain, frames_per_device);
        self.features(&slots, extractors, |slot| {
            self.domain_frame(domain, &channel, slot)
        })
    }

    /// Device profiles as they power on during warm-up `day`: the gap between
    /// initial and stable CFO is scaled by a per-day, per-device factor.
    pub fn day_population(&self, day: u64) -> Vec<DeviceProfile> {
        let jitter = self.scenario.warmup.day_jitter_frac;
        let day_rng = self.root.derive_label("day").derive(day);
        self.population
            .iter()
            .map(|p| {
                let mut r = day_rng.derive_label(&p.device_id);
                let factor = 1.0 + r.uniform_range(-jitter, jitter);
                let mut q = p.clone();
                q.cfo_initial_hz = p.cfo_stable_hz - (p.cfo_stable_hz - p.cfo_initial_hz) * factor;
                q
            })
            .collect()
    }

    /// Warm-up channel of `day`; every day re-seeds noise and redraws multipath.
    pub fn day_channel(&self, day: u64) -> ChannelConfig {
        let seed = self.root.derive_label("warmup-channel").derive(day);
        make_domain("warmup", self.scenario.warmup.preset, &seed)
    }

    /// Warm-up frames captured around `t_s` on `day`. `role` separates
    /// training and test draws at the same time; equal arguments always give
    /// identical frames.
    pub fn warmup_features(
        &self,
        day: u64,
        role: &str,
        t_s: f64,
        frames_per_device: usize,
        extractor: &Extractor,
    ) -> Result<FeatureMatrix> {
        let profiles = self.day_population(day);
        let mut channel = self.day_channel(day);
        let set_label = format!("{role}@{}", t_s.to_bits());
        channel.seed = channel.seed.derive_label(&set_label);
        let set_rng = self
            .root
            .derive_label("warmup")
            .derive(day)
            .derive_label(&set_label);
        let spread = self.scenario.warmup.capture_spread_s;
        let slots: Vec<FrameSlot> = (0..profiles.len())
            .flat_map(|device| {
                (0..frames_per_device).map(move |index| FrameSlot {
                    device,
                    index,
                    capture_time_s: t_s + spread * index as f64 / frames_per_device as f64,
                })
            })
            .collect();
        let tag = format!("warmup-{role}-{t_s}s");
        let mut out = self.features(&slots, std::slice::from_ref(extractor), |slot| {
            let profile = &profiles[slot.device];
            let rng = set_rng
                .derive_label(&profile.device_id)
                .derive(slot.index as u64);
            let mut frame = self.received(profile, &channel, slot, &rng)?;
            frame.domain_tag = tag.clone();
            Ok(frame)
        })?;
        Ok(out.remove(0))
    }

    fn features<F>(
        &self,
        slots: &[FrameSlot],
        extractors: &[Extractor],
        make: F,
    ) -> Result<Vec<FeatureMatrix>>
    where
        F: Fn(FrameSlot) -> Result<IqFrame> + Sync,
    {
        if extractors.is_empty() {
            return Err(Error::invalid("no feature extractor given"));
        }
        for e in extractors {
            e.validate()?;
        }
        let fs = self.scenario.waveform.sample_rate_hz;
        let mut out: Vec<FeatureMatrix> = extractors.iter().map(|e| e.empty_matrix(fs)).collect();
        for batch in slots.chunks(BATCH_ROWS) {
            let frames: Vec<IqFrame> = batch.par_iter().map(|&s| make(s)).collect::<Result<_>>()?;
            for (m, e) in out.iter_mut().zip(extractors) {
                extract_into(m, e, &frames)?;
            }
        }
        Ok(out)
    }
}
