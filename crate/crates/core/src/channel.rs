//! Capture-domain channels: sparse multipath, distance path loss and AWGN.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{ComplexSample, IqFrame, RngStream};

pub const DEFAULT_PATHLOSS_EXPONENT: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChannelPreset {
    #[serde(rename = "wired")]
    Wired,
    #[serde(rename = "wireless-1m")]
    Wireless1m,
    #[serde(rename = "wireless-2m")]
    Wireless2m,
    #[serde(rename = "wireless-3m")]
    Wireless3m,
    #[serde(rename = "random-3m")]
    Random3m,
}

impl ChannelPreset {
    pub const ALL: [ChannelPreset; 5] = [
        ChannelPreset::Wired,
        ChannelPreset::Wireless1m,
        ChannelPreset::Wireless2m,
        ChannelPreset::Wireless3m,
        ChannelPreset::Random3m,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ChannelPreset::Wired => "wired",
            ChannelPreset::Wireless1m => "wireless-1m",
            ChannelPreset::Wireless2m => "wireless-2m",
            ChannelPreset::Wireless3m => "wireless-3m",
            ChannelPreset::Random3m => "random-3m",
        }
    }

    /// Receiver SNR prior for the preset.
    pub fn default_snr_db(self) -> f64 {
        match self {
            ChannelPreset::Wired => 30.0,
            ChannelPreset::Wireless1m => 25.0,
            ChannelPreset::Wireless2m => 20.0,
            ChannelPreset::Wireless3m => 15.0,
            ChannelPreset::Random3m => 18.0,
        }
    }
}

impl fmt::Display for ChannelPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChannelPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ChannelPreset::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown channel preset {s:?} (expected one of wired, wireless-1m, wireless-2m, wireless-3m, random-3m)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tap {
    pub delay_samples: i64,
    pub gain: ComplexSample,
}

/// Per-frame redraw of distance and multipath, for receivers that move between frames.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomLocation {
    /// Distances are drawn uniformly from (min_distance_m, max_distance_m].
    pub min_distance_m: f64,
    pub max_distance_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub name: String,
    /// `None` disables noise entirely.
    pub snr_db: Option<f64>,
    pub multipath_taps: Vec<Tap>,
    pub pathloss_exponent: f64,
    pub distance_m: f64,
    pub seed: RngStream,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_location: Option<RandomLocation>,
}

impl ChannelConfig {
    /// Single unit tap, no noise, unit distance, no path loss.
    pub fn identity() -> Self {
        ChannelConfig {
            name: "identity".into(),
            snr_db: None,
            multipath_taps: vec![Tap {
                delay_samples: 0,
                gain: ComplexSample::new(1.0, 0.0),
            }],
            pathloss_exponent: 0.0,
            distance_m: 1.0,
            seed: RngStream::new(0, 0),
            random_location: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let first = self
            .multipath_taps
            .first()
            .ok_or_else(|| Error::invalid("channel needs at least one tap"))?;
        if first.delay_samples != 0 || first.gain.norm() == 0.0 {
            return Err(Error::invalid("tap 0 must have delay 0 and nonzero gain"));
        }
        if let Some(t) = self.multipath_taps.iter().find(|t| t.delay_samples < 0) {
            return Err(Error::invalid(format!(
                "non-causal tap with delay {} samples",
                t.delay_samples
            )));
        }
        if self
            .multipath_taps
            .iter()
            .any(|t| !(t.gain.re.is_finite() && t.gain.im.is_finite()))
        {
            return Err(Error::invalid("tap gains must be finite"));
        }
        if !(self.distance_m > 0.0 && self.distance_m.is_finite()) {
            return Err(Error::invalid(format!(
                "distance must be > 0, got {}",
                self.distance_m
            )));
        }
        if !(self.pathloss_exponent >= 0.0) {
            return Err(Error::invalid("pathloss exponent must be >= 0"));
        }
        if let Some(snr) = self.snr_db {
            if !snr.is_finite() {
                return Err(Error::invalid("snr_db must be finite"));
            }
        }
        if let Some(r) = self.random_location {
            if !(r.min_distance_m >= 0.0 && r.max_distance_m > r.min_distance_m) {
                return Err(Error::invalid(
                    "random location needs 0 <= min < max distance",
                ));
            }
        }
        Ok(())
    }

    /// Amplitude scale from path loss: distance^(-exponent/2).
    pub fn amplitude_scale(&self) -> f64 {
        self.distance_m.powf(-self.pathloss_exponent / 2.0)
    }

    /// The channel seen by frame `index`: a fresh noise stream, and for
    /// random-location domains a fresh distance and multipath draw.
    pub fn for_frame(&self, index: u64) -> ChannelConfig {
        let seed = self.seed.derive(index);
        let mut cfg = ChannelConfig {
            seed: seed.clone(),
            ..self.clone()
        };
        if let Some(loc) = self.random_location {
            let mut r = seed.derive_label("location");
            // 1 - U lies in (0, 1], giving a distance in (min, max].
            cfg.distance_m = loc.min_distance_m
                + (loc.max_distance_m - loc.min_distance_m) * (1.0 - r.uniform());
            cfg.multipath_taps = draw_sparse_taps(&mut r);
        }
        cfg
    }
}

/// Tap 0 with random phase plus 1 to 3 weaker echoes 1..=8 samples late, -6 to -15 dB.
fn draw_sparse_taps(r: &mut RngStream) -> Vec<Tap> {
    let phase = |r: &mut RngStream| r.uniform_range(-PI, PI);
    let mut taps = vec![Tap {
        delay_samples: 0,
        gain: ComplexSample::from_polar(1.0, phase(r)),
    }];
    let extra = 1 + r.below(3) as usize;
    let mut delays: Vec<i64> = (1..=8).collect();
    r.shuffle(&mut delays);
    let mut chosen = delays[..extra].to_vec();
    chosen.sort_unstable();
    for d in chosen {
        let db = r.uniform_range(-15.0, -6.0);
        taps.push(Tap {
            delay_samples: d,
            gain: ComplexSample::from_polar(10f64.powf(db / 20.0), phase(r)),
        });
    }
    taps
}

/// Channel configuration for a named domain.
pub fn make_domain(name: &str, preset: ChannelPreset, seed: &RngStream) -> ChannelConfig {
    let mut r = seed.derive_label("taps");
    let (distance_m, taps, random_location) = match preset {
        ChannelPreset::Wired => (
            1.0,
            vec![Tap {
                delay_samples: 0,
                gain: ComplexSample::new(1.0, 0.0),
            }],
            None,
        ),
        ChannelPreset::Wireless1m => (1.0, draw_sparse_taps(&mut r), None),
        ChannelPreset::Wireless2m => (2.0, draw_sparse_taps(&mut r), None),
        ChannelPreset::Wireless3m => (3.0, draw_sparse_taps(&mut r), None),
        ChannelPreset::Random3m => (
            3.0,
            draw_sparse_taps(&mut r),
            Some(RandomLocation {
                min_distance_m: 0.5,
                max_distance_m: 3.0,
            }),
        ),
    };
    ChannelConfig {
        name: name.to_string(),
        snr_db: Some(preset.default_snr_db()),
        multipath_taps: taps,
        pathloss_exponent: DEFAULT_PATHLOSS_EXPONENT,
        distance_m,
        seed: seed.derive_label("noise"),
        random_location,
    }
}

/// Multipath convolution, path loss, then AWGN sized against the mean
/// post-scaling signal power of the whole frame.
pub fn apply_channel(frame: &IqFrame, cfg: &ChannelConfig) -> Result<IqFrame> {
    frame.validate()?;
    cfg.validate()?;
    let scale = cfg.amplitude_scale();
    let x = &frame.samples;
    let n = x.len();
    let mut y = vec![ComplexSample::new(0.0, 0.0); n];
    for tap in &cfg.multipath_taps {
        let d = tap.delay_samples as usize;
        if d >= n {
            continue;
        }
        let g = tap.gain * scale;
        for (out, &inp) in y[d..].iter_mut().zip(x) {
            *out += g * inp;
        }
    }
    if let Some(snr_db) = cfg.snr_db {
        let signal_power = y.iter().map(|s| s.norm_sqr()).sum::<f64>() / n.max(1) as f64;
        let sigma = (signal_power / 10f64.powf(snr_db / 10.0) / 2.0).sqrt();
        if sigma > 0.0 {
            let mut r = cfg.seed.clone();
            for s in y.iter_mut() {
                let (gi, gq) = (r.gaussian(), r.gaussian());
                *s += ComplexSample::new(sigma * gi, sigma * gq);
            }
        }
    }
    Ok(IqFrame {
        samples: y,
        domain_tag: cfg.name.clone(),
        ..frame.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp_frame(n: usize) -> IqFrame {
        let samples = (0..n)
            .map(|k| ComplexSample::from_polar(1.0, 0.01 * k as f64))
            .collect();
        IqFrame::new(samples, 1e6)
    }

    #[test]
    fn identity_is_bit_exact() {
        let f = ramp_frame(1000);
        let out = apply_channel(&f, &ChannelConfig::identity()).unwrap();
        assert_eq!(out.samples, f.samples);
    }

    #[test]
    fn inverse_square_power() {
        let f = ramp_frame(1000);
        let mut cfg = ChannelConfig::identity();
        cfg.pathloss_exponent = 2.0;
        let p1 = apply_channel(&f, &cfg).unwrap().mean_power();
        cfg.distance_m = 2.0;
        let p2 = apply_channel(&f, &cfg).unwrap().mean_power();
        assert!((p2 / p1 - 0.25).abs() < 1e-6);
    }

    #[test]
    fn measured_snr_matches_target() {
        // Unit-power signal in the first half, silence in the second: noise is
        // measured on the silent half against the frame-mean signal power.
        let n = 400_000;
        let samples = (0..n)
            .map(|k| {
                if k < n / 2 {
                    ComplexSample::from_polar(1.0, 0.3 * k as f64)
                } else {
                    ComplexSample::new(0.0, 0.0)
                }
            })
            .collect();
        let f = IqFrame::new(samples, 1e6);
        let mut cfg = ChannelConfig::identity();
        cfg.snr_db = Some(10.0);
        cfg.seed = RngStream::new(5, 1);
        let out = apply_channel(&f, &cfg).unwrap();
        let noise = out.samples[n / 2..]
            .iter()
            .map(|s| s.norm_sqr())
            .sum::<f64>()
            / (n / 2) as f64;
        let measured = 10.0 * (f.mean_power() / noise).log10();
        assert!((measured - 10.0).abs() < 0.2, "measured {measured}");
    }

    #[test]
    fn rejects_bad_configs() {
        let f = ramp_frame(100);
        let mut cfg = ChannelConfig::identity();
        cfg.distance_m = 0.0;
        assert!(apply_channel(&f, &cfg).is_err());
        let mut cfg = ChannelConfig::identity();
        cfg.multipath_taps.push(Tap {
            delay_samples: -2,
            gain: ComplexSample::new(0.1, 0.0),
        });
        assert!(apply_channel(&f, &cfg).is_err());
        assert!("wireless-9m".parse::<ChannelPreset>().is_err());
    }

    #[test]
    fn presets() {
        let seed = RngStream::new(11, 0);
        let wired = make_domain("w", ChannelPreset::Wired, &seed);
        assert_eq!(
            wired.multipath_taps,
            vec![Tap {
                delay_samples: 0,
                gain: ComplexSample::new(1.0, 0.0)
            }]
        );
        assert_eq!(wired.snr_db, Some(30.0));
        for p in [
            ChannelPreset::Wireless1m,
            ChannelPreset::Wireless2m,
            ChannelPreset::Wireless3m,
        ] {
            let c = make_domain("x", p, &seed);
            assert!((2..=4).contains(&c.multipath_taps.len()));
            c.validate().unwrap();
        }
        let r = make_domain("r", ChannelPreset::Random3m, &seed);
        for i in 0..100 {
            let d = r.for_frame(i).distance_m;
            assert!(d > 0.5 && d <= 3.0);
        }
        let a = make_domain("a", ChannelPreset::Wireless2m, &RngStream::new(1, 0));
        let b = make_domain("a", ChannelPreset::Wireless2m, &RngStream::new(2, 0));
        assert_ne!(a.multipath_taps, b.multipath_taps);
    }

    #[test]
    fn preset_names_round_trip() {
        for p in ChannelPreset::ALL {
            assert_eq!(p.as_str().parse::<ChannelPreset>().unwrap(), p);
            let json = serde_json::to_string(&p).unwrap();
            assert_eq!(json, format!("\"{}\"", p.as_str()));
        }
    }
}
