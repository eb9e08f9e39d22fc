//! Synthetic transmitters: DSSS/BPSK baseband, CFO with warm-up drift, and the
//! secondary oscillator and mixer impairments.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{ComplexSample, IqFrame, RngStream};

/// Largest CFO magnitude accepted anywhere (2.4 GHz-class crystals at ~20 ppm).
pub const MAX_ABS_CFO_HZ: f64 = 50_000.0;

/// Settles to within 1% of the initial gap by 720 s (720 / ln 100 ≈ 156 s).
pub const DEFAULT_WARMUP_TAU_S: f64 = 150.0;

pub const RRC_ROLLOFF: f64 = 0.35;
const RRC_SPAN_CHIPS: usize = 6;
const RRC_TABLE_PER_CHIP: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceProfile {
    pub device_id: String,
    pub cfo_stable_hz: f64,
    pub cfo_initial_hz: f64,
    pub warmup_tau_s: f64,
    pub phase_noise_std_rad: f64,
    pub iq_gain_imbalance_db: f64,
    pub iq_phase_skew_rad: f64,
    pub dc_offset_i: f64,
    pub dc_offset_q: f64,
}

impl DeviceProfile {
    /// No impairments at all: transmit_frame returns the bare baseband.
    pub fn ideal(device_id: impl Into<String>) -> Self {
        DeviceProfile {
            device_id: device_id.into(),
            cfo_stable_hz: 0.0,
            cfo_initial_hz: 0.0,
            warmup_tau_s: DEFAULT_WARMUP_TAU_S,
            phase_noise_std_rad: 0.0,
            iq_gain_imbalance_db: 0.0,
            iq_phase_skew_rad: 0.0,
            dc_offset_i: 0.0,
            dc_offset_q: 0.0,
        }
    }

    /// Constant CFO and nothing else.
    pub fn pure_cfo(device_id: impl Into<String>, cfo_hz: f64) -> Self {
        DeviceProfile {
            cfo_stable_hz: cfo_hz,
            cfo_initial_hz: cfo_hz,
            ..DeviceProfile::ideal(device_id)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.cfo_stable_hz,
            self.cfo_initial_hz,
            self.warmup_tau_s,
            self.phase_noise_std_rad,
            self.iq_gain_imbalance_db,
            self.iq_phase_skew_rad,
            self.dc_offset_i,
            self.dc_offset_q,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "device {}: parameters must be finite",
                self.device_id
            )));
        }
        if self.cfo_stable_hz.abs() > MAX_ABS_CFO_HZ || self.cfo_initial_hz.abs() > MAX_ABS_CFO_HZ {
            return Err(Error::invalid(format!(
                "device {}: |CFO| must be <= {MAX_ABS_CFO_HZ} Hz",
                self.device_id
            )));
        }
        if self.warmup_tau_s <= 0.0 {
            return Err(Error::invalid("warmup_tau_s must be > 0"));
        }
        if self.phase_noise_std_rad < 0.0 {
            return Err(Error::invalid("phase_noise_std_rad must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PayloadMode {
    #[default]
    FixedZeros,
    SeededRandom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveformSpec {
    pub bit_rate_bps: f64,
    pub spread_chips_per_bit: usize,
    pub frame_bits: usize,
    pub sample_rate_hz: f64,
    #[serde(default)]
    pub payload_mode: PayloadMode,
}

impl Default for WaveformSpec {
    /// 1 Mbps Barker-11 DSSS, 559-bit frame (559 µs), 45 MS/s.
    fn default() -> Self {
        WaveformSpec {
            bit_rate_bps: 1e6,
            spread_chips_per_bit: 11,
            frame_bits: 559,
            sample_rate_hz: 45e6,
            payload_mode: PayloadMode::FixedZeros,
        }
    }
}

impl WaveformSpec {
    pub fn chip_rate_hz(&self) -> f64 {
        self.bit_rate_bps * self.spread_chips_per_bit as f64
    }

    pub fn duration_s(&self) -> f64 {
        self.frame_bits as f64 / self.bit_rate_bps
    }

    pub fn num_samples(&self) -> usize {
        (self.duration_s() * self.sample_rate_hz).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bit_rate_bps > 0.0 && self.bit_rate_bps.is_finite()) {
            return Err(Error::invalid("bit_rate_bps must be > 0"));
        }
        if !(self.sample_rate_hz > 0.0 && self.sample_rate_hz.is_finite()) {
            return Err(Error::invalid("sample_rate_hz must be > 0"));
        }
        if self.frame_bits == 0 {
            return Err(Error::invalid("frame_bits must be > 0"));
        }
        if barker_code(self.spread_chips_per_bit).is_none() {
            return Err(Error::invalid(format!(
                "no Barker code of length {} (use 1, 2, 3, 4, 5, 7, 11 or 13)",
                self.spread_chips_per_bit
            )));
        }
        if self.sample_rate_hz < 4.0 * self.chip_rate_hz() {
            return Err(Error::invalid(format!(
                "sample rate {} Hz is below 4x the chip rate {} Hz",
                self.sample_rate_hz,
                self.chip_rate_hz()
            )));
        }
        Ok(())
    }
}

/// Barker sequences as ±1 chips.
pub fn barker_code(len: usize) -> Option<&'static [f64]> {
    const B1: [f64; 1] = [1.0];
    const B2: [f64; 2] = [1.0, -1.0];
    const B3: [f64; 3] = [1.0, 1.0, -1.0];
    const B4: [f64; 4] = [1.0, 1.0, -1.0, 1.0];
    const B5: [f64; 5] = [1.0, 1.0, 1.0, -1.0, 1.0];
    const B7: [f64; 7] = [1.0, 1.0, 1.0, -1.0, -1.0, 1.0, -1.0];
    const B11: [f64; 11] = [1.0, 1.0, 1.0, -1.0, -1.0, -1.0, 1.0, -1.0, -1.0, 1.0, -1.0];
    const B13: [f64; 13] = [
        1.0, 1.0, 1.0, 1.0, 1.0, -1.0, -1.0, 1.0, 1.0, -1.0, 1.0, -1.0, 1.0,
    ];
    match len {
        1 => Some(&B1),
        2 => Some(&B2),
        3 => Some(&B3),
        4 => Some(&B4),
        5 => Some(&B5),
        7 => Some(&B7),
        11 => Some(&B11),
        13 => Some(&B13),
        _ => None,
    }
}

/// Root-raised-cosine impulse response, `t` in chip periods, unit energy per chip not enforced.
pub fn rrc_pulse(t: f64, beta: f64) -> f64 {
    if t.abs() < 1e-12 {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    let singular = 1.0 / (4.0 * beta);
    if beta > 0.0 && (t.abs() - singular).abs() < 1e-9 {
        let a = PI / (4.0 * beta);
        return beta / 2f64.sqrt() * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    let num = (PI * t * (1.0 - beta)).sin() + 4.0 * beta * t * (PI * t * (1.0 + beta)).cos();
    let den = PI * t * (1.0 - (4.0 * beta * t).powi(2));
    num / den
}

fn rrc_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = 2 * RRC_SPAN_CHIPS * RRC_TABLE_PER_CHIP + 1;
        (0..n)
            .map(|i| {
                let t = i as f64 / RRC_TABLE_PER_CHIP as f64 - RRC_SPAN_CHIPS as f64;
                rrc_pulse(t, RRC_ROLLOFF)
            })
            .collect()
    })
}

fn rrc_lookup(t: f64) -> f64 {
    let table = rrc_table();
    let pos = (t + RRC_SPAN_CHIPS as f64) * RRC_TABLE_PER_CHIP as f64;
    if pos <= 0.0 || pos >= (table.len() - 1) as f64 {
        return 0.0;
    }
    let i = pos as usize;
    let frac = pos - i as f64;
    table[i] + frac * (table[i + 1] - table[i])
}

/// Baseband a(t)·exp(jφ(t)) in polar form.
#[derive(Debug, Clone, PartialEq)]
pub struct Baseband {
    pub amplitude: Vec<f64>,
    pub phase: Vec<f64>,
    pub sample_rate_hz: f64,
}

impl Baseband {
    pub fn len(&self) -> usize {
        self.amplitude.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitude.is_empty()
    }

    pub fn to_complex(&self) -> Vec<ComplexSample> {
        self.amplitude
            .iter()
            .zip(&self.phase)
            .map(|(&a, &p)| ComplexSample::from_polar(a, p))
            .collect()
    }

    /// Unit amplitude, zero phase: the constant-modulus carrier-only case.
    pub fn constant(len: usize, sample_rate_hz: f64) -> Self {
        Baseband {
            amplitude: vec![1.0; len],
            phase: vec![0.0; len],
            sample_rate_hz,
        }
    }
}

/// Spread, BPSK-map and RRC-shape the payload; amplitude normalized to peak 1.
pub fn generate_baseband(spec: &WaveformSpec, rng: &RngStream) -> Result<Baseband> {
    spec.validate()?;
    let code = barker_code(spec.spread_chips_per_bit).expect("validated");
    let mut payload_rng = rng.derive_label("payload");
    let bits: Vec<f64> = (0..spec.frame_bits)
        .map(|_| match spec.payload_mode {
            PayloadMode::FixedZeros => 1.0,
            PayloadMode::SeededRandom => {
                if payload_rng.below(2) == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
        })
        .collect();
    let chips: Vec<f64> = bits
        .iter()
        .flat_map(|&b| code.iter().map(move |&c| b * c))
        .collect();

    let n = spec.num_samples();
    let samples_per_chip = spec.sample_rate_hz / spec.chip_rate_hz();
    let span = RRC_SPAN_CHIPS as isize;
    let mut s = vec![0.0; n];
    for (k, v) in s.iter_mut().enumerate() {
        // Chip m is centered at (m + 0.5) chip periods.
        let t_chips = k as f64 / samples_per_chip - 0.5;
        let centre = t_chips.round() as isize;
        let lo = (centre - span).max(0);
        let hi = (centre + span).min(chips.len() as isize - 1);
        let mut acc = 0.0;
        for m in lo..=hi {
            acc += chips[m as usize] * rrc_lookup(t_chips - m as f64);
        }
        *v = acc;
    }
    let peak = s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        for v in s.iter_mut() {
            *v /= peak;
        }
    }
    Ok(Baseband {
        amplitude: s.iter().map(|v| v.abs()).collect(),
        phase: s.iter().map(|&v| if v < 0.0 { PI } else { 0.0 }).collect(),
        sample_rate_hz: spec.sample_rate_hz,
    })
}

/// CFO after `t_since_poweron_s` seconds of warm-up.
pub fn cfo_at(profile: &DeviceProfile, t_since_poweron_s: f64) -> Result<f64> {
    if !(t_since_poweron_s >= 0.0) {
        return Err(Error::invalid(format!(
            "time since power-on must be >= 0, got {t_since_poweron_s}"
        )));
    }
    let decay = (-t_since_poweron_s / profile.warmup_tau_s).exp();
    Ok(profile.cfo_stable_hz + (profile.cfo_initial_hz - profile.cfo_stable_hz) * decay)
}

/// One frame as seen by an ideal receiver.
pub fn transmit_frame(
    profile: &DeviceProfile,
    spec: &WaveformSpec,
    t_since_poweron_s: f64,
    rng: &RngStream,
) -> Result<IqFrame> {
    let baseband = generate_baseband(spec, rng)?;
    transmit_baseband(profile, &baseband, t_since_poweron_s, rng)
}

/// [`transmit_frame`] over a precomputed baseband, so a fixed payload can be
/// generated once and reused for every frame.
pub fn transmit_baseband(
    profile: &DeviceProfile,
    baseband: &Baseband,
    t_since_poweron_s: f64,
    rng: &RngStream,
) -> Result<IqFrame> {
    profile.validate()?;
    let cfo = cfo_at(profile, t_since_poweron_s)?;
    let fs = baseband.sample_rate_hz;
    let mut noise_rng = rng.derive_label("phase-noise");
    let sigma = profile.phase_noise_std_rad;
    let gain = 10f64.powf(profile.iq_gain_imbalance_db / 20.0);
    let (skew_sin, skew_cos) = profile.iq_phase_skew_rad.sin_cos();

    let mut theta = 0.0;
    let samples = baseband
        .amplitude
        .iter()
        .zip(&baseband.phase)
        .enumerate()
        .map(|(n, (&a, &phi))| {
            if sigma > 0.0 && n > 0 {
                theta += sigma * noise_rng.gaussian();
            }
            let ang = 2.0 * PI * cfo * (n as f64 / fs) + phi + theta;
            let z = ComplexSample::from_polar(a, ang);
            // Q branch sees gain error and leaks a share of I through the skew.
            let i = z.re;
            let q = gain * (skew_cos * z.im + skew_sin * z.re);
            ComplexSample::new(i + profile.dc_offset_i, q + profile.dc_offset_q)
        })
        .collect();
    Ok(IqFrame {
        samples,
        sample_rate_hz: fs,
        center_freq_hz: 0.0,
        device_id: Some(profile.device_id.clone()),
        capture_time_s: t_since_poweron_s,
        domain_tag: String::new(),
    })
}

/// Parameter ranges for [`make_population_with`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PopulationBounds {
    pub cfo_min_hz: f64,
    pub cfo_max_hz: f64,
    /// Warm-up gap (stable minus initial CFO) is log-uniform in this range.
    pub warmup_gap_min_hz: f64,
    pub warmup_gap_max_hz: f64,
    pub warmup_tau_s: f64,
    pub max_phase_noise_std_rad: f64,
    pub max_iq_gain_imbalance_db: f64,
    pub max_iq_phase_skew_rad: f64,
    pub max_dc_offset: f64,
}

impl Default for PopulationBounds {
    fn default() -> Self {
        PopulationBounds {
            cfo_min_hz: 8_000.0,
            cfo_max_hz: 20_000.0,
            warmup_gap_min_hz: 200.0,
            warmup_gap_max_hz: 8_000.0,
            warmup_tau_s: DEFAULT_WARMUP_TAU_S,
            max_phase_noise_std_rad: 2e-5,
            max_iq_gain_imbalance_db: 1.0,
            max_iq_phase_skew_rad: 0.05,
            max_dc_offset: 0.05,
        }
    }
}

pub fn make_population(
    n: usize,
    separation_hz: f64,
    rng: &RngStream,
) -> Result<Vec<DeviceProfile>> {
    make_population_with(n, separation_hz, &PopulationBounds::default(), rng)
}

/// `n` devices with pairwise stable-CFO separation of at least `separation_hz`.
///
/// Sorted CFOs are `min + i·separation + u_(i)`, where `u_(i)` are the order
/// statistics of `n` uniform draws over the slack left after reserving the
/// separations. Devices are then listed in shuffled order.
pub fn make_population_with(
    n: usize,
    separation_hz: f64,
    bounds: &PopulationBounds,
    rng: &RngStream,
) -> Result<Vec<DeviceProfile>> {
    if n < 2 {
        return Err(Error::invalid("population needs at least 2 devices"));
    }
    if !(separation_hz > 0.0) {
        return Err(Error::invalid("separation_hz must be > 0"));
    }
    let range = bounds.cfo_max_hz - bounds.cfo_min_hz;
    let slack = range - (n - 1) as f64 * separation_hz;
    if !(slack >= 0.0) {
        return Err(Error::invalid(format!(
            "{n} devices at {separation_hz} Hz separation need {} Hz of CFO range, only {range} Hz configured",
            (n - 1) as f64 * separation_hz
        )));
    }
    if !(bounds.warmup_gap_min_hz > 0.0 && bounds.warmup_gap_max_hz >= bounds.warmup_gap_min_hz) {
        return Err(Error::invalid(
            "warm-up gap bounds must satisfy 0 < min <= max",
        ));
    }

    let mut cfo_rng = rng.derive_label("cfo");
    let mut offsets: Vec<f64> = (0..n).map(|_| cfo_rng.uniform() * slack).collect();
    offsets.sort_by(f64::total_cmp);
    let mut cfos: Vec<f64> = offsets
        .iter()
        .enumerate()
        .map(|(i, u)| bounds.cfo_min_hz + i as f64 * separation_hz + u)
        .collect();
    cfo_rng.shuffle(&mut cfos);

    // Stratified log-uniform gaps so the population spans slow and fast settlers.
    let mut gap_rng = rng.derive_label("warmup");
    let mut strata: Vec<usize> = (0..n).collect();
    gap_rng.shuffle(&mut strata);
    let log_lo = bounds.warmup_gap_min_hz.ln();
    let log_span = (bounds.warmup_gap_max_hz / bounds.warmup_gap_min_hz).ln();

    let mut imp_rng = rng.derive_label("impairments");
    let width = n.to_string().len().max(2);
    let profiles = cfos
        .into_iter()
        .zip(strata)
        .enumerate()
        .map(|(i, (cfo, stratum))| {
            let gap = (log_lo + log_span * (stratum as f64 + gap_rng.uniform()) / n as f64).exp();
            let sym = |r: &mut RngStream, m: f64| r.uniform_range(-m, m);
            DeviceProfile {
                device_id: format!("dev{:0width$}", i, width = width),
                cfo_stable_hz: cfo,
                cfo_initial_hz: cfo - gap,
                warmup_tau_s: bounds.warmup_tau_s,
                phase_noise_std_rad: imp_rng.uniform() * bounds.max_phase_noise_std_rad,
                iq_gain_imbalance_db: sym(&mut imp_rng, bounds.max_iq_gain_imbalance_db),
                iq_phase_skew_rad: sym(&mut imp_rng, bounds.max_iq_phase_skew_rad),
                dc_offset_i: sym(&mut imp_rng, bounds.max_dc_offset),
                dc_offset_q: sym(&mut imp_rng, bounds.max_dc_offset),
            }
        })
        .collect::<Vec<_>>();
    for p in &profiles {
        p.validate()?;
    }
    Ok(profiles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn autocorr(code: &[f64], lag: usize) -> f64 {
        code.iter().zip(&code[lag..]).map(|(a, b)| a * b).sum()
    }

    #[test]
    fn barker11_autocorrelation_ratio() {
        let code = barker_code(11).unwrap();
        let peak = autocorr(code, 0);
        let side = (1..11).map(|l| autocorr(code, l).abs()).fold(0.0, f64::max);
        assert_eq!(peak, 11.0);
        assert!(peak / side >= 11.0);
    }

    #[test]
    fn rrc_is_continuous_at_singularity() {
        let s = 1.0 / (4.0 * RRC_ROLLOFF);
        let at = rrc_pulse(s, RRC_ROLLOFF);
        assert!((rrc_pulse(s + 1e-6, RRC_ROLLOFF) - at).abs() < 1e-5);
        assert!((rrc_pulse(s - 1e-6, RRC_ROLLOFF) - at).abs() < 1e-5);
        // Zero-lag value from the closed form.
        assert!((rrc_pulse(0.0, 0.35) - (0.65 + 1.4 / PI)).abs() < 1e-15);
    }

    #[test]
    fn baseband_length_and_peak() {
        let spec = WaveformSpec {
            frame_bits: 1000,
            ..WaveformSpec::default()
        };
        let bb = generate_baseband(&spec, &RngStream::new(1, 0)).unwrap();
        assert_eq!(bb.len(), 45_000);
        let peak = bb.amplitude.iter().cloned().fold(0.0, f64::max);
        assert!((peak - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fixed_zero_payload_is_deterministic() {
        let spec = WaveformSpec::default();
        let a = generate_baseband(&spec, &RngStream::new(1, 0)).unwrap();
        let b = generate_baseband(&spec, &RngStream::new(99, 5)).unwrap();
        assert_eq!(a, b);
        let random = WaveformSpec {
            payload_mode: PayloadMode::SeededRandom,
            ..spec
        };
        let c = generate_baseband(&random, &RngStream::new(1, 0)).unwrap();
        let d = generate_baseband(&random, &RngStream::new(2, 0)).unwrap();
        assert_ne!(c, d);
    }

    #[test]
    fn spec_rejects_low_sample_rate() {
        let spec = WaveformSpec {
            sample_rate_hz: 40e6,
            ..WaveformSpec::default()
        };
        assert!(spec.validate().is_err());
        let spec = WaveformSpec {
            spread_chips_per_bit: 6,
            ..WaveformSpec::default()
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn cfo_drift_endpoints() {
        let mut p = DeviceProfile::pure_cfo("d", 12_000.0);
        p.cfo_initial_hz = 9_000.0;
        assert_eq!(cfo_at(&p, 0.0).unwrap(), 9_000.0);
        let late = cfo_at(&p, 100.0 * p.warmup_tau_s).unwrap();
        assert!(((late - 12_000.0) / 12_000.0).abs() < 1e-9);
        // Settled within 1% of the gap by 720 s.
        let gap = 3_000.0;
        assert!((cfo_at(&p, 720.0).unwrap() - 12_000.0).abs() < 0.01 * gap);
        assert!((cfo_at(&p, 5.0 * p.warmup_tau_s).unwrap() - 12_000.0).abs() < 0.01 * gap);
        assert!(cfo_at(&p, -1.0).is_err());
    }

    #[test]
    fn ideal_transmit_equals_baseband() {
        let spec = WaveformSpec::default();
        let rng = RngStream::new(3, 0);
        let bb = generate_baseband(&spec, &rng).unwrap();
        let frame = transmit_frame(&DeviceProfile::ideal("x"), &spec, 720.0, &rng).unwrap();
        for (a, b) in frame.samples.iter().zip(bb.to_complex()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn population_examples() {
        let rng = RngStream::new(7, 0);
        let pop = make_population(15, 500.0, &rng).unwrap();
        assert_eq!(pop.len(), 15);
        for i in 0..15 {
            for j in i + 1..15 {
                assert!((pop[i].cfo_stable_hz - pop[j].cfo_stable_hz).abs() >= 500.0 - 1e-9);
            }
        }
        assert_eq!(pop, make_population(15, 500.0, &rng).unwrap());
        let two = make_population(2, 10_000.0, &RngStream::new(8, 0)).unwrap();
        assert!((two[0].cfo_stable_hz - two[1].cfo_stable_hz).abs() >= 10_000.0);
        assert!(make_population(15, 1_000.0, &rng).is_err());
        assert!(make_population(1, 10.0, &rng).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn population_respects_bounds(seed in any::<u64>(), n in 2usize..20, sep in 10.0f64..600.0) {
            let bounds = PopulationBounds::default();
            let pop = make_population_with(n, sep, &bounds, &RngStream::new(seed, 1)).unwrap();
            let mut cfos: Vec<f64> = pop.iter().map(|p| p.cfo_stable_hz).collect();
            cfos.sort_by(f64::total_cmp);
            for w in cfos.windows(2) {
                prop_assert!(w[1] - w[0] >= sep - 1e-9);
            }
            for p in &pop {
                prop_assert!(p.cfo_stable_hz >= bounds.cfo_min_hz && p.cfo_stable_hz <= bounds.cfo_max_hz);
                let gap = p.cfo_stable_hz - p.cfo_initial_hz;
                prop_assert!(gap >= bounds.warmup_gap_min_hz * (1.0 - 1e-12));
                prop_assert!(gap <= bounds.warmup_gap_max_hz * (1.0 + 1e-12));
                prop_assert!(p.iq_gain_imbalance_db.abs() <= bounds.max_iq_gain_imbalance_db);
                prop_assert!(p.dc_offset_i.abs() <= bounds.max_dc_offset);
            }
        }

        #[test]
        fn drift_is_monotone(t1 in 0.0f64..2000.0, dt in 0.0f64..500.0, gap in -5000.0f64..5000.0) {
            let mut p = DeviceProfile::pure_cfo("d", 10_000.0);
            p.cfo_initial_hz = 10_000.0 - gap;
            let a = cfo_at(&p, t1).unwrap();
            let b = cfo_at(&p, t1 + dt).unwrap();
            // Moves toward the stable value, never past it.
            prop_assert!((b - 10_000.0).abs() <= (a - 10_000.0).abs() + 1e-9);
            prop_assert!((a - 10_000.0) * (b - 10_000.0) >= 0.0);
        }
    }
}
