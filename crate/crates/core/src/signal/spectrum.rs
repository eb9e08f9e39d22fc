use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{check_finite, fft};
use crate::error::{Error, Result};

/// Analysis window applied before a power spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    #[default]
    Hann,
    None,
}

impl Window {
    /// Symmetric window coefficients of length `len`.
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        match self {
            Window::None => vec![1.0; len],
            Window::Hann => {
                if len == 1 {
                    return vec![1.0];
                }
                let denom = (len - 1) as f64;
                (0..len)
                    .map(|n| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * n as f64 / denom).cos())
                    .collect()
            }
        }
    }
}

pub fn apply_window(x: &[f64], window: Window) -> Vec<f64> {
    x.iter()
        .zip(window.coefficients(x.len()))
        .map(|(v, w)| v * w)
        .collect()
}

/// Frequency of bin `k` in a zero-centered spectrum of `n_bins` bins.
pub fn bin_frequency_hz(k: usize, n_bins: usize, sample_rate_hz: f64) -> f64 {
    (k as f64 - (n_bins / 2) as f64) * sample_rate_hz / n_bins as f64
}

fn check_bins(x: &[f64], n_bins: usize) -> Result<()> {
    if x.is_empty() {
        return Err(Error::invalid("power spectrum of an empty sequence"));
    }
    if n_bins < 2 || n_bins % 2 != 0 {
        return Err(Error::invalid(format!(
            "n_bins must be even and >= 2, got {n_bins}"
        )));
    }
    check_finite(x)
}

/// Zero-centered |X_k|² / n², with `x` truncated or zero-padded to `n_bins`.
///
/// The bins sum to the mean square of the padded input. Bin `n_bins / 2` is DC.
pub fn power_spectrum_double_sided(x: &[f64], n_bins: usize) -> Result<Vec<f64>> {
    check_bins(x, n_bins)?;
    let mut buf: Vec<Complex64> = x
        .iter()
        .take(n_bins)
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    buf.resize(n_bins, Complex64::new(0.0, 0.0));
    fft::forward(&mut buf);
    let scale = 1.0 / (n_bins as f64 * n_bins as f64);
    let half = n_bins / 2;
    let mut out = vec![0.0; n_bins];
    for (k, v) in buf.iter().enumerate() {
        // fftshift: frequency index k lands at (k + n/2) mod n.
        out[(k + half) % n_bins] = v.norm_sqr() * scale;
    }
    // Real input: enforce exact conjugate symmetry so +f and -f agree bit-for-bit.
    for k in 1..half {
        let avg = 0.5 * (out[half + k] + out[half - k]);
        out[half + k] = avg;
        out[half - k] = avg;
    }
    Ok(out)
}

/// Zero-centered power spectrum normalized to unit sum.
///
/// An all-zero input returns all zeros.
pub fn dft_power_double_sided(x: &[f64], n_bins: usize) -> Result<Vec<f64>> {
    let mut p = power_spectrum_double_sided(x, n_bins)?;
    let total: f64 = p.iter().sum();
    if total > 0.0 {
        for v in p.iter_mut() {
            *v /= total;
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Straightforward O(n²) DFT, independent of the FFT path.
    fn naive_power(x: &[f64], n: usize) -> Vec<f64> {
        let mut padded = x.to_vec();
        padded.resize(n, 0.0);
        let mut out = vec![0.0; n];
        for k in 0..n {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, &v) in padded.iter().enumerate() {
                let ang = -2.0 * PI * (k * t % n) as f64 / n as f64;
                re += v * ang.cos();
                im += v * ang.sin();
            }
            out[(k + n / 2) % n] = (re * re + im * im) / (n * n) as f64;
        }
        out
    }

    #[test]
    fn dc_only_signal() {
        let p = dft_power_double_sided(&vec![1.0; 4096], 4096).unwrap();
        assert!((p[2048] - 1.0).abs() < 1e-12);
        let rest: f64 = p
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != 2048)
            .map(|(_, v)| v)
            .sum();
        assert!(rest < 1e-20);
    }

    #[test]
    fn bin_exact_cosine_splits_evenly() {
        let n = 1024;
        let k0 = 37;
        let x: Vec<f64> = (0..n)
            .map(|t| (2.0 * PI * k0 as f64 * t as f64 / n as f64).cos())
            .collect();
        let p = dft_power_double_sided(&x, n).unwrap();
        assert!((p[n / 2 + k0] - 0.5).abs() < 1e-12);
        assert!((p[n / 2 - k0] - 0.5).abs() < 1e-12);
        let other: f64 = p
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != n / 2 + k0 && *k != n / 2 - k0)
            .map(|(_, v)| v)
            .sum();
        assert!(other < 1e-20);
    }

    #[test]
    fn two_tone_power_ratio_matches_naive_dft() {
        let fs = 3000.0;
        let n = 4096;
        let x: Vec<f64> = (0..n)
            .map(|t| {
                let t = t as f64 / fs;
                (2.0 * PI * 100.0 * t).cos() + 0.5 * (2.0 * PI * 300.0 * t).cos()
            })
            .collect();
        let xw = apply_window(&x, Window::Hann);
        let fast = dft_power_double_sided(&xw, n).unwrap();
        let slow = naive_power(&xw, n);
        let total: f64 = slow.iter().sum();
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b / total).abs() < 1e-12);
        }
        // Band power around each positive tone, wide enough to hold the Hann lobe
        // and its near sidelobes.
        let band = |f: f64, p: &[f64]| -> f64 {
            let center = (f * n as f64 / fs).round() as usize + n / 2;
            p[center - 24..=center + 24].iter().sum()
        };
        let ratio_fast = band(100.0, &fast) / band(300.0, &fast);
        let ratio_slow = band(100.0, &slow) / band(300.0, &slow);
        assert!((ratio_slow - 4.0).abs() < 1e-6, "oracle ratio {ratio_slow}");
        assert!((ratio_fast - 4.0).abs() < 1e-6, "ratio {ratio_fast}");
    }

    #[test]
    fn zeros_in_zeros_out() {
        let p = dft_power_double_sided(&[0.0; 100], 64).unwrap();
        assert!(p.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(dft_power_double_sided(&[], 64).is_err());
        assert!(dft_power_double_sided(&[1.0, 2.0], 63).is_err());
        assert!(dft_power_double_sided(&[1.0, f64::NAN], 64).is_err());
    }

    #[test]
    fn bin_frequency_mapping() {
        assert_eq!(bin_frequency_hz(2048, 4096, 3e6), 0.0);
        assert!((bin_frequency_hz(2049, 4096, 4096.0) - 1.0).abs() < 1e-12);
        assert!((bin_frequency_hz(0, 4096, 4096.0) + 2048.0).abs() < 1e-12);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(48))]
        #[test]
        fn parseval_holds(
            x in proptest::collection::vec(-10.0f64..10.0, 1..300),
            half in 1usize..160,
        ) {
            let n = 2 * half;
            let p = power_spectrum_double_sided(&x, n).unwrap();
            let mean_sq = x.iter().take(n).map(|v| v * v).sum::<f64>() / n as f64;
            let total: f64 = p.iter().sum();
            proptest::prop_assert!((total - mean_sq).abs() <= 1e-9 * mean_sq.max(1e-300));
        }

        #[test]
        fn real_input_is_symmetric(x in proptest::collection::vec(-1.0f64..1.0, 8..256)) {
            let n = 256;
            let p = dft_power_double_sided(&x, n).unwrap();
            for k in 1..n / 2 {
                proptest::prop_assert!((p[n / 2 + k] - p[n / 2 - k]).abs() < 1e-12);
            }
            proptest::prop_assert!(p.iter().all(|&v| v >= 0.0));
        }

        #[test]
        fn repeat_calls_are_bit_identical(x in proptest::collection::vec(-1.0f64..1.0, 8..256)) {
            let a = dft_power_double_sided(&x, 128).unwrap();
            let b = dft_power_double_sided(&x, 128).unwrap();
            proptest::prop_assert_eq!(a, b);
        }
    }
}
