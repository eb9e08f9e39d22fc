//! Windowed FIR design and the linear-phase filtering helpers built on it.

use std::f64::consts::PI;

/// Stopband attenuation used for every Kaiser design in the crate.
pub const DEFAULT_ATTENUATION_DB: f64 = 80.0;

/// Modified Bessel function of the first kind, order zero (power series).
fn bessel_i0(x: f64) -> f64 {
    let y = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= y / (k as f64 * k as f64);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// Kaiser's empirical beta for a given stopband attenuation.
pub fn kaiser_beta(attenuation_db: f64) -> f64 {
    let a = attenuation_db;
    if a > 50.0 {
        0.1102 * (a - 8.7)
    } else if a >= 21.0 {
        0.5842 * (a - 21.0).powf(0.4) + 0.07886 * (a - 21.0)
    } else {
        0.0
    }
}

pub fn kaiser_window(len: usize, beta: f64) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    let m = (len - 1) as f64;
    let denom = bessel_i0(beta);
    (0..len)
        .map(|n| {
            let r = 2.0 * n as f64 / m - 1.0;
            bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / denom
        })
        .collect()
}

/// Linear-phase lowpass with unit DC gain. `cutoff` is in cycles/sample, in (0, 0.5).
pub fn lowpass(cutoff: f64, taps: usize) -> Vec<f64> {
    assert!(cutoff > 0.0 && cutoff < 0.5, "cutoff must be in (0, 0.5)");
    assert!(taps % 2 == 1, "lowpass taps must be odd");
    let window = kaiser_window(taps, kaiser_beta(DEFAULT_ATTENUATION_DB));
    let mid = (taps / 2) as f64;
    let mut h: Vec<f64> = window
        .iter()
        .enumerate()
        .map(|(n, w)| {
            let x = n as f64 - mid;
            let sinc = if x == 0.0 {
                2.0 * cutoff
            } else {
                (2.0 * PI * cutoff * x).sin() / (PI * x)
            };
            sinc * w
        })
        .collect();
    let gain: f64 = h.iter().sum();
    for v in h.iter_mut() {
        *v /= gain;
    }
    h
}

/// Type III Hilbert transformer: Kaiser-windowed 2/(πn) on odd offsets.
pub fn hilbert_taps(taps: usize) -> Vec<f64> {
    assert!(taps % 2 == 1, "hilbert taps must be odd");
    let window = kaiser_window(taps, kaiser_beta(DEFAULT_ATTENUATION_DB));
    let mid = (taps / 2) as i64;
    window
        .iter()
        .enumerate()
        .map(|(n, w)| {
            let k = n as i64 - mid;
            if k % 2 == 0 {
                0.0
            } else {
                w * 2.0 / (PI * k as f64)
            }
        })
        .collect()
}

/// Zero-delay filtering: the output is aligned with the input by compensating
/// the (taps-1)/2 group delay. Samples beyond the edges are held at the edge value.
pub fn filter_centered(x: &[f64], h: &[f64]) -> Vec<f64> {
    if x.is_empty() {
        return Vec::new();
    }
    let half = h.len() / 2;
    let first = x[0];
    let last = x[x.len() - 1];
    let mut padded = Vec::with_capacity(x.len() + 2 * half);
    padded.extend(std::iter::repeat_n(first, half));
    padded.extend_from_slice(x);
    padded.extend(std::iter::repeat_n(last, half));
    (0..x.len())
        .map(|k| dot(&padded[k..k + h.len()], h))
        .collect()
}

/// Filters and keeps every `factor`-th output, using only fully-overlapped
/// positions. Output `j` is centered on input `j * factor + (taps-1)/2`.
pub fn decimate_valid(x: &[f64], h: &[f64], factor: usize, n_out: usize) -> Vec<f64> {
    debug_assert!(n_out == 0 || (n_out - 1) * factor + h.len() <= x.len());
    (0..n_out)
        .map(|j| dot(&x[j * factor..j * factor + h.len()], h))
        .collect()
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // Four accumulators let the compiler vectorize without reassociation flags.
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for i in 0..chunks {
        let j = 4 * i;
        acc[0] += a[j] * b[j];
        acc[1] += a[j + 1] * b[j + 1];
        acc[2] += a[j + 2] * b[j + 2];
        acc[3] += a[j + 3] * b[j + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for j in 4 * chunks..a.len() {
        s += a[j] * b[j];
    }
    s
}
