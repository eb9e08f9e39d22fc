use std::ops::Range;

use num_complex::Complex64;

use super::{check_finite, fft, fir, ComplexSample};
use crate::error::{Error, Result};

/// Shortest sequence accepted by [`hilbert_analytic`].
pub const MIN_HILBERT_LEN: usize = 64;

/// Analytic signal by the frequency-domain method.
///
/// Negative frequencies are zeroed and positive ones doubled; DC and (for even
/// lengths) Nyquist are kept as is. Exact for band-limited periodic input.
pub fn hilbert_analytic(x: &[f64]) -> Result<Vec<ComplexSample>> {
    if x.len() < MIN_HILBERT_LEN {
        return Err(Error::TooShort {
            required: MIN_HILBERT_LEN,
            actual: x.len(),
        });
    }
    check_finite(x)?;
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::forward(&mut buf);
    apply_analytic_mask(&mut buf);
    fft::inverse(&mut buf);
    // The real part is the input by construction; restore it exactly.
    for (z, &v) in buf.iter_mut().zip(x) {
        z.re = v;
    }
    Ok(buf)
}

pub(crate) fn apply_analytic_mask(spec: &mut [Complex64]) {
    let n = spec.len();
    let positive_end = n.div_ceil(2); // exclusive end of strictly positive bins
    for v in spec.iter_mut().take(positive_end).skip(1) {
        *v *= 2.0;
    }
    let negative_start = n / 2 + 1;
    for v in spec.iter_mut().skip(negative_start) {
        *v = Complex64::new(0.0, 0.0);
    }
}

/// Analytic signal from an FIR Hilbert transformer, with its valid region.
#[derive(Debug, Clone, PartialEq)]
pub struct FirAnalytic {
    pub samples: Vec<ComplexSample>,
    /// Indices where the filter fully overlaps the input. Samples outside this
    /// range are edge transients and should be discarded.
    pub valid: Range<usize>,
}

impl FirAnalytic {
    pub fn valid_samples(&self) -> &[ComplexSample] {
        &self.samples[self.valid.clone()]
    }
}

pub const MIN_FIR_HILBERT_TAPS: usize = 31;
pub const MAX_FIR_HILBERT_TAPS: usize = 511;

/// Analytic signal from a Kaiser-windowed type III FIR Hilbert approximation.
///
/// The filter output is compared against the real path delayed by
/// `(taps - 1) / 2` samples, so the returned sequence is time-aligned with `x`.
pub fn fir_hilbert(x: &[f64], taps: usize) -> Result<FirAnalytic> {
    if taps % 2 == 0 || !(MIN_FIR_HILBERT_TAPS..=MAX_FIR_HILBERT_TAPS).contains(&taps) {
        return Err(Error::invalid(format!(
            "FIR Hilbert taps must be odd and within {MIN_FIR_HILBERT_TAPS}..={MAX_FIR_HILBERT_TAPS}, got {taps}"
        )));
    }
    if x.len() <= taps {
        return Err(Error::TooShort {
            required: taps + 1,
            actual: x.len(),
        });
    }
    check_finite(x)?;
    let h = fir::hilbert_taps(taps);
    let delay = taps / 2;
    // Only odd offsets are nonzero; skip the zero taps.
    let odd: Vec<(usize, f64)> = h
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, v)| *v != 0.0)
        .collect();
    let n = x.len();
    let samples = (0..n)
        .map(|k| {
            let mut acc = 0.0;
            for &(m, c) in &odd {
                // Tap m multiplies x[k + delay - m]: causal output at k + delay,
                // paired with the real path delayed by `delay`.
                let idx = k as isize + delay as isize - m as isize;
                if idx >= 0 && (idx as usize) < n {
                    acc += c * x[idx as usize];
                }
            }
            Complex64::new(x[k], acc)
        })
        .collect();
    Ok(FirAnalytic {
        samples,
        valid: delay..n - delay,
    })
}
