//! Spectral peak estimation for uniformly sampled real signals.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// Symmetric Hann taper of length `n`.
pub fn hann(n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![1.0; n];
    }
    let m = (n - 1) as f64;
    (0..n).map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / m).cos()).collect()
}

/// One-sided magnitude spectrum; `freq` is in cycles per unit of `dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub freq: Vec<f64>,
    pub magnitude: Vec<f64>,
    pub df: f64,
}

/// Mean-subtracted, Hann-tapered spectrum zero-padded to `pad` points
/// (rounded up to a power of two, at least the sample count).
pub fn spectrum(samples: &[f64], dx: f64, pad: usize) -> Spectrum {
    let n = samples.len();
    let len = pad.max(n).next_power_of_two();
    let mean = samples.iter().sum::<f64>() / n.max(1) as f64;
    let w = hann(n);
    let mut buf: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); len];
    for (i, (s, wi)) in samples.iter().zip(&w).enumerate() {
        buf[i] = Complex::new((s - mean) * wi, 0.0);
    }
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let half = len / 2 + 1;
    let df = 1.0 / (len as f64 * dx);
    Spectrum {
        freq: (0..half).map(|i| i as f64 * df).collect(),
        magnitude: buf[..half].iter().map(|c| c.norm()).collect(),
        df,
    }
}

pub fn local_maxima(mag: &[f64]) -> Vec<usize> {
    (1..mag.len().saturating_sub(1)).filter(|&i| mag[i] >= mag[i - 1] && mag[i] > mag[i + 1]).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub freq: f64,
    pub magnitude: f64,
}

/// Parabolic interpolation of the log magnitude around bin `i`.
pub fn refine(spec: &Spectrum, i: usize) -> Peak {
    let m = &spec.magnitude;
    if i == 0 || i + 1 >= m.len() || m[i - 1] <= 0.0 || m[i + 1] <= 0.0 {
        return Peak { freq: spec.freq[i], magnitude: m[i] };
    }
    let (a, b, c) = (m[i - 1].ln(), m[i].ln(), m[i + 1].ln());
    let den = a - 2.0 * b + c;
    let p = if den != 0.0 { 0.5 * (a - c) / den } else { 0.0 };
    Peak { freq: spec.freq[i] + p * spec.df, magnitude: (b - 0.25 * (a - c) * p).exp() }
}

/// The `count` largest local maxima, strongest first.
pub fn dominant_peaks(spec: &Spectrum, count: usize) -> Vec<Peak> {
    let mut idx = local_maxima(&spec.magnitude);
    idx.sort_by(|&x, &y| spec.magnitude[y].total_cmp(&spec.magnitude[x]));
    idx.into_iter().take(count).map(|i| refine(spec, i)).collect()
}

/// Share of the spectral power of a Hann-tapered, mean-free signal within
/// `half_width` of `f0`.
pub fn power_fraction(samples: &[f64], dx: f64, f0: f64, half_width: f64) -> f64 {
    let spec = spectrum(samples, dx, samples.len());
    let total: f64 = spec.magnitude.iter().map(|m| m * m).sum();
    if total == 0.0 {
        return 0.0;
    }
    let near: f64 =
        spec.freq.iter().zip(&spec.magnitude).filter(|(f, _)| (**f - f0).abs() <= half_width).map(|(_, m)| m * m).sum();
    near / total
}
