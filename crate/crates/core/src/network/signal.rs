//! Signal metrics: rms, averaged-periodogram spectra, band-passed histograms.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::NetworkError;

pub fn rms(trace: &[f64]) -> f64 {
    if trace.is_empty() {
        return 0.0;
    }
    (trace.iter().map(|x| x * x).sum::<f64>() / trace.len() as f64).sqrt()
}

/// Averaged-periodogram settings. Defaults: 4096-sample Hann segments with 50 % overlap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsdSettings {
    pub segment_len: usize,
    /// Fraction of a segment shared with the next one, in `[0, 1)`.
    pub overlap: f64,
    pub window: Window,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    Hann,
    Rectangular,
}

impl Default for PsdSettings {
    fn default() -> Self {
        Self { segment_len: 4096, overlap: 0.5, window: Window::Hann }
    }
}

/// One-sided power spectral density; `Σ density · Δf` equals the variance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub frequency: Vec<f64>,
    pub density: Vec<f64>,
    /// Number of averaged segments.
    pub segments: usize,
}

impl Spectrum {
    pub fn peak_frequency(&self) -> f64 {
        let (i, _) = self
            .density
            .iter()
            .enumerate()
            .skip(1)
            .fold((0, f64::NEG_INFINITY), |a, (i, &d)| if d > a.1 { (i, d) } else { a });
        self.frequency[i]
    }

    pub fn resolution(&self) -> f64 {
        self.frequency.get(1).copied().unwrap_or(0.0)
    }
}

pub fn psd(trace: &[f64], fs: f64, settings: &PsdSettings) -> Result<Spectrum, NetworkError> {
    let n = settings.segment_len;
    if n < 2 || !(0.0..1.0).contains(&settings.overlap) {
        return Err(NetworkError::Input("segment length ≥ 2 and overlap in [0, 1) required".into()));
    }
    if trace.len() < 2 * n {
        return Err(NetworkError::Input(format!(
            "trace of {} samples is shorter than two segments of {n}",
            trace.len()
        )));
    }
    let window: Vec<f64> = match settings.window {
        Window::Hann => (0..n)
            .map(|i| 0.5 - 0.5 * (std::f64::consts::TAU * i as f64 / n as f64).cos())
            .collect(),
        Window::Rectangular => vec![1.0; n],
    };
    let w2: f64 = window.iter().map(|w| w * w).sum();
    let hop = ((n as f64 * (1.0 - settings.overlap)).round() as usize).max(1);
    let fft = FftPlanner::new().plan_fft_forward(n);
    let bins = n / 2 + 1;
    let mut acc = vec![0.0; bins];
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    let mut segments = 0;
    let mut start = 0;
    while start + n <= trace.len() {
        let seg = &trace[start..start + n];
        let mean = seg.iter().sum::<f64>() / n as f64;
        for ((b, &x), &w) in buf.iter_mut().zip(seg).zip(&window) {
            *b = Complex::new((x - mean) * w, 0.0);
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        segments += 1;
        start += hop;
    }
    let scale = 1.0 / (fs * w2 * segments as f64);
    let density = acc
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let one_sided = if k == 0 || (n.is_multiple_of(2) && k == n / 2) { 1.0 } else { 2.0 };
            p * scale * one_sided
        })
        .collect();
    let frequency = (0..bins).map(|k| k as f64 * fs / n as f64).collect();
    Ok(Spectrum { frequency, density, segments })
}

/// Zero-phase band-pass by zeroing FFT bins outside `f_center ± bandwidth/2`.
pub fn bandpass(trace: &[f64], fs: f64, f_center: f64, bandwidth: f64) -> Result<Vec<f64>, NetworkError> {
    if trace.is_empty() || bandwidth.is_nan() || bandwidth <= 0.0 || f_center.is_nan() || f_center < 0.0 {
        return Err(NetworkError::Input("band-pass needs a trace, a centre ≥ 0 and a positive width".into()));
    }
    let n = trace.len();
    let mut planner = FftPlanner::new();
    let mut buf: Vec<Complex<f64>> = trace.iter().map(|&x| Complex::new(x, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    let (lo, hi) = (f_center - 0.5 * bandwidth, f_center + 0.5 * bandwidth);
    for (k, b) in buf.iter_mut().enumerate() {
        let f = k.min(n - k) as f64 * fs / n as f64;
        if f < lo || f > hi {
            *b = Complex::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    Ok(buf.iter().map(|c| c.re / n as f64).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    /// `bins + 1` edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Histogram of the band-passed trace over `±max|x|` with `bins` equal bins.
pub fn bandpass_histogram(
    trace: &[f64],
    fs: f64,
    f_center: f64,
    bandwidth: f64,
    bins: usize,
) -> Result<Histogram, NetworkError> {
    if bins == 0 {
        return Err(NetworkError::Input("histogram needs at least one bin".into()));
    }
    let y = bandpass(trace, fs, f_center, bandwidth)?;
    let amp = y.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let amp = if amp > 0.0 { amp } else { 1.0 };
    let width = 2.0 * amp / bins as f64;
    let edges = (0..=bins).map(|i| -amp + i as f64 * width).collect();
    let mut counts = vec![0; bins];
    for x in y {
        let i = (((x + amp) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    Ok(Histogram { edges, counts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn sine(f: f64, fs: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| (std::f64::consts::TAU * f * i as f64 / fs).sin()).collect()
    }

    #[test]
    fn rms_of_sine() {
        let x = sine(200.0, 10_000.0, 10_000);
        assert!((rms(&x) - 0.5f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn sine_peak_bin() {
        let fs = 10_000.0;
        let s = psd(&sine(200.0, fs, 50_000), fs, &PsdSettings::default()).unwrap();
        assert!((s.peak_frequency() - 200.0).abs() <= s.resolution());
    }

    #[test]
    fn parseval_for_white_noise() {
        let fs = 1000.0;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let normal = Normal::new(0.0, 2.0).unwrap();
        let x: Vec<f64> = (0..200_000).map(|_| normal.sample(&mut rng)).collect();
        let settings = PsdSettings { segment_len: 256, ..Default::default() };
        let s = psd(&x, fs, &settings).unwrap();
        let level = 2.0 * 4.0 / fs;
        // bins 0 and 1 carry the removed segment mean under the Hann window
        let inner = &s.density[2..s.density.len() - 1];
        let mean = inner.iter().sum::<f64>() / inner.len() as f64;
        assert!((mean / level - 1.0).abs() < 0.02, "mean level {mean} vs {level}");
        // Welch estimates are approximately χ² with about 2K·0.9 degrees of freedom
        let dof = 2.0 * s.segments as f64 * 0.9;
        let rel_std = (2.0 / dof).sqrt();
        let outside = inner.iter().filter(|&&d| (d / level - 1.0).abs() > 5.0 * rel_std).count();
        assert_eq!(outside, 0);
    }

    #[test]
    fn short_trace_is_rejected() {
        assert!(psd(&[0.0; 100], 1000.0, &PsdSettings::default()).is_err());
    }

    #[test]
    fn sine_histogram_is_bimodal() {
        let fs = 10_000.0;
        let x = sine(200.0, fs, 50_000);
        let h = bandpass_histogram(&x, fs, 200.0, 40.0, 20).unwrap();
        let first = h.counts[0];
        let last = h.counts[19];
        let middle = h.counts[10];
        assert!(first > 3 * middle && last > 3 * middle, "{:?}", h.counts);
        assert_eq!(h.counts.iter().sum::<usize>(), x.len());
    }

    #[test]
    fn bandpass_removes_out_of_band_tone() {
        let fs = 10_000.0;
        let a = sine(200.0, fs, 10_000);
        let b = sine(1000.0, fs, 10_000);
        let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let y = bandpass(&mix, fs, 200.0, 50.0).unwrap();
        let err = y.iter().zip(&a).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
    }
}
