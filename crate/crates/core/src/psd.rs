//! Averaged-periodogram spectral estimate (Hann window, 50% overlap).
//!
//! Bins are normalized so that unit-variance white input reads 1 in every bin, which
//! makes them directly comparable with shot-noise-normalized variances.

use std::f64::consts::PI;

use rustfft::{num_complex::Complex64, FftPlanner};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseEstimate {
    pub frequencies: Vec<f64>,
    pub psd: Vec<f64>,
    pub n_segments: usize,
    /// Relative standard error of each bin.
    pub confidence: Vec<f64>,
    /// Sample variance of the per-segment periodograms, kept for pooling.
    pub segment_variance: Vec<f64>,
    /// Lag-one correlation of consecutive segment periodograms.
    overlap_correlation: f64,
}

/// Periodic Hann window.
pub fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

/// Correlation of periodograms of two Gaussian segments offset by `hop` samples,
/// (Σ w_n w_{n+hop})² / (Σ w_n²)².
pub fn overlap_correlation(window: &[f64], hop: usize) -> f64 {
    let s2: f64 = window.iter().map(|w| w * w).sum();
    let cross: f64 = window
        .iter()
        .zip(window.iter().skip(hop))
        .map(|(a, b)| a * b)
        .sum();
    (cross / s2).powi(2)
}

fn relative_standard_error(mean: f64, variance: f64, n: usize, rho: f64) -> f64 {
    if n < 2 || mean <= 0.0 {
        return f64::INFINITY;
    }
    let nf = n as f64;
    let inflation = 1.0 + 2.0 * rho * (nf - 1.0) / nf;
    (variance * inflation / nf).sqrt() / mean
}

pub fn estimate_psd(samples: &[f64], sample_interval: f64, segment_length: usize) -> Result<NoiseEstimate> {
    if segment_length < 2 || !segment_length.is_multiple_of(2) {
        return Err(Error::invalid(
            "segment_length",
            "must be an even number of at least 2",
        ));
    }
    if samples.len() < 2 * segment_length {
        return Err(Error::TooFewSamples {
            samples: samples.len(),
            required: 2 * segment_length,
        });
    }
    if !(sample_interval > 0.0) {
        return Err(Error::invalid("sample_interval", "must be positive"));
    }
    let n = segment_length;
    let hop = n / 2;
    let window = hann(n);
    let norm: f64 = window.iter().map(|w| w * w).sum();
    let n_segments = (samples.len() - n) / hop + 1;
    let bins = n / 2 + 1;

    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let mut sum = vec![0.0; bins];
    let mut sum_sq = vec![0.0; bins];
    for seg in 0..n_segments {
        let start = seg * hop;
        for (b, (x, w)) in buf.iter_mut().zip(samples[start..start + n].iter().zip(&window)) {
            *b = Complex64::new(x * w, 0.0);
        }
        fft.process(&mut buf);
        for k in 0..bins {
            let p = buf[k].norm_sqr() / norm;
            sum[k] += p;
            sum_sq[k] += p * p;
        }
    }
    let nf = n_segments as f64;
    let psd: Vec<f64> = sum.iter().map(|s| s / nf).collect();
    let segment_variance: Vec<f64> = sum_sq
        .iter()
        .zip(&psd)
        .map(|(sq, m)| ((sq - nf * m * m) / (nf - 1.0)).max(0.0))
        .collect();
    let rho = overlap_correlation(&window, hop);
    let confidence = psd
        .iter()
        .zip(&segment_variance)
        .map(|(&m, &v)| relative_standard_error(m, v, n_segments, rho))
        .collect();
    let df = 1.0 / (n as f64 * sample_interval);
    Ok(NoiseEstimate {
        frequencies: (0..bins).map(|k| k as f64 * df).collect(),
        psd,
        n_segments,
        confidence,
        segment_variance,
        overlap_correlation: rho,
    })
}

impl NoiseEstimate {
    /// Pools independent estimates on the same frequency grid.
    pub fn pool(estimates: &[NoiseEstimate]) -> Result<NoiseEstimate> {
        let first = estimates
            .first()
            .ok_or_else(|| Error::invalid("estimates", "nothing to pool"))?;
        if estimates.iter().any(|e| e.frequencies != first.frequencies) {
            return Err(Error::invalid("estimates", "frequency grids differ"));
        }
        let total: usize = estimates.iter().map(|e| e.n_segments).sum();
        let tf = total as f64;
        let bins = first.frequencies.len();
        let mut psd = vec![0.0; bins];
        let mut var = vec![0.0; bins];
        for k in 0..bins {
            let mean = estimates
                .iter()
                .map(|e| e.n_segments as f64 * e.psd[k])
                .sum::<f64>()
                / tf;
            let within: f64 = estimates
                .iter()
                .map(|e| (e.n_segments as f64 - 1.0) * e.segment_variance[k])
                .sum();
            let between: f64 = estimates
                .iter()
                .map(|e| e.n_segments as f64 * (e.psd[k] - mean).powi(2))
                .sum();
            psd[k] = mean;
            var[k] = (within + between) / (tf - 1.0);
        }
        let rho = first.overlap_correlation;
        let confidence = psd
            .iter()
            .zip(&var)
            .map(|(&m, &v)| relative_standard_error(m, v, total, rho))
            .collect();
        Ok(NoiseEstimate {
            frequencies: first.frequencies.clone(),
            psd,
            n_segments: total,
            confidence,
            segment_variance: var,
            overlap_correlation: rho,
        })
    }

    /// Absolute standard error of each bin.
    pub fn standard_error(&self) -> Vec<f64> {
        self.psd
            .iter()
            .zip(&self.confidence)
            .map(|(p, c)| p * c)
            .collect()
    }

    /// Re-expresses the estimate in units of a shot-noise level `factor` times higher.
    pub fn normalized_by(&self, factor: f64) -> NoiseEstimate {
        let f2 = factor * factor;
        NoiseEstimate {
            psd: self.psd.iter().map(|p| p / factor).collect(),
            segment_variance: self.segment_variance.iter().map(|v| v / f2).collect(),
            ..self.clone()
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("frequency_hz,psd,std_error\n");
        for ((f, p), se) in self.frequencies.iter().zip(&self.psd).zip(self.standard_error()) {
            out.push_str(&format!("{f},{p},{se}\n"));
        }
        out
    }
}
