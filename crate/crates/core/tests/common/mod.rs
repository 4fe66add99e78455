#![allow(dead_code)]

use std::f64::consts::PI;

use multimode_opo::coupling::SupermodeSet;
use multimode_opo::dynamics::{steady_state, CavityParams, OperatingPoint, PumpDrive};
use multimode_opo::psd::hann;

pub fn paper_cavity() -> CavityParams {
    CavityParams::linear(0.047, 0.002, 0.017, 0.002).unwrap()
}

/// One-supermode set with Λ = 1 pumped so that σ = `sigma` (below threshold).
pub fn single_mode(sigma: f64, params: &CavityParams) -> (SupermodeSet, OperatingPoint) {
    let s = SupermodeSet {
        eigenvalues: vec![1.0],
        eigenvectors: vec![vec![1.0]],
    };
    let pump = PumpDrive::new(sigma * sigma, 1.0).unwrap();
    let op = steady_state(&pump, &s, params).unwrap();
    (s, op)
}

/// Output spectrum 1 + c/(a² + Ω²) of a quadrature relaxing at rate a.
#[derive(Debug, Clone, Copy)]
pub struct Lorentzian {
    pub a: f64,
    pub c: f64,
}

impl Lorentzian {
    /// Quadrature of a supermode with gain σ seen with efficiency η; `amplified` picks the
    /// quadrature relaxing at κ(1 − σ).
    pub fn quadrature(sigma: f64, kappa: f64, eta: f64, amplified: bool) -> Self {
        if amplified {
            Self {
                a: kappa * (1.0 - sigma),
                c: 4.0 * eta * sigma * kappa * kappa,
            }
        } else {
            Self {
                a: kappa * (1.0 + sigma),
                c: -4.0 * eta * sigma * kappa * kappa,
            }
        }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Self {
            a: self.a,
            c: self.c * factor,
        }
    }

    pub fn at(&self, omega: f64) -> f64 {
        1.0 + self.c / (self.a * self.a + omega * omega)
    }

    /// Covariance of unit-normalized box-car samples of width Δ at lag l (white part included).
    pub fn sampled_autocovariance(&self, delta: f64, lag: usize) -> f64 {
        let (a, c) = (self.a, self.c);
        let e = (-a * delta).exp_m1().abs();
        if lag == 0 {
            1.0 + (c / (2.0 * a)) * (2.0 / delta) * (delta / a - e / (a * a))
        } else {
            (c / (2.0 * a)) / delta * (-a * (lag as f64 - 1.0) * delta).exp() * e * e / (a * a)
        }
    }
}

/// Expected Hann-windowed periodogram, bins 0..=n/2, from the sampled autocovariance.
pub fn expected_periodogram(l: &Lorentzian, delta: f64, n: usize) -> Vec<f64> {
    let w = hann(n);
    let u: f64 = w.iter().map(|x| x * x).sum();
    let corr: Vec<f64> = (0..n)
        .map(|lag| (0..n - lag).map(|i| w[i] * w[i + lag]).sum())
        .collect();
    let r: Vec<f64> = (0..n).map(|lag| l.sampled_autocovariance(delta, lag)).collect();
    (0..=n / 2)
        .map(|k| {
            let mut acc = r[0] * corr[0];
            for lag in 1..n {
                acc += 2.0 * r[lag] * corr[lag] * (2.0 * PI * (k * lag) as f64 / n as f64).cos();
            }
            acc / u
        })
        .collect()
}

/// Same expectation computed in the frequency domain: the aliased, sinc²-filtered spectrum
/// of the box-car samples integrated against the window's spectral kernel.
pub fn expected_periodogram_spectral(l: &Lorentzian, delta: f64, n: usize) -> Vec<f64> {
    let w = hann(n);
    let u: f64 = w.iter().map(|x| x * x).sum();
    let aliases = 4000i64;
    let sampled = |theta: f64| -> f64 {
        let mut s = 1.0;
        for m in -aliases..=aliases {
            let om = (theta + 2.0 * PI * m as f64) / delta;
            let x = 0.5 * om * delta;
            let sinc = if x == 0.0 { 1.0 } else { x.sin() / x };
            s += (l.at(om) - 1.0) * sinc * sinc;
        }
        s
    };
    let kernel = |theta: f64| -> f64 {
        let (mut re, mut im) = (0.0, 0.0);
        for (i, wi) in w.iter().enumerate() {
            re += wi * (theta * i as f64).cos();
            im -= wi * (theta * i as f64).sin();
        }
        re * re + im * im
    };
    let grid = 4096;
    let dtheta = 2.0 * PI / grid as f64;
    let spectrum: Vec<f64> = (0..grid)
        .map(|j| sampled(-PI + (j as f64 + 0.5) * dtheta))
        .collect();
    (0..=n / 2)
        .map(|k| {
            let tk = 2.0 * PI * k as f64 / n as f64;
            let mut acc = 0.0;
            for (j, s) in spectrum.iter().enumerate() {
                let theta = -PI + (j as f64 + 0.5) * dtheta;
                acc += s * kernel(theta - tk);
            }
            acc * dtheta / (2.0 * PI) / u
        })
        .collect()
}
