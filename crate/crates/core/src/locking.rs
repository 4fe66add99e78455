//! Relative-phase error signal from the auxiliary doubling interferometer, and the
//! phase-sensitive gain of a seeded sub-threshold cavity it has to track.
//!
//! The doubled seed (field √η_d · I_seed) beats against the pump on a detector, which
//! leaves s(φ) = 2 √η_d · √I_pump · I_seed · cos(2φ − φ₀). The servo is a dither lock:
//! it demodulates ds/dφ and drives it to zero, so the lock points are the extrema of s.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LockScenario {
    pub pump_power: f64,
    pub seed_power: f64,
    pub offset_phase: f64,
    /// Single-pass doubling efficiency (1/W): P_2ω = η_d P_seed².
    pub doubling_efficiency: f64,
}

impl LockScenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.pump_power >= 0.0) || !(self.seed_power >= 0.0) {
            return Err(Error::invalid("lock", "powers must be non-negative"));
        }
        if !(self.doubling_efficiency >= 0.0) {
            return Err(Error::invalid("doubling_efficiency", "must be non-negative"));
        }
        Ok(())
    }

    pub fn doubled_power(&self) -> f64 {
        self.doubling_efficiency * self.seed_power * self.seed_power
    }

    fn amplitude(&self) -> f64 {
        2.0 * self.doubling_efficiency.sqrt() * self.pump_power.sqrt() * self.seed_power
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LockTarget {
    Amplification,
    Deamplification,
}

pub fn error_signal(sc: &LockScenario, phi: f64) -> f64 {
    sc.amplitude() * (2.0 * phi - sc.offset_phase).cos()
}

/// Error signal with an extra differential phase `noise` between the two arms.
pub fn error_signal_with_phase_noise(sc: &LockScenario, phi: f64, noise: f64) -> f64 {
    error_signal(sc, phi + noise)
}

/// ds/dφ, the demodulated dither signal.
pub fn error_signal_derivative(sc: &LockScenario, phi: f64) -> f64 {
    -2.0 * sc.amplitude() * (2.0 * phi - sc.offset_phase).sin()
}

/// Seeded intensity gain cos²φ/(1 − σ)² + sin²φ/(1 + σ)², φ = 0 amplifying.
pub fn parametric_gain(phi: f64, sigma: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&sigma) {
        return Err(Error::invalid("sigma", format!("{sigma} is not in [0, 1)")));
    }
    let (s, c) = phi.sin_cos();
    Ok(c * c / (1.0 - sigma).powi(2) + s * s / (1.0 + sigma).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LockPoint {
    /// Relative phase in [0, π).
    pub phase: f64,
    /// Slope of the demodulated error signal there; the servo polarity must oppose it.
    pub error_slope: f64,
}

/// Zero crossing of ds/dφ that sits on the requested gain extremum.
pub fn lock_point(sc: &LockScenario, target: LockTarget) -> LockPoint {
    let shift = match target {
        LockTarget::Amplification => 0.0,
        LockTarget::Deamplification => 0.5 * PI,
    };
    let phase = (0.5 * sc.offset_phase + shift).rem_euclid(PI);
    let error_slope = -4.0 * sc.amplitude() * (2.0 * phase - sc.offset_phase).cos();
    LockPoint { phase, error_slope }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub phase: f64,
    pub signal: f64,
    pub gain: f64,
}

pub fn sweep(sc: &LockScenario, sigma: f64, phases: &[f64]) -> Result<Vec<SweepRow>> {
    sc.validate()?;
    phases
        .iter()
        .map(|&phase| {
            Ok(SweepRow {
                phase,
                signal: error_signal(sc, phase),
                gain: parametric_gain(phase, sigma)?,
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("phase_rad,error_signal,parametric_gain\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.phase, r.signal, r.gain));
    }
    out
}
