//! Quasi-phase-matching in a periodically poled crystal (collinear, single axis).
//!
//! Wavelengths are in metres at the API, the coefficient files use µm as the
//! dispersion literature does.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hg_modes::CavityGeometry;

const BUILTIN_KTP_Z: &str = include_str!("../data/ktp_z.toml");

/// Relative tolerance on 1/λ_p = 1/λ_s + 1/λ_i.
pub const ENERGY_TOLERANCE: f64 = 1e-6;
/// Solver target on |Δk| (rad/m).
pub const MISMATCH_TOLERANCE: f64 = 1e-3;
const WAVELENGTH_SCAN_STEP: f64 = 0.1e-9;
const TEMPERATURE_SCAN_STEP: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    pub strength: f64,
    pub resonance_um2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SellmeierModel {
    pub name: String,
    pub citation: String,
    pub wavelength_min_um: f64,
    pub wavelength_max_um: f64,
    pub temperature_min_k: f64,
    pub temperature_max_k: f64,
    pub reference_temperature_k: f64,
    pub constant: f64,
    pub thermo_optic: Vec<f64>,
    pub poles: Vec<Pole>,
}

impl SellmeierModel {
    /// The bundled KTP z-axis coefficient set.
    pub fn ktp_z() -> Self {
        Self::from_toml_str(BUILTIN_KTP_Z).expect("bundled coefficient file is valid")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let model: Self = toml::from_str(text).map_err(|e| Error::config("sellmeier", e.message()))?;
        model.validate()?;
        Ok(model)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    fn validate(&self) -> Result<()> {
        if !(self.wavelength_min_um > 0.0 && self.wavelength_min_um < self.wavelength_max_um) {
            return Err(Error::config(
                "sellmeier.wavelength_min_um",
                "empty wavelength range",
            ));
        }
        if !(self.temperature_min_k > 0.0 && self.temperature_min_k < self.temperature_max_k) {
            return Err(Error::config(
                "sellmeier.temperature_min_k",
                "empty temperature range",
            ));
        }
        let (lo, hi) = (self.wavelength_min_um.powi(2), self.wavelength_max_um.powi(2));
        // a pole inside the window would make n(λ) discontinuous
        if let Some(p) = self
            .poles
            .iter()
            .find(|p| p.resonance_um2 >= lo && p.resonance_um2 <= hi)
        {
            return Err(Error::config(
                "sellmeier.poles",
                format!("resonance at {} µm² lies inside the valid range", p.resonance_um2),
            ));
        }
        for i in 0..=100 {
            let l =
                self.wavelength_min_um + (self.wavelength_max_um - self.wavelength_min_um) * i as f64 / 100.0;
            for t in [self.temperature_min_k, self.temperature_max_k] {
                let n = self.index_um(l, t);
                if !(n > 1.0) {
                    return Err(Error::config(
                        "sellmeier",
                        format!("index {n} at {l} µm, {t} K is not above 1"),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn wavelength_range(&self) -> (f64, f64) {
        (self.wavelength_min_um * 1e-6, self.wavelength_max_um * 1e-6)
    }

    fn index_um(&self, l: f64, temperature: f64) -> f64 {
        let l2 = l * l;
        let n2 = self.constant
            + self
                .poles
                .iter()
                .map(|p| p.strength / (l2 - p.resonance_um2))
                .sum::<f64>();
        n2.sqrt() + self.thermo_optic_um(l) * (temperature - self.reference_temperature_k)
    }

    fn thermo_optic_um(&self, l: f64) -> f64 {
        self.thermo_optic
            .iter()
            .enumerate()
            .map(|(j, c)| c / l.powi(j as i32))
            .sum()
    }

    /// dn/dT (1/K) at the given wavelength.
    pub fn thermo_optic_coefficient(&self, wavelength: f64) -> f64 {
        self.thermo_optic_um(wavelength * 1e6)
    }

    fn check_range(&self, wavelength: f64, temperature: f64) -> Result<()> {
        let (lo, hi) = self.wavelength_range();
        if !(wavelength >= lo && wavelength <= hi) {
            return Err(Error::OutOfRange {
                quantity: "wavelength",
                value: wavelength,
                min: lo,
                max: hi,
            });
        }
        if !(temperature >= self.temperature_min_k && temperature <= self.temperature_max_k) {
            return Err(Error::OutOfRange {
                quantity: "temperature",
                value: temperature,
                min: self.temperature_min_k,
                max: self.temperature_max_k,
            });
        }
        Ok(())
    }
}

pub fn refractive_index(model: &SellmeierModel, wavelength: f64, temperature: f64) -> Result<f64> {
    model.check_range(wavelength, temperature)?;
    Ok(model.index_um(wavelength * 1e6, temperature))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolingSpec {
    pub poling_period: f64,
    pub crystal_length: f64,
    pub temperature: f64,
    pub pump_wavelength: f64,
}

impl PolingSpec {
    pub fn new(poling_period: f64, temperature: f64) -> Result<Self> {
        let p = Self {
            poling_period,
            crystal_length: 10e-3,
            temperature,
            pump_wavelength: 532e-9,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.poling_period > 0.0) {
            return Err(Error::invalid("poling_period", "must be positive"));
        }
        if !(self.crystal_length > 0.0) {
            return Err(Error::invalid("crystal_length", "must be positive"));
        }
        if !(self.pump_wavelength > 0.0) {
            return Err(Error::invalid("pump_wavelength", "must be positive"));
        }
        Ok(())
    }

    pub fn at_temperature(mut self, temperature: f64) -> Self {
        self.temperature = temperature;
        self
    }

    pub fn degenerate_wavelength(&self) -> f64 {
        2.0 * self.pump_wavelength
    }
}

/// Idler wavelength fixed by energy conservation.
pub fn idler_wavelength(pump: f64, signal: f64) -> f64 {
    1.0 / (1.0 / pump - 1.0 / signal)
}

/// Relative violation of 1/λ_p = 1/λ_s + 1/λ_i.
pub fn energy_mismatch(pump: f64, signal: f64, idler: f64) -> f64 {
    ((1.0 / signal + 1.0 / idler) * pump - 1.0).abs()
}

/// Δk = 2π(n_p/λ_p − n_s/λ_s − n_i/λ_i) − 2π/Λ + g (rad/m).
pub fn qpm_mismatch(
    model: &SellmeierModel,
    poling: &PolingSpec,
    signal: f64,
    idler: f64,
    gouy_correction: f64,
) -> Result<f64> {
    let lp = poling.pump_wavelength;
    let err = energy_mismatch(lp, signal, idler);
    if !(err <= ENERGY_TOLERANCE) {
        return Err(Error::EnergyConservation(err));
    }
    let t = poling.temperature;
    let k = |l: f64| -> Result<f64> { Ok(refractive_index(model, l, t)? / l) };
    Ok(2.0 * PI * (k(lp)? - k(signal)? - k(idler)?) - 2.0 * PI / poling.poling_period + gouy_correction)
}

/// Period that phase-matches degenerate down-conversion of `pump_wavelength` at `temperature`.
pub fn calibrate_poling_period(
    model: &SellmeierModel,
    pump_wavelength: f64,
    temperature: f64,
) -> Result<f64> {
    let deg = 2.0 * pump_wavelength;
    let dk = refractive_index(model, pump_wavelength, temperature)? / pump_wavelength
        - 2.0 * refractive_index(model, deg, temperature)? / deg;
    if !(dk > 0.0) {
        return Err(Error::invalid(
            "pump_wavelength",
            "no positive material mismatch to compensate",
        ));
    }
    Ok(1.0 / dk)
}

/// Wavevector offset, averaged over the crystal, that lets the pair in transverse order
/// `emit_order` resonate when the cavity is tuned for order `seed_order`.
/// Each of the two fields picks up 2Δζ per round trip and order; the total phase is wrapped
/// to (−π, π] before spreading it over the double pass of the crystal.
pub fn gouy_correction(
    cavity: &CavityGeometry,
    crystal_length: f64,
    seed_order: u32,
    emit_order: u32,
) -> f64 {
    let dn = emit_order as f64 - seed_order as f64;
    let phase = 4.0 * cavity.gouy_phase() * dn;
    let wrapped = phase - 2.0 * PI * ((phase + PI) / (2.0 * PI)).floor();
    let wrapped = if wrapped <= -PI {
        wrapped + 2.0 * PI
    } else {
        wrapped
    };
    wrapped / (2.0 * crystal_length)
}

fn bisect<F: Fn(f64) -> Result<f64>>(f: F, mut a: f64, mut b: f64, fa: f64, x_tol: f64) -> Result<f64> {
    let sa = fa.signum();
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        if fm.abs() < MISMATCH_TOLERANCE * 1e-2 || (b - a).abs() < x_tol {
            return Ok(m);
        }
        if fm.signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Signal/idler pair with Δk + g = 0 closest to degeneracy, λ_s ≤ λ_i.
pub fn solve_signal_idler(
    model: &SellmeierModel,
    poling: &PolingSpec,
    gouy_correction: f64,
) -> Result<(f64, f64)> {
    poling.validate()?;
    let lp = poling.pump_wavelength;
    let deg = poling.degenerate_wavelength();
    let f = |ls: f64| qpm_mismatch(model, poling, ls, idler_wavelength(lp, ls), gouy_correction);
    let f_deg = f(deg)?;
    if f_deg.abs() < MISMATCH_TOLERANCE {
        return Ok((deg, deg));
    }
    let (lo, hi) = model.wavelength_range();
    // both partners must stay inside the model window
    let floor = lo.max(idler_wavelength(lp, hi));
    let mut a = deg;
    let mut fa = f_deg;
    while a - WAVELENGTH_SCAN_STEP > floor {
        let b = a - WAVELENGTH_SCAN_STEP;
        let fb = f(b)?;
        if fb.signum() != fa.signum() {
            let ls = bisect(f, b, a, fb, 1e-18)?;
            return Ok((ls, idler_wavelength(lp, ls)));
        }
        a = b;
        fa = fb;
    }
    Err(Error::NoPhaseMatchedPair)
}

/// Temperature at which the degenerate pair is phase matched, scanning upward from the
/// bottom of the valid range and bisecting the first crossing.
pub fn degeneracy_temperature(
    model: &SellmeierModel,
    poling: &PolingSpec,
    gouy_correction: f64,
) -> Result<f64> {
    poling.validate()?;
    let deg = poling.degenerate_wavelength();
    let f = |t: f64| qpm_mismatch(model, &poling.at_temperature(t), deg, deg, gouy_correction);
    let mut a = model.temperature_min_k;
    let mut fa = f(a)?;
    while a < model.temperature_max_k {
        let b = (a + TEMPERATURE_SCAN_STEP).min(model.temperature_max_k);
        let fb = f(b)?;
        if fa == 0.0 {
            return Ok(a);
        }
        if fb.signum() != fa.signum() {
            return bisect(f, a, b, fa, 1e-9);
        }
        a = b;
        fa = fb;
    }
    Err(Error::NoDegeneracyCrossing)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuningPoint {
    pub temperature: f64,
    /// `None` where no pair phase-matches.
    pub pair: Option<(f64, f64)>,
    pub residual: Option<f64>,
}

pub fn tuning_curve(
    model: &SellmeierModel,
    poling: &PolingSpec,
    gouy_correction: f64,
    temperatures: &[f64],
) -> Result<Vec<TuningPoint>> {
    temperatures
        .iter()
        .map(|&t| {
            let p = poling.at_temperature(t);
            match solve_signal_idler(model, &p, gouy_correction) {
                Ok((s, i)) => Ok(TuningPoint {
                    temperature: t,
                    pair: Some((s, i)),
                    residual: Some(qpm_mismatch(model, &p, s, i, gouy_correction)?),
                }),
                Err(Error::NoPhaseMatchedPair) => Ok(TuningPoint {
                    temperature: t,
                    pair: None,
                    residual: None,
                }),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Unmatched temperatures are written with empty fields.
pub fn tuning_curve_csv(points: &[TuningPoint]) -> String {
    let mut out = String::from("temperature_k,signal_nm,idler_nm,residual_rad_per_m\n");
    for p in points {
        match (p.pair, p.residual) {
            (Some((s, i)), Some(r)) => {
                out.push_str(&format!("{},{},{},{}\n", p.temperature, s * 1e9, i * 1e9, r))
            }
            _ => out.push_str(&format!("{},,,\n", p.temperature)),
        }
    }
    out
}

/// Frequency splitting of TEM10 and TEM01 caused by a path difference between the two
/// transverse axes, as a fraction of the optical frequency times the cavity length.
pub fn transverse_splitting(cavity: &CavityGeometry, frequency: f64, path_difference: f64) -> f64 {
    frequency * path_difference / cavity.length
}
