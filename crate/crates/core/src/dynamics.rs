//! Mean-field operating points and analytic quadrature-noise spectra of the supermodes.
//!
//! Conventions:
//! - γ is the amplitude loss per round trip, half the total intensity loss.
//! - The intracavity pump mean is expressed in coupling units: supermode k sees the
//!   parametric gain Λ_k·b per round trip, so supermode 1 oscillates once |Λ₁ b| = γ.
//! - The pump is single pass. Above threshold the gain condition pins |b| to γ/|Λ₁|;
//!   the excess drive is converted into the oscillating supermode.
//! - Photon fluxes use the pump threshold flux N_th = P_th / (h c / λ_p) as scale.
//!   Depletion is ε|α|² with ε chosen so that every converted pump photon yields one
//!   signal and one idler photon, which gives |α|² = (4 τ N_th / γ)(r − 1).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coupling::SupermodeSet;
use crate::error::{Error, Result};
use crate::hg_modes::SPEED_OF_LIGHT;

pub const PLANCK: f64 = 6.626_070_15e-34;

/// Tolerance on σ above 1 that is attributed to rounding rather than a bad scenario.
const SIGMA_ROUNDING: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    /// Round-trip time τ (s).
    pub round_trip_time: f64,
    pub input_coupler_transmission: f64,
    pub output_coupler_transmission: f64,
    /// Passive loss per round trip (fraction of intensity).
    pub intracavity_loss: f64,
}

impl CavityParams {
    pub fn new(
        round_trip_time: f64,
        input_coupler_transmission: f64,
        output_coupler_transmission: f64,
        intracavity_loss: f64,
    ) -> Result<Self> {
        if !(round_trip_time > 0.0 && round_trip_time.is_finite()) {
            return Err(Error::invalid("round_trip_time", "must be positive"));
        }
        for (name, v) in [
            ("input_coupler_transmission", input_coupler_transmission),
            ("output_coupler_transmission", output_coupler_transmission),
            ("intracavity_loss", intracavity_loss),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::invalid(name, format!("{v} is not in (0, 1)")));
            }
        }
        let p = Self {
            round_trip_time,
            input_coupler_transmission,
            output_coupler_transmission,
            intracavity_loss,
        };
        if p.gamma() >= 1.0 {
            return Err(Error::invalid("cavity", "total loss too large for a resonator"));
        }
        Ok(p)
    }

    /// Linear cavity of the given geometric length.
    pub fn linear(length: f64, t_in: f64, t_out: f64, loss: f64) -> Result<Self> {
        Self::new(2.0 * length / SPEED_OF_LIGHT, t_in, t_out, loss)
    }

    /// γ = (T_in + T_out + loss) / 2
    pub fn gamma(&self) -> f64 {
        0.5 * (self.input_coupler_transmission + self.output_coupler_transmission + self.intracavity_loss)
    }

    /// Field decay rate γ/τ (1/s).
    pub fn decay_rate(&self) -> f64 {
        self.gamma() / self.round_trip_time
    }

    pub fn escape_efficiency(&self) -> f64 {
        self.output_coupler_transmission / (2.0 * self.gamma())
    }

    /// Accepts a quoted finesse if it lies within 2% of the derived one.
    pub fn check_finesse(&self, quoted: f64) -> Result<()> {
        let derived = derive_cavity_figures(self).finesse;
        if ((derived - quoted) / quoted).abs() > 0.02 {
            return Err(Error::invalid(
                "finesse",
                format!("quoted {quoted} differs from derived {derived:.1} by more than 2%"),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityFigures {
    pub finesse: f64,
    pub escape_efficiency: f64,
    /// Full width at half maximum (Hz).
    pub bandwidth_fwhm: f64,
}

pub fn derive_cavity_figures(params: &CavityParams) -> CavityFigures {
    let g = params.gamma();
    CavityFigures {
        finesse: 2.0 * PI / (2.0 * g),
        escape_efficiency: params.escape_efficiency(),
        bandwidth_fwhm: g / (PI * params.round_trip_time),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpDrive {
    /// Input pump power (W).
    pub power: f64,
    /// Pump phase (rad).
    pub phase: f64,
    /// Power at which supermode 1 reaches threshold (W).
    pub threshold_power_ref: f64,
    /// Pump vacuum wavelength (m).
    pub wavelength: f64,
}

impl PumpDrive {
    pub fn new(power: f64, threshold_power_ref: f64) -> Result<Self> {
        let p = Self {
            power,
            phase: 0.0,
            threshold_power_ref,
            wavelength: 532e-9,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn with_wavelength(mut self, wavelength: f64) -> Self {
        self.wavelength = wavelength;
        self
    }

    pub fn at_power(mut self, power: f64) -> Result<Self> {
        self.power = power;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.power >= 0.0 && self.power.is_finite()) {
            return Err(Error::invalid("pump.power", "must be non-negative"));
        }
        if !(self.threshold_power_ref > 0.0) {
            return Err(Error::invalid("pump.threshold", "must be positive"));
        }
        if !(self.wavelength > 0.0) {
            return Err(Error::invalid("pump.wavelength", "must be positive"));
        }
        Ok(())
    }

    /// r = √(P / P_th)
    pub fn pump_parameter(&self) -> f64 {
        (self.power / self.threshold_power_ref).sqrt()
    }

    /// Pump photon flux at threshold (1/s).
    pub fn threshold_photon_flux(&self) -> f64 {
        self.threshold_power_ref * self.wavelength / (PLANCK * SPEED_OF_LIGHT)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Below,
    At,
    Above,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    /// Intracavity pump mean in coupling units (|b| = γ/|Λ₁| at and above threshold).
    pub intracavity_pump_mean: Complex64,
    /// Supermode-1 intracavity amplitude; |α|² is a photon number.
    pub oscillating_amplitude: Complex64,
    pub regime: Regime,
    pub pump_parameter: f64,
    pub threshold_photon_flux: f64,
}

impl OperatingPoint {
    /// Pump photons removed per second by down-conversion.
    pub fn converted_pump_flux(&self) -> f64 {
        match self.regime {
            Regime::Above => {
                let r = self.pump_parameter;
                let n = self.threshold_photon_flux;
                // β_out = (2 − r)√N_th for the single-pass depleted pump
                r * r * n - (2.0 - r).powi(2) * n
            }
            _ => 0.0,
        }
    }

    /// Signal plus idler photons leaving the cavity per second through all loss channels.
    pub fn generated_signal_flux(&self, params: &CavityParams) -> f64 {
        2.0 * params.gamma() * self.oscillating_amplitude.norm_sqr() / params.round_trip_time
    }

    /// Supermode-1 power through the output coupler (W).
    pub fn external_signal_power(&self, params: &CavityParams, signal_wavelength: f64) -> f64 {
        params.escape_efficiency() * self.generated_signal_flux(params) * PLANCK * SPEED_OF_LIGHT
            / signal_wavelength
    }
}

/// Intracavity photon number per unit of (r − 1) above threshold: κ = 4 τ N_th / γ.
pub fn oscillation_scale(pump: &PumpDrive, params: &CavityParams) -> f64 {
    4.0 * params.round_trip_time * pump.threshold_photon_flux() / params.gamma()
}

pub fn steady_state(pump: &PumpDrive, s: &SupermodeSet, params: &CavityParams) -> Result<OperatingPoint> {
    pump.validate()?;
    if s.is_empty() || s.leading() == 0.0 {
        return Err(Error::InconsistentOperatingPoint(
            "leading supermode has zero coupling".into(),
        ));
    }
    let lead = s.leading();
    let r = pump.pump_parameter();
    let clamp = params.gamma() / lead.abs();
    let phase = Complex64::from_polar(1.0, pump.phase);
    let regime = if r < 1.0 {
        Regime::Below
    } else if r == 1.0 {
        Regime::At
    } else {
        Regime::Above
    };
    let (pump_mean, amplitude) = match regime {
        Regime::Below | Regime::At => (phase * (r * clamp), Complex64::new(0.0, 0.0)),
        Regime::Above => {
            let n = oscillation_scale(pump, params) * (r - 1.0);
            // the oscillating field sits on the amplified axis of supermode 1
            let axis = 0.5 * pump.phase + if lead > 0.0 { 0.0 } else { 0.5 * PI };
            (phase * clamp, Complex64::from_polar(n.sqrt(), axis))
        }
    };
    Ok(OperatingPoint {
        intracavity_pump_mean: pump_mean,
        oscillating_amplitude: amplitude,
        regime,
        pump_parameter: r,
        threshold_photon_flux: pump.threshold_photon_flux(),
    })
}

/// Normalized parametric gain σ_k = |Λ_k b| / γ and its sign (which quadrature is amplified).
pub fn supermode_gain(
    k: usize,
    s: &SupermodeSet,
    op: &OperatingPoint,
    params: &CavityParams,
) -> Result<(f64, f64)> {
    let lam = s.eigenvalue(k)?;
    if k == 0 && op.regime == Regime::Above {
        return Err(Error::InconsistentOperatingPoint(
            "supermode 1 oscillates above threshold; its fluctuations are not modeled".into(),
        ));
    }
    let mut sigma = (lam * op.intracavity_pump_mean.norm()).abs() / params.gamma();
    if sigma > 1.0 + SIGMA_ROUNDING {
        return Err(Error::InconsistentOperatingPoint(format!(
            "supermode {} has sigma = {sigma} > 1",
            k + 1
        )));
    }
    sigma = sigma.min(1.0);
    let sign = if lam >= 0.0 { 1.0 } else { -1.0 };
    Ok((sigma, sign))
}

/// (v_min, v_max) at normalized analysis frequency x = Ωτ/γ.
pub fn lorentzian_variances(sigma: f64, efficiency: f64, x: f64) -> (f64, f64) {
    let x2 = x * x;
    let v_min = 1.0 - efficiency * 4.0 * sigma / ((1.0 + sigma).powi(2) + x2);
    let v_max = 1.0 + efficiency * 4.0 * sigma / ((1.0 - sigma).powi(2) + x2);
    (v_min, v_max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SqueezingSpectrum {
    pub supermode_index: usize,
    pub frequencies: Vec<f64>,
    pub v_min: Vec<f64>,
    pub v_max: Vec<f64>,
    pub squeezed_quadrature_angle: f64,
    pub sigma: f64,
    pub efficiency: f64,
}

impl SqueezingSpectrum {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("frequency_hz,v_min,v_max,v_min_db,v_max_db\n");
        for ((f, a), b) in self.frequencies.iter().zip(&self.v_min).zip(&self.v_max) {
            out.push_str(&format!("{f},{a},{b},{},{}\n", to_db(*a), to_db(*b)));
        }
        out
    }
}

pub fn to_db(v: f64) -> f64 {
    10.0 * v.log10()
}

pub fn quadrature_spectrum(
    k: usize,
    s: &SupermodeSet,
    op: &OperatingPoint,
    params: &CavityParams,
    detection_efficiency: f64,
    frequencies: &[f64],
) -> Result<SqueezingSpectrum> {
    if !(detection_efficiency > 0.0 && detection_efficiency <= 1.0) {
        return Err(Error::invalid("detection_efficiency", "must be in (0, 1]"));
    }
    let (sigma, sign) = supermode_gain(k, s, op, params)?;
    let eta = params.escape_efficiency() * detection_efficiency;
    let scale = params.round_trip_time / params.gamma();
    let (v_min, v_max) = frequencies
        .iter()
        .map(|f| lorentzian_variances(sigma, eta, 2.0 * PI * f * scale))
        .unzip();
    let pump_phase = op.intracavity_pump_mean.arg();
    let angle = (0.5 * pump_phase + if sign > 0.0 { 0.5 * PI } else { 0.0 }).rem_euclid(PI);
    Ok(SqueezingSpectrum {
        supermode_index: k,
        frequencies: frequencies.to_vec(),
        v_min,
        v_max,
        squeezed_quadrature_angle: angle,
        sigma,
        efficiency: eta,
    })
}

/// Zero-frequency squeezed variance reached at threshold, ((|Λ_k| − |Λ₁|)/(|Λ_k| + |Λ₁|))².
pub fn threshold_variance(k: usize, s: &SupermodeSet) -> Result<f64> {
    let lead = s.leading().abs();
    if lead == 0.0 {
        return Err(Error::invalid("supermodes", "leading eigenvalue is zero"));
    }
    let lk = s.eigenvalue(k)?.abs();
    Ok(((lk - lead) / (lk + lead)).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub power: f64,
    pub pump_mean: f64,
    pub regime: Regime,
    pub v_min: f64,
}

/// Zero-frequency v_min of supermode k over a pump-power grid; below-threshold rows allowed.
pub fn threshold_scan(
    k: usize,
    powers: &[f64],
    pump: &PumpDrive,
    s: &SupermodeSet,
    params: &CavityParams,
    detection_efficiency: f64,
) -> Result<Vec<ScanRow>> {
    powers
        .iter()
        .map(|&p| {
            let drive = pump.at_power(p)?;
            let op = steady_state(&drive, s, params)?;
            let spec = quadrature_spectrum(k, s, &op, params, detection_efficiency, &[0.0])?;
            Ok(ScanRow {
                power: p,
                pump_mean: op.intracavity_pump_mean.norm(),
                regime: op.regime,
                v_min: spec.v_min[0],
            })
        })
        .collect()
}

/// Like [`threshold_scan`] but every power must be at or above the supermode-1 threshold.
pub fn clamping_scan(
    k: usize,
    powers: &[f64],
    pump: &PumpDrive,
    s: &SupermodeSet,
    params: &CavityParams,
    detection_efficiency: f64,
) -> Result<Vec<ScanRow>> {
    if k == 0 {
        return Err(Error::InconsistentOperatingPoint(
            "clamping applies to non-oscillating supermodes only".into(),
        ));
    }
    if let Some(&p) = powers.iter().find(|&&p| p < pump.threshold_power_ref) {
        return Err(Error::invalid(
            "powers",
            format!("{p} W is below the threshold {} W", pump.threshold_power_ref),
        ));
    }
    threshold_scan(k, powers, pump, s, params, detection_efficiency)
}

/// Result of matching two zero-frequency squeezing levels with one pump parameter and one
/// efficiency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairFit {
    pub pump_parameter: f64,
    pub efficiency: f64,
    pub detection_scalar: f64,
}

/// Finds r < 1 and a total efficiency such that the supermode with σ = r shows
/// `dominant_db` of squeezing and the one with σ = ratio·r shows `weaker_db` at f = 0.
/// `known_efficiency` is the product of the efficiencies that are not fitted.
pub fn fit_squeezing_pair(
    dominant_db: f64,
    weaker_db: f64,
    ratio: f64,
    known_efficiency: f64,
) -> Result<PairFit> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::invalid("ratio", "must be in (0, 1)"));
    }
    let excess = |db: f64| 1.0 - 10f64.powf(-db / 10.0);
    let target = excess(dominant_db) / excess(weaker_db);
    // excess ratio between the two supermodes as a function of r, decreasing from 1/ratio
    let g = |r: f64| (1.0 + ratio * r).powi(2) / (ratio * (1.0 + r).powi(2));
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if !(target < g(lo) && target > g(hi)) {
        return Err(Error::invalid(
            "squeezing pair",
            "levels cannot be matched by a single below-threshold pump parameter",
        ));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = 0.5 * (lo + hi);
    let efficiency = excess(dominant_db) * (1.0 + r).powi(2) / (4.0 * r);
    Ok(PairFit {
        pump_parameter: r,
        efficiency,
        detection_scalar: efficiency / known_efficiency,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::{diagonalize, CouplingMatrix};

    fn paper_cavity() -> CavityParams {
        CavityParams::linear(0.047, 0.002, 0.017, 0.002).unwrap()
    }

    fn supermodes(ratios: &[f64]) -> SupermodeSet {
        diagonalize(&CouplingMatrix::diagonal(ratios).unwrap()).unwrap()
    }

    #[test]
    fn cavity_figures() {
        let f = derive_cavity_figures(&paper_cavity());
        assert!((f.finesse - 299.0).abs() < 1.0, "{}", f.finesse);
        assert!((f.escape_efficiency - 0.81).abs() < 0.005);
        assert!((f.bandwidth_fwhm - 10.7e6).abs() < 0.1e6);
        assert!(paper_cavity().check_finesse(300.0).is_ok());
        assert!(paper_cavity().check_finesse(400.0).is_err());
    }

    #[test]
    fn fractions_validated() {
        assert!(CavityParams::linear(0.047, 0.0, 0.017, 0.002).is_err());
        assert!(CavityParams::linear(0.047, 0.002, 1.2, 0.002).is_err());
    }

    #[test]
    fn no_pump_is_vacuum() {
        let s = supermodes(&[1.0, 0.64]);
        let pump = PumpDrive::new(0.0, 0.25).unwrap();
        let op = steady_state(&pump, &s, &paper_cavity()).unwrap();
        assert_eq!(op.intracavity_pump_mean.norm(), 0.0);
        assert_eq!(op.regime, Regime::Below);
        let sp = quadrature_spectrum(1, &s, &op, &paper_cavity(), 1.0, &[0.0, 1e6, 1e8]).unwrap();
        assert!(sp.v_min.iter().chain(&sp.v_max).all(|&v| v == 1.0));
    }

    #[test]
    fn clamping_onset_and_above() {
        let params = paper_cavity();
        let s = supermodes(&[0.8, 0.5]);
        let clamp = params.gamma() / 0.8;
        let at = steady_state(&PumpDrive::new(0.25, 0.25).unwrap(), &s, &params).unwrap();
        assert_eq!(at.regime, Regime::At);
        assert!((at.intracavity_pump_mean.norm() - clamp).abs() <= 1e-15 * clamp);
        assert_eq!(at.oscillating_amplitude.norm(), 0.0);
        let pump = PumpDrive::new(1.0, 0.25).unwrap();
        let above = steady_state(&pump, &s, &params).unwrap();
        assert_eq!(above.regime, Regime::Above);
        assert!((above.intracavity_pump_mean.norm() - clamp).abs() <= 1e-15 * clamp);
        let kappa = oscillation_scale(&pump, &params);
        assert!((above.oscillating_amplitude.norm_sqr() - kappa).abs() < 1e-9 * kappa);
    }

    #[test]
    fn spectrum_closed_forms() {
        let (v, _) = lorentzian_variances(1.0, 1.0, 0.0);
        assert_eq!(v, 0.0);
        let (v, _) = lorentzian_variances(0.5, 1.0, 0.0);
        assert!((v - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn threshold_variance_cases() {
        let s = supermodes(&[1.0, 1.0, 0.64, 0.0]);
        assert_eq!(threshold_variance(1, &s).unwrap(), 0.0);
        assert!((threshold_variance(2, &s).unwrap() - (0.36f64 / 1.64).powi(2)).abs() < 1e-15);
        assert!((threshold_variance(2, &s).unwrap() - 0.0482).abs() < 1e-4);
        assert_eq!(threshold_variance(3, &s).unwrap(), 1.0);
    }

    #[test]
    fn oscillating_supermode_rejected_above_threshold() {
        let params = paper_cavity();
        let s = supermodes(&[1.0, 0.64]);
        let op = steady_state(&PumpDrive::new(0.5, 0.25).unwrap(), &s, &params).unwrap();
        assert!(matches!(
            quadrature_spectrum(0, &s, &op, &params, 1.0, &[0.0]),
            Err(Error::InconsistentOperatingPoint(_))
        ));
    }

    #[test]
    fn sigma_above_one_rejected() {
        let params = paper_cavity();
        let s = supermodes(&[1.0, 0.5]);
        let mut op = steady_state(&PumpDrive::new(0.2, 0.25).unwrap(), &s, &params).unwrap();
        op.intracavity_pump_mean *= 3.0;
        assert!(matches!(
            quadrature_spectrum(0, &s, &op, &params, 1.0, &[0.0]),
            Err(Error::InconsistentOperatingPoint(_))
        ));
    }

    #[test]
    fn squeezed_angle_follows_sign() {
        let params = paper_cavity();
        let s = supermodes(&[1.0, -0.5]);
        let op = steady_state(&PumpDrive::new(0.1, 0.25).unwrap(), &s, &params).unwrap();
        let a = quadrature_spectrum(0, &s, &op, &params, 1.0, &[0.0]).unwrap();
        let b = quadrature_spectrum(1, &s, &op, &params, 1.0, &[0.0]).unwrap();
        assert!((a.squeezed_quadrature_angle - 0.5 * PI).abs() < 1e-15);
        assert_eq!(b.squeezed_quadrature_angle, 0.0);
    }

    #[test]
    fn clamping_scan_rejects_below_threshold_points() {
        let params = paper_cavity();
        let s = supermodes(&[1.0, 0.64]);
        let pump = PumpDrive::new(0.25, 0.25).unwrap();
        assert!(clamping_scan(1, &[0.1, 0.3], &pump, &s, &params, 1.0).is_err());
        let degenerate = supermodes(&[1.0, 1.0]);
        let rows = clamping_scan(1, &[0.25], &pump, &degenerate, &params, 1.0).unwrap();
        assert!((rows[0].v_min - (1.0 - params.escape_efficiency())).abs() < 1e-15);
    }

    #[test]
    fn pair_fit_recovers_levels() {
        let fit = fit_squeezing_pair(1.5, 1.0, 0.64, 0.81 * 0.98 * 0.98).unwrap();
        assert!(fit.pump_parameter > 0.0 && fit.pump_parameter < 1.0);
        let (v1, _) = lorentzian_variances(fit.pump_parameter, fit.efficiency, 0.0);
        let (v2, _) = lorentzian_variances(0.64 * fit.pump_parameter, fit.efficiency, 0.0);
        assert!((-to_db(v1) - 1.5).abs() < 1e-9);
        assert!((-to_db(v2) - 1.0).abs() < 1e-9);
        assert!(fit_squeezing_pair(3.0, 0.5, 0.64, 0.8).is_err());
    }
}
